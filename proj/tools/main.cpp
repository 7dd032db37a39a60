// Copyright 2026 SQS Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sqs/sqs.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  std::optional<std::int64_t> seed;
  std::string kernel_mode;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
  auto* opt = cmd->add_option("--config", flags.config_path, "run config JSON file");
  if (config_required) opt->required();
  cmd->add_option("--out-dir", flags.out_dir, "output directory (overrides config)");
  cmd->add_option("--threads", flags.threads,
                  "worker thread cap (overrides config and SQS_THREADS)");
  cmd->add_option("--seed", flags.seed, "evolution master seed (overrides config)");
  cmd->add_option("--kernel-mode", flags.kernel_mode,
                  "kernel mode: exact or shots:<n> (overrides config)");
}

// Flag > config file > default.
sqs::RunConfig resolve_config(const CommonFlags& flags) {
  sqs::RunConfig cfg = flags.config_path.empty() ? sqs::RunConfig{}
                                                 : sqs::load_run_config(flags.config_path);
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.threads > 0) cfg.threads = flags.threads;
  if (flags.seed) cfg.evolution.master_seed = static_cast<std::uint64_t>(*flags.seed);
  if (!flags.kernel_mode.empty())
    cfg.kernel_mode = sqs::KernelMode::parse(flags.kernel_mode);
  return cfg;
}

unsigned effective_threads(const sqs::RunConfig& cfg) {
  return sqs::resolve_threads(cfg.threads);
}

int cmd_gen_data(const std::string& spec_path, std::int64_t seed,
                 const std::string& out_path) {
  const nlohmann::json spec = sqs::load_json_file(spec_path);
  const sqs::Dataset ds = sqs::synth_generate(spec, static_cast<std::uint64_t>(seed));
  if (const fs::path parent = fs::path(out_path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  sqs::save_csv(ds, out_path);

  const std::string canonical = spec.dump() + "#" + std::to_string(seed);
  char digest[20];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(
                    sqs::fnv1a(canonical.data(), canonical.size())));
  sqs::write_json_file(out_path + ".json",
                       nlohmann::json{{"generator", spec},
                                      {"seed", seed},
                                      {"rows", ds.rows()},
                                      {"columns", ds.cols()},
                                      {"positives", sqs::count_positives(ds.labels)},
                                      {"config_digest", digest}});
  std::cout << "wrote " << ds.rows() << " rows to " << out_path << "\n";
  return 0;
}

int cmd_preprocess(const CommonFlags& flags) {
  const sqs::RunConfig cfg = resolve_config(flags);
  const sqs::Dataset data = sqs::load_input_data(cfg);
  auto [train, test] = sqs::stratified_split(data, cfg.split.train_fraction, cfg.split.seed);
  const sqs::ReductionModel model = sqs::fit_reduction(
      train, cfg.reduction.top_k, cfg.reduction.out_dim, cfg.reduction.bins);
  const sqs::Dataset train_reduced = sqs::apply_reduction(model, train);
  const sqs::Dataset test_reduced = sqs::apply_reduction(model, test);

  fs::create_directories(cfg.output_dir);
  const std::string digest = sqs::config_digest(cfg);
  nlohmann::json model_json = model;
  model_json["config_digest"] = digest;
  sqs::write_json_file(cfg.output_dir + "/reduction.json", model_json);
  sqs::save_csv(train_reduced, cfg.output_dir + "/train_reduced.csv");
  sqs::save_csv(test_reduced, cfg.output_dir + "/test_reduced.csv");
  sqs::write_json_file(cfg.output_dir + "/preprocess_summary.json",
                       nlohmann::json{{"config_digest", digest},
                                      {"train_rows", train_reduced.rows()},
                                      {"test_rows", test_reduced.rows()},
                                      {"rejected_rows", data.rejected_rows},
                                      {"selected_columns", model.selected_names},
                                      {"out_dim", model.output_dim()}});
  std::cout << "reduced " << train_reduced.rows() << " train / " << test_reduced.rows()
            << " test rows to " << model.output_dim() << " columns in " << cfg.output_dir
            << "\n";
  return 0;
}

int cmd_search(const CommonFlags& flags, bool dry_run) {
  const sqs::RunConfig cfg = resolve_config(flags);
  if (dry_run) {
    nlohmann::json resolved = sqs::run_config_to_json(cfg);
    resolved["config_digest"] = sqs::config_digest(cfg);
    std::cout << resolved.dump(2) << "\n";
    return 0;
  }
  const unsigned threads = effective_threads(cfg);
  const sqs::SearchOutcome outcome = sqs::run_search(cfg, threads);
  sqs::write_evolution_outputs(cfg.output_dir, cfg, outcome);
  std::cout << "best fitness " << outcome.report.best_fitness << ", alignment "
            << outcome.report.best_alignment << " (" << outcome.report.stop_reason
            << "); outputs in " << cfg.output_dir << "\n";
  return 0;
}

std::vector<double> parse_c_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size() || !(v > 0.0))
      throw sqs::ConfigError("--c-grid entries must be positive numbers, got \"" + item +
                             "\"");
    grid.push_back(v);
  }
  if (grid.empty()) throw sqs::ConfigError("--c-grid must list at least one value");
  return grid;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& fm_path,
                 const std::string& train_path, const std::string& test_path,
                 const std::vector<std::string>& baselines,
                 const std::string& import_path, const std::string& export_gram,
                 const std::string& export_model, const std::string& out_path,
                 const std::string& c_grid) {
  sqs::RunConfig cfg = resolve_config(flags);
  if (!c_grid.empty()) cfg.svm.c_grid = parse_c_grid(c_grid);
  const unsigned threads = effective_threads(cfg);

  const sqs::FeatureMap fm = sqs::feature_map_from_json(sqs::load_json_file(fm_path));
  const sqs::Dataset train =
      sqs::load_csv(train_path, cfg.data.label_column, cfg.data.positive_label);
  const sqs::Dataset test =
      sqs::load_csv(test_path, cfg.data.label_column, cfg.data.positive_label);

  sqs::EvaluationResult result =
      sqs::evaluate_models(fm, train, test, cfg.svm, cfg.kernel_mode, cfg.shot_seed,
                           baselines, threads);

  if (!import_path.empty()) {
    for (const sqs::ImportedScore& s : sqs::load_imported_scores(import_path)) {
      sqs::EvaluationRow row;
      row.model = s.model;
      row.auc_value = s.auc_value;
      row.imported = true;
      result.rows.push_back(row);
    }
  }

  if (!export_model.empty()) {
    const sqs::GramMatrix k = sqs::build_train_gram(fm, train.features, cfg.kernel_mode,
                                                    cfg.shot_seed, threads);
    sqs::SvmConfig svm_cfg = cfg.svm.svm;
    svm_cfg.C = sqs::select_c(cfg.svm.c_grid, k, train, cfg.svm.svm, 0xc5e1ec7ULL);
    const sqs::TrainedModel model = sqs::train_precomputed(k, train.labels, svm_cfg);
    nlohmann::json model_json = model;
    model_json["config_digest"] = sqs::config_digest(cfg);
    sqs::write_json_file(export_model, model_json);
  }

  if (!export_gram.empty()) {
    const sqs::GramMatrix k = sqs::build_train_gram(fm, train.features, cfg.kernel_mode,
                                                    cfg.shot_seed, threads);
    std::vector<std::string> ids(train.rows());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "s" + std::to_string(i);
    sqs::GramExportInfo info;
    info.feature_map = fm;
    info.exact = cfg.kernel_mode.exact;
    if (!cfg.kernel_mode.exact) {
      info.shots = cfg.kernel_mode.shots;
      info.seed = cfg.shot_seed;
    }
    sqs::write_gram_csv(export_gram, k, ids, info);
  }

  nlohmann::json metrics{{"config_digest", sqs::config_digest(cfg)},
                         {"kernel_mode", cfg.kernel_mode.to_string()},
                         {"train_size", result.train_size},
                         {"test_size", result.test_size},
                         {"rows", result.rows},
                         {"decision_values", result.decision_values}};
  if (!cfg.kernel_mode.exact) metrics["shot_seed"] = cfg.shot_seed;

  if (!out_path.empty()) {
    if (const fs::path parent = fs::path(out_path).parent_path(); !parent.empty())
      fs::create_directories(parent);
    sqs::write_json_file(out_path, metrics);
  }
  std::vector<std::pair<std::string, std::vector<sqs::EvaluationRow>>> sections{
      {"", result.rows}};
  std::cout << sqs::render_table(sections);
  return 0;
}

int cmd_bench(const CommonFlags& flags, bool scaling, const std::string& import_path,
              double train_fraction) {
  const sqs::RunConfig cfg = resolve_config(flags);
  const unsigned threads = effective_threads(cfg);
  sqs::BenchmarkReport report = scaling
                                    ? sqs::scaling_bench(cfg, threads)
                                    : sqs::generalization_bench(cfg, threads, train_fraction);

  if (!import_path.empty()) {
    for (const sqs::ImportedScore& s : sqs::load_imported_scores(import_path)) {
      for (sqs::ScenarioResult& scenario : report.scenarios) {
        if (s.scenario && *s.scenario != scenario.name) continue;
        sqs::EvaluationRow row;
        row.model = s.model;
        row.auc_value = s.auc_value;
        row.imported = true;
        scenario.rows.push_back(row);
      }
    }
  }

  fs::create_directories(cfg.output_dir);
  nlohmann::json report_json = report;
  sqs::write_json_file(cfg.output_dir + "/benchmark_report.json", report_json);
  if (scaling) sqs::write_benchmark_csv(report, cfg.output_dir + "/scaling_auc.csv");

  std::vector<std::pair<std::string, std::vector<sqs::EvaluationRow>>> sections;
  for (const sqs::ScenarioResult& s : report.scenarios)
    sections.emplace_back("scenario " + s.name + " (train " + std::to_string(s.train_size) +
                              ", test " + std::to_string(s.test_size) + ")",
                          s.rows);
  std::cout << sqs::render_table(sections);
  return 0;
}

int cmd_report(const std::string& metrics_path, const std::string& benchmark_path,
               const std::string& import_path, const std::string& out_path) {
  std::vector<std::pair<std::string, std::vector<sqs::EvaluationRow>>> sections;

  auto parse_rows = [](const nlohmann::json& rows_json) {
    std::vector<sqs::EvaluationRow> rows;
    for (const auto& r : rows_json) {
      sqs::EvaluationRow row;
      row.model = r.at("model").get<std::string>();
      row.auc_value = r.at("auc").get<double>();
      row.imported = r.value("imported", false);
      rows.push_back(row);
    }
    return rows;
  };

  if (!metrics_path.empty()) {
    const nlohmann::json metrics = sqs::load_json_file(metrics_path);
    sections.emplace_back("", parse_rows(metrics.at("rows")));
  }
  if (!benchmark_path.empty()) {
    const nlohmann::json bench = sqs::load_json_file(benchmark_path);
    for (const auto& s : bench.at("scenarios"))
      sections.emplace_back("scenario " + s.at("scenario").get<std::string>(),
                            parse_rows(s.at("rows")));
  }
  if (sections.empty())
    throw sqs::UsageError("report: provide --metrics and/or --benchmark");

  if (!import_path.empty()) {
    for (const sqs::ImportedScore& s : sqs::load_imported_scores(import_path)) {
      for (auto& [title, rows] : sections) {
        if (s.scenario && title != "scenario " + *s.scenario) continue;
        sqs::EvaluationRow row;
        row.model = s.model;
        row.auc_value = s.auc_value;
        row.imported = true;
        rows.push_back(row);
      }
    }
  }

  const std::string table = sqs::render_table(sections);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw sqs::UsageError("report: cannot open " + out_path);
    out << table;
  }
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary quantum-kernel scoring toolkit"};
  app.require_subcommand(1);

  // gen-data
  std::string gen_spec, gen_out;
  std::int64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
  gen->add_option("--spec", gen_spec, "generator spec JSON file")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  // preprocess
  CommonFlags pre_flags;
  auto* pre = app.add_subcommand("preprocess",
                                 "fit the reduction on the train split and write reduced data");
  add_common(pre, pre_flags);

  // search
  CommonFlags search_flags;
  bool dry_run = false;
  auto* search = app.add_subcommand("search", "run the evolutionary feature-map search");
  add_common(search, search_flags);
  search->add_flag("--dry-run", dry_run, "print the resolved config and exit");

  // evaluate
  CommonFlags eval_flags;
  std::string eval_fm, eval_train, eval_test, eval_import, eval_export_gram, eval_out;
  std::vector<std::string> eval_baselines;
  auto* eval = app.add_subcommand("evaluate", "train and score an SVM on a feature map");
  add_common(eval, eval_flags, /*config_required=*/false);
  eval->add_option("--feature-map", eval_fm, "feature map JSON file")->required();
  eval->add_option("--train", eval_train, "reduced training CSV")->required();
  eval->add_option("--test", eval_test, "reduced test CSV")->required();
  eval->add_option("--baseline", eval_baselines,
                   "classical baseline to add (svc-rbf, svc-linear); repeatable");
  eval->add_option("--import-scores", eval_import, "CSV of externally computed model AUCs");
  std::string eval_c_grid;
  eval->add_option("--c-grid", eval_c_grid,
                   "comma-separated C grid selected on a validation fold, e.g. 0.1,1,10,100");
  eval->add_option("--export-gram", eval_export_gram, "write the training Gram matrix CSV");
  std::string eval_export_model;
  eval->add_option("--export-model", eval_export_model, "write the trained model JSON");
  eval->add_option("--out", eval_out, "metrics JSON output path");

  // scaling-bench
  CommonFlags scaling_flags;
  std::string scaling_import;
  auto* scaling = app.add_subcommand("scaling-bench",
                                     "downsampled-scenario benchmark harness");
  add_common(scaling, scaling_flags);
  scaling->add_option("--import-scores", scaling_import,
                      "CSV of externally computed model AUCs (scenario column optional)");

  // generalization-bench
  CommonFlags general_flags;
  std::string general_import;
  double general_fraction = 0.1;
  auto* general = app.add_subcommand("generalization-bench",
                                     "small-train/large-test generalization harness");
  add_common(general, general_flags);
  general->add_option("--train-fraction", general_fraction,
                      "training fraction (default 0.1)");
  general->add_option("--import-scores", general_import,
                      "CSV of externally computed model AUCs");

  // report
  std::string report_metrics, report_bench, report_import, report_out;
  auto* report = app.add_subcommand("report", "render a results table");
  report->add_option("--metrics", report_metrics, "metrics JSON from evaluate");
  report->add_option("--benchmark", report_bench, "benchmark report JSON");
  report->add_option("--import-scores", report_import, "CSV of external model AUCs");
  report->add_option("--out", report_out, "write the table to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_spec, gen_seed, gen_out);
    if (pre->parsed()) return cmd_preprocess(pre_flags);
    if (search->parsed()) return cmd_search(search_flags, dry_run);
    if (eval->parsed())
      return cmd_evaluate(eval_flags, eval_fm, eval_train, eval_test, eval_baselines,
                          eval_import, eval_export_gram, eval_export_model, eval_out,
                          eval_c_grid);
    if (scaling->parsed()) return cmd_bench(scaling_flags, true, scaling_import, 0.8);
    if (general->parsed())
      return cmd_bench(general_flags, false, general_import, general_fraction);
    if (report->parsed())
      return cmd_report(report_metrics, report_bench, report_import, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sqs::exit_code_for(e);
  }
  return 0;
}
