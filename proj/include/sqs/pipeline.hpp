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

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/classical.hpp"
#include "sqs/dataset.hpp"
#include "sqs/errors.hpp"
#include "sqs/evolution.hpp"
#include "sqs/kernel.hpp"
#include "sqs/reduction.hpp"
#include "sqs/run_config.hpp"
#include "sqs/svm.hpp"

namespace sqs {

inline Dataset load_input_data(const RunConfig& cfg) {
  if (cfg.data.path)
    return load_csv(*cfg.data.path, cfg.data.label_column, cfg.data.positive_label);
  if (cfg.data.generator)
    return synth_generate(*cfg.data.generator, cfg.data.generator_seed);
  throw ConfigError("data: either \"path\" or \"generator\" is required");
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

inline GramMatrix build_train_gram(const FeatureMap& fm, const Matrix& x,
                                   const KernelMode& mode, std::uint64_t shot_seed,
                                   unsigned threads) {
  return mode.exact ? gram_matrix(fm, x, threads)
                    : gram_matrix_sampled(fm, x, mode.shots, shot_seed, threads);
}

inline Matrix build_cross_gram(const FeatureMap& fm, const Matrix& x_eval,
                               const Matrix& x_train, const KernelMode& mode,
                               std::uint64_t shot_seed, unsigned threads) {
  return mode.exact
             ? cross_gram(fm, x_eval, x_train, threads)
             : cross_gram_sampled(fm, x_eval, x_train, mode.shots,
                                  hash_combine(shot_seed, 0xc105eULL), threads);
}

// Regularization picked on a stratified validation fold when a grid is
// configured; ties favor the smaller C.
inline double select_c(const std::vector<double>& grid, const GramMatrix& k_train,
                       const Dataset& train, const SvmConfig& base,
                       std::uint64_t seed) {
  if (grid.empty()) return base.C;
  const auto [sub_idx, val_idx] = stratified_split_indices(train.labels, 0.8, seed);

  GramMatrix k_sub(sub_idx.size());
  for (std::size_t a = 0; a < sub_idx.size(); ++a)
    for (std::size_t b = 0; b < sub_idx.size(); ++b)
      k_sub.at(a, b) = k_train.at(sub_idx[a], sub_idx[b]);
  Matrix k_val(val_idx.size(), sub_idx.size());
  for (std::size_t a = 0; a < val_idx.size(); ++a)
    for (std::size_t b = 0; b < sub_idx.size(); ++b)
      k_val.at(a, b) = k_train.at(val_idx[a], sub_idx[b]);

  LabelVector y_sub, y_val;
  for (const std::size_t i : sub_idx) y_sub.push_back(train.labels[i]);
  for (const std::size_t i : val_idx) y_val.push_back(train.labels[i]);

  double best_c = grid.front();
  double best_auc = -1.0;
  for (const double c : grid) {
    SvmConfig cfg = base;
    cfg.C = c;
    const TrainedModel model = train_precomputed(k_sub, y_sub, cfg);
    const double score = auc(decision_values(model, k_val), y_val);
    if (score > best_auc + 1e-12 || (std::abs(score - best_auc) <= 1e-12 && c < best_c)) {
      best_auc = score;
      best_c = c;
    }
  }
  return best_c;
}

struct EvaluationRow {
  std::string model;
  double auc_value = 0.0;
  double fit_seconds = 0.0;
  std::ptrdiff_t support_count = -1;  // -1 for imported rows
  bool imported = false;
  std::optional<double> chosen_c;
};

inline void to_json(nlohmann::json& j, const EvaluationRow& r) {
  j = nlohmann::json{{"model", r.model},
                     {"auc", r.auc_value},
                     {"fit_seconds", r.fit_seconds},
                     {"support_count", r.support_count},
                     {"imported", r.imported}};
  if (r.chosen_c) j["C"] = *r.chosen_c;
}

// Scores imported from external model runs; never computed in-repo.
// CSV columns: model,auc[,scenario].
struct ImportedScore {
  std::string model;
  double auc_value = 0.0;
  std::optional<std::string> scenario;
};

inline std::vector<ImportedScore> load_imported_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("import-scores: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("import-scores: " + path + " is empty");
  const auto header = detail::split_csv_record(line);
  std::ptrdiff_t model_col = -1, auc_col = -1, scenario_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "model") model_col = static_cast<std::ptrdiff_t>(i);
    if (header[i] == "auc") auc_col = static_cast<std::ptrdiff_t>(i);
    if (header[i] == "scenario") scenario_col = static_cast<std::ptrdiff_t>(i);
  }
  if (model_col < 0 || auc_col < 0)
    throw IngestionError("import-scores: header must contain \"model\" and \"auc\"");
  std::vector<ImportedScore> scores;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_record(line);
    if (fields.size() != header.size())
      throw IngestionError("import-scores: ragged row in " + path);
    ImportedScore s;
    s.model = fields[static_cast<std::size_t>(model_col)];
    double v;
    if (!detail::parse_double(fields[static_cast<std::size_t>(auc_col)], v) || v < 0.0 ||
        v > 1.0)
      throw IngestionError("import-scores: invalid AUC for model " + s.model);
    s.auc_value = v;
    if (scenario_col >= 0) s.scenario = fields[static_cast<std::size_t>(scenario_col)];
    scores.push_back(std::move(s));
  }
  return scores;
}

struct EvaluationResult {
  std::vector<EvaluationRow> rows;
  nlohmann::json decision_values = nlohmann::json::object();
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Trains on the train-set kernel and scores the test set for the evolved
// quantum kernel plus any requested classical baselines.
inline EvaluationResult evaluate_models(const FeatureMap& fm, const Dataset& train,
                                        const Dataset& test, const SvmSection& svm_cfg,
                                        const KernelMode& mode, std::uint64_t shot_seed,
                                        const std::vector<std::string>& baselines,
                                        unsigned threads) {
  if (train.cols() != static_cast<std::size_t>(fm.qubits))
    throw DimensionError("evaluate: feature map expects " + std::to_string(fm.qubits) +
                         " features, reduced data has " + std::to_string(train.cols()));
  if (test.cols() != train.cols())
    throw DimensionError("evaluate: train and test column counts differ");

  EvaluationResult result;
  result.train_size = train.rows();
  result.test_size = test.rows();

  auto fit_and_score = [&](const std::string& name, const GramMatrix& k_train,
                           const Matrix& k_cross) {
    const auto t0 = std::chrono::steady_clock::now();
    SvmConfig cfg = svm_cfg.svm;
    cfg.C = select_c(svm_cfg.c_grid, k_train, train, svm_cfg.svm,
                     hash_combine(0xc5e1ec7ULL, fnv1a(name.data(), name.size())));
    const TrainedModel model = train_precomputed(k_train, train.labels, cfg);
    const std::vector<double> scores = decision_values(model, k_cross);
    EvaluationRow row;
    row.model = name;
    row.auc_value = auc(scores, test.labels);
    row.fit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.support_count = static_cast<std::ptrdiff_t>(model.support_indices.size());
    if (!svm_cfg.c_grid.empty()) row.chosen_c = cfg.C;
    result.rows.push_back(row);
    result.decision_values[name] = scores;
  };

  {
    const GramMatrix k_train =
        build_train_gram(fm, train.features, mode, shot_seed, threads);
    const Matrix k_cross = build_cross_gram(fm, test.features, train.features, mode,
                                            shot_seed, threads);
    fit_and_score("SQS", k_train, k_cross);
  }

  for (const std::string& baseline : baselines) {
    if (baseline == "svc-rbf") {
      const double gamma = rbf_gamma_default(train.features);
      fit_and_score("SVC-RBF", rbf_gram(train.features, gamma),
                    rbf_cross_gram(test.features, train.features, gamma));
    } else if (baseline == "svc-linear") {
      fit_and_score("SVC-LINEAR", linear_gram(train.features),
                    linear_cross_gram(test.features, train.features));
    } else {
      throw UsageError("unknown baseline \"" + baseline +
                       "\" (expected svc-rbf or svc-linear)");
    }
  }
  return result;
}

struct SearchOutcome {
  FeatureMap best;
  EvolutionReport report;
  ReductionModel reduction;
  Dataset train_reduced;
  Dataset test_reduced;
};

// Reduction plus evolution on the training fold of the configured dataset.
// When data.reduced is set the input is used as the training set as-is.
inline SearchOutcome run_search(const RunConfig& cfg, unsigned threads) {
  const Dataset data = load_input_data(cfg);
  SearchOutcome outcome;

  if (cfg.data.reduced) {
    if (data.cols() != static_cast<std::size_t>(cfg.evolution.qubit_size))
      throw ConfigError("search: pre-reduced data has " + std::to_string(data.cols()) +
                        " columns, evolution.qubitSize is " +
                        std::to_string(cfg.evolution.qubit_size));
    outcome.train_reduced = data;
  } else {
    auto [train, test] = stratified_split(data, cfg.split.train_fraction, cfg.split.seed);
    if (cfg.reduction.out_dim != cfg.evolution.qubit_size)
      throw ConfigError("search: reduction.outDim must equal evolution.qubitSize");
    outcome.reduction =
        fit_reduction(train, cfg.reduction.top_k, cfg.reduction.out_dim, cfg.reduction.bins);
    outcome.train_reduced = apply_reduction(outcome.reduction, train);
    outcome.test_reduced = apply_reduction(outcome.reduction, test);
  }

  auto [best, report] = run_evolution(cfg.evolution, outcome.train_reduced.features,
                                      outcome.train_reduced.labels, threads);
  outcome.best = std::move(best);
  outcome.report = std::move(report);
  return outcome;
}

inline void write_evolution_outputs(const std::string& out_dir, const RunConfig& cfg,
                                    const SearchOutcome& outcome) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string digest = config_digest(cfg);

  nlohmann::json fm_json = outcome.best;
  fm_json["config_digest"] = digest;
  write_json_file(out_dir + "/best_feature_map.json", fm_json);

  std::ofstream trace(out_dir + "/evolution_report.jsonl");
  if (!trace) throw UsageError("cannot open " + out_dir + "/evolution_report.jsonl");
  for (const GenerationRecord& rec : outcome.report.generations) {
    nlohmann::json j = rec;
    trace << j.dump() << "\n";
  }

  write_json_file(out_dir + "/search_summary.json",
                  nlohmann::json{{"config_digest", digest},
                                 {"stop_reason", outcome.report.stop_reason},
                                 {"best_fitness", outcome.report.best_fitness},
                                 {"best_alignment", outcome.report.best_alignment},
                                 {"generations", outcome.report.generations.size()},
                                 {"entangling_genes", outcome.best.entangling_gene_count()},
                                 {"wall_seconds", outcome.report.wall_seconds},
                                 {"master_seed", cfg.evolution.master_seed}});

  if (!cfg.data.reduced) {
    nlohmann::json reduction_json = outcome.reduction;
    reduction_json["config_digest"] = digest;
    write_json_file(out_dir + "/reduction.json", reduction_json);
    save_csv(outcome.train_reduced, out_dir + "/train_reduced.csv");
    save_csv(outcome.test_reduced, out_dir + "/test_reduced.csv");
  }
}

struct ScenarioResult {
  std::string name;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t sample_seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t search_seed = 0;
  std::vector<EvaluationRow> rows;
  std::optional<FeatureMap> feature_map;
};

inline void to_json(nlohmann::json& j, const ScenarioResult& s) {
  j = nlohmann::json{{"scenario", s.name},
                     {"train_size", s.train_size},
                     {"test_size", s.test_size},
                     {"sample_seed", s.sample_seed},
                     {"split_seed", s.split_seed},
                     {"search_seed", s.search_seed},
                     {"rows", s.rows}};
  if (s.feature_map) j["feature_map"] = *s.feature_map;
}

struct BenchmarkReport {
  std::string config_digest;
  std::uint64_t master_seed = 0;
  std::vector<ScenarioResult> scenarios;
};

inline void to_json(nlohmann::json& j, const BenchmarkReport& r) {
  j = nlohmann::json{{"config_digest", r.config_digest},
                     {"master_seed", r.master_seed},
                     {"scenarios", r.scenarios}};
}

// One scenario of the downsampling harness: sample -> split -> reduce ->
// search -> evaluate the evolved kernel and the classical baseline.
inline ScenarioResult run_scenario(const RunConfig& cfg, const Dataset& data,
                                   const std::string& name,
                                   std::optional<std::size_t> sample_size,
                                   double train_fraction, std::uint64_t scenario_salt,
                                   unsigned threads) {
  ScenarioResult result;
  result.name = name;
  result.sample_seed = cfg.nested_scenarios
                           ? cfg.sample_seed
                           : hash_combine(cfg.sample_seed, scenario_salt);
  result.split_seed = hash_combine(cfg.split.seed, scenario_salt);
  result.search_seed = hash_combine(cfg.evolution.master_seed, scenario_salt);

  const Dataset sampled =
      sample_size ? downsample(data, *sample_size, result.sample_seed) : data;
  auto [train, test] = stratified_split(sampled, train_fraction, result.split_seed);
  const ReductionModel reduction =
      fit_reduction(train, cfg.reduction.top_k, cfg.reduction.out_dim, cfg.reduction.bins);
  const Dataset train_reduced = apply_reduction(reduction, train);
  const Dataset test_reduced = apply_reduction(reduction, test);

  EvolutionConfig evo = cfg.evolution;
  evo.master_seed = result.search_seed;
  auto [best, report] = run_evolution(evo, train_reduced.features, train_reduced.labels,
                                      threads);
  (void)report;

  EvaluationResult eval =
      evaluate_models(best, train_reduced, test_reduced, cfg.svm, cfg.kernel_mode,
                      hash_combine(cfg.shot_seed, scenario_salt), {"svc-rbf"}, threads);
  result.rows = std::move(eval.rows);
  result.train_size = eval.train_size;
  result.test_size = eval.test_size;
  result.feature_map = best;
  return result;
}

inline BenchmarkReport scaling_bench(const RunConfig& cfg, unsigned threads) {
  if (cfg.scenarios.empty())
    throw ConfigError("scaling-bench: config must list \"scenarios\" sizes");
  const Dataset data = load_input_data(cfg);
  for (const std::size_t s : cfg.scenarios)
    if (s > data.rows())
      throw UsageError("scaling-bench: scenario size " + std::to_string(s) +
                       " exceeds dataset rows " + std::to_string(data.rows()));

  BenchmarkReport report;
  report.config_digest = config_digest(cfg);
  report.master_seed = cfg.evolution.master_seed;
  for (const std::size_t s : cfg.scenarios)
    report.scenarios.push_back(run_scenario(cfg, data, std::to_string(s), s,
                                            cfg.split.train_fraction,
                                            static_cast<std::uint64_t>(s), threads));
  return report;
}

inline BenchmarkReport generalization_bench(const RunConfig& cfg, unsigned threads,
                                            double train_fraction = 0.1) {
  const Dataset data = load_input_data(cfg);
  BenchmarkReport report;
  report.config_digest = config_digest(cfg);
  report.master_seed = cfg.evolution.master_seed;
  report.scenarios.push_back(run_scenario(cfg, data, "generalization", std::nullopt,
                                          train_fraction, 0x9e41ULL, threads));
  return report;
}

// Plot-ready CSV: scenario x model x AUC.
inline void write_benchmark_csv(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open " + path);
  out << "scenario,train_size,test_size,model,auc\n";
  for (const ScenarioResult& s : report.scenarios)
    for (const EvaluationRow& r : s.rows)
      out << s.name << "," << s.train_size << "," << s.test_size << "," << r.model << ","
          << detail::format_double(r.auc_value) << "\n";
}

// Renders rows as a fixed-width table with the best AUC flagged.
inline std::string render_table(const std::vector<std::pair<std::string, std::vector<EvaluationRow>>>& sections) {
  std::string out;
  char line[160];
  for (const auto& [title, rows] : sections) {
    if (!title.empty()) out += title + "\n";
    double best = -1.0;
    for (const EvaluationRow& r : rows) best = std::max(best, r.auc_value);
    std::snprintf(line, sizeof(line), "  %-12s %8s %s\n", "Model", "AUC", "");
    out += line;
    for (const EvaluationRow& r : rows) {
      std::snprintf(line, sizeof(line), "  %-12s %8.3f %s%s\n", r.model.c_str(),
                    r.auc_value, r.auc_value == best ? "* best" : "",
                    r.imported ? " (imported)" : "");
      out += line;
    }
  }
  return out;
}

}  // namespace sqs
