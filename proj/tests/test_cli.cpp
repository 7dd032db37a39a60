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

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "sqs/run_config.hpp"
#include "sqs/sqs.hpp"

using namespace sqs;

namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs the built CLI with stdout+stderr captured.
CommandResult run_cli(const std::string& args) {
  const fs::path dir = fs::temp_directory_path() / "sqs_cli_out";
  fs::create_directories(dir);
  const std::string capture = (dir / "capture.txt").string();
  const std::string command = std::string(SQS_CLI_PATH) + " " + args + " > " + capture +
                              " 2>&1";
  const int status = std::system(command.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  result.output.assign((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  return result;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "sqs_cli_work";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path path = work_dir() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config schema validation") {
  SECTION("unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"surprise", 1}}), ConfigError);
    CHECK_THROWS_AS(
        run_config_from_json(nlohmann::json{{"data", {{"pth", "x.csv"}}}}),
        ConfigError);
    CHECK_THROWS_AS(
        run_config_from_json(nlohmann::json{{"evolution", {{"popSize", 3}}}}),
        ConfigError);
  }
  SECTION("type and range violations are rejected") {
    CHECK_THROWS_AS(
        run_config_from_json(nlohmann::json{{"split", {{"trainFraction", 1.5}}}}),
        ConfigError);
    CHECK_THROWS_AS(
        run_config_from_json(nlohmann::json{{"evolution", {{"qubitSize", 15}, {"quantumDim", 15}}}}),
        ConfigError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"threads", -1}}), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"kernelMode", "sampled"}}),
                    ConfigError);
  }
  SECTION("kernel mode parsing") {
    CHECK(KernelMode::parse("exact").exact);
    const KernelMode shots = KernelMode::parse("shots:1024");
    CHECK(!shots.exact);
    CHECK(shots.shots == 1024);
    CHECK_THROWS_AS(KernelMode::parse("shots:0"), ConfigError);
    CHECK_THROWS_AS(KernelMode::parse("shots:abc"), ConfigError);
  }
  SECTION("digest is stable for identical configs") {
    RunConfig a;
    RunConfig b;
    CHECK(config_digest(a) == config_digest(b));
    b.evolution.master_seed = 5;
    CHECK(config_digest(a) != config_digest(b));
  }
}

TEST_CASE("exception to exit-code mapping") {
  CHECK(exit_code_for(UsageError("x")) == 2);
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DimensionError("x")) == 2);
  CHECK(exit_code_for(IngestionError("x")) == 2);
  CHECK(exit_code_for(NumericError("x")) == 3);
  CHECK(exit_code_for(ConvergenceError("x", 0.5)) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("gen-data command") {
  const std::string spec = write_file(
      "xor_spec.json", R"({"name":"xor","n":60,"sigma":0.2,"nuisance":1})");
  const std::string out = (work_dir() / "gen.csv").string();

  SECTION("writes the requested rows plus a sidecar") {
    const CommandResult r =
        run_cli("gen-data --spec " + spec + " --seed 7 --out " + out);
    REQUIRE(r.exit_code == 0);
    const Dataset ds = load_csv(out, "label", "1");
    CHECK(ds.rows() == 60);
    CHECK(ds.cols() == 3);
    const nlohmann::json sidecar = load_json_file(out + ".json");
    CHECK(sidecar.at("rows") == 60);
    CHECK(sidecar.contains("config_digest"));
  }

  SECTION("reruns are byte identical") {
    const std::string out2 = (work_dir() / "gen2.csv").string();
    REQUIRE(run_cli("gen-data --spec " + spec + " --seed 7 --out " + out).exit_code == 0);
    REQUIRE(run_cli("gen-data --spec " + spec + " --seed 7 --out " + out2).exit_code == 0);
    CHECK(read_file(out) == read_file(out2));
  }

  SECTION("unknown generators exit 2 and name the generator") {
    const std::string bad = write_file("bad_spec.json", R"({"name":"warp","n":10})");
    const CommandResult r = run_cli("gen-data --spec " + bad + " --seed 1 --out " + out);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("warp") != std::string::npos);
  }
}

TEST_CASE("search command") {
  const std::string config = write_file("search_cfg.json", R"({
    "data": {"generator": {"name": "gauss-imbalanced", "n": 60, "d": 3,
                            "separation": 2.5, "positive_rate": 0.2},
             "generatorSeed": 3},
    "split": {"trainFraction": 0.8, "seed": 11},
    "reduction": {"topK": 3, "outDim": 2},
    "evolution": {"maximumGenerations": 3, "populationSize": 8, "eliteSize": 2,
                   "qubitSize": 2, "quantumDim": 2, "geneChainSize": 3,
                   "masterSeed": 5, "localOpt": {"maxIterations": 3}},
    "outputDir": "OUTDIR"
  })");

  SECTION("dry run prints the resolved config and computes nothing") {
    const CommandResult r = run_cli("search --config " + config + " --dry-run");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("maximumGenerations") != std::string::npos);
    CHECK(r.output.find("config_digest") != std::string::npos);
  }

  SECTION("schema violations exit 2 before computing") {
    const std::string bad = write_file("bad_cfg.json", R"({"evolutions": {}})");
    const CommandResult r = run_cli("search --config " + bad);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("unknown key") != std::string::npos);
  }

  SECTION("reruns write an identical best feature map and the summary beats generation 0") {
    const fs::path out1 = work_dir() / "search1";
    const fs::path out2 = work_dir() / "search2";
    REQUIRE(run_cli("search --config " + config + " --out-dir " + out1.string())
                .exit_code == 0);
    REQUIRE(run_cli("search --config " + config + " --out-dir " + out2.string())
                .exit_code == 0);
    CHECK(read_file((out1 / "best_feature_map.json").string()) ==
          read_file((out2 / "best_feature_map.json").string()));

    const nlohmann::json summary = load_json_file((out1 / "search_summary.json").string());
    std::ifstream trace((out1 / "evolution_report.jsonl").string());
    std::string first_line;
    REQUIRE(std::getline(trace, first_line));
    const nlohmann::json gen0 = nlohmann::json::parse(first_line);
    CHECK(summary.at("best_fitness").get<double>() >=
          gen0.at("best_fitness").get<double>());
  }
}

TEST_CASE("evaluate command") {
  // A separable toy set, pre-reduced by hand (2 columns in angle range).
  std::string train_csv = "c0,c1,label\n";
  std::string test_csv = "c0,c1,label\n";
  Rng rng(3);
  for (int i = 0; i < 24; ++i) {
    const bool positive = i % 4 == 0;
    const double base = positive ? 1.2 : -1.2;
    char row[128];
    std::snprintf(row, sizeof(row), "%.6f,%.6f,%d\n", base + 0.05 * rng.next_normal(),
                  base + 0.05 * rng.next_normal(), positive ? 1 : -1);
    ((i % 3 == 0) ? test_csv : train_csv) += row;
  }
  const std::string train_path = write_file("eval_train.csv", train_csv);
  const std::string test_path = write_file("eval_test.csv", test_csv);
  const std::string fm_path = write_file(
      "eval_fm.json", R"({"qubits":2,"genes":[{"word":"ZI","alpha":1.1},{"word":"IZ","alpha":0.9}]})");

  SECTION("perfect separation yields an AUC of 1") {
    const std::string metrics = (work_dir() / "metrics.json").string();
    const CommandResult r = run_cli("evaluate --feature-map " + fm_path + " --train " +
                                    train_path + " --test " + test_path + " --out " +
                                    metrics);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json j = load_json_file(metrics);
    REQUIRE(j.at("rows").size() == 1);
    CHECK(j.at("rows")[0].at("model") == "SQS");
    CHECK(j.at("rows")[0].at("auc").get<double>() == 1.0);
    CHECK(j.at("rows")[0].at("support_count").get<int>() > 0);
    CHECK(j.contains("decision_values"));
  }

  SECTION("imported scores become report rows") {
    const std::string scores = write_file("ext.csv", "model,auc\nXGBoost,0.632\nMLP,0.61\n");
    const std::string metrics = (work_dir() / "metrics2.json").string();
    const CommandResult r = run_cli("evaluate --feature-map " + fm_path + " --train " +
                                    train_path + " --test " + test_path +
                                    " --import-scores " + scores + " --out " + metrics);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json j = load_json_file(metrics);
    REQUIRE(j.at("rows").size() == 3);
    CHECK(j.at("rows")[1].at("imported") == true);
  }

  SECTION("baselines add rows through the same solver") {
    const std::string metrics = (work_dir() / "metrics3.json").string();
    const CommandResult r = run_cli("evaluate --feature-map " + fm_path + " --train " +
                                    train_path + " --test " + test_path +
                                    " --baseline svc-rbf --baseline svc-linear --out " +
                                    metrics);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json j = load_json_file(metrics);
    REQUIRE(j.at("rows").size() == 3);
    CHECK(j.at("rows")[1].at("model") == "SVC-RBF");
    CHECK(j.at("rows")[2].at("model") == "SVC-LINEAR");
  }

  SECTION("qubit mismatch exits 2") {
    const std::string fm3 = write_file(
        "eval_fm3.json", R"({"qubits":3,"genes":[{"word":"ZII","alpha":1.0}]})");
    const CommandResult r = run_cli("evaluate --feature-map " + fm3 + " --train " +
                                    train_path + " --test " + test_path);
    CHECK(r.exit_code == 2);
  }

  SECTION("C selection on a validation fold via --c-grid") {
    const std::string metrics = (work_dir() / "metrics_grid.json").string();
    const CommandResult r = run_cli("evaluate --feature-map " + fm_path + " --train " +
                                    train_path + " --test " + test_path +
                                    " --c-grid 0.1,1,10,100 --out " + metrics);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json j = load_json_file(metrics);
    const double chosen = j.at("rows")[0].at("C").get<double>();
    CHECK((chosen == 0.1 || chosen == 1.0 || chosen == 10.0 || chosen == 100.0));
    CHECK(run_cli("evaluate --feature-map " + fm_path + " --train " + train_path +
                  " --test " + test_path + " --c-grid nope")
              .exit_code == 2);
  }

  SECTION("shot-sampled kernel mode works end to end") {
    const CommandResult r = run_cli("evaluate --feature-map " + fm_path + " --train " +
                                    train_path + " --test " + test_path +
                                    " --kernel-mode shots:256");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("SQS") != std::string::npos);
  }

  SECTION("gram export writes the matrix and sidecar") {
    const std::string gram = (work_dir() / "gram.csv").string();
    const CommandResult r = run_cli("evaluate --feature-map " + fm_path + " --train " +
                                    train_path + " --test " + test_path +
                                    " --export-gram " + gram);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(gram));
    const nlohmann::json sidecar = load_json_file(gram + ".json");
    CHECK(sidecar.at("exact") == true);
  }

  SECTION("model export writes the dual solution") {
    const std::string model_path = (work_dir() / "model.json").string();
    const CommandResult r = run_cli("evaluate --feature-map " + fm_path + " --train " +
                                    train_path + " --test " + test_path +
                                    " --export-model " + model_path);
    REQUIRE(r.exit_code == 0);
    const nlohmann::json model = load_json_file(model_path);
    CHECK(model.contains("dual_coefficients"));
    CHECK(model.contains("bias"));
    CHECK(model.contains("support_indices"));
    CHECK(model.contains("config"));
    CHECK(model.contains("training_data_digest"));
  }
}

TEST_CASE("report command renders the comparison fixture") {
  // Three-model fixture: the toolkit's row plus two imported baselines.
  const std::string metrics = write_file("fixture_metrics.json", R"({
    "rows": [{"model": "SQS", "auc": 0.658, "fit_seconds": 0, "support_count": 10,
               "imported": false}]
  })");
  const std::string scores =
      write_file("fixture_scores.csv", "model,auc\nSVC,0.638\nXGBoost,0.632\n");
  const CommandResult r =
      run_cli("report --metrics " + metrics + " --import-scores " + scores);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("SQS") != std::string::npos);
  CHECK(r.output.find("0.658") != std::string::npos);
  CHECK(r.output.find("0.638") != std::string::npos);
  CHECK(r.output.find("0.632") != std::string::npos);

  // The best AUC is flagged on the SQS row only.
  std::istringstream lines(r.output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find("* best") != std::string::npos)
      CHECK(line.find("SQS") != std::string::npos);
  }
}

TEST_CASE("benchmark commands") {
  const std::string config = write_file("bench_cfg.json", R"({
    "data": {"generator": {"name": "gauss-imbalanced", "n": 300, "d": 3,
                            "separation": 2.5, "positive_rate": 0.2},
             "generatorSeed": 9},
    "split": {"trainFraction": 0.8, "seed": 21},
    "reduction": {"topK": 3, "outDim": 2},
    "evolution": {"maximumGenerations": 2, "populationSize": 6, "eliteSize": 2,
                   "qubitSize": 2, "quantumDim": 2, "geneChainSize": 3,
                   "masterSeed": 13, "localOpt": {"maxIterations": 2}},
    "scenarios": [100, 200],
    "outputDir": "OUTDIR"
  })");

  SECTION("scaling bench emits one record per scenario and model") {
    const fs::path out = work_dir() / "bench1";
    const CommandResult r =
        run_cli("scaling-bench --config " + config + " --out-dir " + out.string());
    REQUIRE(r.exit_code == 0);
    const nlohmann::json report =
        load_json_file((out / "benchmark_report.json").string());
    REQUIRE(report.at("scenarios").size() == 2);
    for (const auto& s : report.at("scenarios")) {
      CHECK(s.at("rows").size() == 2);  // SQS + SVC-RBF
      for (const auto& row : s.at("rows")) {
        const double v = row.at("auc").get<double>();
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      CHECK(s.contains("sample_seed"));
      CHECK(s.contains("search_seed"));
    }
    const std::string csv = read_file((out / "scaling_auc.csv").string());
    CHECK(csv.rfind("scenario,train_size,test_size,model,auc", 0) == 0);
  }

  SECTION("oversized scenarios exit 2") {
    const std::string bad = write_file("bench_bad.json", R"({
      "data": {"generator": {"name": "gauss-imbalanced", "n": 50, "d": 2}},
      "evolution": {"maximumGenerations": 1, "populationSize": 4, "eliteSize": 2,
                     "qubitSize": 2, "quantumDim": 2},
      "reduction": {"topK": 2, "outDim": 2},
      "scenarios": [100]
    })");
    CHECK(run_cli("scaling-bench --config " + bad).exit_code == 2);
  }

  SECTION("generalization bench uses a small training fraction") {
    const fs::path out = work_dir() / "bench2";
    const CommandResult r = run_cli("generalization-bench --config " + config +
                                    " --out-dir " + out.string());
    REQUIRE(r.exit_code == 0);
    const nlohmann::json report =
        load_json_file((out / "benchmark_report.json").string());
    REQUIRE(report.at("scenarios").size() == 1);
    const auto& s = report.at("scenarios")[0];
    const std::size_t train = s.at("train_size").get<std::size_t>();
    CHECK(train >= 28);  // ~10% of 300 with stratification rounding
    CHECK(train <= 32);
    CHECK(s.at("rows").size() == 2);
  }
}
