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

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/errors.hpp"
#include "sqs/evolution.hpp"
#include "sqs/rng.hpp"
#include "sqs/svm.hpp"

namespace sqs {

struct KernelMode {
  bool exact = true;
  std::uint64_t shots = 0;

  std::string to_string() const {
    return exact ? "exact" : "shots:" + std::to_string(shots);
  }

  static KernelMode parse(const std::string& text) {
    if (text == "exact") return KernelMode{};
    if (text.rfind("shots:", 0) == 0) {
      const std::string count = text.substr(6);
      if (!count.empty() && count.find_first_not_of("0123456789") == std::string::npos) {
        KernelMode mode;
        mode.exact = false;
        mode.shots = std::stoull(count);
        if (mode.shots == 0)
          throw ConfigError("kernelMode: shot count must be >= 1");
        return mode;
      }
    }
    throw ConfigError("kernelMode must be \"exact\" or \"shots:<n>\", got \"" + text + "\"");
  }
};

struct DataConfig {
  std::optional<std::string> path;
  std::optional<nlohmann::json> generator;
  std::uint64_t generator_seed = 0;
  std::string label_column = "label";
  std::string positive_label = "1";
  bool reduced = false;  // features are already projected angle columns
};

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 17;
};

struct ReductionConfig {
  int top_k = 10;
  int out_dim = 2;
  int bins = 10;
};

struct SvmSection {
  SvmConfig svm;
  std::vector<double> c_grid;  // empty = use svm.C directly
};

struct RunConfig {
  DataConfig data;
  SplitConfig split;
  ReductionConfig reduction;
  EvolutionConfig evolution;
  SvmSection svm;
  KernelMode kernel_mode;
  std::uint64_t shot_seed = 7;
  std::vector<std::size_t> scenarios;
  bool nested_scenarios = false;
  std::uint64_t sample_seed = 23;
  std::string output_dir = "out";
  unsigned threads = 0;  // 0 = resolve from SQS_THREADS / hardware
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end())
      throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
  }
}

inline double require_number(const nlohmann::json& obj, const char* key, double fallback,
                             const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number())
    throw ConfigError(where + "." + key + " must be a number");
  return obj.at(key).get<double>();
}

inline std::int64_t require_integer(const nlohmann::json& obj, const char* key,
                                    std::int64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer())
    throw ConfigError(where + "." + key + " must be an integer");
  return obj.at(key).get<std::int64_t>();
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string())
    throw ConfigError(where + "." + key + " must be a string");
  return obj.at(key).get<std::string>();
}

inline bool require_bool(const nlohmann::json& obj, const char* key, bool fallback,
                         const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean())
    throw ConfigError(where + "." + key + " must be a boolean");
  return obj.at(key).get<bool>();
}

}  // namespace detail

inline EvolutionConfig evolution_config_from_json(const nlohmann::json& j,
                                                  const std::string& where = "evolution") {
  using namespace detail;
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  reject_unknown_keys(j,
                      {"maximumGenerations", "targetFitness", "qubitSize", "geneChainSize",
                       "populationSize", "crossoverRate", "mutationPercentage", "eliteSize",
                       "quantumDim", "masterSeed", "localOpt"},
                      where);
  EvolutionConfig cfg;
  cfg.maximum_generations =
      static_cast<int>(require_integer(j, "maximumGenerations", cfg.maximum_generations, where));
  cfg.target_fitness = require_number(j, "targetFitness", cfg.target_fitness, where);
  cfg.qubit_size = static_cast<int>(require_integer(j, "qubitSize", cfg.qubit_size, where));
  cfg.gene_chain_size =
      static_cast<int>(require_integer(j, "geneChainSize", cfg.gene_chain_size, where));
  cfg.population_size =
      static_cast<int>(require_integer(j, "populationSize", cfg.population_size, where));
  cfg.crossover_rate = require_number(j, "crossoverRate", cfg.crossover_rate, where);
  cfg.mutation_percentage =
      require_number(j, "mutationPercentage", cfg.mutation_percentage, where);
  cfg.elite_size = static_cast<int>(require_integer(j, "eliteSize", cfg.elite_size, where));
  cfg.quantum_dim =
      static_cast<int>(require_integer(j, "quantumDim", cfg.qubit_size, where));
  cfg.master_seed = static_cast<std::uint64_t>(
      require_integer(j, "masterSeed", static_cast<std::int64_t>(cfg.master_seed), where));
  if (j.contains("localOpt")) {
    const auto& lo = j.at("localOpt");
    if (!lo.is_object()) throw ConfigError(where + ".localOpt must be an object");
    reject_unknown_keys(lo, {"maxIterations", "fdStep", "initialStepSize"},
                        where + ".localOpt");
    cfg.local_opt.max_iterations = static_cast<int>(
        require_integer(lo, "maxIterations", cfg.local_opt.max_iterations, where + ".localOpt"));
    cfg.local_opt.fd_step =
        require_number(lo, "fdStep", cfg.local_opt.fd_step, where + ".localOpt");
    cfg.local_opt.initial_step_size = require_number(
        lo, "initialStepSize", cfg.local_opt.initial_step_size, where + ".localOpt");
  }
  cfg.validate();
  return cfg;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  reject_unknown_keys(j,
                      {"data", "split", "reduction", "evolution", "svm", "kernelMode",
                       "shotSeed", "scenarios", "nestedScenarios", "sampleSeed",
                       "outputDir", "threads"},
                      "config");
  RunConfig cfg;

  if (j.contains("data")) {
    const auto& d = j.at("data");
    if (!d.is_object()) throw ConfigError("data must be an object");
    reject_unknown_keys(
        d, {"path", "generator", "generatorSeed", "labelColumn", "positiveLabel", "reduced"},
        "data");
    if (d.contains("path")) cfg.data.path = require_string(d, "path", "", "data");
    if (d.contains("generator")) {
      if (!d.at("generator").is_object())
        throw ConfigError("data.generator must be an object");
      cfg.data.generator = d.at("generator");
    }
    if (cfg.data.path && cfg.data.generator)
      throw ConfigError("data: \"path\" and \"generator\" are mutually exclusive");
    cfg.data.generator_seed = static_cast<std::uint64_t>(
        require_integer(d, "generatorSeed", 0, "data"));
    cfg.data.label_column = require_string(d, "labelColumn", cfg.data.label_column, "data");
    cfg.data.positive_label =
        require_string(d, "positiveLabel", cfg.data.positive_label, "data");
    cfg.data.reduced = require_bool(d, "reduced", false, "data");
  }

  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (!s.is_object()) throw ConfigError("split must be an object");
    reject_unknown_keys(s, {"trainFraction", "seed"}, "split");
    cfg.split.train_fraction =
        require_number(s, "trainFraction", cfg.split.train_fraction, "split");
    cfg.split.seed = static_cast<std::uint64_t>(
        require_integer(s, "seed", static_cast<std::int64_t>(cfg.split.seed), "split"));
    if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction < 1.0))
      throw ConfigError("split.trainFraction must be in (0, 1)");
  }

  if (j.contains("reduction")) {
    const auto& r = j.at("reduction");
    if (!r.is_object()) throw ConfigError("reduction must be an object");
    reject_unknown_keys(r, {"topK", "outDim", "bins"}, "reduction");
    cfg.reduction.top_k =
        static_cast<int>(require_integer(r, "topK", cfg.reduction.top_k, "reduction"));
    cfg.reduction.out_dim =
        static_cast<int>(require_integer(r, "outDim", cfg.reduction.out_dim, "reduction"));
    cfg.reduction.bins =
        static_cast<int>(require_integer(r, "bins", cfg.reduction.bins, "reduction"));
    if (cfg.reduction.top_k < 1) throw ConfigError("reduction.topK must be >= 1");
    if (cfg.reduction.out_dim < 1) throw ConfigError("reduction.outDim must be >= 1");
    if (cfg.reduction.out_dim > cfg.reduction.top_k)
      throw ConfigError("reduction.outDim must not exceed reduction.topK");
    if (cfg.reduction.bins < 2) throw ConfigError("reduction.bins must be >= 2");
  }

  if (j.contains("evolution"))
    cfg.evolution = evolution_config_from_json(j.at("evolution"));

  if (j.contains("svm")) {
    const auto& s = j.at("svm");
    if (!s.is_object()) throw ConfigError("svm must be an object");
    reject_unknown_keys(s, {"C", "classWeightPositive", "kktTolerance", "maxPasses", "cGrid"},
                        "svm");
    cfg.svm.svm.C = require_number(s, "C", cfg.svm.svm.C, "svm");
    if (s.contains("classWeightPositive") && !s.at("classWeightPositive").is_null()) {
      if (!s.at("classWeightPositive").is_number())
        throw ConfigError("svm.classWeightPositive must be a number or null");
      cfg.svm.svm.class_weight_positive = s.at("classWeightPositive").get<double>();
    }
    cfg.svm.svm.kkt_tolerance =
        require_number(s, "kktTolerance", cfg.svm.svm.kkt_tolerance, "svm");
    cfg.svm.svm.max_passes =
        static_cast<int>(require_integer(s, "maxPasses", cfg.svm.svm.max_passes, "svm"));
    if (s.contains("cGrid")) {
      if (!s.at("cGrid").is_array()) throw ConfigError("svm.cGrid must be an array");
      for (const auto& v : s.at("cGrid")) {
        if (!v.is_number() || !(v.get<double>() > 0.0))
          throw ConfigError("svm.cGrid entries must be positive numbers");
        cfg.svm.c_grid.push_back(v.get<double>());
      }
    }
    cfg.svm.svm.validate();
  }

  if (j.contains("kernelMode")) {
    if (!j.at("kernelMode").is_string())
      throw ConfigError("kernelMode must be a string");
    cfg.kernel_mode = KernelMode::parse(j.at("kernelMode").get<std::string>());
  }
  cfg.shot_seed = static_cast<std::uint64_t>(
      require_integer(j, "shotSeed", static_cast<std::int64_t>(cfg.shot_seed), "config"));

  if (j.contains("scenarios")) {
    if (!j.at("scenarios").is_array()) throw ConfigError("scenarios must be an array");
    for (const auto& v : j.at("scenarios")) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 2)
        throw ConfigError("scenarios entries must be integers >= 2");
      cfg.scenarios.push_back(static_cast<std::size_t>(v.get<std::int64_t>()));
    }
  }
  cfg.nested_scenarios = require_bool(j, "nestedScenarios", false, "config");
  cfg.sample_seed = static_cast<std::uint64_t>(
      require_integer(j, "sampleSeed", static_cast<std::int64_t>(cfg.sample_seed), "config"));
  cfg.output_dir = require_string(j, "outputDir", cfg.output_dir, "config");
  const std::int64_t threads = require_integer(j, "threads", 0, "config");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  cfg.threads = static_cast<unsigned>(threads);

  return cfg;
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json data{{"labelColumn", cfg.data.label_column},
                      {"positiveLabel", cfg.data.positive_label},
                      {"reduced", cfg.data.reduced}};
  if (cfg.data.path) data["path"] = *cfg.data.path;
  if (cfg.data.generator) {
    data["generator"] = *cfg.data.generator;
    data["generatorSeed"] = cfg.data.generator_seed;
  }
  nlohmann::json svm;
  to_json(svm, cfg.svm.svm);
  svm["cGrid"] = cfg.svm.c_grid;
  return nlohmann::json{
      {"data", data},
      {"split", {{"trainFraction", cfg.split.train_fraction}, {"seed", cfg.split.seed}}},
      {"reduction",
       {{"topK", cfg.reduction.top_k},
        {"outDim", cfg.reduction.out_dim},
        {"bins", cfg.reduction.bins}}},
      {"evolution", cfg.evolution},
      {"svm", svm},
      {"kernelMode", cfg.kernel_mode.to_string()},
      {"shotSeed", cfg.shot_seed},
      {"scenarios", cfg.scenarios},
      {"nestedScenarios", cfg.nested_scenarios},
      {"sampleSeed", cfg.sample_seed},
      {"outputDir", cfg.output_dir},
      {"threads", cfg.threads}};
}

// Fingerprint of the resolved configuration, embedded in every output file.
// Output location and thread cap do not affect computed results, so they
// stay out of the digest.
inline std::string config_digest(const RunConfig& cfg) {
  nlohmann::json j = run_config_to_json(cfg);
  j.erase("outputDir");
  j.erase("threads");
  const std::string canonical = j.dump();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical.data(), canonical.size())));
  return buf;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return j;
}

inline RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(load_json_file(path));
}

}  // namespace sqs
