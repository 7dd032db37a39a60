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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/errors.hpp"
#include "sqs/fitness.hpp"
#include "sqs/kernel.hpp"
#include "sqs/parallel.hpp"
#include "sqs/pauli.hpp"
#include "sqs/rng.hpp"

namespace sqs {

struct LocalOptConfig {
  int max_iterations = 15;
  double fd_step = 1e-3;
  double initial_step_size = 0.5;

  void validate() const {
    if (max_iterations < 0) throw ConfigError("localOpt.maxIterations must be >= 0");
    if (!(fd_step > 0.0)) throw ConfigError("localOpt.fdStep must be positive");
    if (!(initial_step_size > 0.0))
      throw ConfigError("localOpt.initialStepSize must be positive");
  }
};

struct EvolutionConfig {
  int maximum_generations = 50;
  double target_fitness = 1.0;
  int qubit_size = 2;
  int gene_chain_size = 5;
  int population_size = 100;
  double crossover_rate = 0.7;
  double mutation_percentage = 0.3;
  int elite_size = 4;
  int quantum_dim = 2;
  std::uint64_t master_seed = 1;
  LocalOptConfig local_opt;

  void validate() const {
    if (maximum_generations < 1)
      throw ConfigError("EvolutionConfig: maximumGenerations must be >= 1");
    // targetFitness = 0 is allowed as a degenerate always-stop setting.
    if (!(target_fitness >= 0.0 && target_fitness <= 1.0))
      throw ConfigError("EvolutionConfig: targetFitness must be in [0, 1]");
    if (qubit_size < 1 || qubit_size > kMaxQubits)
      throw ConfigError("EvolutionConfig: qubitSize must be between 1 and 10");
    if (gene_chain_size < 1)
      throw ConfigError("EvolutionConfig: geneChainSize must be >= 1");
    if (population_size < 1)
      throw ConfigError("EvolutionConfig: populationSize must be >= 1");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
      throw ConfigError("EvolutionConfig: crossoverRate must be in [0, 1]");
    if (!(mutation_percentage >= 0.0 && mutation_percentage <= 1.0))
      throw ConfigError("EvolutionConfig: mutationPercentage must be in [0, 1]");
    if (elite_size < 2)
      throw ConfigError("EvolutionConfig: eliteSize must be >= 2 (crossover needs two parents)");
    if (elite_size > population_size)
      throw ConfigError("EvolutionConfig: eliteSize must not exceed populationSize");
    if (quantum_dim != qubit_size)
      throw ConfigError("EvolutionConfig: quantumDim must equal qubitSize");
    local_opt.validate();
  }
};

using Population = std::vector<FeatureMap>;

struct EliteSnapshot {
  FeatureMap individual;
  double fitness = 0.0;
  double alignment = 0.0;
};

struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;  // best-ever up to this generation
  double mean_fitness = 0.0;
  double best_alignment = 0.0;
  std::vector<EliteSnapshot> elite;
};

struct EvolutionReport {
  std::vector<GenerationRecord> generations;
  std::string stop_reason;  // "target-reached" | "generations-exhausted"
  double best_fitness = 0.0;
  double best_alignment = 0.0;
  double wall_seconds = 0.0;
};

namespace detail {

// Words drawn from {I,X}^n act as a pure phase on the Hadamard-layer state
// (X fixes |+>), exactly like the all-identity word: their kernel is
// constantly 1 and the eigenvalue fitness saturates at 1 on them, which
// would trip the early stop on an information-free individual. Generators
// therefore redraw any word without a Y or Z, the same treatment the
// all-identity word gets.
inline bool phase_only_word(const std::string& letters) {
  return letters.find_first_of("YZ") == std::string::npos;
}

inline PauliWord random_word(int qubits, Rng& rng) {
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  for (;;) {
    std::string letters(static_cast<std::size_t>(qubits), 'I');
    for (int q = 0; q < qubits; ++q)
      letters[static_cast<std::size_t>(q)] = kLetters[rng.next_index(4)];
    if (!phase_only_word(letters)) return PauliWord(std::move(letters));
  }
}

inline Gene random_gene(int qubits, Rng& rng) {
  PauliWord word = random_word(qubits, rng);
  const double alpha = rng.uniform(0.1, 2.0);
  return Gene(std::move(word), alpha);
}

}  // namespace detail

// Random population: chain lengths uniform in [1, geneChainSize], letters
// uniform over {I,X,Y,Z} with all-identity words redrawn, alpha uniform in
// [0.1, 2.0]. One derived stream per slot keeps this reproducible.
inline Population init_population(const EvolutionConfig& cfg) {
  cfg.validate();
  Population pop;
  pop.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int slot = 0; slot < cfg.population_size; ++slot) {
    Rng rng(derive_seed(cfg.master_seed, StreamKind::Init, 0,
                        static_cast<std::uint64_t>(slot)));
    const std::size_t chain =
        1 + static_cast<std::size_t>(rng.next_index(
                static_cast<std::uint64_t>(cfg.gene_chain_size)));
    std::vector<Gene> genes;
    genes.reserve(chain);
    for (std::size_t g = 0; g < chain; ++g)
      genes.push_back(detail::random_gene(cfg.qubit_size, rng));
    pop.emplace_back(cfg.qubit_size, std::move(genes));
  }
  return pop;
}

// fitness[i] = max_eigen_fitness(gram_matrix(pop[i], X)). Individuals are
// independent, so evaluation parallelizes across them; errors carry the
// individual's index.
inline std::vector<double> evaluate_population(const Population& pop, const Matrix& x,
                                               const LabelVector& y,
                                               unsigned threads = 1) {
  if (x.rows != y.size())
    throw DimensionError("evaluate_population: dataset and label sizes differ");
  std::vector<double> fitness(pop.size(), 0.0);
  parallel_for(pop.size(), threads, [&](std::size_t i) {
    try {
      fitness[i] = max_eigen_fitness(gram_matrix(pop[i], x));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("individual " + std::to_string(i) + ": " + e.what(),
                             e.last_estimate());
    } catch (const NumericError& e) {
      throw NumericError("individual " + std::to_string(i) + ": " + e.what());
    } catch (const DimensionError& e) {
      throw DimensionError("individual " + std::to_string(i) + ": " + e.what());
    } catch (const UsageError& e) {
      throw UsageError("individual " + std::to_string(i) + ": " + e.what());
    }
  });
  return fitness;
}

// The eliteSize fittest individuals, ties broken by lower population index,
// sorted by descending fitness.
inline std::vector<std::size_t> select_elite_indices(const std::vector<double>& fitness,
                                                     int elite_size) {
  if (elite_size < 1 || static_cast<std::size_t>(elite_size) > fitness.size())
    throw UsageError("select_elite: eliteSize out of range");
  std::vector<std::size_t> order(fitness.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fitness[a] > fitness[b];
  });
  order.resize(static_cast<std::size_t>(elite_size));
  return order;
}

inline Population select_elite(const Population& pop, const std::vector<double>& fitness,
                               int elite_size) {
  if (pop.size() != fitness.size())
    throw UsageError("select_elite: fitness not computed for this population");
  Population elite;
  for (const std::size_t i : select_elite_indices(fitness, elite_size))
    elite.push_back(pop[i]);
  return elite;
}

inline double alignment_of(const FeatureMap& fm, const Matrix& x, const LabelVector& y,
                           unsigned threads = 1) {
  return target_alignment(gram_matrix(fm, x, threads), y);
}

struct LocalOptResult {
  FeatureMap individual;
  double initial_alignment = 0.0;
  double final_alignment = 0.0;
  int iterations = 0;
};

// Central-difference gradient of the alignment with respect to the gene
// scales of `fm`, at the current alpha vector.
inline std::vector<double> alignment_gradient(const FeatureMap& fm, const Matrix& x,
                                              const LabelVector& y, double fd_step,
                                              unsigned threads = 1) {
  std::vector<double> grad(fm.genes.size(), 0.0);
  for (std::size_t g = 0; g < fm.genes.size(); ++g) {
    FeatureMap probe = fm;
    probe.genes[g].alpha = fm.genes[g].alpha + fd_step;
    const double up = alignment_of(probe, x, y, threads);
    probe.genes[g].alpha = fm.genes[g].alpha - fd_step;
    const double down = alignment_of(probe, x, y, threads);
    grad[g] = (up - down) / (2.0 * fd_step);
  }
  return grad;
}

// Alignment ascent over the alpha vector: central finite differences,
// backtracking step halving, steps accepted only when the alignment
// improves. Words are never touched, so the result can only match or
// improve the input alignment.
inline LocalOptResult local_optimize(const FeatureMap& ind, const Matrix& x,
                                     const LabelVector& y, const LocalOptConfig& opts,
                                     unsigned threads = 1) {
  opts.validate();
  constexpr double kGradTol = 1e-6;
  constexpr double kMinStep = 1e-7;

  FeatureMap current = ind;
  double alignment = alignment_of(current, x, y, threads);
  if (!std::isfinite(alignment))
    throw NumericError("local_optimize: non-finite alignment at the initial alpha vector");
  LocalOptResult result{current, alignment, alignment, 0};

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const std::vector<double> grad =
        alignment_gradient(current, x, y, opts.fd_step, threads);
    double grad_inf = 0.0;
    for (const double g : grad) {
      if (!std::isfinite(g)) {
        std::string alphas;
        for (const Gene& gene : current.genes)
          alphas += (alphas.empty() ? "" : ", ") + std::to_string(gene.alpha);
        throw NumericError("local_optimize: non-finite alignment near alpha = [" +
                           alphas + "]");
      }
      grad_inf = std::max(grad_inf, std::abs(g));
    }
    if (grad_inf < kGradTol) break;

    bool improved = false;
    for (double step = opts.initial_step_size; step >= kMinStep; step *= 0.5) {
      FeatureMap candidate = current;
      for (std::size_t g = 0; g < grad.size(); ++g)
        candidate.genes[g].alpha = current.genes[g].alpha + step * grad[g];
      const double candidate_alignment = alignment_of(candidate, x, y, threads);
      if (!std::isfinite(candidate_alignment)) continue;
      if (candidate_alignment > alignment) {
        current = std::move(candidate);
        alignment = candidate_alignment;
        improved = true;
        break;
      }
    }
    result.iterations = iter + 1;
    if (!improved) break;
  }

  result.individual = std::move(current);
  result.final_alignment = alignment;
  return result;
}

// Single-point chain splice: the first `cut_a` genes of a followed by the
// genes of b from position `cut_b` on, truncated to the chain cap.
inline FeatureMap splice_chains(const FeatureMap& a, const FeatureMap& b,
                                std::size_t cut_a, std::size_t cut_b,
                                std::size_t chain_cap) {
  std::vector<Gene> genes;
  for (std::size_t g = 0; g < cut_a && g < a.genes.size(); ++g) genes.push_back(a.genes[g]);
  for (std::size_t g = cut_b; g < b.genes.size(); ++g) genes.push_back(b.genes[g]);
  if (genes.size() > chain_cap)
    genes.erase(genes.begin() + static_cast<std::ptrdiff_t>(chain_cap), genes.end());
  if (genes.empty()) throw UsageError("splice_chains: empty child");
  return FeatureMap(a.qubits, std::move(genes));
}

// Next generation: the elite pass through unchanged as the first slots;
// each remaining slot picks two distinct elite parents and either splices
// them (probability crossoverRate) or clones parent A.
inline Population crossover(const Population& elite, int population_size,
                            double crossover_rate, int gene_chain_size,
                            std::uint64_t master_seed, std::uint64_t generation) {
  if (elite.size() < 2) throw UsageError("crossover: need at least two elite parents");
  if (population_size < static_cast<int>(elite.size()))
    throw UsageError("crossover: population smaller than the elite");

  Population next(elite.begin(), elite.end());
  next.reserve(static_cast<std::size_t>(population_size));
  for (int slot = static_cast<int>(elite.size()); slot < population_size; ++slot) {
    Rng rng(derive_seed(master_seed, StreamKind::Crossover, generation,
                        static_cast<std::uint64_t>(slot)));
    const std::size_t pa = rng.next_index(elite.size());
    std::size_t pb = rng.next_index(elite.size() - 1);
    if (pb >= pa) ++pb;

    const FeatureMap& a = elite[pa];
    const FeatureMap& b = elite[pb];
    if (rng.next_double() < crossover_rate) {
      // Redraw the one combination that would produce an empty child.
      for (;;) {
        const std::size_t cut_a = rng.next_index(a.genes.size() + 1);
        const std::size_t cut_b = rng.next_index(b.genes.size() + 1);
        if (cut_a == 0 && cut_b == b.genes.size()) continue;
        next.push_back(splice_chains(a, b, cut_a, cut_b,
                                     static_cast<std::size_t>(gene_chain_size)));
        break;
      }
    } else {
      next.push_back(a);
    }
  }
  return next;
}

// Per gene, with probability mutationPercentage, applies one mutation chosen
// uniformly between replacing a random letter (all-identity results redrawn)
// and rescaling alpha by a factor in [0.5, 2.0].
inline FeatureMap mutate(const FeatureMap& ind, double mutation_percentage, Rng& rng) {
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  std::vector<Gene> genes;
  genes.reserve(ind.genes.size());
  for (const Gene& gene : ind.genes) {
    if (rng.next_double() >= mutation_percentage) {
      genes.push_back(gene);
      continue;
    }
    if (rng.next_index(2) == 0) {
      // Letter replacement; phase-only results are redrawn like all-identity ones.
      std::string letters = gene.word.letters();
      for (;;) {
        const std::size_t pos = rng.next_index(letters.size());
        char replacement;
        do {
          replacement = kLetters[rng.next_index(4)];
        } while (replacement == letters[pos]);
        std::string candidate = letters;
        candidate[pos] = replacement;
        if (detail::phase_only_word(candidate)) continue;
        genes.emplace_back(PauliWord(std::move(candidate)), gene.alpha);
        break;
      }
    } else {
      genes.emplace_back(gene.word, gene.alpha * rng.uniform(0.5, 2.0));
    }
  }
  return FeatureMap(ind.qubits, std::move(genes));
}

inline FeatureMap mutate(const FeatureMap& ind, double mutation_percentage,
                         std::uint64_t master_seed, std::uint64_t generation,
                         std::uint64_t slot) {
  Rng rng(derive_seed(master_seed, StreamKind::Mutation, generation, slot));
  return mutate(ind, mutation_percentage, rng);
}

// The full evolutionary loop: evaluate, early-stop check, elite selection,
// local alignment ascent of the elite, crossover, mutation per generation.
//
// Two metrics cooperate: selection and the early stop follow the eigenvalue
// fitness, while the elite's scale parameters climb the target alignment.
// The returned individual is the best-aligned locally optimized candidate
// seen over the whole run (refined once more before returning), so the
// artifact handed downstream is always alignment-optimal, even when the
// eigenvalue target fires early.
inline std::pair<FeatureMap, EvolutionReport> run_evolution(const EvolutionConfig& cfg,
                                                            const Matrix& x,
                                                            const LabelVector& y,
                                                            unsigned threads = 1) {
  cfg.validate();
  if (x.cols != static_cast<std::size_t>(cfg.qubit_size))
    throw DimensionError("run_evolution: dataset has " + std::to_string(x.cols) +
                         " columns, config expects " + std::to_string(cfg.qubit_size));
  require_both_classes(y, "run_evolution");

  const auto t0 = std::chrono::steady_clock::now();
  Population pop = init_population(cfg);

  EvolutionReport report;
  double best_fitness = -1.0;  // running maximum across generations
  std::optional<FeatureMap> best_aligned;
  double best_alignment = -2.0;

  auto annotate = [](int generation, auto&& fn) {
    try {
      return fn();
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(
          "generation " + std::to_string(generation) + ": " + e.what(), e.last_estimate());
    } catch (const NumericError& e) {
      throw NumericError("generation " + std::to_string(generation) + ": " + e.what());
    }
  };

  bool target_reached = false;
  for (int gen = 0; gen < cfg.maximum_generations; ++gen) {
    const std::vector<double> fitness =
        annotate(gen, [&] { return evaluate_population(pop, x, y, threads); });
    double mean = 0.0;
    for (const double f : fitness) {
      mean += f;
      best_fitness = std::max(best_fitness, f);
    }
    mean /= static_cast<double>(fitness.size());

    target_reached = best_fitness >= cfg.target_fitness;

    const std::vector<std::size_t> elite_idx =
        select_elite_indices(fitness, cfg.elite_size);
    Population elite;
    for (const std::size_t i : elite_idx) elite.push_back(pop[i]);

    // Local alignment ascent of each elite member; independent, so parallel.
    // This also runs for the stopping generation so the returned individual
    // is locally refined on an early stop.
    std::vector<LocalOptResult> opts(elite.size());
    annotate(gen, [&] {
      parallel_for(elite.size(), threads, [&](std::size_t e) {
        opts[e] = local_optimize(elite[e], x, y, cfg.local_opt, 1);
      });
      return 0;
    });

    GenerationRecord record;
    record.generation = gen;
    record.mean_fitness = mean;
    record.elite.resize(elite.size());
    double gen_alignment = -2.0;
    for (std::size_t e = 0; e < elite.size(); ++e) {
      elite[e] = opts[e].individual;
      const double refined = annotate(
          gen, [&] { return max_eigen_fitness(gram_matrix(elite[e], x, threads)); });
      best_fitness = std::max(best_fitness, refined);
      record.elite[e] = EliteSnapshot{elite[e], refined, opts[e].final_alignment};
      gen_alignment = std::max(gen_alignment, opts[e].final_alignment);
      if (opts[e].final_alignment > best_alignment) {
        best_alignment = opts[e].final_alignment;
        best_aligned = elite[e];
      }
    }
    record.best_fitness = best_fitness;
    record.best_alignment = gen_alignment;
    report.generations.push_back(std::move(record));

    if (target_reached) break;

    if (gen + 1 < cfg.maximum_generations) {
      pop = crossover(elite, cfg.population_size, cfg.crossover_rate,
                      cfg.gene_chain_size, cfg.master_seed,
                      static_cast<std::uint64_t>(gen));
      for (int slot = cfg.elite_size; slot < cfg.population_size; ++slot) {
        // Elite pass-through slots are never mutated.
        pop[static_cast<std::size_t>(slot)] =
            mutate(pop[static_cast<std::size_t>(slot)], cfg.mutation_percentage,
                   cfg.master_seed, static_cast<std::uint64_t>(gen),
                   static_cast<std::uint64_t>(slot));
      }
    }
  }

  // One final refinement pass on the best-aligned candidate.
  {
    const int last_gen = static_cast<int>(report.generations.size()) - 1;
    const LocalOptResult opt = annotate(last_gen, [&] {
      return local_optimize(*best_aligned, x, y, cfg.local_opt, threads);
    });
    if (opt.final_alignment > best_alignment) {
      best_alignment = opt.final_alignment;
      best_aligned = opt.individual;
      const double refined = annotate(last_gen, [&] {
        return max_eigen_fitness(gram_matrix(opt.individual, x, threads));
      });
      best_fitness = std::max(best_fitness, refined);
    }
  }

  report.stop_reason = target_reached ? "target-reached" : "generations-exhausted";
  report.best_fitness = best_fitness;
  report.best_alignment = best_alignment;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {*best_aligned, std::move(report)};
}

inline void to_json(nlohmann::json& j, const LocalOptConfig& c) {
  j = nlohmann::json{{"maxIterations", c.max_iterations},
                     {"fdStep", c.fd_step},
                     {"initialStepSize", c.initial_step_size}};
}

inline void to_json(nlohmann::json& j, const EvolutionConfig& c) {
  j = nlohmann::json{{"maximumGenerations", c.maximum_generations},
                     {"targetFitness", c.target_fitness},
                     {"qubitSize", c.qubit_size},
                     {"geneChainSize", c.gene_chain_size},
                     {"populationSize", c.population_size},
                     {"crossoverRate", c.crossover_rate},
                     {"mutationPercentage", c.mutation_percentage},
                     {"eliteSize", c.elite_size},
                     {"quantumDim", c.quantum_dim},
                     {"masterSeed", c.master_seed},
                     {"localOpt", c.local_opt}};
}

inline void to_json(nlohmann::json& j, const EliteSnapshot& s) {
  j = nlohmann::json{{"feature_map", s.individual},
                     {"fitness", s.fitness},
                     {"alignment", s.alignment}};
}

inline void to_json(nlohmann::json& j, const GenerationRecord& r) {
  j = nlohmann::json{{"generation", r.generation},
                     {"best_fitness", r.best_fitness},
                     {"mean_fitness", r.mean_fitness},
                     {"best_alignment", r.best_alignment},
                     {"elite", r.elite}};
}

}  // namespace sqs
