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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/errors.hpp"
#include "sqs/fitness.hpp"
#include "sqs/kernel.hpp"
#include "sqs/rng.hpp"

namespace sqs {

struct SvmConfig {
  double C = 1.0;
  // Multiplier on C for the positive (minority) class. When unset it
  // defaults to #negatives / #positives at training time.
  std::optional<double> class_weight_positive;
  double kkt_tolerance = 1e-3;
  int max_passes = 2;

  void validate() const {
    if (!(C > 0.0)) throw ConfigError("SvmConfig: C must be positive");
    if (class_weight_positive && !(*class_weight_positive > 0.0))
      throw ConfigError("SvmConfig: classWeightPositive must be positive");
    if (!(kkt_tolerance > 0.0)) throw ConfigError("SvmConfig: kktTolerance must be positive");
    if (max_passes < 1) throw ConfigError("SvmConfig: maxPasses must be >= 1");
  }
};

// Dual soft-margin solution over a precomputed kernel.
struct TrainedModel {
  std::vector<double> dual_coefficients;  // alpha_i * y_i, zero off-support
  double bias = 0.0;
  std::vector<std::size_t> support_indices;
  LabelVector training_labels;
  SvmConfig config;
  std::vector<std::string> warnings;
  std::uint64_t training_data_digest = 0;
};

inline double svm_dual_objective(const GramMatrix& k, const LabelVector& y,
                                 const std::vector<double>& alpha) {
  double obj = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) obj += alpha[i];
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (alpha[j] == 0.0) continue;
      obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * k.at(i, j);
    }
  }
  return obj;
}

namespace detail {

// Best-effort smallest-eigenvalue estimate via two power iterations:
// lambda_min(K) = lambda_max(K) - lambda_max(lambda_max * I - K).
inline std::optional<double> min_eigenvalue_estimate(const GramMatrix& k) {
  try {
    Matrix m = k.to_matrix();
    const double top = symmetric_max_eigenvalue(m, std::nullopt, 1e-8, 4000);
    const double shift = std::abs(top) + 1.0;
    for (std::size_t i = 0; i < m.rows; ++i)
      for (std::size_t j = 0; j < m.cols; ++j)
        m.at(i, j) = (i == j ? shift : 0.0) - m.at(i, j);
    const double flipped = symmetric_max_eigenvalue(m, std::nullopt, 1e-8, 4000);
    return shift - flipped;
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

}  // namespace detail

// Sequential minimal optimization for the dual problem
//   max sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij
//   s.t. 0 <= alpha_i <= C_i,  sum alpha_i y_i = 0.
// Platt-style pair selection with an error cache. Terminates once
// `max_passes` consecutive full sweeps find no KKT violation beyond
// `kkt_tolerance`.
inline TrainedModel train_precomputed(const GramMatrix& k, const LabelVector& y,
                                      const SvmConfig& cfg) {
  cfg.validate();
  const std::size_t n = k.size();
  if (n == 0) throw UsageError("train_precomputed: empty kernel matrix");
  if (y.size() != n)
    throw DimensionError("train_precomputed: label count does not match kernel size");
  require_both_classes(y, "train_precomputed");

  TrainedModel model;
  model.config = cfg;
  model.training_labels = y;
  model.training_data_digest = fnv1a(k.entries().data(), k.entries().size() * sizeof(double),
                                     fnv1a(y.data(), y.size() * sizeof(int)));

  if (const auto min_eig = detail::min_eigenvalue_estimate(k)) {
    if (*min_eig < -1e-6)
      model.warnings.push_back("kernel matrix not PSD: smallest eigenvalue approx " +
                               std::to_string(*min_eig));
  }

  const std::size_t positives = count_positives(y);
  const double weight_pos = cfg.class_weight_positive
                                ? *cfg.class_weight_positive
                                : static_cast<double>(n - positives) /
                                      static_cast<double>(positives);
  std::vector<double> cap(n);
  for (std::size_t i = 0; i < n; ++i)
    cap[i] = y[i] == 1 ? cfg.C * weight_pos : cfg.C;

  std::vector<double> alpha(n, 0.0);
  std::vector<double> error(n);  // f(x_i) - y_i, with f = sum alpha_j y_j K_ij + b
  for (std::size_t i = 0; i < n; ++i) error[i] = -static_cast<double>(y[i]);
  double bias = 0.0;

  const double tol = cfg.kkt_tolerance;
  constexpr double kEps = 1e-12;
  Rng rng(0x5eedULL + n);  // fixed internal seed: training is deterministic

  auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
    if (i1 == i2) return false;
    const double a1_old = alpha[i1];
    const double a2_old = alpha[i2];
    const double y1 = y[i1];
    const double y2 = y[i2];
    const double e1 = error[i1];
    const double e2 = error[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(cap[i2], cap[i1] + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - cap[i1]);
      hi = std::min(cap[i2], a1_old + a2_old);
    }
    if (lo >= hi) return false;

    const double k11 = k.at(i1, i1);
    const double k12 = k.at(i1, i2);
    const double k22 = k.at(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2_new;
    if (eta > kEps) {
      a2_new = a2_old + y2 * (e1 - e2) / eta;
      a2_new = std::clamp(a2_new, lo, hi);
    } else {
      // Flat or concave direction: evaluate the dual objective change at
      // both interval ends directly.
      const double rest1 = (e1 + y1 - bias) - a1_old * y1 * k11 - a2_old * y2 * k12;
      const double rest2 = (e2 + y2 - bias) - a1_old * y1 * k12 - a2_old * y2 * k22;
      auto delta_objective = [&](double a2) {
        const double a1 = a1_old + s * (a2_old - a2);
        const double d1 = a1 - a1_old;
        const double d2 = a2 - a2_old;
        return d1 + d2 - 0.5 * (a1 * a1 - a1_old * a1_old) * k11 -
               0.5 * (a2 * a2 - a2_old * a2_old) * k22 -
               s * (a1 * a2 - a1_old * a2_old) * k12 - d1 * y1 * rest1 -
               d2 * y2 * rest2;
      };
      const double gain_lo = delta_objective(lo);
      const double gain_hi = delta_objective(hi);
      if (gain_lo > gain_hi && gain_lo > kEps)
        a2_new = lo;
      else if (gain_hi >= gain_lo && gain_hi > kEps)
        a2_new = hi;
      else
        return false;
    }
    if (std::abs(a2_new - a2_old) < kEps * (a2_new + a2_old + kEps)) return false;

    const double a1_new = a1_old + s * (a2_old - a2_new);
    const double d1 = a1_new - a1_old;
    const double d2 = a2_new - a2_old;

    const double b1 = bias - e1 - y1 * d1 * k11 - y2 * d2 * k12;
    const double b2 = bias - e2 - y1 * d1 * k12 - y2 * d2 * k22;
    double bias_new;
    if (a1_new > 0.0 && a1_new < cap[i1])
      bias_new = b1;
    else if (a2_new > 0.0 && a2_new < cap[i2])
      bias_new = b2;
    else
      bias_new = 0.5 * (b1 + b2);

    alpha[i1] = a1_new;
    alpha[i2] = a2_new;
    const double db = bias_new - bias;
    bias = bias_new;
    for (std::size_t i = 0; i < n; ++i)
      error[i] += y1 * d1 * k.at(i1, i) + y2 * d2 * k.at(i2, i) + db;
    return true;
  };

  auto violates_kkt = [&](std::size_t i) {
    const double r = error[i] * y[i];
    return (r < -tol && alpha[i] < cap[i]) || (r > tol && alpha[i] > 0.0);
  };

  auto examine = [&](std::size_t i2) -> bool {
    if (!violates_kkt(i2)) return false;

    // Second-choice heuristic: maximize |E1 - E2| over non-bound points.
    std::ptrdiff_t best = -1;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] <= 0.0 || alpha[i] >= cap[i]) continue;
      const double gap = std::abs(error[i] - error[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best >= 0 && take_step(static_cast<std::size_t>(best), i2)) return true;

    // Fall back to scanning non-bound points, then all, from a random offset.
    const std::size_t start = static_cast<std::size_t>(rng.next_index(n));
    for (std::size_t d = 0; d < n; ++d) {
      const std::size_t i = (start + d) % n;
      if (alpha[i] <= 0.0 || alpha[i] >= cap[i]) continue;
      if (take_step(i, i2)) return true;
    }
    const std::size_t start2 = static_cast<std::size_t>(rng.next_index(n));
    for (std::size_t d = 0; d < n; ++d) {
      const std::size_t i = (start2 + d) % n;
      if (take_step(i, i2)) return true;
    }
    return false;
  };

  int clean_sweeps = 0;
  bool examine_all = true;
  long safety = static_cast<long>(n) * 20000;
  while (clean_sweeps < cfg.max_passes && safety > 0) {
    std::size_t changed = 0;
    std::size_t scanned = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= cap[i])) continue;
      ++scanned;
      if (examine(i)) ++changed;
      --safety;
    }
    if (examine_all) {
      clean_sweeps = changed == 0 ? clean_sweeps + 1 : 0;
      if (changed > 0) examine_all = false;
    } else if (changed == 0 || scanned == 0) {
      examine_all = true;
    }
  }
  if (safety <= 0)
    model.warnings.push_back("SMO hit the safety iteration cap before reaching a clean pass");

  model.dual_coefficients.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > kEps) {
      model.dual_coefficients[i] = alpha[i] * y[i];
      model.support_indices.push_back(i);
    }
  }

  // Recompute the bias from unbounded support vectors for a consistent
  // final value (falls back to the running bias when all are at bound).
  double b_acc = 0.0;
  std::size_t b_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > kEps && alpha[i] < cap[i] - kEps) {
      double f = 0.0;
      for (std::size_t j = 0; j < n; ++j) f += model.dual_coefficients[j] * k.at(i, j);
      b_acc += y[i] - f;
      ++b_count;
    }
  }
  model.bias = b_count > 0 ? b_acc / static_cast<double>(b_count) : bias;
  return model;
}

// f(x_e) = sum_i dual_coefficients[i] * K_cross[e, i] + bias.
inline std::vector<double> decision_values(const TrainedModel& model,
                                           const Matrix& k_cross) {
  if (k_cross.cols != model.dual_coefficients.size())
    throw DimensionError("decision_values: cross-kernel has " +
                         std::to_string(k_cross.cols) + " columns, model expects " +
                         std::to_string(model.dual_coefficients.size()));
  std::vector<double> values(k_cross.rows, model.bias);
  for (std::size_t e = 0; e < k_cross.rows; ++e) {
    double acc = 0.0;
    for (const std::size_t i : model.support_indices)
      acc += model.dual_coefficients[i] * k_cross.at(e, i);
    values[e] += acc;
  }
  return values;
}

// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
// (positive, negative) pairs ranked correctly, ties counted one half.
inline double auc(const std::vector<double>& scores, const LabelVector& labels) {
  if (scores.size() != labels.size())
    throw DimensionError("auc: score and label counts differ");
  require_both_classes(labels, "auc");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks across ties, then the rank-sum formula.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = labels.size() - positives;
  const double numerator =
      positive_rank_sum - 0.5 * static_cast<double>(positives) *
                              static_cast<double>(positives + 1);
  return numerator / (static_cast<double>(positives) * static_cast<double>(negatives));
}

inline void to_json(nlohmann::json& j, const SvmConfig& cfg) {
  j = nlohmann::json{{"C", cfg.C},
                     {"classWeightPositive", cfg.class_weight_positive
                                                 ? nlohmann::json(*cfg.class_weight_positive)
                                                 : nlohmann::json(nullptr)},
                     {"kktTolerance", cfg.kkt_tolerance},
                     {"maxPasses", cfg.max_passes}};
}

inline void to_json(nlohmann::json& j, const TrainedModel& model) {
  j = nlohmann::json{{"dual_coefficients", model.dual_coefficients},
                     {"bias", model.bias},
                     {"support_indices", model.support_indices},
                     {"config", model.config},
                     {"training_data_digest", model.training_data_digest},
                     {"warnings", model.warnings}};
}

}  // namespace sqs
