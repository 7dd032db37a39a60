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
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/dataset.hpp"
#include "sqs/errors.hpp"
#include "sqs/linalg.hpp"

namespace sqs {

struct MiScore {
  std::size_t column = 0;
  double score = 0.0;
};

// Mutual information (nats) between each feature and the label, with
// equal-frequency binning. Bins are defined by order-statistic edges, so
// the score is invariant under strictly monotone per-feature transforms.
inline std::vector<MiScore> mutual_info_rank(const Dataset& ds, int bins = 10) {
  if (bins < 2) throw UsageError("mutual_info_rank: bins must be >= 2");
  require_both_classes(ds.labels, "mutual_info_rank");
  const std::size_t n = ds.rows();

  std::vector<MiScore> scores(ds.cols());
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    std::vector<double> sorted(n);
    for (std::size_t r = 0; r < n; ++r) sorted[r] = ds.features.at(r, c);
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> edges;
    edges.reserve(static_cast<std::size_t>(bins) - 1);
    for (int b = 1; b < bins; ++b)
      edges.push_back(sorted[(n * static_cast<std::size_t>(b)) / static_cast<std::size_t>(bins)]);

    // joint[bin][class], class 0 = negative, 1 = positive
    std::vector<std::size_t> joint(static_cast<std::size_t>(bins) * 2, 0);
    for (std::size_t r = 0; r < n; ++r) {
      const double v = ds.features.at(r, c);
      std::size_t bin = 0;
      for (const double e : edges)
        if (v >= e) ++bin;
      joint[bin * 2 + (ds.labels[r] == 1 ? 1 : 0)]++;
    }

    double mi = 0.0;
    const double total = static_cast<double>(n);
    std::size_t class_count[2] = {0, 0};
    for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b) {
      class_count[0] += joint[b * 2];
      class_count[1] += joint[b * 2 + 1];
    }
    for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b) {
      const double p_b =
          static_cast<double>(joint[b * 2] + joint[b * 2 + 1]) / total;
      if (p_b == 0.0) continue;
      for (int cls = 0; cls < 2; ++cls) {
        const std::size_t count = joint[b * 2 + static_cast<std::size_t>(cls)];
        if (count == 0) continue;
        const double p_bc = static_cast<double>(count) / total;
        const double p_c = static_cast<double>(class_count[cls]) / total;
        mi += p_bc * std::log(p_bc / (p_b * p_c));
      }
    }
    scores[c] = MiScore{c, mi};
  }

  std::sort(scores.begin(), scores.end(), [](const MiScore& a, const MiScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.column < b.column;
  });
  return scores;
}

// Fitted column selection + standardization + orthonormal projection +
// per-component affine map onto [-pi, pi]. All statistics come from the
// training set the model was fitted on.
struct ReductionModel {
  std::vector<std::size_t> selected_columns;  // in MI rank order
  std::vector<std::string> selected_names;
  std::vector<double> means;
  std::vector<double> stds;
  Matrix projection;  // k x r, orthonormal columns; column 0 is the Fisher direction
  std::vector<double> proj_min;  // training ranges of projected components
  std::vector<double> proj_max;

  std::size_t input_dim() const { return selected_columns.size(); }
  std::size_t output_dim() const { return projection.cols; }

  bool operator==(const ReductionModel& other) const = default;
};

inline void to_json(nlohmann::json& j, const ReductionModel& m) {
  std::vector<std::vector<double>> proj(m.projection.rows);
  for (std::size_t r = 0; r < m.projection.rows; ++r)
    proj[r].assign(m.projection.row(r).begin(), m.projection.row(r).end());
  j = nlohmann::json{{"selected_columns", m.selected_columns},
                     {"selected_names", m.selected_names},
                     {"means", m.means},
                     {"stds", m.stds},
                     {"projection", proj},
                     {"proj_min", m.proj_min},
                     {"proj_max", m.proj_max}};
}

inline ReductionModel reduction_model_from_json(const nlohmann::json& j) {
  ReductionModel m;
  m.selected_columns = j.at("selected_columns").get<std::vector<std::size_t>>();
  m.selected_names = j.at("selected_names").get<std::vector<std::string>>();
  m.means = j.at("means").get<std::vector<double>>();
  m.stds = j.at("stds").get<std::vector<double>>();
  const auto proj = j.at("projection").get<std::vector<std::vector<double>>>();
  if (proj.empty()) throw ConfigError("reduction model: empty projection");
  m.projection = Matrix(proj.size(), proj[0].size());
  for (std::size_t r = 0; r < proj.size(); ++r) {
    if (proj[r].size() != m.projection.cols)
      throw ConfigError("reduction model: ragged projection");
    std::copy(proj[r].begin(), proj[r].end(), m.projection.row(r).begin());
  }
  m.proj_min = j.at("proj_min").get<std::vector<double>>();
  m.proj_max = j.at("proj_max").get<std::vector<double>>();
  return m;
}

namespace detail {

// Standardized view of the selected columns of a dataset under a model.
inline Matrix standardized_selected(const ReductionModel& m, const Dataset& ds) {
  const std::size_t k = m.input_dim();
  Matrix z(ds.rows(), k);
  for (std::size_t r = 0; r < ds.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c)
      z.at(r, c) = (ds.features.at(r, m.selected_columns[c]) - m.means[c]) / m.stds[c];
  return z;
}

}  // namespace detail

// Fits the reduction on a training set: selects topK columns by mutual
// information, standardizes them, takes the Fisher discriminant direction
// as component 1 and fills the remaining components with the leading
// principal directions of the orthogonal complement.
inline ReductionModel fit_reduction(const Dataset& train, int top_k, int out_dim,
                                    int bins = 10) {
  if (out_dim < 1) throw UsageError("fit_reduction: outDim must be >= 1");
  require_both_classes(train.labels, "fit_reduction");
  const int k = std::min<int>(top_k, static_cast<int>(train.cols()));
  if (out_dim > k)
    throw UsageError("fit_reduction: outDim " + std::to_string(out_dim) +
                     " exceeds selected column count " + std::to_string(k));

  ReductionModel model;
  const std::vector<MiScore> ranked = mutual_info_rank(train, bins);
  for (int i = 0; i < k; ++i) {
    model.selected_columns.push_back(ranked[static_cast<std::size_t>(i)].column);
    model.selected_names.push_back(
        ranked[static_cast<std::size_t>(i)].column < train.column_names.size()
            ? train.column_names[ranked[static_cast<std::size_t>(i)].column]
            : std::string{});
  }

  const std::size_t n = train.rows();
  const std::size_t kk = static_cast<std::size_t>(k);
  model.means.assign(kk, 0.0);
  model.stds.assign(kk, 1.0);
  for (std::size_t c = 0; c < kk; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      mean += train.features.at(r, model.selected_columns[c]);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = train.features.at(r, model.selected_columns[c]) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n - 1);
    model.means[c] = mean;
    model.stds[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  const Matrix z = detail::standardized_selected(model, train);

  // Class means and within-class scatter of the standardized data.
  std::vector<double> mean_pos(kk, 0.0), mean_neg(kk, 0.0);
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t r = 0; r < n; ++r) {
    auto& acc = train.labels[r] == 1 ? mean_pos : mean_neg;
    (train.labels[r] == 1 ? n_pos : n_neg)++;
    for (std::size_t c = 0; c < kk; ++c) acc[c] += z.at(r, c);
  }
  for (std::size_t c = 0; c < kk; ++c) {
    mean_pos[c] /= static_cast<double>(n_pos);
    mean_neg[c] /= static_cast<double>(n_neg);
  }

  Matrix scatter(kk, kk);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& mu = train.labels[r] == 1 ? mean_pos : mean_neg;
    for (std::size_t a = 0; a < kk; ++a) {
      const double da = z.at(r, a) - mu[a];
      for (std::size_t b = a; b < kk; ++b) {
        const double v = da * (z.at(r, b) - mu[b]);
        scatter.at(a, b) += v;
        if (b != a) scatter.at(b, a) += v;
      }
    }
  }
  double diag_mean = 0.0;
  for (std::size_t c = 0; c < kk; ++c) diag_mean += scatter.at(c, c);
  diag_mean /= static_cast<double>(kk);
  if (!(diag_mean > 0.0))
    throw NumericError("fit_reduction: degenerate within-class scatter");
  for (std::size_t c = 0; c < kk; ++c) scatter.at(c, c) += 1e-6 * diag_mean;

  std::vector<double> delta(kk);
  for (std::size_t c = 0; c < kk; ++c) delta[c] = mean_pos[c] - mean_neg[c];
  std::vector<double> fisher = linalg::cholesky_solve(scatter, delta);
  const double fisher_norm = linalg::norm2(fisher);
  if (!(fisher_norm > 0.0) || !std::isfinite(fisher_norm))
    throw NumericError("fit_reduction: Fisher direction is degenerate");
  for (double& v : fisher) v /= fisher_norm;

  // Covariance of the standardized data, deflated against the Fisher
  // direction, provides the remaining components.
  std::vector<double> total_mean(kk, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < kk; ++c) total_mean[c] += z.at(r, c);
  for (std::size_t c = 0; c < kk; ++c) total_mean[c] /= static_cast<double>(n);

  Matrix cov(kk, kk);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t a = 0; a < kk; ++a) {
      const double da = z.at(r, a) - total_mean[a];
      for (std::size_t b = a; b < kk; ++b) {
        const double v = da * (z.at(r, b) - total_mean[b]);
        cov.at(a, b) += v;
        if (b != a) cov.at(b, a) += v;
      }
    }
  }
  for (auto& v : cov.data) v /= static_cast<double>(n - 1);

  // C' = (I - w w^T) C (I - w w^T)
  auto deflect = [&](const Matrix& m) {
    Matrix p = Matrix::identity(kk);
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t b = 0; b < kk; ++b) p.at(a, b) -= fisher[a] * fisher[b];
    Matrix tmp(kk, kk);
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t b = 0; b < kk; ++b) {
        double acc = 0.0;
        for (std::size_t t = 0; t < kk; ++t) acc += p.at(a, t) * m.at(t, b);
        tmp.at(a, b) = acc;
      }
    Matrix out(kk, kk);
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t b = 0; b < kk; ++b) {
        double acc = 0.0;
        for (std::size_t t = 0; t < kk; ++t) acc += tmp.at(a, t) * p.at(t, b);
        out.at(a, b) = acc;
      }
    return out;
  };

  const linalg::EigenDecomposition eig = linalg::jacobi_eigen(deflect(cov));

  // Modified Gram-Schmidt over [fisher | eigenvectors by eigenvalue] keeps
  // the basis orthonormal even for rank-deficient covariance.
  std::vector<std::vector<double>> basis;
  basis.push_back(fisher);
  for (std::size_t col = 0; col < kk && basis.size() < static_cast<std::size_t>(out_dim);
       ++col) {
    std::vector<double> v(kk);
    for (std::size_t rr = 0; rr < kk; ++rr) v[rr] = eig.vectors.at(rr, col);
    for (const auto& b : basis) {
      const double proj = linalg::dot(v, b);
      for (std::size_t rr = 0; rr < kk; ++rr) v[rr] -= proj * b[rr];
    }
    const double vn = linalg::norm2(v);
    if (vn < 1e-6) continue;
    for (double& x : v) x /= vn;
    basis.push_back(std::move(v));
  }
  if (basis.size() < static_cast<std::size_t>(out_dim))
    throw NumericError("fit_reduction: could not build " + std::to_string(out_dim) +
                       " orthonormal components");

  model.projection = Matrix(kk, static_cast<std::size_t>(out_dim));
  for (std::size_t col = 0; col < static_cast<std::size_t>(out_dim); ++col)
    for (std::size_t rr = 0; rr < kk; ++rr)
      model.projection.at(rr, col) = basis[col][rr];

  // Training ranges of the projected components drive the [-pi, pi] map.
  model.proj_min.assign(static_cast<std::size_t>(out_dim),
                        std::numeric_limits<double>::infinity());
  model.proj_max.assign(static_cast<std::size_t>(out_dim),
                        -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t col = 0; col < static_cast<std::size_t>(out_dim); ++col) {
      double p = 0.0;
      for (std::size_t c = 0; c < kk; ++c) p += z.at(r, c) * model.projection.at(c, col);
      model.proj_min[col] = std::min(model.proj_min[col], p);
      model.proj_max[col] = std::max(model.proj_max[col], p);
    }
  }
  return model;
}

// Select, standardize and project with the fitted statistics, then map each
// component affinely onto [-pi, pi] using the training range (out-of-range
// values clip to the bounds).
inline Dataset apply_reduction(const ReductionModel& model, const Dataset& ds) {
  for (std::size_t c = 0; c < model.selected_columns.size(); ++c) {
    const std::size_t col = model.selected_columns[c];
    if (col >= ds.cols())
      throw UsageError("apply_reduction: dataset lacks column index " +
                       std::to_string(col));
    if (!model.selected_names[c].empty() && col < ds.column_names.size() &&
        !ds.column_names.empty() && ds.column_names[col] != model.selected_names[c])
      throw UsageError("apply_reduction: column " + std::to_string(col) + " is \"" +
                       ds.column_names[col] + "\", model expects \"" +
                       model.selected_names[c] + "\"");
  }

  const Matrix z = detail::standardized_selected(model, ds);
  const std::size_t r_dim = model.output_dim();

  Dataset out;
  out.features = Matrix(ds.rows(), r_dim);
  out.labels = ds.labels;
  out.provenance = ds.provenance + " (reduced)";
  for (std::size_t col = 0; col < r_dim; ++col)
    out.column_names.push_back("c" + std::to_string(col));

  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t col = 0; col < r_dim; ++col) {
      double p = 0.0;
      for (std::size_t c = 0; c < model.input_dim(); ++c)
        p += z.at(r, c) * model.projection.at(c, col);
      const double lo = model.proj_min[col];
      const double hi = model.proj_max[col];
      double angle = 0.0;
      if (hi > lo) {
        const double clipped = std::clamp(p, lo, hi);
        angle = -std::numbers::pi + 2.0 * std::numbers::pi * (clipped - lo) / (hi - lo);
      }
      out.features.at(r, col) = angle;
    }
  }
  return out;
}

}  // namespace sqs
