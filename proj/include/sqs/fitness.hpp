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

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqs/errors.hpp"
#include "sqs/kernel.hpp"
#include "sqs/rng.hpp"

namespace sqs {

// Binary labels in {-1, +1}.
using LabelVector = std::vector<int>;

inline std::size_t count_positives(const LabelVector& y) {
  std::size_t count = 0;
  for (int label : y) {
    if (label != 1 && label != -1)
      throw UsageError("labels must be -1 or +1, got " + std::to_string(label));
    if (label == 1) ++count;
  }
  return count;
}

inline void require_both_classes(const LabelVector& y, const std::string& where) {
  const std::size_t pos = count_positives(y);
  if (pos == 0 || pos == y.size())
    throw UsageError(where + ": both classes must be present");
}

// Alignment between K and the ideal kernel y y^T:
// sum_ij K_ij y_i y_j / (||K||_F * N).  For +-1 labels ||y y^T||_F = N.
inline double target_alignment(const GramMatrix& k, const LabelVector& y) {
  if (k.size() != y.size())
    throw DimensionError("target_alignment: label count " + std::to_string(y.size()) +
                         " does not match matrix size " + std::to_string(k.size()));
  require_both_classes(y, "target_alignment");

  double inner = 0.0;
  double frob_sq = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < k.size(); ++j) {
      const double v = k.at(i, j);
      inner += v * y[i] * y[j];
      frob_sq += v * v;
    }
  }
  const double denom = std::sqrt(frob_sq) * static_cast<double>(k.size());
  if (denom == 0.0) throw NumericError("target_alignment: zero Frobenius norm");
  return inner / denom;
}

// Dominant eigenvalue of a symmetric matrix by power iteration. Converges
// when successive Rayleigh quotients differ by less than rayleigh_tol; for
// PSD inputs the dominant eigenvalue is the largest one. The start vector is
// drawn from `seed`; by default the seed is derived from the matrix contents
// so re-scoring the same matrix reproduces the value bit for bit.
inline double symmetric_max_eigenvalue(const Matrix& k,
                                       std::optional<std::uint64_t> seed = std::nullopt,
                                       double rayleigh_tol = 1e-10,
                                       int max_iterations = 10000) {
  if (k.rows != k.cols) throw DimensionError("symmetric_max_eigenvalue: matrix not square");
  const std::size_t n = k.rows;
  if (n == 0) throw UsageError("symmetric_max_eigenvalue: empty matrix");
  double max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (!std::isfinite(k.at(i, j)) || !std::isfinite(k.at(j, i)))
        throw NumericError("symmetric_max_eigenvalue: non-finite entry");
      max_abs = std::max(max_abs, std::abs(k.at(i, j)));
      if (std::abs(k.at(i, j) - k.at(j, i)) > 1e-8 * std::max(1.0, max_abs))
        throw UsageError("symmetric_max_eigenvalue: matrix not symmetric within 1e-8");
    }
  }
  if (n == 1) return k.at(0, 0);

  Rng rng(seed ? *seed : fnv1a(k.data));
  std::vector<double> v(n);
  for (double& c : v) c = rng.uniform(-1.0, 1.0);
  double vn = linalg::norm2(v);
  if (vn == 0.0) {
    v[0] = 1.0;
    vn = 1.0;
  }
  for (double& c : v) c /= vn;

  double rayleigh_prev = 0.0;
  bool have_prev = false;
  for (int iter = 0; iter < max_iterations; ++iter) {
    std::vector<double> w = linalg::matvec(k, v);
    const double rayleigh = linalg::dot(v, w);
    if (have_prev && std::abs(rayleigh - rayleigh_prev) < rayleigh_tol) return rayleigh;
    rayleigh_prev = rayleigh;
    have_prev = true;

    const double wn = linalg::norm2(w);
    if (wn == 0.0) return 0.0;  // v is in the null space and the matrix is PSD-zero there
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
  }
  throw ConvergenceError("symmetric_max_eigenvalue: no convergence after " +
                             std::to_string(max_iterations) + " iterations",
                         rayleigh_prev);
}

// Selection fitness: dominant eigenvalue normalized by the trace. For a
// unit-diagonal PSD Gram matrix this is lambda_max / N and lies in
// [1/N, 1]; the upper clamp removes floating-point spill above 1 on
// degenerate (all-ones) kernels.
inline double max_eigen_fitness(const GramMatrix& k,
                                std::optional<std::uint64_t> seed = std::nullopt) {
  const double trace = k.trace();
  if (!std::isfinite(trace) || trace == 0.0)
    throw NumericError("max_eigen_fitness: invalid trace");
  return std::min(symmetric_max_eigenvalue(k.to_matrix(), seed) / trace, 1.0);
}

}  // namespace sqs
