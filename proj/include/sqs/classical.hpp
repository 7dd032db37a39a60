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

#include "sqs/errors.hpp"
#include "sqs/kernel.hpp"
#include "sqs/linalg.hpp"

namespace sqs {

// Classical kernels for the SVC baselines; both feed the same precomputed
// kernel solver as the quantum path.

// gamma = 1 / (d * var(X)) over all entries, the conventional default.
inline double rbf_gamma_default(const Matrix& x) {
  if (x.rows == 0 || x.cols == 0) throw UsageError("rbf_gamma_default: empty matrix");
  double mean = 0.0;
  for (double v : x.data) mean += v;
  mean /= static_cast<double>(x.data.size());
  double var = 0.0;
  for (double v : x.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.data.size());
  const double d = static_cast<double>(x.cols);
  return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

inline double rbf_entry(std::span<const double> a, std::span<const double> b,
                        double gamma) {
  double dist_sq = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    dist_sq += d * d;
  }
  return std::exp(-gamma * dist_sq);
}

inline GramMatrix rbf_gram(const Matrix& x, double gamma) {
  if (x.rows == 0) throw UsageError("rbf_gram: empty dataset");
  GramMatrix k(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    k.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < x.rows; ++j) {
      const double v = rbf_entry(x.row(i), x.row(j), gamma);
      k.at(i, j) = v;
      k.at(j, i) = v;
    }
  }
  return k;
}

inline Matrix rbf_cross_gram(const Matrix& x_eval, const Matrix& x_train, double gamma) {
  if (x_eval.cols != x_train.cols)
    throw DimensionError("rbf_cross_gram: column counts differ");
  Matrix k(x_eval.rows, x_train.rows);
  for (std::size_t i = 0; i < x_eval.rows; ++i)
    for (std::size_t j = 0; j < x_train.rows; ++j)
      k.at(i, j) = rbf_entry(x_eval.row(i), x_train.row(j), gamma);
  return k;
}

inline GramMatrix linear_gram(const Matrix& x) {
  if (x.rows == 0) throw UsageError("linear_gram: empty dataset");
  GramMatrix k(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = i; j < x.rows; ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < x.cols; ++c) v += x.at(i, c) * x.at(j, c);
      k.at(i, j) = v;
      k.at(j, i) = v;
    }
  }
  return k;
}

inline Matrix linear_cross_gram(const Matrix& x_eval, const Matrix& x_train) {
  if (x_eval.cols != x_train.cols)
    throw DimensionError("linear_cross_gram: column counts differ");
  Matrix k(x_eval.rows, x_train.rows);
  for (std::size_t i = 0; i < x_eval.rows; ++i)
    for (std::size_t j = 0; j < x_train.rows; ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < x_eval.cols; ++c)
        v += x_eval.at(i, c) * x_train.at(j, c);
      k.at(i, j) = v;
    }
  return k;
}

}  // namespace sqs
