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
#include <cstddef>
#include <span>
#include <vector>

#include "sqs/errors.hpp"

namespace sqs {

// Dense row-major matrix. Small and boring on purpose: every linear-algebra
// problem in this codebase is at most a few hundred rows.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data.data() + r * cols, cols);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data.data() + r * cols, cols);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  bool operator==(const Matrix& other) const = default;
};

namespace linalg {

inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double acc = 0.0;
    const double* row = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k is the eigenvector of values[k]
};

// Cyclic Jacobi eigensolver for symmetric matrices. Quadratic per sweep and
// only used on small problems (projection fitting, test oracles).
inline EigenDecomposition jacobi_eigen(const Matrix& a_in, int max_sweeps = 100,
                                       double tol = 1e-14) {
  if (a_in.rows != a_in.cols) throw DimensionError("jacobi_eigen: matrix not square");
  const std::size_t n = a_in.rows;
  Matrix a = a_in;
  Matrix v = Matrix::identity(n);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a.at(i, j)));
  const double off_tol = tol * std::max(scale, 1.0);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (std::sqrt(off) <= off_tol) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) <= off_tol * 1e-2) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v.at(k, p);
          const double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  EigenDecomposition out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a.at(i, i);

  // Sort descending, permuting eigenvector columns along.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < n; ++j)
      if (out.values[order[j]] > out.values[order[best]]) best = j;
    std::swap(order[i], order[best]);
  }
  std::vector<double> sorted(n);
  Matrix vectors(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = out.values[order[k]];
    for (std::size_t i = 0; i < n; ++i) vectors.at(i, k) = v.at(i, order[k]);
  }
  out.values = std::move(sorted);
  out.vectors = std::move(vectors);
  return out;
}

// Solves A x = b for symmetric positive definite A via Cholesky.
inline std::vector<double> cholesky_solve(const Matrix& a, const std::vector<double>& b) {
  if (a.rows != a.cols || a.rows != b.size())
    throw DimensionError("cholesky_solve: dimension mismatch");
  const std::size_t n = a.rows;
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (sum <= 0.0 || !std::isfinite(sum))
          throw NumericError("cholesky_solve: matrix not positive definite");
        l.at(i, i) = std::sqrt(sum);
      } else {
        l.at(i, j) = sum / l.at(j, j);
      }
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l.at(i, k) * y[k];
    y[i] = sum / l.at(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= l.at(k, ii) * x[k];
    x[ii] = sum / l.at(ii, ii);
  }
  return x;
}

}  // namespace linalg
}  // namespace sqs
