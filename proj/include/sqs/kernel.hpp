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
#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/errors.hpp"
#include "sqs/linalg.hpp"
#include "sqs/parallel.hpp"
#include "sqs/pauli.hpp"
#include "sqs/rng.hpp"
#include "sqs/statevector.hpp"

namespace sqs {

// Symmetric kernel matrix over a dataset. Fidelity kernels additionally have
// a unit diagonal, entries in [0, 1] and a PSD spectrum; validate() checks
// the cheap invariants, min_eigenvalue() is for tests and diagnostics.
class GramMatrix {
 public:
  GramMatrix() = default;
  explicit GramMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& at(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  const std::vector<double>& entries() const { return entries_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
    return t;
  }

  // Cheap fidelity-kernel invariants: symmetry, unit diagonal, entry bounds.
  void validate(double tol = 1e-10) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (std::abs(at(i, i) - 1.0) > tol)
        throw NumericError("GramMatrix: diagonal entry " + std::to_string(i) +
                           " deviates from 1");
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (std::abs(at(i, j) - at(j, i)) > tol)
          throw NumericError("GramMatrix: asymmetry at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
        if (at(i, j) < -tol || at(i, j) > 1.0 + tol)
          throw NumericError("GramMatrix: entry out of [0,1] at (" + std::to_string(i) +
                             "," + std::to_string(j) + ")");
      }
    }
  }

  Matrix to_matrix() const {
    Matrix m(n_, n_);
    m.data = entries_;
    return m;
  }

  bool operator==(const GramMatrix& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

// |<a|b>|^2 for pure states.
inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim())
    throw DimensionError("fidelity: state dimensions differ (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  Complex ip{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i)
    ip += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  return std::norm(ip);
}

inline double kernel_entry(const FeatureMap& fm, std::span<const double> x,
                           std::span<const double> x2) {
  return fidelity(encode(fm, x), encode(fm, x2));
}

// Full kernel matrix: each row of X is encoded once, then pairwise
// fidelities fill the upper triangle and are mirrored. Every entry is an
// independent computation, so the result does not depend on the schedule.
inline GramMatrix gram_matrix(const FeatureMap& fm, const Matrix& x,
                              unsigned threads = 1) {
  if (x.rows == 0) throw UsageError("gram_matrix: empty dataset");
  if (x.cols != static_cast<std::size_t>(fm.qubits))
    throw DimensionError("gram_matrix: dataset has " + std::to_string(x.cols) +
                         " columns, feature map expects " + std::to_string(fm.qubits));

  const std::size_t n = x.rows;
  std::vector<StateVector> states(n);
  parallel_for(n, threads, [&](std::size_t i) { states[i] = encode(fm, x.row(i)); });

  GramMatrix k(n);
  const std::size_t pairs = n * (n - 1) / 2;
  parallel_for(pairs, threads, [&](std::size_t p) {
    // Unrank the flattened upper-triangle index.
    std::size_t i = 0;
    std::size_t offset = p;
    while (offset >= n - 1 - i) {
      offset -= n - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + offset;
    const double v = fidelity(states[i], states[j]);
    k.at(i, j) = v;
    k.at(j, i) = v;
  });
  for (std::size_t i = 0; i < n; ++i) k.at(i, i) = 1.0;
  return k;
}

// Rectangular kernel block between evaluation and training sets.
inline Matrix cross_gram(const FeatureMap& fm, const Matrix& x_eval,
                         const Matrix& x_train, unsigned threads = 1) {
  if (x_eval.cols != static_cast<std::size_t>(fm.qubits) ||
      x_train.cols != static_cast<std::size_t>(fm.qubits))
    throw DimensionError("cross_gram: column count does not match feature map qubits");
  if (x_eval.rows == 0 || x_train.rows == 0)
    throw UsageError("cross_gram: empty dataset");

  std::vector<StateVector> eval_states(x_eval.rows);
  std::vector<StateVector> train_states(x_train.rows);
  parallel_for(x_eval.rows, threads,
               [&](std::size_t i) { eval_states[i] = encode(fm, x_eval.row(i)); });
  parallel_for(x_train.rows, threads,
               [&](std::size_t j) { train_states[j] = encode(fm, x_train.row(j)); });

  Matrix k(x_eval.rows, x_train.rows);
  parallel_for(x_eval.rows * x_train.rows, threads, [&](std::size_t p) {
    const std::size_t i = p / x_train.rows;
    const std::size_t j = p % x_train.rows;
    k.at(i, j) = fidelity(eval_states[i], train_states[j]);
  });
  return k;
}

// All-zero outcome probability of the inversion-test circuit
// U(x2)^dagger U(x) H^n |0...0>. Equals the exact kernel entry.
inline double inversion_zero_probability(const FeatureMap& fm,
                                         std::span<const double> x,
                                         std::span<const double> x2) {
  StateVector state = encode(fm, x);
  apply_inverse_encode(state, fm, x2);
  return std::norm(state.amplitudes[0]);
}

// Shot-sampled kernel estimate: counts all-zero outcomes in `shots`
// repetitions of the inversion test. Deterministic for a fixed seed.
inline double inversion_test_estimate(const FeatureMap& fm, std::span<const double> x,
                                      std::span<const double> x2, std::uint64_t shots,
                                      std::uint64_t seed) {
  if (shots == 0) throw UsageError("inversion_test_estimate: shots must be >= 1");
  const double p0 = std::clamp(inversion_zero_probability(fm, x, x2), 0.0, 1.0);
  Rng rng(derive_seed(seed, StreamKind::Sampling, 0, 0));
  const std::uint64_t count = rng.next_binomial(shots, p0);
  return static_cast<double>(count) / static_cast<double>(shots);
}

// Shot-sampled Gram matrix used when the CLI runs in "shots:<n>" mode.
// Off-diagonal entries get a per-pair seed; the diagonal stays exactly 1.
inline GramMatrix gram_matrix_sampled(const FeatureMap& fm, const Matrix& x,
                                      std::uint64_t shots, std::uint64_t seed,
                                      unsigned threads = 1) {
  if (x.rows == 0) throw UsageError("gram_matrix_sampled: empty dataset");
  if (shots == 0) throw UsageError("gram_matrix_sampled: shots must be >= 1");
  const std::size_t n = x.rows;
  GramMatrix k(n);
  const std::size_t pairs = n * (n - 1) / 2;
  parallel_for(pairs, threads, [&](std::size_t p) {
    std::size_t i = 0;
    std::size_t offset = p;
    while (offset >= n - 1 - i) {
      offset -= n - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + offset;
    const double v = inversion_test_estimate(fm, x.row(i), x.row(j), shots,
                                             hash_combine(seed, i * n + j));
    k.at(i, j) = v;
    k.at(j, i) = v;
  });
  for (std::size_t i = 0; i < n; ++i) k.at(i, i) = 1.0;
  return k;
}

inline Matrix cross_gram_sampled(const FeatureMap& fm, const Matrix& x_eval,
                                 const Matrix& x_train, std::uint64_t shots,
                                 std::uint64_t seed, unsigned threads = 1) {
  if (shots == 0) throw UsageError("cross_gram_sampled: shots must be >= 1");
  if (x_eval.rows == 0 || x_train.rows == 0)
    throw UsageError("cross_gram_sampled: empty dataset");
  Matrix k(x_eval.rows, x_train.rows);
  parallel_for(x_eval.rows * x_train.rows, threads, [&](std::size_t p) {
    const std::size_t i = p / x_train.rows;
    const std::size_t j = p % x_train.rows;
    k.at(i, j) = inversion_test_estimate(fm, x_eval.row(i), x_train.row(j), shots,
                                         hash_combine(seed, p));
  });
  return k;
}

struct GramExportInfo {
  FeatureMap feature_map;
  bool exact = true;
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
};

// CSV with a header row of sample ids plus a JSON sidecar describing how
// the matrix was produced.
inline void write_gram_csv(const std::string& path, const GramMatrix& k,
                           const std::vector<std::string>& sample_ids,
                           const GramExportInfo& info) {
  if (sample_ids.size() != k.size())
    throw DimensionError("write_gram_csv: id count does not match matrix size");
  std::ofstream out(path);
  if (!out) throw UsageError("write_gram_csv: cannot open " + path);
  for (std::size_t j = 0; j < sample_ids.size(); ++j)
    out << (j ? "," : "") << sample_ids[j];
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < k.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", k.at(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }

  nlohmann::json sidecar{
      {"feature_map", info.feature_map},
      {"n", k.size()},
      {"exact", info.exact},
      {"shots", info.shots ? nlohmann::json(*info.shots) : nlohmann::json(nullptr)},
      {"seed", info.seed ? nlohmann::json(*info.seed) : nlohmann::json(nullptr)},
  };
  std::ofstream side(path + ".json");
  if (!side) throw UsageError("write_gram_csv: cannot open " + path + ".json");
  side << sidecar.dump(2) << "\n";
}

}  // namespace sqs
