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

#include <bit>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "sqs/errors.hpp"
#include "sqs/pauli.hpp"

namespace sqs {

using Complex = std::complex<double>;

// Dense 2^n-amplitude state. Basis ordering is little-endian: qubit 0 is
// the least-significant bit of the amplitude index.
struct StateVector {
  int qubits = 0;
  std::vector<Complex> amplitudes;

  std::size_t dim() const { return amplitudes.size(); }

  double norm() const {
    double acc = 0.0;
    for (const Complex& a : amplitudes) acc += std::norm(a);
    return std::sqrt(acc);
  }
};

inline StateVector init_zero_state(int qubits) {
  if (qubits < 1 || qubits > kMaxQubits)
    throw ConfigError("init_zero_state: qubit count must be between 1 and 10, got " +
                      std::to_string(qubits));
  StateVector state;
  state.qubits = qubits;
  state.amplitudes.assign(std::size_t{1} << qubits, Complex{0.0, 0.0});
  state.amplitudes[0] = Complex{1.0, 0.0};
  return state;
}

namespace detail {

inline void hadamard_layer_in_place(StateVector& state) {
  constexpr double inv_sqrt2 = 0.70710678118654752440084436210485;
  const std::size_t dim = state.dim();
  for (int q = 0; q < state.qubits; ++q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const Complex a = state.amplitudes[i];
      const Complex b = state.amplitudes[i | bit];
      state.amplitudes[i] = (a + b) * inv_sqrt2;
      state.amplitudes[i | bit] = (a - b) * inv_sqrt2;
    }
  }
}

// exp(-i theta/2 P) |psi> = cos(theta/2)|psi> - i sin(theta/2) P|psi>.
// P maps |j> to i^{#Y} (-1)^{popcount(j & phase_mask)} |j ^ flip_mask>.
inline void pauli_rotation_in_place(StateVector& state, const PauliWord& word,
                                    double theta) {
  if (word.size() != static_cast<std::size_t>(state.qubits))
    throw DimensionError("apply_pauli_rotation: word length " +
                         std::to_string(word.size()) + " does not match qubit count " +
                         std::to_string(state.qubits));
  if (theta == 0.0) return;

  const double c = std::cos(0.5 * theta);
  const Complex minus_i_s{0.0, -std::sin(0.5 * theta)};
  // i^{#Y}, folded into the off-diagonal factor once.
  static constexpr Complex i_powers[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  const Complex off = minus_i_s * i_powers[word.y_count() & 3];

  const std::size_t flip = word.flip_mask();
  const std::size_t phase = word.phase_mask();
  const std::size_t dim = state.dim();

  if (flip == 0) {
    // Pure Z-type word: diagonal action.
    for (std::size_t j = 0; j < dim; ++j) {
      const double sign = (std::popcount(j & phase) & 1) ? -1.0 : 1.0;
      state.amplitudes[j] *= Complex{c, 0.0} + off * sign;
    }
    return;
  }

  const std::size_t pivot = flip & (~flip + 1);  // lowest flipped bit
  for (std::size_t j = 0; j < dim; ++j) {
    if (j & pivot) continue;
    const std::size_t k = j ^ flip;
    const double sign_j = (std::popcount(j & phase) & 1) ? -1.0 : 1.0;
    const double sign_k = (std::popcount(k & phase) & 1) ? -1.0 : 1.0;
    const Complex aj = state.amplitudes[j];
    const Complex ak = state.amplitudes[k];
    state.amplitudes[j] = c * aj + off * sign_k * ak;
    state.amplitudes[k] = c * ak + off * sign_j * aj;
  }
}

}  // namespace detail

inline StateVector apply_hadamard_layer(StateVector state) {
  detail::hadamard_layer_in_place(state);
  return state;
}

inline StateVector apply_pauli_rotation(StateVector state, const PauliWord& word,
                                        double theta) {
  detail::pauli_rotation_in_place(state, word, theta);
  return state;
}

// |phi(x)> : Hadamard layer on |0...0>, then each gene's rotation in chain
// order with angle alpha * prod of features at non-identity positions.
inline StateVector encode(const FeatureMap& fm, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(fm.qubits))
    throw DimensionError("encode: datapoint has " + std::to_string(x.size()) +
                         " features, feature map expects " + std::to_string(fm.qubits));
  StateVector state = init_zero_state(fm.qubits);
  detail::hadamard_layer_in_place(state);
  for (const Gene& gene : fm.genes)
    detail::pauli_rotation_in_place(state, gene.word, angle_for_gene(gene, x));
  return state;
}

// Inverse of encode applied to an existing state: rotations in reverse
// order with negated angles, then the Hadamard layer (its own inverse).
inline void apply_inverse_encode(StateVector& state, const FeatureMap& fm,
                                 std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(fm.qubits) ||
      state.qubits != fm.qubits)
    throw DimensionError("apply_inverse_encode: dimension mismatch");
  for (auto it = fm.genes.rbegin(); it != fm.genes.rend(); ++it)
    detail::pauli_rotation_in_place(state, it->word, -angle_for_gene(*it, x));
  detail::hadamard_layer_in_place(state);
}

}  // namespace sqs
