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

#include <cmath>
#include <complex>
#include <numbers>

#include "sqs/kernel.hpp"
#include "sqs/pauli.hpp"
#include "sqs/rng.hpp"
#include "sqs/statevector.hpp"
#include "support/dense_sim.hpp"
#include "support/oracles.hpp"

using namespace sqs;
using Catch::Approx;

namespace {

double max_abs_diff(const StateVector& a, const std::vector<sqs_test::Cx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a.amplitudes[i] - b[i]));
  return m;
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    m = std::max(m, std::abs(a.amplitudes[i] - b.amplitudes[i]));
  return m;
}

}  // namespace

TEST_CASE("PauliWord validation") {
  CHECK(PauliWord("XIZ").flip_mask() == 0b001u);
  CHECK(PauliWord("XIZ").phase_mask() == 0b100u);
  CHECK(PauliWord("YY").y_count() == 2);
  CHECK_THROWS_AS(PauliWord("II"), UsageError);
  CHECK_THROWS_AS(PauliWord(""), UsageError);
  CHECK_THROWS_AS(PauliWord("XQ"), UsageError);
  CHECK_THROWS_AS(PauliWord("XXXXXXXXXXX"), UsageError);  // 11 letters
}

TEST_CASE("init_zero_state puts all weight on basis index 0") {
  const StateVector one = init_zero_state(1);
  REQUIRE(one.dim() == 2);
  CHECK(one.amplitudes[0] == Complex{1.0, 0.0});
  CHECK(one.amplitudes[1] == Complex{0.0, 0.0});

  const StateVector two = init_zero_state(2);
  REQUIRE(two.dim() == 4);
  CHECK(two.amplitudes[0] == Complex{1.0, 0.0});
  for (std::size_t i = 1; i < 4; ++i) CHECK(two.amplitudes[i] == Complex{0.0, 0.0});

  const StateVector three = init_zero_state(3);
  REQUIRE(three.dim() == 8);
  CHECK(three.amplitudes[0] == Complex{1.0, 0.0});

  CHECK_THROWS_AS(init_zero_state(0), ConfigError);
  CHECK_THROWS_AS(init_zero_state(11), ConfigError);
}

TEST_CASE("Hadamard layer") {
  const double s = 1.0 / std::sqrt(2.0);
  const StateVector h1 = apply_hadamard_layer(init_zero_state(1));
  CHECK(std::abs(h1.amplitudes[0] - Complex{s, 0.0}) < 1e-15);
  CHECK(std::abs(h1.amplitudes[1] - Complex{s, 0.0}) < 1e-15);

  const StateVector h2 = apply_hadamard_layer(init_zero_state(2));
  for (const Complex& a : h2.amplitudes) CHECK(std::abs(a - Complex{0.5, 0.0}) < 1e-15);

  SECTION("self-inverse on random states") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(rng.next_index(5));
      const StateVector psi = sqs_test::random_state(n, rng);
      const StateVector back = apply_hadamard_layer(apply_hadamard_layer(psi));
      CHECK(max_abs_diff(psi, back) < 1e-12);
      CHECK(std::abs(apply_hadamard_layer(psi).norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("apply_pauli_rotation closed forms") {
  SECTION("X rotation by pi maps |0> to -i|1>") {
    const StateVector out = apply_pauli_rotation(init_zero_state(1), PauliWord("X"),
                                                 std::numbers::pi);
    CHECK(std::abs(out.amplitudes[0]) < 1e-15);
    CHECK(std::abs(out.amplitudes[1] - Complex{0.0, -1.0}) < 1e-15);
  }
  SECTION("Z rotation is a phase on |0>") {
    for (const double theta : {0.3, 1.7, -2.2}) {
      const StateVector out =
          apply_pauli_rotation(init_zero_state(1), PauliWord("Z"), theta);
      const Complex expected = std::exp(Complex{0.0, -theta / 2.0});
      CHECK(std::abs(out.amplitudes[0] - expected) < 1e-15);
      CHECK(std::abs(out.amplitudes[1]) < 1e-15);
    }
  }
  SECTION("zero angle returns the input exactly") {
    Rng rng(7);
    const StateVector psi = sqs_test::random_state(3, rng);
    const StateVector out = apply_pauli_rotation(psi, PauliWord("XYZ"), 0.0);
    for (std::size_t i = 0; i < psi.dim(); ++i)
      CHECK(out.amplitudes[i] == psi.amplitudes[i]);
  }
  SECTION("word length mismatch") {
    CHECK_THROWS_AS(apply_pauli_rotation(init_zero_state(2), PauliWord("X"), 1.0),
                    DimensionError);
  }
}

TEST_CASE("angle_for_gene is alpha times the masked feature product") {
  const double x1[] = {0.5, 0.9};
  CHECK(angle_for_gene(Gene(PauliWord("ZI"), 2.0), x1) == Approx(1.0).margin(1e-15));
  const double x2[] = {0.5, 0.5};
  CHECK(angle_for_gene(Gene(PauliWord("ZZ"), 1.0), x2) == Approx(0.25).margin(1e-15));
  const double x3[] = {1.3, 0.0};
  CHECK(angle_for_gene(Gene(PauliWord("XY"), 1.0), x3) == 0.0);
  const double x_bad[] = {1.0};
  CHECK_THROWS_AS(angle_for_gene(Gene(PauliWord("XY"), 1.0), x_bad), DimensionError);
}

TEST_CASE("encode closed forms") {
  SECTION("zero-alpha genes give the uniform superposition") {
    FeatureMap fm(2, {Gene(PauliWord("ZZ"), 0.0), Gene(PauliWord("XY"), 0.0)});
    const double x[] = {0.7, -0.3};
    const StateVector out = encode(fm, x);
    for (const Complex& a : out.amplitudes) CHECK(std::abs(a - Complex{0.5, 0.0}) < 1e-15);
  }
  SECTION("single Z gene closed form") {
    const double alpha = 1.3;
    const double v = -0.8;
    FeatureMap fm(1, {Gene(PauliWord("Z"), alpha)});
    const double x[] = {v};
    const StateVector out = encode(fm, x);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(out.amplitudes[0] - std::exp(Complex{0.0, -alpha * v / 2.0}) * s) < 1e-14);
    CHECK(std::abs(out.amplitudes[1] - std::exp(Complex{0.0, alpha * v / 2.0}) * s) < 1e-14);
  }
  SECTION("dimension mismatch") {
    FeatureMap fm(2, {Gene(PauliWord("ZZ"), 1.0)});
    const double x[] = {1.0};
    CHECK_THROWS_AS(encode(fm, x), DimensionError);
  }
}

TEST_CASE("encode matches the dense-matrix oracle") {
  Rng rng(2026);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_index(4));
    const FeatureMap fm = sqs_test::random_feature_map(n, 6, rng);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& v : x) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const StateVector fast = encode(fm, x);
    const auto dense = sqs_test::oracle_encode(fm, x);
    CHECK(max_abs_diff(fast, dense) < 1e-9);
  }
}

TEST_CASE("norm preservation over random rotations") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_index(5));
    const StateVector psi = sqs_test::random_state(n, rng);
    const PauliWord word = sqs_test::random_word(n, rng);
    const double theta = rng.uniform(-10.0, 10.0);
    const StateVector out = apply_pauli_rotation(psi, word, theta);
    REQUIRE(std::abs(out.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("rotations with the same word compose additively") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_index(4));
    const StateVector psi = sqs_test::random_state(n, rng);
    const PauliWord word = sqs_test::random_word(n, rng);
    const double a = rng.uniform(-3.0, 3.0);
    const double b = rng.uniform(-3.0, 3.0);
    const StateVector chained =
        apply_pauli_rotation(apply_pauli_rotation(psi, word, a), word, b);
    const StateVector direct = apply_pauli_rotation(psi, word, a + b);
    CHECK(max_abs_diff(chained, direct) < 1e-10);
  }
}

TEST_CASE("global phase does not affect fidelity") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi = sqs_test::random_state(3, rng);
    StateVector rotated = psi;
    const Complex phase = std::exp(Complex{0.0, rng.uniform(0.0, 6.28)});
    for (Complex& a : rotated.amplitudes) a *= phase;
    CHECK(fidelity(psi, rotated) == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("feature map JSON round trip") {
  FeatureMap fm(3, {Gene(PauliWord("ZZI"), 1.25), Gene(PauliWord("XIY"), -0.5)});
  nlohmann::json j = fm;
  CHECK(j.at("qubits") == 3);
  CHECK(j.at("genes")[0].at("word") == "ZZI");
  CHECK(j.at("genes")[0].at("alpha") == 1.25);

  const FeatureMap back = feature_map_from_json(j);
  REQUIRE(back == fm);

  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const FeatureMap random = sqs_test::random_feature_map(
        1 + static_cast<int>(rng.next_index(5)), 6, rng);
    nlohmann::json rj = random;
    CHECK(feature_map_from_json(rj) == random);
  }

  CHECK_THROWS_AS(feature_map_from_json(nlohmann::json{{"qubits", 2}}), ConfigError);
  CHECK_THROWS_AS(
      feature_map_from_json(nlohmann::json{
          {"qubits", 2}, {"genes", {{{"word", "II"}, {"alpha", 1.0}}}}}),
      UsageError);
}
