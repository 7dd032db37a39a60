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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/errors.hpp"

namespace sqs {

inline constexpr int kMaxQubits = 10;

// An n-qubit Pauli string over {I, X, Y, Z}. All-identity words are
// rejected: they act as a global phase only and carry no information.
class PauliWord {
 public:
  explicit PauliWord(std::string letters) : letters_(std::move(letters)) {
    if (letters_.empty() || letters_.size() > static_cast<std::size_t>(kMaxQubits))
      throw UsageError("PauliWord: length must be between 1 and 10, got " +
                       std::to_string(letters_.size()));
    bool non_identity = false;
    for (std::size_t q = 0; q < letters_.size(); ++q) {
      const char c = letters_[q];
      switch (c) {
        case 'I':
          break;
        case 'X':
        case 'Y':
          flip_mask_ |= 1u << q;
          non_identity = true;
          if (c == 'Y') {
            phase_mask_ |= 1u << q;
            ++y_count_;
          }
          break;
        case 'Z':
          phase_mask_ |= 1u << q;
          non_identity = true;
          break;
        default:
          throw UsageError(std::string("PauliWord: invalid letter '") + c +
                           "' in \"" + letters_ + "\"");
      }
    }
    if (!non_identity)
      throw UsageError("PauliWord: all-identity word \"" + letters_ + "\" is forbidden");
  }

  const std::string& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  char letter(std::size_t q) const { return letters_[q]; }

  // Qubits whose basis bit is flipped by this word (X and Y positions).
  std::uint32_t flip_mask() const { return flip_mask_; }
  // Qubits contributing a (-1)^bit phase (Y and Z positions).
  std::uint32_t phase_mask() const { return phase_mask_; }
  int y_count() const { return y_count_; }

  bool operator==(const PauliWord& other) const { return letters_ == other.letters_; }

 private:
  std::string letters_;
  std::uint32_t flip_mask_ = 0;
  std::uint32_t phase_mask_ = 0;
  int y_count_ = 0;
};

// One evolutionary gene: a Pauli word with its trainable angle scale.
struct Gene {
  PauliWord word;
  double alpha = 1.0;

  Gene(PauliWord w, double a) : word(std::move(w)), alpha(a) {
    if (!std::isfinite(alpha))
      throw UsageError("Gene: alpha must be finite");
  }

  bool operator==(const Gene& other) const = default;
};

// An ordered gene chain defining the data-encoding circuit on `qubits` wires.
struct FeatureMap {
  int qubits = 0;
  std::vector<Gene> genes;

  // Empty placeholder; every constructed map goes through the validating
  // constructor below.
  FeatureMap() = default;

  FeatureMap(int n, std::vector<Gene> g) : qubits(n), genes(std::move(g)) {
    if (qubits < 1 || qubits > kMaxQubits)
      throw ConfigError("FeatureMap: qubit count must be between 1 and 10, got " +
                        std::to_string(qubits));
    if (genes.empty()) throw UsageError("FeatureMap: gene chain must not be empty");
    for (const Gene& gene : genes) {
      if (gene.word.size() != static_cast<std::size_t>(qubits))
        throw DimensionError("FeatureMap: word \"" + gene.word.letters() +
                             "\" does not match qubit count " + std::to_string(qubits));
    }
  }

  bool operator==(const FeatureMap& other) const = default;

  // Genes acting non-trivially on two or more qubits.
  std::size_t entangling_gene_count() const {
    std::size_t count = 0;
    for (const Gene& gene : genes) {
      int non_identity = 0;
      for (std::size_t q = 0; q < gene.word.size(); ++q)
        if (gene.word.letter(q) != 'I') ++non_identity;
      if (non_identity >= 2) ++count;
    }
    return count;
  }
};

// The rotation angle a gene contributes for datapoint x: alpha times the
// product of the features at the word's non-identity positions.
inline double angle_for_gene(const Gene& gene, std::span<const double> x) {
  if (x.size() != gene.word.size())
    throw DimensionError("angle_for_gene: feature vector length " +
                         std::to_string(x.size()) + " does not match word length " +
                         std::to_string(gene.word.size()));
  double angle = gene.alpha;
  for (std::size_t q = 0; q < gene.word.size(); ++q)
    if (gene.word.letter(q) != 'I') angle *= x[q];
  return angle;
}

// JSON interchange format: {"qubits": n, "genes": [{"word": "ZZ", "alpha": a}, ...]}
inline void to_json(nlohmann::json& j, const Gene& gene) {
  j = nlohmann::json{{"word", gene.word.letters()}, {"alpha", gene.alpha}};
}

inline void to_json(nlohmann::json& j, const FeatureMap& fm) {
  j = nlohmann::json{{"qubits", fm.qubits}, {"genes", fm.genes}};
}

inline FeatureMap feature_map_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("qubits") || !j.contains("genes"))
    throw ConfigError("feature map JSON must contain \"qubits\" and \"genes\"");
  if (!j.at("qubits").is_number_integer())
    throw ConfigError("feature map \"qubits\" must be an integer");
  const int qubits = j.at("qubits").get<int>();
  std::vector<Gene> genes;
  for (const auto& gj : j.at("genes")) {
    if (!gj.contains("word") || !gj.contains("alpha"))
      throw ConfigError("feature map gene must contain \"word\" and \"alpha\"");
    if (!gj.at("alpha").is_number())
      throw ConfigError("feature map gene \"alpha\" must be a number");
    genes.emplace_back(PauliWord(gj.at("word").get<std::string>()),
                       gj.at("alpha").get<double>());
  }
  return FeatureMap(qubits, std::move(genes));
}

}  // namespace sqs
