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
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqs/errors.hpp"
#include "sqs/fitness.hpp"
#include "sqs/linalg.hpp"
#include "sqs/rng.hpp"

namespace sqs {

// Tabular dataset: a finite feature matrix plus {-1,+1} labels.
struct Dataset {
  Matrix features;
  LabelVector labels;
  std::vector<std::string> column_names;
  std::string provenance;
  std::size_t rejected_rows = 0;  // rows dropped during ingestion

  std::size_t rows() const { return features.rows; }
  std::size_t cols() const { return features.cols; }

  Dataset subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.features = Matrix(indices.size(), features.cols);
    out.labels.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      const auto src = features.row(indices[r]);
      std::copy(src.begin(), src.end(), out.features.row(r).begin());
      out.labels.push_back(labels[indices[r]]);
    }
    out.column_names = column_names;
    out.provenance = provenance;
    return out;
  }
};

namespace detail {

// One RFC-4180 record; handles quoted fields and CRLF line ends.
inline std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // drop trailing CR
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Loads a CSV with a header row; the named label column is mapped to +1
// when its raw field equals `positive_label` and -1 otherwise. Rows with
// missing or non-numeric feature cells are rejected and counted.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        const std::string& positive_label) {
  std::ifstream in(path);
  if (!in) throw IngestionError("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw IngestionError("load_csv: " + path + " is empty");
  const std::vector<std::string> header = detail::split_csv_record(line);

  std::ptrdiff_t label_index = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_index = static_cast<std::ptrdiff_t>(i);
  if (label_index < 0)
    throw IngestionError("load_csv: label column \"" + label_column + "\" not found in " +
                         path);

  Dataset ds;
  ds.provenance = path;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (static_cast<std::ptrdiff_t>(i) != label_index)
      ds.column_names.push_back(header[i]);

  const std::size_t d = ds.column_names.size();
  if (d == 0) throw IngestionError("load_csv: no feature columns in " + path);
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> fields = detail::split_csv_record(line);
    if (fields.size() != header.size()) {
      ++ds.rejected_rows;
      continue;
    }
    std::vector<double> row;
    row.reserve(d);
    bool ok = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == label_index) continue;
      double v;
      if (!detail::parse_double(fields[i], v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      ++ds.rejected_rows;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ds.labels.push_back(fields[static_cast<std::size_t>(label_index)] == positive_label
                            ? 1
                            : -1);
  }
  if (ds.labels.size() < 2)
    throw IngestionError("load_csv: " + path + " has fewer than 2 usable rows (" +
                         std::to_string(ds.rejected_rows) + " rejected)");

  ds.features = Matrix(ds.labels.size(), d);
  ds.features.data = std::move(values);
  return ds;
}

// Writes features plus a `label` column holding 1 / -1. %.17g formatting
// makes the round trip through load_csv bit-exact.
inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("save_csv: cannot open " + path);
  for (std::size_t c = 0; c < ds.column_names.size(); ++c)
    out << (c ? "," : "") << detail::csv_quote(ds.column_names[c]);
  out << ",label\n";
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.cols(); ++c)
      out << (c ? "," : "") << detail::format_double(ds.features.at(r, c));
    out << "," << ds.labels[r] << "\n";
  }
}

namespace detail {

inline std::vector<std::size_t> class_indices(const LabelVector& labels, int cls) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == cls) idx.push_back(i);
  return idx;
}

}  // namespace detail

// Per-class proportional membership; decided by a seeded shuffle within
// each class, returned in original dataset order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const LabelVector& labels, double train_fraction,
                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw UsageError("stratified_split: trainFraction must be in (0, 1)");
  require_both_classes(labels, "stratified_split");

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (const int cls : {-1, +1}) {
    std::vector<std::size_t> idx = detail::class_indices(labels, cls);
    if (idx.size() < 2)
      throw UsageError("stratified_split: class " + std::to_string(cls) +
                       " has fewer than 2 members");
    Rng rng(hash_combine(seed, cls == 1 ? 1u : 2u));
    rng.shuffle(idx);
    std::size_t take = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(idx.size())));
    take = std::clamp<std::size_t>(take, 1, idx.size() - 1);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + take);
    test_idx.insert(test_idx.end(), idx.begin() + take, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {std::move(train_idx), std::move(test_idx)};
}

inline std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                                    double train_fraction,
                                                    std::uint64_t seed) {
  const auto [train_idx, test_idx] =
      stratified_split_indices(ds.labels, train_fraction, seed);
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

// Stratified subsample of n rows preserving the class ratio within one
// sample. Because membership is a seeded per-class permutation prefix,
// samples drawn with the same seed nest: n1 <= n2 implies subset.
inline Dataset downsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw UsageError("downsample: need n >= 2");
  if (n > ds.rows())
    throw UsageError("downsample: requested " + std::to_string(n) + " rows from " +
                     std::to_string(ds.rows()));
  require_both_classes(ds.labels, "downsample");

  const std::size_t positives = count_positives(ds.labels);
  std::size_t take_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * static_cast<double>(positives) /
                   static_cast<double>(ds.rows())));
  take_pos = std::clamp<std::size_t>(take_pos, 1, std::min(n - 1, positives));
  const std::size_t take_neg = n - take_pos;

  std::vector<std::size_t> chosen;
  for (const int cls : {-1, +1}) {
    std::vector<std::size_t> idx = detail::class_indices(ds.labels, cls);
    Rng rng(hash_combine(seed, cls == 1 ? 1u : 2u));
    rng.shuffle(idx);
    const std::size_t take = cls == 1 ? take_pos : take_neg;
    if (take > idx.size())
      throw UsageError("downsample: class ratio cannot be preserved");
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + take);
  }
  std::sort(chosen.begin(), chosen.end());
  return ds.subset(chosen);
}

// Synthetic dataset generators standing in for proprietary data. All are
// deterministic per (spec, seed).
inline Dataset synth_generate(const nlohmann::json& spec, std::uint64_t seed) {
  if (!spec.is_object() || !spec.contains("name"))
    throw ConfigError("synth_generate: generator spec must be an object with \"name\"");
  const std::string name = spec.at("name").get<std::string>();

  auto get_num = [&](const char* key, double fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec.at(key).is_number()) throw ConfigError(std::string("synth_generate: \"") + key + "\" must be a number");
    return spec.at(key).get<double>();
  };
  auto get_int = [&](const char* key, std::int64_t fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec.at(key).is_number_integer())
      throw ConfigError(std::string("synth_generate: \"") + key + "\" must be an integer");
    return spec.at(key).get<std::int64_t>();
  };

  const std::int64_t n = get_int("n", 0);
  if (n < 4) throw ConfigError("synth_generate: \"n\" must be at least 4");
  const double rate = get_num("positive_rate", name == "gauss-imbalanced" ? 0.10 : 0.5);
  if (!(rate > 0.0 && rate < 1.0))
    throw ConfigError("synth_generate: \"positive_rate\" must be in (0, 1)");

  const std::size_t rows = static_cast<std::size_t>(n);
  std::size_t positives = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * rate));
  positives = std::clamp<std::size_t>(positives, 2, rows - 2);

  Rng rng(hash_combine(seed, fnv1a(name.data(), name.size())));
  Dataset ds;
  ds.provenance = "generator:" + spec.dump();

  if (name == "xor") {
    const double sigma = get_num("sigma", 0.25);
    const double center = get_num("center", 1.0);
    const std::int64_t nuisance = get_int("nuisance", 0);
    if (sigma < 0.0 || nuisance < 0) throw ConfigError("synth_generate: bad xor parameters");
    const std::size_t d = 2 + static_cast<std::size_t>(nuisance);
    ds.features = Matrix(rows, d);
    ds.labels.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const bool positive = r < positives;
      ds.labels[r] = positive ? 1 : -1;
      // Positive class sits on the equal-sign quadrants.
      const bool first_sign = rng.next_index(2) == 0;
      const double s0 = first_sign ? center : -center;
      const double s1 = positive ? s0 : -s0;
      ds.features.at(r, 0) = s0 + sigma * (sigma > 0.0 ? rng.next_normal() : 0.0);
      ds.features.at(r, 1) = s1 + sigma * (sigma > 0.0 ? rng.next_normal() : 0.0);
      for (std::size_t c = 2; c < d; ++c) ds.features.at(r, c) = rng.next_normal();
    }
  } else if (name == "gauss-imbalanced") {
    const std::int64_t d = get_int("d", 2);
    const std::int64_t informative = get_int("informative", std::min<std::int64_t>(2, d));
    const double separation = get_num("separation", 2.0);
    if (d < 1 || d > 350 || informative < 1 || informative > d)
      throw ConfigError("synth_generate: bad gauss-imbalanced parameters");
    ds.features = Matrix(rows, static_cast<std::size_t>(d));
    ds.labels.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const bool positive = r < positives;
      ds.labels[r] = positive ? 1 : -1;
      for (std::size_t c = 0; c < static_cast<std::size_t>(d); ++c) {
        double v = rng.next_normal();
        if (positive && c < static_cast<std::size_t>(informative)) v += separation;
        ds.features.at(r, c) = v;
      }
    }
  } else if (name == "rings") {
    const double r_inner = get_num("radius_inner", 1.0);
    const double r_outer = get_num("radius_outer", 2.0);
    const double sigma = get_num("sigma", 0.1);
    const std::int64_t nuisance = get_int("nuisance", 0);
    if (!(r_outer > r_inner) || r_inner <= 0.0 || sigma < 0.0 || nuisance < 0)
      throw ConfigError("synth_generate: bad rings parameters");
    const std::size_t d = 2 + static_cast<std::size_t>(nuisance);
    ds.features = Matrix(rows, d);
    ds.labels.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const bool positive = r < positives;
      ds.labels[r] = positive ? 1 : -1;
      const double radius = (positive ? r_inner : r_outer) + sigma * rng.next_normal();
      const double angle = rng.uniform(0.0, 6.283185307179586);
      ds.features.at(r, 0) = radius * std::cos(angle);
      ds.features.at(r, 1) = radius * std::sin(angle);
      for (std::size_t c = 2; c < d; ++c) ds.features.at(r, c) = rng.next_normal();
    }
  } else {
    throw ConfigError("synth_generate: unknown generator \"" + name + "\"");
  }

  ds.column_names.resize(ds.cols());
  for (std::size_t c = 0; c < ds.cols(); ++c) ds.column_names[c] = "f" + std::to_string(c);

  // Seeded row shuffle so class blocks are interleaved.
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  Rng order_rng(hash_combine(seed, 0x0ddfeedULL));
  order_rng.shuffle(order);
  Dataset shuffled = ds.subset(order);
  shuffled.provenance = ds.provenance;
  return shuffled;
}

}  // namespace sqs
