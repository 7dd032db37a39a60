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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "sqs/dataset.hpp"
#include "sqs/reduction.hpp"
#include "support/oracles.hpp"

using namespace sqs;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

std::string temp_file(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

Dataset gaussian_dataset(Rng& rng, std::size_t n_neg, std::size_t n_pos, std::size_t dims,
                         double separation) {
  Dataset ds;
  ds.features = Matrix(n_neg + n_pos, dims);
  ds.labels.assign(n_neg + n_pos, -1);
  for (std::size_t r = 0; r < n_neg + n_pos; ++r) {
    const bool positive = r >= n_neg;
    if (positive) ds.labels[r] = 1;
    for (std::size_t c = 0; c < dims; ++c) {
      double v = rng.next_normal();
      if (positive && c < 2) v += separation;
      ds.features.at(r, c) = v;
    }
  }
  for (std::size_t c = 0; c < dims; ++c) ds.column_names.push_back("f" + std::to_string(c));
  ds.provenance = "test";
  return ds;
}

}  // namespace

TEST_CASE("load_csv label mapping and row rejection") {
  const std::string path = temp_file("sqs_load_test.csv");
  {
    std::ofstream out(path);
    out << "a,b,outcome\n";
    out << "1.5,2.5,yes\n";
    out << "0.5,oops,no\n";
    out << "3.5,4.5,no\n";
    out << "5.5,6.5,yes\n";
  }
  const Dataset ds = load_csv(path, "outcome", "yes");
  REQUIRE(ds.rows() == 3);
  CHECK(ds.rejected_rows == 1);
  CHECK(ds.labels == LabelVector{1, -1, 1});
  CHECK(ds.column_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.features.at(0, 0) == 1.5);
  CHECK(ds.features.at(1, 1) == 4.5);

  CHECK_THROWS_AS(load_csv(path, "missing", "yes"), IngestionError);
  fs::remove(path);

  const std::string empty = temp_file("sqs_empty.csv");
  { std::ofstream out(empty); }
  CHECK_THROWS_AS(load_csv(empty, "outcome", "yes"), IngestionError);
  fs::remove(empty);
}

TEST_CASE("save/load round trip is bit exact") {
  Rng rng(3);
  Dataset ds = gaussian_dataset(rng, 10, 5, 3, 1.0);
  // Awkward values that stress the formatter.
  ds.features.at(0, 0) = 1.0 / 3.0;
  ds.features.at(1, 1) = 1e-17;
  ds.features.at(2, 2) = -123456789.123456789;

  const std::string path = temp_file("sqs_roundtrip.csv");
  save_csv(ds, path);
  const Dataset back = load_csv(path, "label", "1");
  REQUIRE(back.rows() == ds.rows());
  REQUIRE(back.labels == ds.labels);
  for (std::size_t r = 0; r < ds.rows(); ++r)
    for (std::size_t c = 0; c < ds.cols(); ++c)
      REQUIRE(back.features.at(r, c) == ds.features.at(r, c));

  // Writing the loaded dataset again reproduces the file byte for byte.
  const std::string path2 = temp_file("sqs_roundtrip2.csv");
  save_csv(back, path2);
  std::ifstream f1(path), f2(path2);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("mutual information ranking") {
  Rng rng(5);

  SECTION("independent feature scores near zero") {
    const std::size_t n = 1000;
    Dataset ds;
    ds.features = Matrix(n, 1);
    ds.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      ds.features.at(r, 0) = rng.next_normal();
      ds.labels[r] = rng.next_index(2) == 0 ? -1 : 1;
    }
    const auto ranked = mutual_info_rank(ds);
    CHECK(ranked[0].score >= 0.0);
    CHECK(ranked[0].score <= 3.0 / std::sqrt(static_cast<double>(n)));
  }

  SECTION("feature equal to the label carries the label entropy") {
    const std::size_t n = 200;
    Dataset ds;
    ds.features = Matrix(n, 1);
    ds.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      ds.labels[r] = r % 2 == 0 ? 1 : -1;
      ds.features.at(r, 0) = ds.labels[r];
    }
    const auto ranked = mutual_info_rank(ds);
    CHECK(ranked[0].score == Approx(std::log(2.0)).margin(1e-12));
  }

  SECTION("duplicated columns tie and break by index") {
    const std::size_t n = 100;
    Dataset ds;
    ds.features = Matrix(n, 3);
    ds.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      ds.labels[r] = r % 2 == 0 ? 1 : -1;
      const double v = rng.next_normal() + (ds.labels[r] == 1 ? 0.6 : 0.0);
      ds.features.at(r, 0) = rng.next_normal();  // noise
      ds.features.at(r, 1) = v;
      ds.features.at(r, 2) = v;
    }
    const auto ranked = mutual_info_rank(ds);
    CHECK(ranked[0].column == 1);
    CHECK(ranked[1].column == 2);
    CHECK(ranked[0].score == ranked[1].score);
  }

  SECTION("constant features score zero, not an error") {
    Dataset ds;
    ds.features = Matrix(50, 1, 3.14);
    ds.labels.resize(50);
    for (std::size_t r = 0; r < 50; ++r) ds.labels[r] = r % 2 == 0 ? 1 : -1;
    CHECK(mutual_info_rank(ds)[0].score == 0.0);
  }

  SECTION("invariant under strictly monotone transforms") {
    Dataset ds = gaussian_dataset(rng, 60, 40, 4, 1.0);
    const auto base = mutual_info_rank(ds);
    for (int map = 0; map < 20; ++map) {
      Dataset mapped = ds;
      const double scale = rng.uniform(0.2, 3.0);
      const double shift = rng.uniform(-2.0, 2.0);
      const int kind = static_cast<int>(rng.next_index(3));
      for (auto& v : mapped.features.data) {
        switch (kind) {
          case 0: v = scale * v + shift; break;
          case 1: v = std::exp(scale * v); break;
          default: v = std::atan(v) * scale + shift; break;
        }
      }
      const auto transformed = mutual_info_rank(mapped);
      for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(transformed[i].column == base[i].column);
        CHECK(transformed[i].score == base[i].score);  // bitwise
      }
    }
  }

  SECTION("bins below two are rejected") {
    Dataset ds = gaussian_dataset(rng, 10, 10, 2, 1.0);
    CHECK_THROWS_AS(mutual_info_rank(ds, 1), UsageError);
  }
}

TEST_CASE("fit_reduction") {
  Rng rng(7);

  SECTION("Fisher direction matches the closed form on isotropic Gaussians") {
    const std::size_t n = 400;
    Dataset ds;
    ds.features = Matrix(n, 2);
    ds.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      const bool positive = r < n / 2;
      ds.labels[r] = positive ? 1 : -1;
      ds.features.at(r, 0) = rng.next_normal() + (positive ? 1.4 : 0.0);
      ds.features.at(r, 1) = rng.next_normal() + (positive ? 0.6 : 0.0);
    }
    ds.column_names = {"f0", "f1"};
    const ReductionModel model = fit_reduction(ds, 2, 1);

    // Oracle: standardize independently, then w = S_w^{-1} (mu+ - mu-).
    std::vector<double> mean(2, 0.0), sd(2, 0.0);
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t r = 0; r < n; ++r) mean[c] += ds.features.at(r, c);
      mean[c] /= n;
      for (std::size_t r = 0; r < n; ++r)
        sd[c] += std::pow(ds.features.at(r, c) - mean[c], 2);
      sd[c] = std::sqrt(sd[c] / (n - 1));
    }
    // Standardized class means and scatter.
    std::vector<double> mu_pos(2, 0.0), mu_neg(2, 0.0);
    Matrix scatter(2, 2);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < 2; ++c) {
        const double z = (ds.features.at(r, c) - mean[c]) / sd[c];
        (ds.labels[r] == 1 ? mu_pos : mu_neg)[c] += z;
      }
    }
    for (std::size_t c = 0; c < 2; ++c) {
      mu_pos[c] /= (n / 2.0);
      mu_neg[c] /= (n / 2.0);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const auto& mu = ds.labels[r] == 1 ? mu_pos : mu_neg;
      double z[2];
      for (std::size_t c = 0; c < 2; ++c)
        z[c] = (ds.features.at(r, c) - mean[c]) / sd[c] - mu[c];
      scatter.at(0, 0) += z[0] * z[0];
      scatter.at(0, 1) += z[0] * z[1];
      scatter.at(1, 0) += z[1] * z[0];
      scatter.at(1, 1) += z[1] * z[1];
    }
    const double det = scatter.at(0, 0) * scatter.at(1, 1) -
                       scatter.at(0, 1) * scatter.at(1, 0);
    const double d0 = mu_pos[0] - mu_neg[0];
    const double d1 = mu_pos[1] - mu_neg[1];
    double w0 = (scatter.at(1, 1) * d0 - scatter.at(0, 1) * d1) / det;
    double w1 = (-scatter.at(1, 0) * d0 + scatter.at(0, 0) * d1) / det;
    const double norm = std::hypot(w0, w1);
    w0 /= norm;
    w1 /= norm;

    const double cosine = std::abs(w0 * model.projection.at(0, 0) +
                                   w1 * model.projection.at(1, 0));
    CHECK(cosine >= 0.999);
  }

  SECTION("full-dimension projection reconstructs standardized data") {
    Dataset ds = gaussian_dataset(rng, 40, 30, 4, 1.2);
    const ReductionModel model = fit_reduction(ds, 4, 4);
    REQUIRE(model.output_dim() == 4);

    // Orthonormality.
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) {
        double dot = 0.0;
        for (std::size_t r = 0; r < 4; ++r)
          dot += model.projection.at(r, a) * model.projection.at(r, b);
        CHECK(dot == Approx(a == b ? 1.0 : 0.0).margin(1e-8));
      }

    // Reconstruction of a standardized row through P P^T.
    for (std::size_t r = 0; r < 5; ++r) {
      std::vector<double> z(4), proj(4, 0.0), back(4, 0.0);
      for (std::size_t c = 0; c < 4; ++c)
        z[c] = (ds.features.at(r, model.selected_columns[c]) - model.means[c]) /
               model.stds[c];
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t c = 0; c < 4; ++c) proj[k] += z[c] * model.projection.at(c, k);
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t k = 0; k < 4; ++k) back[c] += proj[k] * model.projection.at(c, k);
      for (std::size_t c = 0; c < 4; ++c) CHECK(back[c] == Approx(z[c]).margin(1e-8));
    }
  }

  SECTION("class swap flips or keeps the Fisher direction") {
    Dataset ds = gaussian_dataset(rng, 50, 30, 3, 1.5);
    const ReductionModel a = fit_reduction(ds, 3, 2);
    Dataset flipped = ds;
    for (int& v : flipped.labels) v = -v;
    const ReductionModel b = fit_reduction(flipped, 3, 2);
    double cosine = 0.0;
    for (std::size_t c = 0; c < 3; ++c)
      cosine += a.projection.at(c, 0) * b.projection.at(c, 0);
    CHECK(std::abs(cosine) >= 0.999);
  }

  SECTION("degenerate scatter raises a numeric error") {
    Dataset ds;
    ds.features = Matrix(6, 2, 1.0);  // all rows identical
    ds.labels = {1, 1, 1, -1, -1, -1};
    ds.column_names = {"f0", "f1"};
    CHECK_THROWS_AS(fit_reduction(ds, 2, 1), NumericError);
  }

  SECTION("outDim above topK is rejected") {
    Dataset ds = gaussian_dataset(rng, 20, 10, 4, 1.0);
    CHECK_THROWS_AS(fit_reduction(ds, 2, 3), UsageError);
  }
}

TEST_CASE("apply_reduction") {
  Rng rng(11);
  Dataset ds = gaussian_dataset(rng, 60, 25, 5, 1.3);
  const ReductionModel model = fit_reduction(ds, 4, 2);

  SECTION("training projections stay inside [-pi, pi]") {
    const Dataset reduced = apply_reduction(model, ds);
    REQUIRE(reduced.cols() == 2);
    REQUIRE(reduced.rows() == ds.rows());
    for (const double v : reduced.features.data) {
      CHECK(v >= -std::numbers::pi - 1e-12);
      CHECK(v <= std::numbers::pi + 1e-12);
    }
    CHECK(reduced.labels == ds.labels);
  }

  SECTION("a test row equal to a train row reduces identically") {
    Dataset probe;
    probe.features = Matrix(1, 5);
    for (std::size_t c = 0; c < 5; ++c) probe.features.at(0, c) = ds.features.at(7, c);
    probe.labels = {ds.labels[7]};
    probe.column_names = ds.column_names;
    const Dataset reduced_all = apply_reduction(model, ds);
    const Dataset reduced_probe = apply_reduction(model, probe);
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(reduced_probe.features.at(0, c) == reduced_all.features.at(7, c));
  }

  SECTION("matches an independently coded select/standardize/project oracle") {
    const Dataset reduced = apply_reduction(model, ds);
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t k = 0; k < 2; ++k) {
        double p = 0.0;
        for (std::size_t c = 0; c < model.input_dim(); ++c) {
          const double z =
              (ds.features.at(r, model.selected_columns[c]) - model.means[c]) /
              model.stds[c];
          p += z * model.projection.at(c, k);
        }
        const double lo = model.proj_min[k];
        const double hi = model.proj_max[k];
        const double clipped = std::clamp(p, lo, hi);
        const double angle =
            -std::numbers::pi + 2.0 * std::numbers::pi * (clipped - lo) / (hi - lo);
        CHECK(reduced.features.at(r, k) == Approx(angle).margin(1e-10));
      }
    }
  }

  SECTION("missing columns are a usage error") {
    Dataset narrow;
    narrow.features = Matrix(3, 2);
    narrow.labels = {1, -1, 1};
    narrow.column_names = {"f0", "f1"};
    ReductionModel wide = model;
    wide.selected_columns = {0, 4};
    wide.selected_names = {"f0", "f4"};
    wide.means = {0.0, 0.0};
    wide.stds = {1.0, 1.0};
    CHECK_THROWS_AS(apply_reduction(wide, narrow), UsageError);
  }

  SECTION("model JSON round trip") {
    nlohmann::json j = model;
    const ReductionModel back = reduction_model_from_json(j);
    CHECK(back == model);
  }
}

TEST_CASE("stratified_split") {
  Rng rng(13);
  Dataset ds = gaussian_dataset(rng, 90, 10, 2, 1.0);

  SECTION("proportional class counts") {
    const auto [train, test] = stratified_split(ds, 0.8, 7);
    CHECK(train.rows() == 80);
    CHECK(test.rows() == 20);
    CHECK(count_positives(train.labels) == 8);
    CHECK(count_positives(test.labels) == 2);
  }
  SECTION("determinism and disjointness") {
    const auto [a_train, a_test] = stratified_split(ds, 0.7, 99);
    const auto [b_train, b_test] = stratified_split(ds, 0.7, 99);
    CHECK(a_train.features == b_train.features);
    CHECK(a_test.features == b_test.features);
    CHECK(a_train.rows() + a_test.rows() == ds.rows());

    // No overlapping rows: every original row appears exactly once.
    std::multiset<double> keys;
    for (std::size_t r = 0; r < a_train.rows(); ++r) keys.insert(a_train.features.at(r, 0));
    for (std::size_t r = 0; r < a_test.rows(); ++r) keys.insert(a_test.features.at(r, 0));
    std::multiset<double> original;
    for (std::size_t r = 0; r < ds.rows(); ++r) original.insert(ds.features.at(r, 0));
    CHECK(keys == original);
  }
  SECTION("tiny classes are rejected") {
    Dataset tiny;
    tiny.features = Matrix(3, 1);
    tiny.labels = {1, -1, -1};
    CHECK_THROWS_AS(stratified_split(tiny, 0.5, 1), UsageError);
  }
  SECTION("fraction bounds") {
    CHECK_THROWS_AS(stratified_split(ds, 0.0, 1), UsageError);
    CHECK_THROWS_AS(stratified_split(ds, 1.0, 1), UsageError);
  }
}

TEST_CASE("downsample") {
  Rng rng(17);
  Dataset ds = gaussian_dataset(rng, 450, 50, 2, 1.0);

  SECTION("full-size downsample is the identity") {
    const Dataset same = downsample(ds, ds.rows(), 3);
    CHECK(same.features == ds.features);
    CHECK(same.labels == ds.labels);
  }
  SECTION("class ratio preserved within one sample") {
    const Dataset sub = downsample(ds, 100, 3);
    REQUIRE(sub.rows() == 100);
    const std::size_t pos = count_positives(sub.labels);
    CHECK(pos >= 9);
    CHECK(pos <= 11);
  }
  SECTION("same seed nests smaller samples inside larger ones") {
    const Dataset small = downsample(ds, 60, 5);
    const Dataset large = downsample(ds, 200, 5);
    std::multiset<double> large_keys;
    for (std::size_t r = 0; r < large.rows(); ++r) large_keys.insert(large.features.at(r, 0));
    for (std::size_t r = 0; r < small.rows(); ++r)
      CHECK(large_keys.count(small.features.at(r, 0)) >= 1);
  }
  SECTION("bad sizes are rejected") {
    CHECK_THROWS_AS(downsample(ds, 1, 1), UsageError);
    CHECK_THROWS_AS(downsample(ds, ds.rows() + 1, 1), UsageError);
  }
}

TEST_CASE("synth_generate") {
  SECTION("xor with zero noise puts points exactly on class-consistent centers") {
    const nlohmann::json spec{{"name", "xor"}, {"n", 40}, {"sigma", 0.0}};
    const Dataset ds = synth_generate(spec, 9);
    REQUIRE(ds.rows() == 40);
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      const double x0 = ds.features.at(r, 0);
      const double x1 = ds.features.at(r, 1);
      CHECK(std::abs(std::abs(x0) - 1.0) < 1e-15);
      CHECK(std::abs(std::abs(x1) - 1.0) < 1e-15);
      CHECK(ds.labels[r] == (x0 * x1 > 0.0 ? 1 : -1));
    }
  }
  SECTION("gauss-imbalanced positive count") {
    const nlohmann::json spec{{"name", "gauss-imbalanced"}, {"n", 4763}, {"positive_rate", 0.10}};
    const Dataset ds = synth_generate(spec, 1);
    const std::size_t pos = count_positives(ds.labels);
    CHECK((pos == 476 || pos == 477));
  }
  SECTION("rings places classes on distinct radii") {
    const nlohmann::json spec{{"name", "rings"}, {"n", 200}, {"sigma", 0.05}};
    const Dataset ds = synth_generate(spec, 2);
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      const double radius = std::hypot(ds.features.at(r, 0), ds.features.at(r, 1));
      if (ds.labels[r] == 1) CHECK(radius < 1.5);
      else CHECK(radius > 1.5);
    }
  }
  SECTION("deterministic per spec and seed") {
    const nlohmann::json spec{{"name", "xor"}, {"n", 50}, {"sigma", 0.3}, {"nuisance", 2}};
    const Dataset a = synth_generate(spec, 77);
    const Dataset b = synth_generate(spec, 77);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    const Dataset c = synth_generate(spec, 78);
    CHECK(a.features != c.features);
  }
  SECTION("unknown generator is a config error") {
    CHECK_THROWS_AS(synth_generate(nlohmann::json{{"name", "mystery"}, {"n", 10}}, 1),
                    ConfigError);
  }
}

TEST_CASE("reduction pipeline is leak-free") {
  Rng rng(23);
  Dataset ds = gaussian_dataset(rng, 80, 20, 6, 1.1);
  const auto [train_idx, test_idx] = stratified_split_indices(ds.labels, 0.75, 44);

  const Dataset train = ds.subset(train_idx);
  const ReductionModel base = fit_reduction(train, 5, 2);

  // Perturb every test row; the fitted model must not move at all.
  Dataset perturbed = ds;
  for (const std::size_t r : test_idx)
    for (std::size_t c = 0; c < ds.cols(); ++c)
      perturbed.features.at(r, c) += rng.uniform(-5.0, 5.0);
  const Dataset train2 = perturbed.subset(train_idx);
  const ReductionModel refit = fit_reduction(train2, 5, 2);

  CHECK(refit == base);
}
