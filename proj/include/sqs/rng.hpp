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
#include <vector>

namespace sqs {

// splitmix64 finalizer. Used both as a hash combiner and as the step
// function of the counter-based stream below, so derived streams are
// reproducible across platforms and standard libraries.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL));
}

// Stream discriminators so independent random uses within one run never
// collide even when they share (generation, slot).
enum class StreamKind : std::uint64_t {
  Init = 1,
  Crossover = 2,
  Mutation = 3,
  Sampling = 4,
  PowerStart = 5,
};

inline std::uint64_t derive_seed(std::uint64_t master, StreamKind kind,
                                 std::uint64_t generation, std::uint64_t slot) {
  std::uint64_t h = splitmix64(master);
  h = hash_combine(h, static_cast<std::uint64_t>(kind));
  h = hash_combine(h, generation);
  h = hash_combine(h, slot);
  return h;
}

// Minimal deterministic generator: the output sequence is pinned by this
// header alone, never by a standard-library distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ kStateSalt)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). Rejection keeps the draw unbiased.
  std::uint64_t next_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (one value per call; the pair's second
  // member is cached).
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Exact Binomial(n, p) sample by Bernoulli counting. n stays modest in
  // this codebase (shot counts), so O(n) is acceptable and keeps the
  // sampler self-contained and reproducible.
  std::uint64_t next_binomial(std::uint64_t n, double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::uint64_t count = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (next_double() < p) ++count;
    }
    return count;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(next_index(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  static constexpr std::uint64_t kStateSalt = 0x8e2f9d1b4c6a7355ULL;
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// FNV-1a over raw bytes; used to fingerprint configs and to derive
// content-addressed seeds (same input bytes, same seed).
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::vector<double>& values) {
  return values.empty() ? fnv1a(nullptr, 0)
                        : fnv1a(values.data(), values.size() * sizeof(double));
}

}  // namespace sqs
