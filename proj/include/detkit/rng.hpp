/* Copyright 2026 The Detkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace detkit {

// Deterministic value stream keyed by a tuple of integers. splitmix64 folds
// the key parts into a seed for std::mt19937_64, whose raw output sequence is
// pinned by the standard; the value mappings below avoid std:: distribution
// objects, whose algorithms are implementation-defined. Identical keys give
// identical streams on every platform, so generation order across keys never
// matters and parallel producers stay reproducible.
class KeyedRng {
 public:
  explicit KeyedRng(std::initializer_list<std::uint64_t> key_parts) {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t part : key_parts) state = mix(state ^ part);
    engine_.seed(state);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return std::ldexp(static_cast<double>(next_u64() >> 11), -53);
  }

  // Uniform in [lo, hi). Returns lo when the interval is empty.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Index in [0, n) via multiply-shift.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller; one value per call.
  double normal(double mean, double sigma) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * kPi * u2);
  }

  // Knuth inversion; adequate for the small rates used here.
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    double product = uniform();
    int count = 0;
    while (product > limit) {
      ++count;
      product *= uniform();
    }
    return count;
  }

  // Index drawn with probability proportional to its weight. Weights must be
  // non-negative with a positive sum.
  std::size_t weighted_index(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = uniform() * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      cumulative += weights[i];
      if (target < cumulative) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace detkit
