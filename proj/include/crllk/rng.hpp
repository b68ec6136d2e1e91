/******************************************************************************
 * Copyright 2026 The crllk Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "crllk/errors.hpp"

namespace crllk {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// xoshiro256** with portable uniform and normal draws, so that every
/// stochastic path in the library is reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x = splitmix64(x);
      w = x;
    }
    has_spare_ = false;
  }

  /// Seeds the four state words from an already-mixed key; used by
  /// seed_stream so that distinct keys give distinct first state words.
  static Rng from_key(std::uint64_t key) {
    Rng r;
    r.s_[0] = key;
    std::uint64_t x = key;
    for (int i = 1; i < 4; ++i) {
      x = splitmix64(x);
      r.s_[i] = x;
    }
    if ((r.s_[0] | r.s_[1] | r.s_[2] | r.s_[3]) == 0) r.s_[1] = 1;
    return r;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("Rng::below: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool operator==(const Rng& other) const {
    return s_ == other.s_ && has_spare_ == other.has_spare_ &&
           (!has_spare_ || spare_ == other.spare_);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline constexpr std::uint64_t kMaxWorkers = 1ULL << 16;
inline constexpr std::uint64_t kMaxIterations = 1ULL << 47;

/// Deterministic per-(worker, iteration) generator.
///
/// The key packs (iteration, worker) into one word as
/// `iteration << 16 | worker`, xors it with the mixed base seed and passes the
/// result through splitmix64. For a fixed base seed the map
/// (worker, iteration) -> first state word is a composition of bijections and
/// therefore injective. The optional `domain` tag separates training streams
/// from evaluation streams.
inline Rng seed_stream(std::uint64_t base_seed, std::uint64_t worker_index,
                       std::uint64_t iteration, std::uint64_t domain = 0) {
  if (worker_index >= kMaxWorkers) throw ArgumentError("seed_stream: worker index out of range");
  if (iteration >= kMaxIterations) throw ArgumentError("seed_stream: iteration out of range");
  const std::uint64_t key = (iteration << 16) | worker_index;
  const std::uint64_t mixed_base = splitmix64(base_seed ^ splitmix64(domain));
  return Rng::from_key(splitmix64(mixed_base ^ key));
}

}  // namespace crllk
