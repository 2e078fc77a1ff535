// Copyright 2026 The Censim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CENSIM_RNG_H_
#define CENSIM_RNG_H_

#include <cstdint>
#include <span>
#include <string_view>

namespace censim {

// Counter-based pseudo-random generator. The i-th output of a stream is a
// bijective 64-bit finalizer applied to key + i * gamma (the splitmix64
// construction), so every stream is a pure function of its key and no state
// beyond a counter is kept. Fork() derives an unrelated child key from a
// label plus up to two integer tags, which gives each block, household,
// person, or table cell its own stream independent of iteration order.
//
// Sampling helpers are implemented here instead of on top of <random>
// because the standard distributions are implementation-defined: identical
// seeds would not reproduce identical data across toolchains.
class Rng {
 public:
  // Generator identifier recorded in provenance metadata.
  static constexpr std::string_view kVersion = "ctr-splitmix64/1";

  explicit Rng(std::uint64_t key) : key_(key) {}

  // Uniform over all 64-bit values.
  std::uint64_t NextUint64();

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double NextUnit();

  // Uniform on [0, bound). bound must be positive. Bias-free (rejection).
  std::uint64_t NextBounded(std::uint64_t bound);

  // Uniform on the inclusive range [lo, hi].
  std::int64_t NextInt(std::int64_t lo, std::int64_t hi);

  bool NextBernoulli(double p);

  // Standard normal via Box-Muller; consumes two uniforms per draw.
  double NextGaussian();

  // Gamma(shape, 1) via Marsaglia-Tsang. shape must be positive.
  double NextGamma(double shape);

  // Index sampled proportionally to the (non-negative, not necessarily
  // normalized) weights. The weight sum must be positive.
  std::size_t NextCategorical(std::span<const double> weights);

  // Child stream keyed by (this stream's key, label, a, b). Does not
  // consume from the parent, so forking order never matters.
  Rng Fork(std::string_view label, std::uint64_t a = 0,
           std::uint64_t b = 0) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Convenience: the first output of Rng(seed).Fork(label, a). Used to derive
// per-stage seeds from a single run seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view label,
                         std::uint64_t a = 0);

}  // namespace censim

#endif  // CENSIM_RNG_H_
