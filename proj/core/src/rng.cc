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

#include "censim/rng.h"

#include <cmath>
#include <numbers>

#include "censim/errors.h"

namespace censim {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (bijective on 64-bit values).
std::uint64_t Mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t HashLabel(std::string_view label) {
  // FNV-1a 64-bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t Rng::NextUint64() {
  ++counter_;
  return Mix(key_ + counter_ * kGamma);
}

double Rng::NextUnit() {
  // 53 random bits shifted into (0, 1): the +0.5 keeps both endpoints out.
  return (static_cast<double>(NextUint64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::NextBounded(std::uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorKind::kContract, "NextBounded: bound must be positive");
  }
  // Lemire's multiply-shift with rejection of the biased band.
  unsigned __int128 m =
      static_cast<unsigned __int128>(NextUint64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(NextUint64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::int64_t Rng::NextInt(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) {
    throw Error(ErrorKind::kContract, "NextInt: empty range");
  }
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) {  // full 64-bit range
    return static_cast<std::int64_t>(NextUint64());
  }
  return lo + static_cast<std::int64_t>(NextBounded(span));
}

bool Rng::NextBernoulli(double p) { return NextUnit() < p; }

double Rng::NextGaussian() {
  double u1 = NextUnit();
  double u2 = NextUnit();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::NextGamma(double shape) {
  if (!(shape > 0)) {
    throw Error(ErrorKind::kContract, "NextGamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape + 1 and scale back (Marsaglia-Tsang trick).
    return NextGamma(shape + 1.0) * std::pow(NextUnit(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x = NextGaussian();
    double v = 1.0 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    double u = NextUnit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::size_t Rng::NextCategorical(std::span<const double> weights) {
  double total = 0;
  for (double w : weights) {
    if (w < 0 || !std::isfinite(w)) {
      throw Error(ErrorKind::kContract,
                  "NextCategorical: weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0)) {
    throw Error(ErrorKind::kContract, "NextCategorical: zero total weight");
  }
  double u = NextUnit() * total;
  double acc = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0) last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;  // floating-point edge
}

Rng Rng::Fork(std::string_view label, std::uint64_t a, std::uint64_t b) const {
  std::uint64_t h = Mix(key_ ^ HashLabel(label));
  h = Mix(h ^ a);
  h = Mix(h ^ (b + kGamma));
  return Rng(h);
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view label,
                         std::uint64_t a) {
  return Rng(seed).Fork(label, a).NextUint64();
}

}  // namespace censim
