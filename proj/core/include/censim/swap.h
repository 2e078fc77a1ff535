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

#ifndef CENSIM_SWAP_H_
#define CENSIM_SWAP_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "censim/tabulate.h"
#include "censim/types.h"

namespace censim {

enum class SwapScope { kTract, kCounty, kState };

std::string_view SwapScopeName(SwapScope scope);

struct SwapConfig {
  // Fraction of households targeted for swapping (independent selection).
  double swap_rate = 0.0;
  // Geography level within which partners are sought.
  SwapScope pairing_scope = SwapScope::kCounty;
  std::uint64_t seed = 0;

  void Validate() const;  // throws Error(kConfig)
};

struct SwapPair {
  std::int64_t household_a = 0;
  std::int64_t household_b = 0;
  std::int64_t block_a = 0;  // block of a before the swap
  std::int64_t block_b = 0;

  friend bool operator==(const SwapPair&, const SwapPair&) = default;
};

struct SwapLog {
  std::vector<SwapPair> pairs;
  // Selected households for which no eligible partner existed at their turn.
  std::int64_t unmatched = 0;
};

struct SwapResult {
  Microdata microdata;
  SwapLog log;
};

// Exchanges block assignments between matched household pairs. A partner
// must live in a different block of the same scope unit, have the same
// (n_adults, n_children), and not have swapped already; members move with
// their household. Block total population, voting-age population, and
// household counts are preserved exactly. Selected households are processed
// in ascending household_id order; each household swaps at most once.
SwapResult ApplySwapping(const Microdata& md, const SwapConfig& cfg);

TabulationSet SwapThenTabulate(const Microdata& md, const SwapConfig& cfg);

void SaveSwapLogCsv(const SwapLog& log, const std::filesystem::path& path);

}  // namespace censim

#endif  // CENSIM_SWAP_H_
