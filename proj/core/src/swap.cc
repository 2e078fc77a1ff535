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

#include "censim/swap.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "censim/errors.h"
#include "censim/rng.h"
#include "internal_csv.h"

namespace censim {

namespace {

constexpr std::string_view kSwapLogHeader =
    "household_id_a,household_id_b,block_a,block_b";

std::int64_t ScopeUnit(const BlockGeo& geo, SwapScope scope) {
  switch (scope) {
    case SwapScope::kTract:
      return geo.tract_id;
    case SwapScope::kCounty:
      return geo.county_id;
    case SwapScope::kState:
      return geo.state_id;
  }
  return geo.county_id;
}

}  // namespace

std::string_view SwapScopeName(SwapScope scope) {
  switch (scope) {
    case SwapScope::kTract:
      return "tract";
    case SwapScope::kCounty:
      return "county";
    case SwapScope::kState:
      return "state";
  }
  return "invalid";
}

void SwapConfig::Validate() const {
  if (swap_rate < 0 || swap_rate > 1 || !std::isfinite(swap_rate)) {
    throw Error(ErrorKind::kConfig, "swap.rate: must lie in [0, 1], got " +
                                        std::to_string(swap_rate));
  }
}

SwapResult ApplySwapping(const Microdata& md, const SwapConfig& cfg) {
  cfg.Validate();
  SwapResult result;
  result.microdata = md;
  Microdata& out = result.microdata;

  std::unordered_map<std::int64_t, std::size_t> household_index;
  household_index.reserve(out.households.size());
  for (std::size_t i = 0; i < out.households.size(); ++i) {
    household_index.emplace(out.households[i].household_id, i);
  }

  // Matching key: scope unit plus the quoted variables (adults, children).
  using MatchKey = std::tuple<std::int64_t, std::int32_t, std::int32_t>;
  std::map<MatchKey, std::vector<std::size_t>> pools;
  for (std::size_t i = 0; i < out.households.size(); ++i) {
    const Household& h = out.households[i];
    const BlockGeo* geo = out.geography.Find(h.block_id);
    if (geo == nullptr) {
      throw Error(ErrorKind::kIntegrity,
                  "swap: household " + std::to_string(h.household_id) +
                      " references missing block");
    }
    pools[{ScopeUnit(*geo, cfg.pairing_scope), h.n_adults, h.n_children}]
        .push_back(i);
  }

  Rng root(cfg.seed);
  // Selection is an independent per-household draw, keyed by id so it does
  // not depend on container order.
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < out.households.size(); ++i) {
    Rng select = root.Fork("select",
                           static_cast<std::uint64_t>(out.households[i].household_id));
    if (select.NextBernoulli(cfg.swap_rate)) selected.push_back(i);
  }
  std::sort(selected.begin(), selected.end(),
            [&](std::size_t a, std::size_t b) {
              return out.households[a].household_id <
                     out.households[b].household_id;
            });

  std::vector<bool> swapped(out.households.size(), false);
  std::vector<std::size_t> eligible;
  for (std::size_t i : selected) {
    if (swapped[i]) continue;  // already taken as an earlier partner
    Household& a = out.households[i];
    const BlockGeo* geo = out.geography.Find(a.block_id);
    const auto& pool =
        pools.at({ScopeUnit(*geo, cfg.pairing_scope), a.n_adults, a.n_children});

    eligible.clear();
    for (std::size_t j : pool) {
      if (j == i || swapped[j]) continue;
      if (out.households[j].block_id == a.block_id) continue;
      eligible.push_back(j);
    }
    if (eligible.empty()) {
      result.log.unmatched += 1;
      continue;
    }
    Rng partner_rng =
        root.Fork("partner", static_cast<std::uint64_t>(a.household_id));
    std::size_t j = eligible[partner_rng.NextBounded(eligible.size())];
    Household& b = out.households[j];

    result.log.pairs.push_back(
        SwapPair{a.household_id, b.household_id, a.block_id, b.block_id});
    std::swap(a.block_id, b.block_id);
    swapped[i] = true;
    swapped[j] = true;
  }
  return result;
}

TabulationSet SwapThenTabulate(const Microdata& md, const SwapConfig& cfg) {
  return Tabulate(ApplySwapping(md, cfg).microdata);
}

void SaveSwapLogCsv(const SwapLog& log, const std::filesystem::path& path) {
  internal::CsvWriter w(path, kSwapLogHeader);
  for (const SwapPair& p : log.pairs) {
    w.BeginRow();
    w.Add(p.household_a);
    w.Add(p.household_b);
    w.Add(p.block_a);
    w.Add(p.block_b);
    w.EndRow();
  }
}

}  // namespace censim
