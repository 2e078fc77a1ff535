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

#ifndef CENSIM_TABULATE_H_
#define CENSIM_TABULATE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "censim/types.h"

namespace censim {

// One block's released tables: population by race, voting-age population by
// race, and the household count.
struct BlockTable {
  std::int64_t block_id = 0;
  RaceCounts race_counts{};
  RaceCounts vap_race_counts{};
  std::int64_t n_households = 0;

  std::int64_t TotalPopulation() const;
  std::int64_t TotalVap() const;

  friend bool operator==(const BlockTable&, const BlockTable&) = default;
};

struct LevelTotals {
  std::int64_t population = 0;
  std::int64_t vap = 0;
  std::int64_t households = 0;

  friend bool operator==(const LevelTotals&, const LevelTotals&) = default;
};

// Block tables plus rollups per tract, county, and state. Every rollup is
// derived from the blocks; RebuildAggregates restores that invariant after
// any edit to the block vector.
struct TabulationSet {
  Geography geography;
  std::vector<BlockTable> blocks;  // sorted by block_id, one per geo block
  std::map<std::int64_t, LevelTotals> tract_totals;
  std::map<std::int64_t, LevelTotals> county_totals;
  LevelTotals state_totals;

  const BlockTable* Find(std::int64_t block_id) const;
  RaceCounts StateRaceTotals() const;
  RaceCounts StateVapRaceTotals() const;
  void RebuildAggregates();

  friend bool operator==(const TabulationSet&, const TabulationSet&) = default;
};

// Counts persons (and adults) per block and race, and households per block.
// Total on valid Microdata; insensitive to input row order.
TabulationSet Tabulate(const Microdata& md);

struct DistanceReport {
  std::int64_t total_population_l1 = 0;  // sum over blocks |delta total pop|
  std::int64_t vap_l1 = 0;               // sum over blocks |delta total vap|
  std::int64_t race_l1 = 0;              // sum over block-race cells
  std::int64_t max_abs_deviation = 0;    // max over any compared cell/total

  bool IsZero() const {
    return total_population_l1 == 0 && vap_l1 == 0 && race_l1 == 0 &&
           max_abs_deviation == 0;
  }

  friend bool operator==(const DistanceReport&, const DistanceReport&) =
      default;
};

// Symmetric; zero iff the block tables are identical. Throws
// Error(kComparability) when the block sets differ.
DistanceReport TableDistance(const TabulationSet& a, const TabulationSet& b);

// CSV schema: block_id, one column per race count, per VAP race count,
// n_households. Aggregates go to "<csv stem>.aggregates.json" next to it.
void SaveTabulationCsv(const TabulationSet& tab,
                       const std::filesystem::path& csv_path);
// Requires the geography to rebuild rollups; cross-checks the aggregates
// sidecar when present (integrity error on mismatch).
TabulationSet LoadTabulationCsv(const std::filesystem::path& csv_path,
                                const Geography& geo);

}  // namespace censim

#endif  // CENSIM_TABULATE_H_
