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

#include "censim/tabulate.h"

#include <algorithm>
#include <filesystem>
#include <random>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "censim/errors.h"
#include "censim/synth.h"
#include "test_util.h"

namespace censim {
namespace {

TEST_SUITE("tabulate") {

TEST_CASE("two white adults in block zero produce the forced table") {
  Microdata md;
  md.geography = test::MakeGrid(1);
  test::AddHousehold(md, 0, 0,
                     {{RaceCategory::kWhite, true}, {RaceCategory::kWhite, true}});
  TabulationSet tab = Tabulate(md);
  REQUIRE(tab.blocks.size() == 1);
  CHECK(tab.blocks[0].race_counts == RaceCounts{2, 0, 0, 0, 0});
  CHECK(tab.blocks[0].vap_race_counts == RaceCounts{2, 0, 0, 0, 0});
  CHECK(tab.blocks[0].n_households == 1);
  CHECK(tab.state_totals == LevelTotals{2, 2, 1});
}

TEST_CASE("an empty block still gets an all-zero table") {
  Microdata md;
  md.geography = test::MakeGrid(2);
  test::AddHousehold(md, 0, 0, {{RaceCategory::kBlack, true}});
  TabulationSet tab = Tabulate(md);
  REQUIRE(tab.blocks.size() == 2);
  CHECK(tab.blocks[1].block_id == 1);
  CHECK(tab.blocks[1].TotalPopulation() == 0);
  CHECK(tab.blocks[1].n_households == 0);
}

TEST_CASE("state totals equal the person count on generated data") {
  Microdata md = GeneratePopulation(test::MediumConfig(), 41);
  TabulationSet tab = Tabulate(md);
  CHECK(tab.state_totals.population ==
        static_cast<std::int64_t>(md.persons.size()));
  CHECK(tab.state_totals.households ==
        static_cast<std::int64_t>(md.households.size()));

  // Block sums reproduce the rollups at every level.
  std::int64_t pop = 0;
  std::int64_t vap = 0;
  for (const BlockTable& b : tab.blocks) {
    std::int64_t block_total = 0;
    for (int r = 0; r < kNumRaces; ++r) block_total += b.race_counts[r];
    CHECK(block_total == b.TotalPopulation());
    pop += b.TotalPopulation();
    vap += b.TotalVap();
  }
  CHECK(pop == tab.state_totals.population);
  CHECK(vap == tab.state_totals.vap);

  LevelTotals county_sum;
  for (const auto& [county, totals] : tab.county_totals) {
    county_sum.population += totals.population;
    county_sum.vap += totals.vap;
    county_sum.households += totals.households;
  }
  CHECK(county_sum == tab.state_totals);
}

TEST_CASE("tabulation ignores input row order") {
  Microdata md = GeneratePopulation(test::MediumConfig(), 43);
  TabulationSet expected = Tabulate(md);
  std::mt19937 shuffle(1);  // test-only shuffling, not a censim stream
  std::shuffle(md.persons.begin(), md.persons.end(), shuffle);
  std::shuffle(md.households.begin(), md.households.end(), shuffle);
  CHECK(Tabulate(md) == expected);
}

TEST_CASE("distance of a table to itself is zero") {
  TabulationSet tab = Tabulate(GeneratePopulation(test::MediumConfig(), 47));
  DistanceReport report = TableDistance(tab, tab);
  CHECK(report.IsZero());
}

TEST_CASE("a single incremented cell shows up in every distance component") {
  TabulationSet a = Tabulate(GeneratePopulation(test::MediumConfig(), 53));
  TabulationSet b = a;
  b.blocks[7].race_counts[2] += 3;
  b.RebuildAggregates();
  DistanceReport report = TableDistance(a, b);
  CHECK(report.total_population_l1 == 3);
  CHECK(report.race_l1 == 3);
  CHECK(report.vap_l1 == 0);
  CHECK(report.max_abs_deviation == 3);
  CHECK(report == TableDistance(b, a));
}

TEST_CASE("mismatched block sets are not comparable") {
  Microdata md_a;
  md_a.geography = test::MakeGrid(2);
  test::AddHousehold(md_a, 0, 0, {{RaceCategory::kWhite, true}});
  Microdata md_b;
  md_b.geography = test::MakeGrid(3);
  test::AddHousehold(md_b, 0, 0, {{RaceCategory::kWhite, true}});
  TabulationSet a = Tabulate(md_a);
  TabulationSet b = Tabulate(md_b);
  CHECK_THROWS_AS(TableDistance(a, b), Error);
}

TEST_CASE("tabulation round-trips through CSV with its sidecar") {
  TabulationSet tab = Tabulate(GeneratePopulation(test::MediumConfig(), 59));
  auto dir = test::TempDir("tab");
  SaveTabulationCsv(tab, dir / "tables.csv");
  TabulationSet loaded = LoadTabulationCsv(dir / "tables.csv", tab.geography);
  CHECK(loaded == tab);

  // A sidecar that disagrees with the blocks is an integrity error.
  auto doc = nlohmann::json::parse(test::ReadFile(dir / "tables.aggregates.json"));
  doc["state"]["total_population"] = doc["state"]["total_population"].get<int>() + 1;
  test::WriteFile(dir / "tables.aggregates.json", doc.dump());
  try {
    LoadTabulationCsv(dir / "tables.csv", tab.geography);
    FAIL("expected an integrity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIntegrity);
  }
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE

}  // namespace
}  // namespace censim
