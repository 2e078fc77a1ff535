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
#include <cstdlib>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "censim/errors.h"
#include "internal_csv.h"

namespace censim {

namespace {

using internal::CsvReader;
using internal::CsvWriter;
using nlohmann::json;

constexpr std::string_view kTabulationHeader =
    "block_id,pop_white,pop_black,pop_hispanic,pop_asian,pop_other,"
    "vap_white,vap_black,vap_hispanic,vap_asian,vap_other,n_households";

json TotalsToJson(const LevelTotals& t) {
  return json{{"total_population", t.population},
              {"total_vap", t.vap},
              {"total_households", t.households}};
}

LevelTotals TotalsFromJson(const json& j, const std::string& what) {
  for (const char* key : {"total_population", "total_vap", "total_households"}) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      throw Error(ErrorKind::kParse, what + ": missing integer \"" +
                                         std::string(key) + "\"");
    }
  }
  return LevelTotals{j["total_population"].get<std::int64_t>(),
                     j["total_vap"].get<std::int64_t>(),
                     j["total_households"].get<std::int64_t>()};
}

std::filesystem::path AggregatesPath(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension();
  p += ".aggregates.json";
  return p;
}

}  // namespace

std::int64_t BlockTable::TotalPopulation() const {
  std::int64_t total = 0;
  for (std::int64_t c : race_counts) total += c;
  return total;
}

std::int64_t BlockTable::TotalVap() const {
  std::int64_t total = 0;
  for (std::int64_t c : vap_race_counts) total += c;
  return total;
}

const BlockTable* TabulationSet::Find(std::int64_t block_id) const {
  auto it = std::lower_bound(
      blocks.begin(), blocks.end(), block_id,
      [](const BlockTable& b, std::int64_t id) { return b.block_id < id; });
  if (it == blocks.end() || it->block_id != block_id) return nullptr;
  return &*it;
}

RaceCounts TabulationSet::StateRaceTotals() const {
  RaceCounts totals{};
  for (const BlockTable& b : blocks) {
    for (int r = 0; r < kNumRaces; ++r) totals[r] += b.race_counts[r];
  }
  return totals;
}

RaceCounts TabulationSet::StateVapRaceTotals() const {
  RaceCounts totals{};
  for (const BlockTable& b : blocks) {
    for (int r = 0; r < kNumRaces; ++r) totals[r] += b.vap_race_counts[r];
  }
  return totals;
}

void TabulationSet::RebuildAggregates() {
  tract_totals.clear();
  county_totals.clear();
  state_totals = LevelTotals{};
  for (const BlockTable& b : blocks) {
    const BlockGeo* geo = geography.Find(b.block_id);
    if (geo == nullptr) {
      throw Error(ErrorKind::kIntegrity,
                  "tabulation: block " + std::to_string(b.block_id) +
                      " missing from geography");
    }
    LevelTotals delta{b.TotalPopulation(), b.TotalVap(), b.n_households};
    for (LevelTotals* agg :
         {&tract_totals[geo->tract_id], &county_totals[geo->county_id],
          &state_totals}) {
      agg->population += delta.population;
      agg->vap += delta.vap;
      agg->households += delta.households;
    }
  }
}

TabulationSet Tabulate(const Microdata& md) {
  TabulationSet tab;
  tab.geography = md.geography;
  tab.blocks.reserve(md.geography.blocks.size());
  std::unordered_map<std::int64_t, std::size_t> index;
  index.reserve(md.geography.blocks.size());
  for (const BlockGeo& g : md.geography.blocks) {
    index.emplace(g.block_id, tab.blocks.size());
    BlockTable bt;
    bt.block_id = g.block_id;
    tab.blocks.push_back(bt);
  }

  std::unordered_map<std::int64_t, std::int64_t> household_block;
  household_block.reserve(md.households.size());
  for (const Household& h : md.households) {
    auto it = index.find(h.block_id);
    if (it == index.end()) {
      throw Error(ErrorKind::kIntegrity,
                  "tabulate: household " + std::to_string(h.household_id) +
                      " references missing block");
    }
    tab.blocks[it->second].n_households += 1;
    household_block.emplace(h.household_id, h.block_id);
  }

  for (const Person& p : md.persons) {
    auto hb = household_block.find(p.household_id);
    if (hb == household_block.end()) {
      throw Error(ErrorKind::kIntegrity,
                  "tabulate: person " + std::to_string(p.person_id) +
                      " references missing household");
    }
    BlockTable& bt = tab.blocks[index.at(hb->second)];
    int r = static_cast<int>(p.race);
    bt.race_counts[r] += 1;
    if (p.is_adult) bt.vap_race_counts[r] += 1;
  }

  tab.RebuildAggregates();
  return tab;
}

DistanceReport TableDistance(const TabulationSet& a, const TabulationSet& b) {
  if (a.blocks.size() != b.blocks.size()) {
    throw Error(ErrorKind::kComparability,
                "table distance: block sets differ in size");
  }
  DistanceReport report;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    const BlockTable& ba = a.blocks[i];
    const BlockTable& bb = b.blocks[i];
    if (ba.block_id != bb.block_id) {
      throw Error(ErrorKind::kComparability,
                  "table distance: block sets differ at block " +
                      std::to_string(ba.block_id));
    }
    std::int64_t dtotal = std::abs(ba.TotalPopulation() - bb.TotalPopulation());
    std::int64_t dvap = std::abs(ba.TotalVap() - bb.TotalVap());
    report.total_population_l1 += dtotal;
    report.vap_l1 += dvap;
    report.max_abs_deviation = std::max(report.max_abs_deviation, dtotal);
    report.max_abs_deviation = std::max(report.max_abs_deviation, dvap);
    for (int r = 0; r < kNumRaces; ++r) {
      std::int64_t drace = std::abs(ba.race_counts[r] - bb.race_counts[r]);
      std::int64_t dvapr =
          std::abs(ba.vap_race_counts[r] - bb.vap_race_counts[r]);
      report.race_l1 += drace;
      report.max_abs_deviation = std::max(report.max_abs_deviation, drace);
      report.max_abs_deviation = std::max(report.max_abs_deviation, dvapr);
    }
  }
  return report;
}

void SaveTabulationCsv(const TabulationSet& tab,
                       const std::filesystem::path& csv_path) {
  CsvWriter w(csv_path, kTabulationHeader);
  for (const BlockTable& b : tab.blocks) {
    w.BeginRow();
    w.Add(b.block_id);
    for (int r = 0; r < kNumRaces; ++r) w.Add(b.race_counts[r]);
    for (int r = 0; r < kNumRaces; ++r) w.Add(b.vap_race_counts[r]);
    w.Add(b.n_households);
    w.EndRow();
  }

  json tracts = json::object();
  for (const auto& [id, totals] : tab.tract_totals) {
    tracts[std::to_string(id)] = TotalsToJson(totals);
  }
  json counties = json::object();
  for (const auto& [id, totals] : tab.county_totals) {
    counties[std::to_string(id)] = TotalsToJson(totals);
  }
  json doc{{"state", TotalsToJson(tab.state_totals)},
           {"counties", counties},
           {"tracts", tracts}};
  std::ofstream out(AggregatesPath(csv_path));
  if (!out) {
    throw Error(ErrorKind::kFile,
                "cannot write " + AggregatesPath(csv_path).string());
  }
  out << doc.dump(2) << '\n';
}

TabulationSet LoadTabulationCsv(const std::filesystem::path& csv_path,
                                const Geography& geo) {
  geo.Validate();
  TabulationSet tab;
  tab.geography = geo;
  CsvReader r(csv_path, kTabulationHeader);
  while (r.ReadRow()) {
    BlockTable b;
    b.block_id = r.IntField(0);
    for (int race = 0; race < kNumRaces; ++race) {
      b.race_counts[race] = r.IntField(1 + race);
    }
    for (int race = 0; race < kNumRaces; ++race) {
      b.vap_race_counts[race] = r.IntField(1 + kNumRaces + race);
    }
    b.n_households = r.IntField(1 + 2 * kNumRaces);
    for (int race = 0; race < kNumRaces; ++race) {
      if (b.race_counts[race] < 0 || b.vap_race_counts[race] < 0) {
        r.Fail("negative count");
      }
      if (b.vap_race_counts[race] > b.race_counts[race]) {
        throw Error(ErrorKind::kIntegrity,
                    csv_path.string() + ": block " + std::to_string(b.block_id) +
                        ": vap exceeds population for race " +
                        std::string(RaceName(kAllRaces[race])));
      }
    }
    if (b.n_households < 0) r.Fail("negative household count");
    if (!tab.blocks.empty() && tab.blocks.back().block_id >= b.block_id) {
      r.Fail("blocks must be sorted by unique block_id");
    }
    tab.blocks.push_back(b);
  }
  if (tab.blocks.size() != geo.blocks.size()) {
    throw Error(ErrorKind::kIntegrity,
                csv_path.string() + ": has " + std::to_string(tab.blocks.size()) +
                    " blocks, geography has " +
                    std::to_string(geo.blocks.size()));
  }
  tab.RebuildAggregates();

  // Cross-check the sidecar when present.
  std::filesystem::path agg_path = AggregatesPath(csv_path);
  if (std::filesystem::exists(agg_path)) {
    std::ifstream in(agg_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, agg_path.string() + ": " + e.what());
    }
    LevelTotals state =
        TotalsFromJson(doc.value("state", json::object()), agg_path.string());
    if (state != tab.state_totals) {
      throw Error(ErrorKind::kIntegrity,
                  agg_path.string() +
                      ": state totals do not match the block tables");
    }
  }
  return tab;
}

}  // namespace censim
