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

#include "censim/types.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "censim/errors.h"

namespace censim {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

void CheckProbabilityRow(const std::vector<double>& row, const std::string& what) {
  double sum = 0;
  for (double p : row) {
    if (p < 0 || !std::isfinite(p)) {
      throw Error(ErrorKind::kIntegrity,
                  what + ": entries must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorKind::kIntegrity,
                what + ": row sums to " + std::to_string(sum) + ", want 1");
  }
}

}  // namespace

std::string_view RaceName(RaceCategory race) {
  switch (race) {
    case RaceCategory::kWhite:
      return "white";
    case RaceCategory::kBlack:
      return "black";
    case RaceCategory::kHispanic:
      return "hispanic";
    case RaceCategory::kAsian:
      return "asian";
    case RaceCategory::kOther:
      return "other";
  }
  return "invalid";
}

std::optional<RaceCategory> RaceFromEncoding(std::int64_t encoding) {
  if (encoding < 0 || encoding >= kNumRaces) return std::nullopt;
  return static_cast<RaceCategory>(encoding);
}

std::optional<RaceCategory> RaceFromName(std::string_view name) {
  for (RaceCategory race : kAllRaces) {
    if (RaceName(race) == name) return race;
  }
  return std::nullopt;
}

const BlockGeo* Geography::Find(std::int64_t block_id) const {
  auto it = std::lower_bound(
      blocks.begin(), blocks.end(), block_id,
      [](const BlockGeo& g, std::int64_t id) { return g.block_id < id; });
  if (it == blocks.end() || it->block_id != block_id) return nullptr;
  return &*it;
}

void Geography::Validate() const {
  if (blocks.empty()) {
    throw Error(ErrorKind::kIntegrity, "geography: no blocks");
  }
  std::unordered_set<std::int64_t> seen;
  std::unordered_map<std::int64_t, std::int64_t> tract_to_county;
  std::unordered_map<std::int64_t, std::int64_t> county_to_state;
  std::int64_t prev = blocks.front().block_id - 1;
  for (const BlockGeo& b : blocks) {
    if (b.block_id <= prev) {
      throw Error(ErrorKind::kIntegrity,
                  "geography: blocks must be sorted by unique block_id");
    }
    prev = b.block_id;
    if (!seen.insert(b.block_id).second) {
      throw Error(ErrorKind::kIntegrity,
                  "geography: duplicate block_id " + std::to_string(b.block_id));
    }
    auto [t_it, t_new] = tract_to_county.emplace(b.tract_id, b.county_id);
    if (!t_new && t_it->second != b.county_id) {
      throw Error(ErrorKind::kIntegrity,
                  "geography: tract " + std::to_string(b.tract_id) +
                      " spans multiple counties");
    }
    auto [c_it, c_new] = county_to_state.emplace(b.county_id, b.state_id);
    if (!c_new && c_it->second != b.state_id) {
      throw Error(ErrorKind::kIntegrity,
                  "geography: county " + std::to_string(b.county_id) +
                      " spans multiple states");
    }
  }
  std::int64_t state = blocks.front().state_id;
  for (const BlockGeo& b : blocks) {
    if (b.state_id != state) {
      throw Error(ErrorKind::kIntegrity,
                  "geography: multiple states are not supported");
    }
  }
}

void NameModel::Validate() const {
  double prior_sum = 0;
  for (double p : national_race_prior) {
    if (p < 0 || !std::isfinite(p)) {
      throw Error(ErrorKind::kIntegrity,
                  "name model: national_race_prior entries must be finite and "
                  "non-negative");
    }
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorKind::kIntegrity,
                "name model: national_race_prior sums to " +
                    std::to_string(prior_sum) + ", want 1");
  }
  auto check_table = [](const std::array<std::vector<double>, kNumRaces>& table,
                        const std::string& what) {
    std::size_t width = table[0].size();
    if (width == 0) {
      throw Error(ErrorKind::kIntegrity, what + ": empty vocabulary");
    }
    for (int r = 0; r < kNumRaces; ++r) {
      if (table[r].size() != width) {
        throw Error(ErrorKind::kIntegrity, what + ": ragged rows");
      }
      CheckProbabilityRow(table[r],
                          what + "[" + std::string(RaceName(kAllRaces[r])) + "]");
    }
  };
  check_table(surname_given_race, "name model: surname_given_race");
  check_table(first_given_race, "name model: first_given_race");
  check_table(middle_given_race, "name model: middle_given_race");
}

NameModel DemoNameModel() {
  NameModel nm;
  nm.national_race_prior = {0.40, 0.20, 0.20, 0.10, 0.10};
  // Each race concentrates on "its" surname; every row sums to 1.
  nm.surname_given_race = {{
      {0.60, 0.10, 0.10, 0.10, 0.10},  // white
      {0.10, 0.60, 0.10, 0.10, 0.10},  // black
      {0.10, 0.10, 0.60, 0.10, 0.10},  // hispanic
      {0.10, 0.10, 0.10, 0.60, 0.10},  // asian
      {0.10, 0.10, 0.10, 0.10, 0.60},  // other
  }};
  nm.first_given_race = {{
      {0.50, 0.30, 0.20},
      {0.30, 0.50, 0.20},
      {0.20, 0.30, 0.50},
      {0.40, 0.20, 0.40},
      {0.30, 0.40, 0.30},
  }};
  nm.middle_given_race = {{
      {0.70, 0.30},
      {0.40, 0.60},
      {0.50, 0.50},
      {0.60, 0.40},
      {0.30, 0.70},
  }};
  return nm;
}

void ValidateMicrodata(const Microdata& md) {
  md.geography.Validate();

  std::unordered_map<std::int64_t, const Household*> households;
  households.reserve(md.households.size());
  for (const Household& h : md.households) {
    if (!households.emplace(h.household_id, &h).second) {
      throw Error(ErrorKind::kIntegrity, "microdata: duplicate household_id " +
                                             std::to_string(h.household_id));
    }
    if (md.geography.Find(h.block_id) == nullptr) {
      throw Error(ErrorKind::kIntegrity,
                  "microdata: household " + std::to_string(h.household_id) +
                      " references missing block " + std::to_string(h.block_id));
    }
    if (h.n_adults < 0 || h.n_children < 0 || h.n_adults + h.n_children < 1) {
      throw Error(ErrorKind::kIntegrity,
                  "microdata: household " + std::to_string(h.household_id) +
                      " must contain at least one person");
    }
  }

  std::unordered_map<std::int64_t, std::pair<std::int32_t, std::int32_t>> tally;
  tally.reserve(md.households.size());
  std::unordered_set<std::int64_t> person_ids;
  person_ids.reserve(md.persons.size());
  for (const Person& p : md.persons) {
    if (!person_ids.insert(p.person_id).second) {
      throw Error(ErrorKind::kIntegrity, "microdata: duplicate person_id " +
                                             std::to_string(p.person_id));
    }
    if (households.find(p.household_id) == households.end()) {
      throw Error(ErrorKind::kIntegrity,
                  "microdata: person " + std::to_string(p.person_id) +
                      " references missing household " +
                      std::to_string(p.household_id));
    }
    auto& [adults, children] = tally[p.household_id];
    (p.is_adult ? adults : children) += 1;
  }

  for (const Household& h : md.households) {
    auto it = tally.find(h.household_id);
    std::int32_t adults = it == tally.end() ? 0 : it->second.first;
    std::int32_t children = it == tally.end() ? 0 : it->second.second;
    if (adults != h.n_adults || children != h.n_children) {
      throw Error(ErrorKind::kIntegrity,
                  "microdata: household " + std::to_string(h.household_id) +
                      " counts (" + std::to_string(h.n_adults) + "," +
                      std::to_string(h.n_children) + ") do not match members (" +
                      std::to_string(adults) + "," + std::to_string(children) +
                      ")");
    }
  }
}

void ValidateMicrodata(const Microdata& md, const NameModel& nm) {
  ValidateMicrodata(md);
  nm.Validate();
  for (const Person& p : md.persons) {
    bool ok = p.surname_id >= 0 &&
              p.surname_id < static_cast<std::int32_t>(nm.surname_count()) &&
              p.first_name_id >= 0 &&
              p.first_name_id < static_cast<std::int32_t>(nm.first_count());
    if (ok && p.middle_name_id.has_value()) {
      ok = *p.middle_name_id >= 0 &&
           *p.middle_name_id < static_cast<std::int32_t>(nm.middle_count());
    }
    if (!ok) {
      throw Error(ErrorKind::kIntegrity,
                  "microdata: person " + std::to_string(p.person_id) +
                      " has a name id outside the name model");
    }
  }
}

}  // namespace censim
