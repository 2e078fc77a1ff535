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

#ifndef CENSIM_TYPES_H_
#define CENSIM_TYPES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace censim {

// Closed five-way race/ethnicity classification with a stable integer
// encoding used in every persisted file.
enum class RaceCategory : std::uint8_t {
  kWhite = 0,
  kBlack = 1,
  kHispanic = 2,
  kAsian = 3,
  kOther = 4,
};

inline constexpr int kNumRaces = 5;

inline constexpr std::array<RaceCategory, kNumRaces> kAllRaces = {
    RaceCategory::kWhite, RaceCategory::kBlack, RaceCategory::kHispanic,
    RaceCategory::kAsian, RaceCategory::kOther};

std::string_view RaceName(RaceCategory race);
std::optional<RaceCategory> RaceFromEncoding(std::int64_t encoding);
std::optional<RaceCategory> RaceFromName(std::string_view name);

// Probability (or score) vector indexed by RaceCategory encoding.
using RaceVector = std::array<double, kNumRaces>;
// Count vector indexed by RaceCategory encoding.
using RaceCounts = std::array<std::int64_t, kNumRaces>;

struct Person {
  std::int64_t person_id = 0;
  std::int64_t household_id = 0;
  RaceCategory race = RaceCategory::kWhite;
  bool is_adult = false;
  std::int32_t surname_id = 0;
  std::int32_t first_name_id = 0;
  std::optional<std::int32_t> middle_name_id;

  friend bool operator==(const Person&, const Person&) = default;
};

struct Household {
  std::int64_t household_id = 0;
  std::int64_t block_id = 0;
  std::int32_t n_adults = 0;
  std::int32_t n_children = 0;

  friend bool operator==(const Household&, const Household&) = default;
};

struct BlockGeo {
  std::int64_t block_id = 0;
  std::int64_t tract_id = 0;
  std::int64_t county_id = 0;
  std::int64_t state_id = 0;

  friend bool operator==(const BlockGeo&, const BlockGeo&) = default;
};

// Block -> tract -> county -> state containment. Blocks are kept sorted by
// block_id; Validate() enforces uniqueness and that each tract maps into a
// single county and each county into a single state.
struct Geography {
  std::vector<BlockGeo> blocks;

  const BlockGeo* Find(std::int64_t block_id) const;
  void Validate() const;  // throws Error(kIntegrity)

  friend bool operator==(const Geography&, const Geography&) = default;
};

// Race-conditional name frequency tables plus a national race prior: the
// attacker's auxiliary data. Rows are indexed by race; row r of each table
// is a probability distribution over that table's name ids.
struct NameModel {
  std::array<std::vector<double>, kNumRaces> surname_given_race;
  std::array<std::vector<double>, kNumRaces> first_given_race;
  std::array<std::vector<double>, kNumRaces> middle_given_race;
  RaceVector national_race_prior{};

  std::size_t surname_count() const { return surname_given_race[0].size(); }
  std::size_t first_count() const { return first_given_race[0].size(); }
  std::size_t middle_count() const { return middle_given_race[0].size(); }

  void Validate() const;  // throws Error(kIntegrity)

  friend bool operator==(const NameModel&, const NameModel&) = default;
};

// Small hand-written five-surname model used in documentation and tests.
NameModel DemoNameModel();

struct VoterRecord {
  std::int64_t person_id = 0;
  std::int64_t block_id = 0;
  std::int32_t surname_id = 0;
  std::int32_t first_name_id = 0;
  std::optional<std::int32_t> middle_name_id;
  RaceCategory true_race = RaceCategory::kWhite;

  friend bool operator==(const VoterRecord&, const VoterRecord&) = default;
};

using VoterFile = std::vector<VoterRecord>;

// The confidential microdata: persons grouped into households, households
// located in blocks. Treated as immutable once built.
struct Microdata {
  Geography geography;
  std::vector<Household> households;  // sorted by household_id
  std::vector<Person> persons;        // sorted by person_id

  friend bool operator==(const Microdata&, const Microdata&) = default;
};

// Structural invariants: unique ids, household/block references resolve,
// per-household adult and child counts match the member persons.
// Throws Error(kIntegrity) on the first violation found.
void ValidateMicrodata(const Microdata& md);
// Additionally checks that every person's name ids index into the model.
void ValidateMicrodata(const Microdata& md, const NameModel& nm);

}  // namespace censim

#endif  // CENSIM_TYPES_H_
