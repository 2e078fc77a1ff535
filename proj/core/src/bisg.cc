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

#include "censim/bisg.h"

#include <cmath>
#include <string>

#include "censim/errors.h"
#include "internal_csv.h"

namespace censim {

namespace {

using internal::CsvReader;
using internal::CsvWriter;

constexpr std::string_view kPosteriorsHeader =
    "person_id,flagged,prior_white,prior_black,prior_hispanic,prior_asian,"
    "prior_other,posterior_white,posterior_black,posterior_hispanic,"
    "posterior_asian,posterior_other,map_race,true_race";

// Multiplies `scores` by the race-conditional probability of name id `id`
// in `table`. An id outside the model drops the factor and flags the record.
void ApplyNameFactor(const std::array<std::vector<double>, kNumRaces>& table,
                     std::int32_t id, RaceVector& scores, bool& flagged) {
  if (id < 0 || id >= static_cast<std::int32_t>(table[0].size())) {
    flagged = true;
    return;
  }
  for (int r = 0; r < kNumRaces; ++r) {
    scores[r] *= table[r][static_cast<std::size_t>(id)];
  }
}

bool NormalizeInPlace(RaceVector& v) {
  double sum = 0;
  for (double x : v) sum += x;
  if (!(sum > 0)) return false;
  for (double& x : v) x /= sum;
  return true;
}

}  // namespace

std::string_view NamePartsName(NameParts parts) {
  switch (parts) {
    case NameParts::kLast:
      return "last";
    case NameParts::kFirstLast:
      return "first_last";
    case NameParts::kFirstMiddleLast:
      return "first_middle_last";
  }
  return "invalid";
}

std::optional<NameParts> NamePartsFromName(std::string_view name) {
  for (NameParts parts : {NameParts::kLast, NameParts::kFirstLast,
                          NameParts::kFirstMiddleLast}) {
    if (NamePartsName(parts) == name) return parts;
  }
  return std::nullopt;
}

NamePriorResult NamePrior(const VoterRecord& record, const NameModel& nm,
                          NameParts parts) {
  NamePriorResult result;
  result.prior = nm.national_race_prior;
  ApplyNameFactor(nm.surname_given_race, record.surname_id, result.prior,
                  result.flagged);
  if (parts == NameParts::kFirstLast || parts == NameParts::kFirstMiddleLast) {
    ApplyNameFactor(nm.first_given_race, record.first_name_id, result.prior,
                    result.flagged);
  }
  if (parts == NameParts::kFirstMiddleLast && record.middle_name_id.has_value()) {
    ApplyNameFactor(nm.middle_given_race, *record.middle_name_id, result.prior,
                    result.flagged);
  }
  if (!NormalizeInPlace(result.prior)) {
    // Every race got zero likelihood; fall back to the national prior.
    result.prior = nm.national_race_prior;
    result.flagged = true;
    NormalizeInPlace(result.prior);
  }
  return result;
}

RaceVector BisgPosterior(const RaceVector& prior, const TabulationSet& tab,
                         std::int64_t block_id, PopulationTable population,
                         double lambda) {
  if (lambda < 0 || !std::isfinite(lambda)) {
    throw Error(ErrorKind::kConfig, "bisg.lambda: must be non-negative");
  }
  const BlockTable* block = tab.Find(block_id);
  if (block == nullptr) {
    throw Error(ErrorKind::kContract,
                "bisg: block " + std::to_string(block_id) +
                    " not present in the tabulation");
  }
  const RaceCounts state = population == PopulationTable::kVap
                               ? tab.StateVapRaceTotals()
                               : tab.StateRaceTotals();
  const RaceCounts& counts = population == PopulationTable::kVap
                                 ? block->vap_race_counts
                                 : block->race_counts;
  const double n_blocks = static_cast<double>(tab.blocks.size());

  RaceVector posterior{};
  for (int r = 0; r < kNumRaces; ++r) {
    double numer = static_cast<double>(counts[r]) + lambda;
    double denom = static_cast<double>(state[r]) + lambda * n_blocks;
    // With lambda = 0 a race absent from the state has no geographic mass.
    double g = denom > 0 ? numer / denom : 0.0;
    posterior[r] = prior[r] * g;
  }
  if (!NormalizeInPlace(posterior)) {
    throw Error(ErrorKind::kUndefinedStat,
                "bisg: degenerate geography, block " + std::to_string(block_id) +
                    " has zero posterior mass for the given prior");
  }
  return posterior;
}

RaceCategory ClassifyMap(const RaceVector& scores) {
  int best = 0;
  for (int r = 1; r < kNumRaces; ++r) {
    if (scores[r] > scores[best]) best = r;
  }
  return static_cast<RaceCategory>(best);
}

std::vector<PosteriorRecord> RunBisg(const VoterFile& voters,
                                     const NameModel& nm,
                                     const TabulationSet& tab,
                                     const BisgOptions& options) {
  std::vector<PosteriorRecord> records;
  records.reserve(voters.size());
  for (const VoterRecord& v : voters) {
    NamePriorResult np = NamePrior(v, nm, options.parts);
    PosteriorRecord rec;
    rec.person_id = v.person_id;
    rec.prior = np.prior;
    rec.flagged = np.flagged;
    rec.posterior = BisgPosterior(np.prior, tab, v.block_id,
                                  options.population, options.lambda);
    rec.map_race = ClassifyMap(rec.posterior);
    rec.true_race = v.true_race;
    records.push_back(rec);
  }
  return records;
}

std::vector<PosteriorRecord> PriorOnlyRecords(const VoterFile& voters,
                                              const NameModel& nm,
                                              NameParts parts) {
  std::vector<PosteriorRecord> records;
  records.reserve(voters.size());
  for (const VoterRecord& v : voters) {
    NamePriorResult np = NamePrior(v, nm, parts);
    PosteriorRecord rec;
    rec.person_id = v.person_id;
    rec.prior = np.prior;
    rec.posterior = np.prior;
    rec.flagged = np.flagged;
    rec.map_race = ClassifyMap(rec.posterior);
    rec.true_race = v.true_race;
    records.push_back(rec);
  }
  return records;
}

double ErrorRate(std::span<const PosteriorRecord> records) {
  if (records.empty()) {
    throw Error(ErrorKind::kUndefinedStat, "error rate: no records");
  }
  std::int64_t wrong = 0;
  for (const PosteriorRecord& rec : records) {
    if (!rec.true_race.has_value()) {
      throw Error(ErrorKind::kContract,
                  "error rate: record " + std::to_string(rec.person_id) +
                      " has no true race");
    }
    if (rec.map_race != *rec.true_race) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(records.size());
}

void SavePosteriorsCsv(std::span<const PosteriorRecord> records,
                       const std::filesystem::path& path) {
  CsvWriter w(path, kPosteriorsHeader);
  for (const PosteriorRecord& rec : records) {
    w.BeginRow();
    w.Add(rec.person_id);
    w.Add(static_cast<std::int64_t>(rec.flagged ? 1 : 0));
    for (int r = 0; r < kNumRaces; ++r) w.AddProbability(rec.prior[r]);
    for (int r = 0; r < kNumRaces; ++r) w.AddProbability(rec.posterior[r]);
    w.Add(static_cast<std::int64_t>(rec.map_race));
    if (rec.true_race.has_value()) {
      w.Add(static_cast<std::int64_t>(*rec.true_race));
    } else {
      w.Add(std::string_view(""));
    }
    w.EndRow();
  }
}

std::vector<PosteriorRecord> LoadPosteriorsCsv(
    const std::filesystem::path& path) {
  CsvReader r(path, kPosteriorsHeader);
  std::vector<PosteriorRecord> records;
  while (r.ReadRow()) {
    PosteriorRecord rec;
    rec.person_id = r.IntField(0);
    std::int64_t flagged = r.IntField(1);
    if (flagged != 0 && flagged != 1) r.Fail("flagged must be 0 or 1");
    rec.flagged = flagged == 1;
    for (int race = 0; race < kNumRaces; ++race) {
      rec.prior[race] = r.DoubleField(2 + race);
    }
    for (int race = 0; race < kNumRaces; ++race) {
      rec.posterior[race] = r.DoubleField(2 + kNumRaces + race);
    }
    std::int64_t map_encoding = r.IntField(2 + 2 * kNumRaces);
    auto map_race = RaceFromEncoding(map_encoding);
    if (!map_race.has_value()) r.Fail("map_race encoding out of range");
    rec.map_race = *map_race;
    auto true_encoding = r.OptionalIntField(3 + 2 * kNumRaces);
    if (true_encoding.has_value()) {
      auto race = RaceFromEncoding(*true_encoding);
      if (!race.has_value()) r.Fail("true_race encoding out of range");
      rec.true_race = race;
    }
    records.push_back(rec);
  }
  return records;
}

}  // namespace censim
