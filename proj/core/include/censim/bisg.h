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

#ifndef CENSIM_BISG_H_
#define CENSIM_BISG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "censim/tabulate.h"
#include "censim/types.h"

namespace censim {

// Which name factors enter the prior.
enum class NameParts { kLast, kFirstLast, kFirstMiddleLast };

std::string_view NamePartsName(NameParts parts);
std::optional<NameParts> NamePartsFromName(std::string_view name);

// Which released table supplies the geography likelihood.
enum class PopulationTable { kTotal, kVap };

struct BisgOptions {
  NameParts parts = NameParts::kFirstMiddleLast;
  PopulationTable population = PopulationTable::kVap;
  // Additive smoothing constant per block-race cell; keeps zero or clamped
  // noised counts from annihilating a race. Zero is allowed.
  double lambda = 0.5;
};

struct NamePriorResult {
  RaceVector prior{};
  // Set when a name id was outside the model (its factor was dropped) or
  // when all factors multiplied to zero (fell back to the national prior).
  bool flagged = false;
};

// Normalized product of the national race prior with the race-conditional
// probabilities of the included name parts (names treated as conditionally
// independent given race). A record with no middle name simply contributes
// no middle factor.
NamePriorResult NamePrior(const VoterRecord& record, const NameModel& nm,
                          NameParts parts);

// Bayes update of `prior` with the geography likelihood
//   g(block | r) = (count(r, block) + lambda) / (count(r, state) + lambda * B)
// where B is the number of blocks and counts come from the chosen table.
// With lambda = 0, races absent from the whole state contribute zero mass.
// Throws Error(kContract) for an unknown block and Error(kUndefinedStat)
// when every race ends up with zero mass (impossible for lambda > 0 and a
// proper prior).
RaceVector BisgPosterior(const RaceVector& prior, const TabulationSet& tab,
                         std::int64_t block_id, PopulationTable population,
                         double lambda);

// Argmax; ties break toward the lowest race encoding. Scale-invariant, so
// unnormalized score vectors are fine.
RaceCategory ClassifyMap(const RaceVector& scores);

struct PosteriorRecord {
  std::int64_t person_id = 0;
  RaceVector prior{};      // name-only
  RaceVector posterior{};  // after conditioning on the released tables
  RaceCategory map_race = RaceCategory::kWhite;
  std::optional<RaceCategory> true_race;
  bool flagged = false;

  friend bool operator==(const PosteriorRecord&, const PosteriorRecord&) =
      default;
};

// Full inference pass over a voter file against one released tabulation.
std::vector<PosteriorRecord> RunBisg(const VoterFile& voters,
                                     const NameModel& nm,
                                     const TabulationSet& tab,
                                     const BisgOptions& options);

// Name-only baseline: posterior == prior, classified from the prior alone.
std::vector<PosteriorRecord> PriorOnlyRecords(const VoterFile& voters,
                                              const NameModel& nm,
                                              NameParts parts);

// Fraction of records whose MAP race differs from the true race. Requires
// every record to carry true_race; throws Error(kUndefinedStat) on empty
// input.
double ErrorRate(std::span<const PosteriorRecord> records);

void SavePosteriorsCsv(std::span<const PosteriorRecord> records,
                       const std::filesystem::path& path);
std::vector<PosteriorRecord> LoadPosteriorsCsv(
    const std::filesystem::path& path);

}  // namespace censim

#endif  // CENSIM_BISG_H_
