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

#ifndef CENSIM_SYNTH_H_
#define CENSIM_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "censim/types.h"

namespace censim {

// Inclusive integer range.
struct IntRangeSpec {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

struct GeographySpec {
  int counties = 1;
  int tracts_per_county = 1;
  int blocks_per_tract = 1;
};

// Per-block race mixtures: either one mixture per block drawn from a
// Dirichlet, or an explicit list cycled over blocks in block-id order.
struct RaceMixtureSpec {
  enum class Mode { kDirichlet, kExplicit };
  Mode mode = Mode::kDirichlet;
  RaceVector concentration{1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<RaceVector> block_mixtures;  // kExplicit only; cycled
};

struct NameModelSpec {
  enum class Mode { kDemo, kDirichlet, kFile };
  Mode mode = Mode::kDirichlet;
  // kDirichlet: vocabulary sizes and symmetric concentrations for the
  // race-conditional name frequency rows.
  int surnames = 200;
  int first_names = 100;
  int middle_names = 50;
  double surname_concentration = 0.4;
  double first_concentration = 0.5;
  double middle_concentration = 0.5;
  RaceVector national_race_prior{0.45, 0.20, 0.15, 0.12, 0.08};
  std::string path;  // kFile: JSON document to load
};

struct GenerationConfig {
  GeographySpec geography;
  IntRangeSpec households_per_block{1, 1};
  IntRangeSpec adults_per_household{1, 2};
  IntRangeSpec children_per_household{0, 0};
  // Probability that a person carries a middle name id at all.
  double middle_name_rate = 1.0;
  RaceMixtureSpec race_mixture;
  NameModelSpec name_model;

  int block_count() const {
    return geography.counties * geography.tracts_per_county *
           geography.blocks_per_tract;
  }

  // Throws Error(kConfig) naming the offending field.
  void Validate() const;
};

// The name model the generator will sample names from. Pure function of
// (config, seed): GeneratePopulation with the same arguments uses exactly
// this model.
NameModel RealizeNameModel(const GenerationConfig& config, std::uint64_t seed);

// Seeded synthetic microdata. Identical (config, seed) yields identical
// output. Races are drawn per person from the block's mixture; names from
// the realized NameModel conditioned on race.
Microdata GeneratePopulation(const GenerationConfig& config,
                             std::uint64_t seed);

// Each adult is included independently with probability registration_rate
// (race-independent Bernoulli); children are never included. Deterministic
// under (md, rate, seed) and independent of iteration order.
VoterFile ExtractVoterFile(const Microdata& md, double registration_rate,
                           std::uint64_t seed);

}  // namespace censim

#endif  // CENSIM_SYNTH_H_
