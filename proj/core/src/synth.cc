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

#include "censim/synth.h"

#include <cmath>
#include <string>
#include <unordered_map>

#include "censim/errors.h"
#include "censim/io.h"
#include "censim/rng.h"

namespace censim {

namespace {

void CheckRange(const IntRangeSpec& range, std::int64_t floor,
                const std::string& field) {
  if (range.min < floor || range.max < range.min) {
    throw Error(ErrorKind::kConfig,
                field + ": need " + std::to_string(floor) +
                    " <= min <= max, got [" + std::to_string(range.min) + "," +
                    std::to_string(range.max) + "]");
  }
}

void CheckMixture(const RaceVector& mixture, const std::string& field) {
  double sum = 0;
  for (double p : mixture) {
    if (p < 0 || !std::isfinite(p)) {
      throw Error(ErrorKind::kConfig,
                  field + ": entries must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::kConfig,
                field + ": sums to " + std::to_string(sum) + ", want 1");
  }
}

// One race-conditional probability row over `size` names.
std::vector<double> SampleDirichletRow(Rng& rng, int size, double concentration) {
  std::vector<double> row(size);
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    row[i] = rng.NextGamma(concentration);
    sum += row[i];
  }
  for (double& p : row) p /= sum;
  return row;
}

RaceVector SampleDirichletMixture(Rng& rng, const RaceVector& concentration) {
  RaceVector mix{};
  double sum = 0;
  for (int r = 0; r < kNumRaces; ++r) {
    mix[r] = concentration[r] > 0 ? rng.NextGamma(concentration[r]) : 0.0;
    sum += mix[r];
  }
  for (double& p : mix) p /= sum;
  return mix;
}

Geography BuildGeography(const GeographySpec& spec) {
  Geography geo;
  geo.blocks.reserve(static_cast<std::size_t>(spec.counties) *
                     spec.tracts_per_county * spec.blocks_per_tract);
  std::int64_t block_id = 0;
  for (int c = 0; c < spec.counties; ++c) {
    for (int t = 0; t < spec.tracts_per_county; ++t) {
      std::int64_t tract_id =
          static_cast<std::int64_t>(c) * spec.tracts_per_county + t;
      for (int b = 0; b < spec.blocks_per_tract; ++b) {
        geo.blocks.push_back(BlockGeo{block_id++, tract_id, c, 0});
      }
    }
  }
  return geo;
}

RaceVector BlockMixture(const GenerationConfig& config, Rng& root,
                        std::int64_t block_id) {
  const RaceMixtureSpec& spec = config.race_mixture;
  if (spec.mode == RaceMixtureSpec::Mode::kExplicit) {
    return spec.block_mixtures[static_cast<std::size_t>(block_id) %
                               spec.block_mixtures.size()];
  }
  Rng rng = root.Fork("mixture", static_cast<std::uint64_t>(block_id));
  return SampleDirichletMixture(rng, spec.concentration);
}

}  // namespace

void GenerationConfig::Validate() const {
  if (geography.counties < 1) {
    throw Error(ErrorKind::kConfig, "generation.geography.counties: must be >= 1");
  }
  if (geography.tracts_per_county < 1) {
    throw Error(ErrorKind::kConfig,
                "generation.geography.tracts_per_county: must be >= 1");
  }
  if (geography.blocks_per_tract < 1) {
    throw Error(ErrorKind::kConfig,
                "generation.geography.blocks_per_tract: must be >= 1");
  }
  CheckRange(households_per_block, 0, "generation.households_per_block");
  CheckRange(adults_per_household, 0, "generation.adults_per_household");
  CheckRange(children_per_household, 0, "generation.children_per_household");
  if (adults_per_household.max + children_per_household.max < 1) {
    throw Error(ErrorKind::kConfig,
                "generation.adults_per_household/children_per_household: size "
                "ranges cannot produce a non-empty household");
  }
  if (middle_name_rate < 0 || middle_name_rate > 1) {
    throw Error(ErrorKind::kConfig,
                "generation.middle_name_rate: must lie in [0, 1]");
  }

  if (race_mixture.mode == RaceMixtureSpec::Mode::kDirichlet) {
    double sum = 0;
    for (double a : race_mixture.concentration) {
      if (a < 0 || !std::isfinite(a)) {
        throw Error(ErrorKind::kConfig,
                    "generation.race_mixture.concentration: entries must be "
                    "finite and non-negative");
      }
      sum += a;
    }
    if (sum <= 0) {
      throw Error(ErrorKind::kConfig,
                  "generation.race_mixture.concentration: must have positive sum");
    }
  } else {
    if (race_mixture.block_mixtures.empty()) {
      throw Error(ErrorKind::kConfig,
                  "generation.race_mixture.blocks: explicit mode needs at "
                  "least one mixture");
    }
    for (std::size_t i = 0; i < race_mixture.block_mixtures.size(); ++i) {
      CheckMixture(race_mixture.block_mixtures[i],
                   "generation.race_mixture.blocks[" + std::to_string(i) + "]");
    }
  }

  switch (name_model.mode) {
    case NameModelSpec::Mode::kDemo:
      break;
    case NameModelSpec::Mode::kDirichlet: {
      if (name_model.surnames < 1 || name_model.first_names < 1 ||
          name_model.middle_names < 1) {
        throw Error(ErrorKind::kConfig,
                    "generation.name_model: vocabulary sizes must be >= 1");
      }
      if (!(name_model.surname_concentration > 0) ||
          !(name_model.first_concentration > 0) ||
          !(name_model.middle_concentration > 0)) {
        throw Error(ErrorKind::kConfig,
                    "generation.name_model: concentrations must be positive");
      }
      CheckMixture(name_model.national_race_prior,
                   "generation.name_model.national_race_prior");
      break;
    }
    case NameModelSpec::Mode::kFile:
      if (name_model.path.empty()) {
        throw Error(ErrorKind::kConfig,
                    "generation.name_model.path: required in file mode");
      }
      break;
  }
}

NameModel RealizeNameModel(const GenerationConfig& config, std::uint64_t seed) {
  config.Validate();
  switch (config.name_model.mode) {
    case NameModelSpec::Mode::kDemo:
      return DemoNameModel();
    case NameModelSpec::Mode::kFile: {
      NameModel nm = LoadNameModelJson(config.name_model.path);
      nm.Validate();
      return nm;
    }
    case NameModelSpec::Mode::kDirichlet:
      break;
  }
  const NameModelSpec& spec = config.name_model;
  Rng root = Rng(seed).Fork("namemodel");
  NameModel nm;
  nm.national_race_prior = spec.national_race_prior;
  for (int r = 0; r < kNumRaces; ++r) {
    Rng surname_rng = root.Fork("surname", static_cast<std::uint64_t>(r));
    Rng first_rng = root.Fork("first", static_cast<std::uint64_t>(r));
    Rng middle_rng = root.Fork("middle", static_cast<std::uint64_t>(r));
    nm.surname_given_race[r] =
        SampleDirichletRow(surname_rng, spec.surnames, spec.surname_concentration);
    nm.first_given_race[r] =
        SampleDirichletRow(first_rng, spec.first_names, spec.first_concentration);
    nm.middle_given_race[r] = SampleDirichletRow(middle_rng, spec.middle_names,
                                                 spec.middle_concentration);
  }
  nm.Validate();
  return nm;
}

Microdata GeneratePopulation(const GenerationConfig& config,
                             std::uint64_t seed) {
  config.Validate();
  const NameModel nm = RealizeNameModel(config, seed);
  Rng root(seed);

  Microdata md;
  md.geography = BuildGeography(config.geography);

  std::int64_t next_household = 0;
  std::int64_t next_person = 0;
  for (const BlockGeo& block : md.geography.blocks) {
    RaceVector mixture = BlockMixture(config, root, block.block_id);
    Rng block_rng = root.Fork("block", static_cast<std::uint64_t>(block.block_id));
    std::int64_t n_households = block_rng.NextInt(
        config.households_per_block.min, config.households_per_block.max);
    for (std::int64_t h = 0; h < n_households; ++h) {
      std::int64_t household_id = next_household++;
      Rng hh_rng = root.Fork("household", static_cast<std::uint64_t>(household_id));
      std::int64_t adults = 0;
      std::int64_t children = 0;
      do {
        adults = hh_rng.NextInt(config.adults_per_household.min,
                                config.adults_per_household.max);
        children = hh_rng.NextInt(config.children_per_household.min,
                                  config.children_per_household.max);
      } while (adults + children < 1);

      md.households.push_back(Household{
          household_id, block.block_id, static_cast<std::int32_t>(adults),
          static_cast<std::int32_t>(children)});

      for (std::int64_t m = 0; m < adults + children; ++m) {
        std::int64_t person_id = next_person++;
        Rng person_rng = root.Fork("person", static_cast<std::uint64_t>(person_id));
        Person p;
        p.person_id = person_id;
        p.household_id = household_id;
        p.is_adult = m < adults;
        p.race = static_cast<RaceCategory>(person_rng.NextCategorical(mixture));
        int r = static_cast<int>(p.race);
        p.surname_id = static_cast<std::int32_t>(
            person_rng.NextCategorical(nm.surname_given_race[r]));
        p.first_name_id = static_cast<std::int32_t>(
            person_rng.NextCategorical(nm.first_given_race[r]));
        if (person_rng.NextBernoulli(config.middle_name_rate)) {
          p.middle_name_id = static_cast<std::int32_t>(
              person_rng.NextCategorical(nm.middle_given_race[r]));
        }
        md.persons.push_back(p);
      }
    }
  }
  return md;
}

VoterFile ExtractVoterFile(const Microdata& md, double registration_rate,
                           std::uint64_t seed) {
  if (registration_rate < 0 || registration_rate > 1 ||
      !std::isfinite(registration_rate)) {
    throw Error(ErrorKind::kConfig,
                "registration_rate: must lie in [0, 1], got " +
                    std::to_string(registration_rate));
  }
  std::unordered_map<std::int64_t, std::int64_t> household_block;
  household_block.reserve(md.households.size());
  for (const Household& h : md.households) {
    household_block.emplace(h.household_id, h.block_id);
  }

  Rng root = Rng(seed).Fork("voterfile");
  VoterFile vf;
  for (const Person& p : md.persons) {
    if (!p.is_adult) continue;
    Rng person_rng = root.Fork("person", static_cast<std::uint64_t>(p.person_id));
    if (!person_rng.NextBernoulli(registration_rate)) continue;
    auto it = household_block.find(p.household_id);
    if (it == household_block.end()) {
      throw Error(ErrorKind::kIntegrity,
                  "voter file: person " + std::to_string(p.person_id) +
                      " references missing household");
    }
    vf.push_back(VoterRecord{p.person_id, it->second, p.surname_id,
                             p.first_name_id, p.middle_name_id, p.race});
  }
  return vf;
}

}  // namespace censim
