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

#ifndef CENSIM_DP_H_
#define CENSIM_DP_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "censim/rng.h"
#include "censim/tabulate.h"

namespace censim {

struct PrivacyBudget {
  double epsilon_total = 19.61;
  // Split of the total budget across the two noised tables. Entries must be
  // positive and sum to 1 (within 1e-12).
  double race_table_share = 0.5;
  double vap_table_share = 0.5;

  double RaceEpsilon() const { return epsilon_total * race_table_share; }
  double VapEpsilon() const { return epsilon_total * vap_table_share; }

  void Validate() const;  // throws Error(kConfig)
};

// Two-sided geometric (discrete Laplace) distribution:
//   P(k) = (1 - a) / (1 + a) * a^|k|,   a = exp(-epsilon).
// Sampled as the difference of two iid geometric variables, each drawn by
// CDF inversion, so the sampler degenerates to exactly 0 for very large
// epsilon.
std::int64_t SampleTwoSidedGeometric(Rng& rng, double epsilon);
double TwoSidedGeometricPmf(std::int64_t k, double epsilon);
double TwoSidedGeometricLogPmf(std::int64_t k, double epsilon);

struct DpProvenance {
  double epsilon_total = 0;
  double race_table_share = 0;
  double vap_table_share = 0;
  std::uint64_t seed = 0;
  std::string mechanism;  // kDpMechanismVersion
  std::string rng;        // Rng::kVersion
};

// A released tabulation plus the provenance of the noise that produced it.
// Invariants: all counts non-negative; state total population equals the
// confidential state total exactly; per-block household counts equal the
// confidential values exactly; vap <= race per cell.
struct NoisedTabulation {
  TabulationSet tables;
  DpProvenance provenance;
};

// Adds independent two-sided geometric noise to every block race and VAP
// count (per-table epsilon = epsilon_total * share; sensitivity 1 per count
// under the add/remove-one-person convention, which touches one cell per
// table), clamps negatives to zero, then restores the state population
// invariant by largest-remainder apportionment over all race cells. VAP
// cells are finally clamped to their block's race cell. Household counts
// pass through unchanged. Deterministic under (t, budget, seed).
NoisedTabulation ApplyDpDas(const TabulationSet& t, const PrivacyBudget& budget,
                            std::uint64_t seed);

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

// Exhaustively computes max over neighboring counts (differing by 1 inside
// `counts`) and outcomes of P(outcome | c) / P(outcome | c') for the
// pre-postprocessing geometric mechanism. The result must satisfy
// max_ratio <= exp(epsilon) * (1 + 1e-9). Throws Error(kResource) when the
// outcome range exceeds 10^4 values.
double VerifyDpRatio(double epsilon, IntRange counts, IntRange outcomes);
// Outcome range defaults to [counts.lo - 30, counts.hi + 30].
double VerifyDpRatio(double epsilon, IntRange counts);

// Largest-remainder apportionment: rescales non-negative integer cells so
// they sum exactly to target. Quotas are cells[i] * target / sum; floors are
// assigned first and the remaining units go to the largest fractional
// remainders (ties to the lowest index). All-zero cells split the target
// evenly. Exposed for tests.
void ApportionLargestRemainder(std::span<std::int64_t> cells,
                               std::int64_t target);

// Writes the tabulation CSV (+ aggregates sidecar) plus a
// "<csv stem>.provenance.json" sidecar recording the noise parameters.
void SaveNoisedTabulation(const NoisedTabulation& nt,
                          const std::filesystem::path& csv_path);

}  // namespace censim

#endif  // CENSIM_DP_H_
