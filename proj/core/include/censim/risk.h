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

#ifndef CENSIM_RISK_H_
#define CENSIM_RISK_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "censim/bisg.h"
#include "censim/rng.h"
#include "censim/types.h"

namespace censim {

// Posterior probability the attacker assigns to the record's true race.
// Throws Error(kContract) when true_race is missing.
double AbsoluteRisk(const PosteriorRecord& rec);

// max(posterior/prior, prior/posterior) at the true race; >= 1 by
// construction. Returns +infinity (the sentinel, reported distinctly) when
// the prior or posterior at the true race is zero.
double RelativeRisk(const PosteriorRecord& rec);

struct GroupRisk {
  // Geometric mean over finite relative risks; absent when all were infinite.
  std::optional<double> geometric_mean;
  std::int64_t count = 0;           // records in the group
  std::int64_t infinite_count = 0;  // sentinel members, excluded from mean
};

// Geometric mean of individual relative risk within each true-race group.
// Races with no records are absent (nullopt), never zero.
std::array<std::optional<GroupRisk>, kNumRaces> MeanRelativeRiskByRace(
    std::span<const PosteriorRecord> records);

// exp(epsilon): the factor by which a correctly-updated prior can move under
// an epsilon-DP release. epsilon = 0 is allowed here (bound 1).
double DpBound(double epsilon);

struct RiskRow {
  NameParts method = NameParts::kLast;
  double error_rate_without_data = 0;
  double error_rate_with_data = 0;
  std::optional<double> max_individual_relative_risk;  // over finite ratios
  std::int64_t infinite_risk_count = 0;
  std::array<std::optional<GroupRisk>, kNumRaces> per_race_relative_risk;
};

// The as-is BISG posterior treats the released tables as truth, so the
// observed posterior-to-prior ratios carry no exp(epsilon) guarantee and a
// ratio above the bound is not a violation of differential privacy. Every
// emitted report states this.
inline constexpr std::string_view kBoundSemanticsNote =
    "relative risks are computed from as-is BISG posteriors, which carry no "
    "exp(epsilon) guarantee; exceeding the bound is not a violation of "
    "differential privacy";

struct RiskReport {
  std::string condition;  // label of the with-data release
  std::vector<RiskRow> rows;
  std::optional<double> epsilon;   // set for DP releases
  std::optional<double> dp_bound;  // exp(epsilon), exactly as computed
  bool any_relative_risk_exceeds_bound = false;  // informational only
};

struct MethodPosteriors {
  NameParts method = NameParts::kLast;
  std::vector<PosteriorRecord> without_data;  // name-only (posterior==prior)
  std::vector<PosteriorRecord> with_data;     // conditioned on the release
};

// Assembles the per-method error rates, maxima, and per-race geometric
// means. Throws Error(kContract) naming any method whose without/with record
// set is missing.
RiskReport BuildRiskReport(std::span<const MethodPosteriors> posteriors,
                           std::optional<double> epsilon,
                           std::string condition);

void SaveRiskReportJson(const RiskReport& report,
                        const std::filesystem::path& path);
std::string RenderRiskReportText(const RiskReport& report);

// ---------------------------------------------------------------------------
// Mechanism-aware posterior on tiny instances.
//
// Unlike the as-is BISG posterior, this computes the exact Bayes posterior
// over the geometric mechanism's output distribution: the confidential table
// is Z + e(target_block, Y) with Z uniform over {0..max_count}^(blocks x
// races) and the target's race Y uniform and independent; each cell of the
// released vector is the true cell plus two-sided geometric noise at
// epsilon_total / 2 per cell. A one-person race change touches two cells, so
// the per-cell budget of epsilon_total / 2 makes the release epsilon_total-DP
// for that change, and the posterior-to-prior ratio at every race is bounded
// by exp(epsilon_total).
// ---------------------------------------------------------------------------

struct TinyInstance {
  int n_blocks = 2;
  int n_races = 2;
  int max_count = 3;     // per-cell uniform prior over {0..max_count}
  int target_block = 0;  // the attacker knows the target's block
  double epsilon_total = 1.0;

  double CellEpsilon() const { return epsilon_total / 2.0; }
  void Validate() const;  // throws Error(kContract) outside supported sizes
};

struct TinyDraw {
  std::vector<std::int64_t> confidential;  // row-major [block][race]
  int target_race = 0;
  std::vector<std::int64_t> released;  // pre-postprocessing noised output
};

// Samples a confidential table plus target from the instance prior, then a
// released vector from the mechanism.
TinyDraw SampleTinyRelease(const TinyInstance& inst, Rng& rng);

// Exact posterior over the target's race given the released vector. The sum
// over Z factorizes cell by cell, so this is the closed-form evaluation of
// the full enumeration below.
std::vector<double> MechanismAwarePosterior(const TinyInstance& inst,
                                            std::span<const std::int64_t> released);

// Literal brute force: enumerates every table in the prior's support and
// accumulates posterior mass per race. Exponential in blocks x races; only
// for tiny instances.
std::vector<double> MechanismAwarePosteriorEnumerated(
    const TinyInstance& inst, std::span<const std::int64_t> released);

// ---------------------------------------------------------------------------
// Published reference values from analyses of real DAS demonstration
// releases against the North Carolina voter file. Rendered in reports and
// docs for orientation only; synthetic runs do not reproduce them.
// ---------------------------------------------------------------------------

struct PublishedReferenceRow {
  NameParts method;
  double error_rate_without_data;
  double error_rate_with_data;
  double max_individual_relative_risk;
};

inline constexpr std::array<PublishedReferenceRow, 3> kPublishedNcReference = {{
    {NameParts::kLast, 0.409, 0.155, 796.9},
    {NameParts::kFirstLast, 0.275, 0.124, 969.6},
    {NameParts::kFirstMiddleLast, 0.190, 0.102, 1077.8},
}};

inline constexpr double kPublishedNcEpsilon = 19.61;
// Per-race geometric-mean relative risks reported for the finest method.
inline constexpr double kPublishedNcGeoMeanWhite = 1.96;
inline constexpr double kPublishedNcGeoMeanAsian = 14.0;
inline constexpr double kPublishedNcGeoMeanOther = 21.5;

}  // namespace censim

#endif  // CENSIM_RISK_H_
