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

#ifndef CENSIM_POLICY_H_
#define CENSIM_POLICY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "censim/tabulate.h"
#include "censim/types.h"

namespace censim {

// A district plan: every block assigned, every district non-empty.
struct Plan {
  int plan_id = 0;
  int n_districts = 0;
  std::vector<std::int64_t> block_ids;     // sorted
  std::vector<std::int32_t> district_of;   // parallel to block_ids

  friend bool operator==(const Plan&, const Plan&) = default;
};

// Seeded greedy region growing over a grid adjacency laid over the blocks in
// block-id order (contiguity is approximate by design). Each returned plan's
// max deviation under `tab` is <= balance_tolerance; a plan slot that cannot
// reach the tolerance within the retry budget raises GenerationFailure
// carrying the best deviation achieved.
std::vector<Plan> GeneratePlans(const Geography& geo, const TabulationSet& tab,
                                int n_plans, int n_districts,
                                double balance_tolerance, std::uint64_t seed);

// (max district population - min district population) / (total / districts).
// Throws Error(kComparability) when the plan does not cover tab's blocks and
// Error(kUndefinedStat) on zero total population.
double MaxDeviation(const Plan& plan, const TabulationSet& tab);

struct FlipSummary {
  std::int64_t lost_presumption = 0;    // compliant -> non-compliant
  std::int64_t gained_presumption = 0;  // non-compliant -> compliant

  std::int64_t total() const { return lost_presumption + gained_presumption; }

  friend bool operator==(const FlipSummary&, const FlipSummary&) = default;
};

// Counts plans whose compliance (max deviation <= threshold) differs between
// the two data conditions.
FlipSummary ComplianceFlips(std::span<const Plan> plans,
                            const TabulationSet& tab_conf,
                            const TabulationSet& tab_alt, double threshold);

// Pearson correlation between per-block |total population error| and the
// block diversity index 1 - sum_r share_r^2 (shares from the confidential
// table; empty blocks score 0). Returns nullopt when either series has zero
// variance (e.g. identical tables). Requires >= 3 shared blocks.
std::optional<double> ErrorDiversityCorrelation(const TabulationSet& tab_conf,
                                                const TabulationSet& tab_noised);

struct ConditionDeviations {
  std::string condition;
  std::vector<double> per_plan;  // max deviation per plan, plan order
  double mean_deviation = 0;
  double max_deviation = 0;
  std::map<double, std::int64_t> compliant_per_threshold;
};

struct ConditionFlips {
  std::string condition;
  double threshold = 0;
  FlipSummary flips;
};

struct DeviationReport {
  int n_plans = 0;
  int n_districts = 0;
  std::vector<double> thresholds;
  std::vector<ConditionDeviations> conditions;  // confidential first
  std::vector<ConditionFlips> flips_vs_confidential;
  // Aggregate deviation under a condition / aggregate under swapping; absent
  // when the swapped aggregate is zero or a condition is missing.
  std::map<std::string, std::optional<double>> inflation_vs_swapped;
  std::map<std::string, std::optional<double>> error_diversity_correlation;
};

struct LabeledTabulation {
  std::string label;
  const TabulationSet* tables = nullptr;
};

// Evaluates every plan under every condition. The first condition must be
// the confidential tables; flips and correlations are taken against it.
DeviationReport BuildDeviationReport(std::span<const Plan> plans,
                                     std::span<const LabeledTabulation> conditions,
                                     std::span<const double> thresholds);

void SavePlanCsv(const Plan& plan, const std::filesystem::path& path);
Plan LoadPlanCsv(const std::filesystem::path& path);
void SaveDeviationReportJson(const DeviationReport& report,
                             const std::filesystem::path& path);
// condition,plan_id,max_deviation rows for plotting.
void SaveDeviationSummaryCsv(const DeviationReport& report,
                             const std::filesystem::path& path);

}  // namespace censim

#endif  // CENSIM_POLICY_H_
