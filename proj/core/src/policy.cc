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

#include "censim/policy.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "censim/errors.h"
#include "censim/rng.h"
#include "internal_csv.h"

namespace censim {

namespace {

using internal::CsvReader;
using internal::CsvWriter;
using nlohmann::json;

constexpr std::string_view kPlanHeader = "block_id,district_id";
constexpr std::string_view kSummaryHeader = "condition,plan_id,max_deviation";
constexpr int kMaxPlanAttempts = 400;

// Grid adjacency laid over the blocks in block-id order; width is the
// ceiling square root, so plans grow roughly compact regions.
std::vector<std::vector<int>> GridAdjacency(int n_blocks) {
  int width = static_cast<int>(std::ceil(std::sqrt(n_blocks)));
  std::vector<std::vector<int>> adjacency(n_blocks);
  for (int i = 0; i < n_blocks; ++i) {
    int row = i / width;
    int col = i % width;
    if (col > 0) adjacency[i].push_back(i - 1);
    if (col + 1 < width && i + 1 < n_blocks) adjacency[i].push_back(i + 1);
    if (row > 0) adjacency[i].push_back(i - width);
    if (i + width < n_blocks) adjacency[i].push_back(i + width);
  }
  return adjacency;
}

// One seeded region-growing pass; the smallest district grows first.
std::vector<std::int32_t> GrowDistricts(
    const std::vector<std::int64_t>& block_pops,
    const std::vector<std::vector<int>>& adjacency, int n_districts, Rng& rng) {
  const int n_blocks = static_cast<int>(block_pops.size());
  std::vector<std::int32_t> assignment(n_blocks, -1);
  std::vector<std::int64_t> district_pop(n_districts, 0);
  std::vector<std::vector<int>> frontier(n_districts);

  // Distinct random seed blocks via a partial Fisher-Yates shuffle.
  std::vector<int> blocks(n_blocks);
  std::iota(blocks.begin(), blocks.end(), 0);
  for (int d = 0; d < n_districts; ++d) {
    std::size_t pick =
        d + rng.NextBounded(static_cast<std::uint64_t>(n_blocks - d));
    std::swap(blocks[d], blocks[pick]);
    int seed_block = blocks[d];
    assignment[seed_block] = d;
    district_pop[d] += block_pops[seed_block];
    for (int nb : adjacency[seed_block]) frontier[d].push_back(nb);
  }

  int assigned = n_districts;
  while (assigned < n_blocks) {
    // Pick the lightest district that can still grow.
    int best = -1;
    for (int d = 0; d < n_districts; ++d) {
      // Prune already-taken frontier entries lazily.
      auto& f = frontier[d];
      while (!f.empty() && assignment[f.back()] != -1) f.pop_back();
      if (f.empty()) continue;
      if (best == -1 || district_pop[d] < district_pop[best]) best = d;
    }
    if (best == -1) {
      // Disconnected leftovers: attach each to the lightest district.
      for (int i = 0; i < n_blocks; ++i) {
        if (assignment[i] != -1) continue;
        int lightest = 0;
        for (int d = 1; d < n_districts; ++d) {
          if (district_pop[d] < district_pop[lightest]) lightest = d;
        }
        assignment[i] = static_cast<std::int32_t>(lightest);
        district_pop[lightest] += block_pops[i];
        ++assigned;
      }
      break;
    }
    auto& f = frontier[best];
    std::size_t pick = rng.NextBounded(f.size());
    int block = f[pick];
    f[pick] = f.back();
    f.pop_back();
    if (assignment[block] != -1) continue;
    assignment[block] = static_cast<std::int32_t>(best);
    district_pop[best] += block_pops[block];
    ++assigned;
    for (int nb : adjacency[block]) {
      if (assignment[nb] == -1) f.push_back(nb);
    }
  }
  return assignment;
}

// Local rebalancing after growth: repeatedly move or exchange single blocks
// between the heaviest and lightest districts while the population spread
// shrinks. Moves prefer blocks bordering the receiving district; exchanges
// are adjacency-blind (contiguity stays approximate).
void RebalanceDistricts(const std::vector<std::int64_t>& block_pops,
                        const std::vector<std::vector<int>>& adjacency,
                        int n_districts, std::vector<std::int32_t>& assignment,
                        std::vector<std::int64_t>& district_pop) {
  const int n_blocks = static_cast<int>(block_pops.size());
  std::vector<int> count(n_districts, 0);
  for (std::int32_t d : assignment) count[d] += 1;

  for (int iter = 0; iter < 4 * n_blocks; ++iter) {
    int dmax = 0;
    int dmin = 0;
    for (int d = 1; d < n_districts; ++d) {
      if (district_pop[d] > district_pop[dmax]) dmax = d;
      if (district_pop[d] < district_pop[dmin]) dmin = d;
    }
    std::int64_t spread = district_pop[dmax] - district_pop[dmin];
    if (spread == 0) break;

    std::int64_t best_spread = spread;
    int best_move = -1;      // block moved dmax -> dmin
    int best_swap_out = -1;  // exchanged pair
    int best_swap_in = -1;

    auto spread_with = [&](std::int64_t delta_max, std::int64_t delta_min) {
      std::int64_t lo = district_pop[dmax] + delta_max;
      std::int64_t hi = lo;
      for (int d = 0; d < n_districts; ++d) {
        std::int64_t p = district_pop[d];
        if (d == dmax) p += delta_max;
        if (d == dmin) p += delta_min;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      return hi - lo;
    };

    if (count[dmax] > 1) {
      bool best_borders = false;
      for (int i = 0; i < n_blocks; ++i) {
        if (assignment[i] != dmax) continue;
        std::int64_t s = spread_with(-block_pops[i], block_pops[i]);
        if (s >= spread) continue;
        bool borders_min = false;
        for (int nb : adjacency[i]) {
          if (assignment[nb] == dmin) {
            borders_min = true;
            break;
          }
        }
        if (best_move == -1 || s < best_spread ||
            (s == best_spread && borders_min && !best_borders)) {
          best_spread = s;
          best_move = i;
          best_borders = borders_min;
        }
      }
    }
    for (int i = 0; i < n_blocks; ++i) {
      if (assignment[i] != dmax) continue;
      for (int j = 0; j < n_blocks; ++j) {
        if (assignment[j] != dmin) continue;
        std::int64_t delta = block_pops[i] - block_pops[j];
        if (delta <= 0) continue;
        std::int64_t s = spread_with(-delta, delta);
        if (s < best_spread) {
          best_spread = s;
          best_move = -1;
          best_swap_out = i;
          best_swap_in = j;
        }
      }
    }

    if (best_spread >= spread) break;
    if (best_move != -1) {
      assignment[best_move] = static_cast<std::int32_t>(dmin);
      district_pop[dmax] -= block_pops[best_move];
      district_pop[dmin] += block_pops[best_move];
      count[dmax] -= 1;
      count[dmin] += 1;
    } else {
      assignment[best_swap_out] = static_cast<std::int32_t>(dmin);
      assignment[best_swap_in] = static_cast<std::int32_t>(dmax);
      std::int64_t delta = block_pops[best_swap_out] - block_pops[best_swap_in];
      district_pop[dmax] -= delta;
      district_pop[dmin] += delta;
    }
  }
}

double DeviationOf(const std::vector<std::int64_t>& district_pop,
                   std::int64_t total) {
  auto [min_it, max_it] =
      std::minmax_element(district_pop.begin(), district_pop.end());
  double ideal =
      static_cast<double>(total) / static_cast<double>(district_pop.size());
  return static_cast<double>(*max_it - *min_it) / ideal;
}

std::vector<std::int64_t> DistrictPopulations(const Plan& plan,
                                              const TabulationSet& tab) {
  if (plan.block_ids.size() != tab.blocks.size()) {
    throw Error(ErrorKind::kComparability,
                "plan " + std::to_string(plan.plan_id) +
                    " does not cover the tabulation's block set");
  }
  std::vector<std::int64_t> district_pop(plan.n_districts, 0);
  for (std::size_t i = 0; i < plan.block_ids.size(); ++i) {
    if (plan.block_ids[i] != tab.blocks[i].block_id) {
      throw Error(ErrorKind::kComparability,
                  "plan " + std::to_string(plan.plan_id) +
                      " covers different blocks than the tabulation");
    }
    std::int32_t d = plan.district_of[i];
    if (d < 0 || d >= plan.n_districts) {
      throw Error(ErrorKind::kIntegrity,
                  "plan " + std::to_string(plan.plan_id) +
                      ": district id out of range");
    }
    district_pop[d] += tab.blocks[i].TotalPopulation();
  }
  return district_pop;
}

}  // namespace

std::vector<Plan> GeneratePlans(const Geography& geo, const TabulationSet& tab,
                                int n_plans, int n_districts,
                                double balance_tolerance, std::uint64_t seed) {
  const int n_blocks = static_cast<int>(tab.blocks.size());
  if (n_plans < 1) {
    throw Error(ErrorKind::kContract, "plan generation: n_plans must be >= 1");
  }
  if (n_districts < 1 || n_districts > n_blocks) {
    throw Error(ErrorKind::kContract,
                "plan generation: need 1 <= n_districts <= block count");
  }
  if (balance_tolerance < 0) {
    throw Error(ErrorKind::kContract,
                "plan generation: balance_tolerance must be >= 0");
  }
  for (std::size_t i = 0; i < tab.blocks.size(); ++i) {
    if (geo.Find(tab.blocks[i].block_id) == nullptr) {
      throw Error(ErrorKind::kComparability,
                  "plan generation: tabulation block missing from geography");
    }
  }

  std::vector<std::int64_t> block_pops(n_blocks);
  std::vector<std::int64_t> block_ids(n_blocks);
  std::int64_t total = 0;
  for (int i = 0; i < n_blocks; ++i) {
    block_pops[i] = tab.blocks[i].TotalPopulation();
    block_ids[i] = tab.blocks[i].block_id;
    total += block_pops[i];
  }
  if (total <= 0) {
    throw Error(ErrorKind::kUndefinedStat,
                "plan generation: zero total population");
  }
  const auto adjacency = GridAdjacency(n_blocks);

  Rng root(seed);
  std::vector<Plan> plans;
  plans.reserve(n_plans);
  for (int k = 0; k < n_plans; ++k) {
    double best = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxPlanAttempts; ++attempt) {
      Rng rng = root.Fork("plan", static_cast<std::uint64_t>(k),
                          static_cast<std::uint64_t>(attempt));
      std::vector<std::int32_t> assignment =
          GrowDistricts(block_pops, adjacency, n_districts, rng);
      std::vector<std::int64_t> district_pop(n_districts, 0);
      for (int i = 0; i < n_blocks; ++i) {
        district_pop[assignment[i]] += block_pops[i];
      }
      RebalanceDistricts(block_pops, adjacency, n_districts, assignment,
                         district_pop);
      double deviation = DeviationOf(district_pop, total);
      best = std::min(best, deviation);
      if (deviation <= balance_tolerance + 1e-12) {
        Plan plan;
        plan.plan_id = k;
        plan.n_districts = n_districts;
        plan.block_ids = block_ids;
        plan.district_of = std::move(assignment);
        plans.push_back(std::move(plan));
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw GenerationFailure(
          "plan generation: plan " + std::to_string(k) + " missed tolerance " +
              std::to_string(balance_tolerance) + " after " +
              std::to_string(kMaxPlanAttempts) + " attempts; best deviation " +
              std::to_string(best),
          best);
    }
  }
  return plans;
}

double MaxDeviation(const Plan& plan, const TabulationSet& tab) {
  std::vector<std::int64_t> district_pop = DistrictPopulations(plan, tab);
  for (std::int32_t d = 0; d < plan.n_districts; ++d) {
    bool used = false;
    for (std::size_t i = 0; i < plan.district_of.size() && !used; ++i) {
      used = plan.district_of[i] == d;
    }
    if (!used) {
      throw Error(ErrorKind::kIntegrity, "plan " + std::to_string(plan.plan_id) +
                                             ": empty district " +
                                             std::to_string(d));
    }
  }
  std::int64_t total = 0;
  for (std::int64_t p : district_pop) total += p;
  if (total <= 0) {
    throw Error(ErrorKind::kUndefinedStat,
                "max deviation: zero total population");
  }
  return DeviationOf(district_pop, total);
}

FlipSummary ComplianceFlips(std::span<const Plan> plans,
                            const TabulationSet& tab_conf,
                            const TabulationSet& tab_alt, double threshold) {
  FlipSummary summary;
  for (const Plan& plan : plans) {
    bool conf_ok = MaxDeviation(plan, tab_conf) <= threshold;
    bool alt_ok = MaxDeviation(plan, tab_alt) <= threshold;
    if (conf_ok && !alt_ok) summary.lost_presumption += 1;
    if (!conf_ok && alt_ok) summary.gained_presumption += 1;
  }
  return summary;
}

std::optional<double> ErrorDiversityCorrelation(
    const TabulationSet& tab_conf, const TabulationSet& tab_noised) {
  if (tab_conf.blocks.size() != tab_noised.blocks.size()) {
    throw Error(ErrorKind::kComparability,
                "error-diversity correlation: block sets differ");
  }
  const std::size_t n = tab_conf.blocks.size();
  if (n < 3) {
    throw Error(ErrorKind::kContract,
                "error-diversity correlation: need at least 3 blocks");
  }
  std::vector<double> error(n);
  std::vector<double> diversity(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BlockTable& conf = tab_conf.blocks[i];
    const BlockTable& noised = tab_noised.blocks[i];
    if (conf.block_id != noised.block_id) {
      throw Error(ErrorKind::kComparability,
                  "error-diversity correlation: block sets differ");
    }
    error[i] = static_cast<double>(
        std::abs(conf.TotalPopulation() - noised.TotalPopulation()));
    std::int64_t total = conf.TotalPopulation();
    if (total == 0) {
      diversity[i] = 0;
    } else {
      double sum_sq = 0;
      for (int r = 0; r < kNumRaces; ++r) {
        double share = static_cast<double>(conf.race_counts[r]) /
                       static_cast<double>(total);
        sum_sq += share * share;
      }
      diversity[i] = 1.0 - sum_sq;
    }
  }
  double mean_e = std::accumulate(error.begin(), error.end(), 0.0) / n;
  double mean_d = std::accumulate(diversity.begin(), diversity.end(), 0.0) / n;
  double cov = 0;
  double var_e = 0;
  double var_d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (error[i] - mean_e) * (diversity[i] - mean_d);
    var_e += (error[i] - mean_e) * (error[i] - mean_e);
    var_d += (diversity[i] - mean_d) * (diversity[i] - mean_d);
  }
  if (var_e <= 0 || var_d <= 0) return std::nullopt;
  return cov / std::sqrt(var_e * var_d);
}

DeviationReport BuildDeviationReport(
    std::span<const Plan> plans, std::span<const LabeledTabulation> conditions,
    std::span<const double> thresholds) {
  if (plans.empty()) {
    throw Error(ErrorKind::kContract, "deviation report: no plans");
  }
  if (conditions.empty()) {
    throw Error(ErrorKind::kContract, "deviation report: no conditions");
  }
  DeviationReport report;
  report.n_plans = static_cast<int>(plans.size());
  report.n_districts = plans.front().n_districts;
  report.thresholds.assign(thresholds.begin(), thresholds.end());

  const TabulationSet& conf = *conditions.front().tables;
  for (const LabeledTabulation& cond : conditions) {
    ConditionDeviations cd;
    cd.condition = cond.label;
    cd.per_plan.reserve(plans.size());
    double sum = 0;
    for (const Plan& plan : plans) {
      double dev = MaxDeviation(plan, *cond.tables);
      cd.per_plan.push_back(dev);
      sum += dev;
      cd.max_deviation = std::max(cd.max_deviation, dev);
    }
    cd.mean_deviation = sum / static_cast<double>(plans.size());
    for (double threshold : thresholds) {
      std::int64_t compliant = 0;
      for (double dev : cd.per_plan) {
        if (dev <= threshold) ++compliant;
      }
      cd.compliant_per_threshold[threshold] = compliant;
    }
    report.conditions.push_back(std::move(cd));

    if (cond.label != conditions.front().label) {
      for (double threshold : thresholds) {
        report.flips_vs_confidential.push_back(ConditionFlips{
            cond.label, threshold,
            ComplianceFlips(plans, conf, *cond.tables, threshold)});
      }
      report.error_diversity_correlation[cond.label] =
          ErrorDiversityCorrelation(conf, *cond.tables);
    }
  }

  // Aggregate deviation ratios against the swapped condition, when present.
  const ConditionDeviations* swapped = nullptr;
  for (const ConditionDeviations& cd : report.conditions) {
    if (cd.condition == "swapped") swapped = &cd;
  }
  if (swapped != nullptr && swapped->mean_deviation > 0) {
    for (const ConditionDeviations& cd : report.conditions) {
      if (cd.condition == swapped->condition) continue;
      report.inflation_vs_swapped[cd.condition] =
          cd.mean_deviation / swapped->mean_deviation;
    }
  }
  return report;
}

void SavePlanCsv(const Plan& plan, const std::filesystem::path& path) {
  CsvWriter w(path, kPlanHeader);
  for (std::size_t i = 0; i < plan.block_ids.size(); ++i) {
    w.BeginRow();
    w.Add(plan.block_ids[i]);
    w.Add(static_cast<std::int64_t>(plan.district_of[i]));
    w.EndRow();
  }
}

Plan LoadPlanCsv(const std::filesystem::path& path) {
  CsvReader r(path, kPlanHeader);
  Plan plan;
  std::int32_t max_district = -1;
  while (r.ReadRow()) {
    std::int64_t block_id = r.IntField(0);
    std::int64_t district = r.IntField(1);
    if (district < 0) r.Fail("district_id must be non-negative");
    if (!plan.block_ids.empty() && plan.block_ids.back() >= block_id) {
      r.Fail("blocks must be sorted by unique block_id");
    }
    plan.block_ids.push_back(block_id);
    plan.district_of.push_back(static_cast<std::int32_t>(district));
    max_district = std::max(max_district, static_cast<std::int32_t>(district));
  }
  plan.n_districts = max_district + 1;
  return plan;
}

void SaveDeviationReportJson(const DeviationReport& report,
                             const std::filesystem::path& path) {
  json conditions = json::object();
  for (const ConditionDeviations& cd : report.conditions) {
    json thresholds = json::object();
    for (const auto& [threshold, compliant] : cd.compliant_per_threshold) {
      thresholds[internal::FormatDouble(threshold)] = compliant;
    }
    conditions[cd.condition] = json{{"per_plan_max_deviation", cd.per_plan},
                                    {"mean_max_deviation", cd.mean_deviation},
                                    {"max_max_deviation", cd.max_deviation},
                                    {"compliant_per_threshold", thresholds}};
  }
  json flips = json::array();
  for (const ConditionFlips& cf : report.flips_vs_confidential) {
    flips.push_back(json{{"condition", cf.condition},
                         {"threshold", cf.threshold},
                         {"lost_presumption", cf.flips.lost_presumption},
                         {"gained_presumption", cf.flips.gained_presumption}});
  }
  json inflation = json::object();
  for (const auto& [label, ratio] : report.inflation_vs_swapped) {
    inflation[label] = ratio.has_value() ? json(*ratio) : json();
  }
  json correlation = json::object();
  for (const auto& [label, corr] : report.error_diversity_correlation) {
    correlation[label] = corr.has_value() ? json(*corr) : json();
  }
  json doc{{"n_plans", report.n_plans},
           {"n_districts", report.n_districts},
           {"thresholds", report.thresholds},
           {"conditions", conditions},
           {"flips_vs_confidential", flips},
           {"inflation_vs_swapped", inflation},
           {"error_diversity_correlation", correlation}};
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::kFile, "cannot write " + path.string());
  }
  out << doc.dump(2) << '\n';
}

void SaveDeviationSummaryCsv(const DeviationReport& report,
                             const std::filesystem::path& path) {
  CsvWriter w(path, kSummaryHeader);
  for (const ConditionDeviations& cd : report.conditions) {
    for (std::size_t i = 0; i < cd.per_plan.size(); ++i) {
      w.BeginRow();
      w.Add(std::string_view(cd.condition));
      w.Add(static_cast<std::int64_t>(i));
      w.Add(std::string_view(internal::FormatDouble(cd.per_plan[i])));
      w.EndRow();
    }
  }
}

}  // namespace censim
