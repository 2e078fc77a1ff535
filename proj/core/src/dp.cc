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

#include "censim/dp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "censim/errors.h"
#include "censim/version.h"
#include "internal_csv.h"

namespace censim {

namespace {

using nlohmann::json;

// Geometric draw over {0, 1, 2, ...} with success probability 1 - exp(-eps),
// by CDF inversion: floor(ln(u) / ln(alpha)). ln(alpha) = -eps exactly, so
// huge epsilons collapse to 0 without any special casing.
std::int64_t SampleGeometricFailures(Rng& rng, double epsilon) {
  double u = rng.NextUnit();
  return static_cast<std::int64_t>(std::floor(std::log(u) / -epsilon));
}

void CheckEpsilon(double epsilon) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::kConfig,
                "epsilon: must be positive and finite, got " +
                    std::to_string(epsilon));
  }
}

}  // namespace

void PrivacyBudget::Validate() const {
  if (!(epsilon_total > 0) || !std::isfinite(epsilon_total)) {
    throw Error(ErrorKind::kConfig,
                "dp.epsilon: must be positive and finite, got " +
                    std::to_string(epsilon_total));
  }
  if (!(race_table_share > 0) || !(vap_table_share > 0)) {
    throw Error(ErrorKind::kConfig, "dp.allocation: shares must be positive");
  }
  if (std::abs(race_table_share + vap_table_share - 1.0) > 1e-12) {
    throw Error(ErrorKind::kConfig,
                "dp.allocation: shares must sum to 1, got " +
                    std::to_string(race_table_share + vap_table_share));
  }
}

std::int64_t SampleTwoSidedGeometric(Rng& rng, double epsilon) {
  CheckEpsilon(epsilon);
  // The difference of two iid geometric draws has exactly the two-sided
  // geometric pmf (1-a)/(1+a) * a^|k|.
  std::int64_t g1 = SampleGeometricFailures(rng, epsilon);
  std::int64_t g2 = SampleGeometricFailures(rng, epsilon);
  return g1 - g2;
}

double TwoSidedGeometricLogPmf(std::int64_t k, double epsilon) {
  CheckEpsilon(epsilon);
  // log((1-a)/(1+a)) - eps*|k|, with 1-a = -expm1(-eps) for small eps.
  double alpha = std::exp(-epsilon);
  double log_norm = std::log(-std::expm1(-epsilon)) - std::log1p(alpha);
  return log_norm - epsilon * static_cast<double>(k < 0 ? -k : k);
}

double TwoSidedGeometricPmf(std::int64_t k, double epsilon) {
  return std::exp(TwoSidedGeometricLogPmf(k, epsilon));
}

void ApportionLargestRemainder(std::span<std::int64_t> cells,
                               std::int64_t target) {
  if (target < 0) {
    throw Error(ErrorKind::kContract, "apportionment: negative target");
  }
  if (cells.empty()) {
    if (target != 0) {
      throw Error(ErrorKind::kContract, "apportionment: no cells");
    }
    return;
  }
  std::int64_t sum = 0;
  for (std::int64_t c : cells) {
    if (c < 0) {
      throw Error(ErrorKind::kContract, "apportionment: negative cell");
    }
    sum += c;
  }
  if (sum == target) return;
  const std::size_t n = cells.size();
  if (sum == 0) {
    // Nothing to be proportional to: spread the target evenly.
    std::int64_t base = target / static_cast<std::int64_t>(n);
    std::int64_t extra = target % static_cast<std::int64_t>(n);
    for (std::size_t i = 0; i < n; ++i) {
      cells[i] = base + (static_cast<std::int64_t>(i) < extra ? 1 : 0);
    }
    return;
  }

  // Integer quotas: floor(c*target/sum) with remainders ranked exactly.
  using u128 = unsigned __int128;
  std::vector<std::int64_t> floors(n);
  std::vector<std::uint64_t> remainders(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    u128 q = static_cast<u128>(cells[i]) * static_cast<u128>(target);
    floors[i] = static_cast<std::int64_t>(q / static_cast<u128>(sum));
    remainders[i] = static_cast<std::uint64_t>(q % static_cast<u128>(sum));
    assigned += floors[i];
  }
  std::int64_t deficit = target - assigned;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
    return a < b;
  });
  for (std::size_t i = 0; i < n; ++i) cells[i] = floors[i];
  for (std::int64_t d = 0; d < deficit; ++d) cells[order[d]] += 1;
}

NoisedTabulation ApplyDpDas(const TabulationSet& t, const PrivacyBudget& budget,
                            std::uint64_t seed) {
  budget.Validate();
  NoisedTabulation out;
  out.tables = t;
  out.provenance = DpProvenance{budget.epsilon_total,
                                budget.race_table_share,
                                budget.vap_table_share,
                                seed,
                                std::string(kDpMechanismVersion),
                                std::string(Rng::kVersion)};

  const double race_eps = budget.RaceEpsilon();
  const double vap_eps = budget.VapEpsilon();
  Rng root(seed);

  // Noise both tables cell by cell; streams are keyed by (table, block,
  // race) so results do not depend on iteration order.
  for (BlockTable& b : out.tables.blocks) {
    for (int r = 0; r < kNumRaces; ++r) {
      Rng race_rng =
          root.Fork("dp/race", static_cast<std::uint64_t>(b.block_id),
                    static_cast<std::uint64_t>(r));
      b.race_counts[r] = std::max<std::int64_t>(
          0, b.race_counts[r] + SampleTwoSidedGeometric(race_rng, race_eps));
      Rng vap_rng = root.Fork("dp/vap", static_cast<std::uint64_t>(b.block_id),
                              static_cast<std::uint64_t>(r));
      b.vap_race_counts[r] = std::max<std::int64_t>(
          0,
          b.vap_race_counts[r] + SampleTwoSidedGeometric(vap_rng, vap_eps));
    }
  }

  // Restore the state population invariant over all race cells at once.
  std::vector<std::int64_t> cells;
  cells.reserve(out.tables.blocks.size() * kNumRaces);
  for (const BlockTable& b : out.tables.blocks) {
    for (int r = 0; r < kNumRaces; ++r) cells.push_back(b.race_counts[r]);
  }
  ApportionLargestRemainder(cells, t.state_totals.population);
  std::size_t idx = 0;
  for (BlockTable& b : out.tables.blocks) {
    for (int r = 0; r < kNumRaces; ++r) b.race_counts[r] = cells[idx++];
  }

  // Per-cell consistency and the household invariant.
  for (std::size_t i = 0; i < out.tables.blocks.size(); ++i) {
    BlockTable& b = out.tables.blocks[i];
    for (int r = 0; r < kNumRaces; ++r) {
      b.vap_race_counts[r] = std::min(b.vap_race_counts[r], b.race_counts[r]);
    }
    b.n_households = t.blocks[i].n_households;
  }

  out.tables.RebuildAggregates();
  return out;
}

double VerifyDpRatio(double epsilon, IntRange counts, IntRange outcomes) {
  CheckEpsilon(epsilon);
  if (counts.lo > counts.hi || outcomes.lo > outcomes.hi) {
    throw Error(ErrorKind::kContract, "verify_dp_ratio: empty range");
  }
  std::int64_t outcome_span = outcomes.hi - outcomes.lo + 1;
  if (outcome_span > 10'000) {
    throw Error(ErrorKind::kResource,
                "verify_dp_ratio: outcome domain has " +
                    std::to_string(outcome_span) + " values, limit 10000");
  }
  double max_log_ratio = -std::numeric_limits<double>::infinity();
  for (std::int64_t c = counts.lo; c < counts.hi; ++c) {
    std::int64_t c_next = c + 1;  // neighboring counts differ by one
    for (std::int64_t o = outcomes.lo; o <= outcomes.hi; ++o) {
      double log_ratio = TwoSidedGeometricLogPmf(o - c, epsilon) -
                         TwoSidedGeometricLogPmf(o - c_next, epsilon);
      max_log_ratio = std::max(max_log_ratio, std::abs(log_ratio));
    }
  }
  if (!std::isfinite(max_log_ratio)) {
    // Single count in the domain: no neighboring pair to compare.
    return 1.0;
  }
  return std::exp(max_log_ratio);
}

double VerifyDpRatio(double epsilon, IntRange counts) {
  return VerifyDpRatio(epsilon, counts,
                       IntRange{counts.lo - 30, counts.hi + 30});
}

void SaveNoisedTabulation(const NoisedTabulation& nt,
                          const std::filesystem::path& csv_path) {
  SaveTabulationCsv(nt.tables, csv_path);
  std::filesystem::path prov_path = csv_path;
  prov_path.replace_extension();
  prov_path += ".provenance.json";
  json doc{{"epsilon_total", nt.provenance.epsilon_total},
           {"allocation",
            json{{"race_table", nt.provenance.race_table_share},
                 {"vap_table", nt.provenance.vap_table_share}}},
           {"seed", nt.provenance.seed},
           {"mechanism", nt.provenance.mechanism},
           {"rng", nt.provenance.rng}};
  std::ofstream out(prov_path);
  if (!out) {
    throw Error(ErrorKind::kFile, "cannot write " + prov_path.string());
  }
  out << doc.dump(2) << '\n';
}

}  // namespace censim
