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

#include <cmath>
#include <map>
#include <vector>

#include <doctest.h>

#include "censim/errors.h"
#include "censim/swap.h"
#include "censim/synth.h"
#include "test_util.h"

namespace censim {
namespace {

TEST_SUITE("dp") {

TEST_CASE("pmf sums to one and is symmetric") {
  for (double eps : {0.3, 1.0, 3.0}) {
    double sum = 0;
    for (std::int64_t k = -120; k <= 120; ++k) {
      sum += TwoSidedGeometricPmf(k, eps);
      CHECK(TwoSidedGeometricPmf(k, eps) ==
            doctest::Approx(TwoSidedGeometricPmf(-k, eps)).epsilon(1e-14));
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("successive pmf values decay by exactly exp(epsilon)") {
  // Forced by the pmf formula: P(k)/P(k+1) = 1/alpha for k >= 0.
  for (double eps : {0.5, 1.0, 19.61}) {
    for (std::int64_t k = 0; k <= 40; ++k) {
      double log_ratio = TwoSidedGeometricLogPmf(k, eps) -
                         TwoSidedGeometricLogPmf(k + 1, eps);
      CHECK(log_ratio == doctest::Approx(eps).epsilon(1e-12));
    }
  }
}

TEST_CASE("huge epsilon collapses the noise to zero") {
  Rng rng(101);
  // Oracle: P(0) = (1-a)/(1+a) with a = exp(-50), so non-zero draws occur
  // with probability ~3.9e-22.
  int zeros = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    if (SampleTwoSidedGeometric(rng, 50.0) == 0) ++zeros;
  }
  CHECK(static_cast<double>(zeros) / n >= 0.9999);
  for (int i = 0; i < 10000; ++i) {
    CHECK(SampleTwoSidedGeometric(rng, 1e6) == 0);
  }
}

TEST_CASE("sample mean at epsilon one stays within 3 sigma of zero") {
  // Oracle: variance of the two-sided geometric is 2a/(1-a)^2.
  const double alpha = std::exp(-1.0);
  const double variance = 2.0 * alpha / ((1.0 - alpha) * (1.0 - alpha));
  const int n = 1000000;
  Rng rng(103);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    sum += static_cast<double>(SampleTwoSidedGeometric(rng, 1.0));
  }
  double mean = sum / n;
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(variance / n));
}

TEST_CASE("empirical frequencies match the pmf cell by cell") {
  const double eps = 0.7;
  const int n = 200000;
  Rng rng(107);
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < n; ++i) {
    counts[SampleTwoSidedGeometric(rng, eps)] += 1;
  }
  for (std::int64_t k = -8; k <= 8; ++k) {
    double p = TwoSidedGeometricPmf(k, eps);
    double sigma = std::sqrt(n * p * (1 - p));
    auto it = counts.find(k);
    double observed = it == counts.end() ? 0.0 : it->second;
    CHECK(std::abs(observed - n * p) <= 3.0 * sigma + 1.0);
  }
}

TEST_CASE("sampling is deterministic under the stream") {
  Rng a(109);
  Rng b(109);
  for (int i = 0; i < 1000; ++i) {
    CHECK(SampleTwoSidedGeometric(a, 0.8) == SampleTwoSidedGeometric(b, 0.8));
  }
  CHECK_THROWS_AS(SampleTwoSidedGeometric(a, 0.0), Error);
  CHECK_THROWS_AS(SampleTwoSidedGeometric(a, -1.0), Error);
}

TEST_CASE("largest-remainder apportionment on hand-checked cases") {
  // Oracle: quotas cells[i]*target/sum, floors first, remainders by size.
  auto run = [](std::vector<std::int64_t> cells, std::int64_t target) {
    ApportionLargestRemainder(cells, target);
    return cells;
  };
  CHECK(run({1, 2, 3}, 6) == std::vector<std::int64_t>{1, 2, 3});
  CHECK(run({0, 0, 0, 0}, 5) == std::vector<std::int64_t>{2, 1, 1, 1});
  CHECK(run({1, 1}, 3) == std::vector<std::int64_t>{2, 1});
  CHECK(run({3, 1}, 2) == std::vector<std::int64_t>{2, 0});
  CHECK(run({5, 5}, 0) == std::vector<std::int64_t>{0, 0});
  CHECK(run({7, 3}, 100) == std::vector<std::int64_t>{70, 30});

  Rng rng(113);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> cells(1 + rng.NextBounded(20));
    for (auto& c : cells) c = static_cast<std::int64_t>(rng.NextBounded(50));
    std::int64_t target = static_cast<std::int64_t>(rng.NextBounded(500));
    std::vector<std::int64_t> before = cells;
    ApportionLargestRemainder(cells, target);
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CHECK(cells[i] >= 0);
      sum += cells[i];
    }
    CHECK(sum == target);
  }
}

TEST_CASE("the exhaustive privacy ratio never exceeds exp(epsilon)") {
  for (double eps : {0.1, 1.0, 2.0}) {
    double ratio = VerifyDpRatio(eps, IntRange{0, 20});
    CHECK(ratio <= std::exp(eps) * (1.0 + 1e-9));
    // The bound is tight: some neighboring pair attains it.
    CHECK(ratio == doctest::Approx(std::exp(eps)).epsilon(1e-9));
  }
  CHECK(VerifyDpRatio(1.0, IntRange{0, 20}, IntRange{-30, 50}) ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("the ratio verifier enforces its resource limit") {
  CHECK_THROWS_AS(VerifyDpRatio(1.0, IntRange{0, 5}, IntRange{0, 20000}), Error);
  try {
    VerifyDpRatio(1.0, IntRange{0, 5}, IntRange{0, 20000});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kResource);
  }
  CHECK_THROWS_AS(VerifyDpRatio(0.0, IntRange{0, 5}), Error);
}

TEST_CASE("an enormous budget degenerates to the identity release") {
  TabulationSet tab = Tabulate(GeneratePopulation(test::MediumConfig(), 127));
  PrivacyBudget budget;
  budget.epsilon_total = 1e6;
  NoisedTabulation noised = ApplyDpDas(tab, budget, 1);
  CHECK(noised.tables == tab);
  CHECK(noised.provenance.epsilon_total == 1e6);
}

TEST_CASE("the release keeps the state population and household invariants") {
  TabulationSet tab = Tabulate(GeneratePopulation(test::MediumConfig(), 131));
  PrivacyBudget budget;
  budget.epsilon_total = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NoisedTabulation noised = ApplyDpDas(tab, budget, seed);
    CHECK(noised.tables.state_totals.population == tab.state_totals.population);
    REQUIRE(noised.tables.blocks.size() == tab.blocks.size());
    for (std::size_t i = 0; i < tab.blocks.size(); ++i) {
      CHECK(noised.tables.blocks[i].n_households == tab.blocks[i].n_households);
      for (int r = 0; r < kNumRaces; ++r) {
        CHECK(noised.tables.blocks[i].race_counts[r] >= 0);
        CHECK(noised.tables.blocks[i].vap_race_counts[r] <=
              noised.tables.blocks[i].race_counts[r]);
      }
    }
  }
}

TEST_CASE("unlike swapping, the dp release moves block totals") {
  Microdata md = GeneratePopulation(test::MediumConfig(), 137);
  TabulationSet tab = Tabulate(md);
  PrivacyBudget budget;
  budget.epsilon_total = 0.5;
  NoisedTabulation noised = ApplyDpDas(tab, budget, 3);
  DistanceReport dp_distance = TableDistance(tab, noised.tables);
  CHECK(dp_distance.total_population_l1 > 0);

  SwapConfig swap_cfg;
  swap_cfg.swap_rate = 0.1;
  swap_cfg.seed = 3;
  DistanceReport swap_distance =
      TableDistance(tab, SwapThenTabulate(md, swap_cfg));
  CHECK(swap_distance.total_population_l1 == 0);
  CHECK(dp_distance.total_population_l1 > swap_distance.total_population_l1);
}

TEST_CASE("noising is deterministic under (tables, budget, seed)") {
  TabulationSet tab = Tabulate(GeneratePopulation(test::MediumConfig(), 139));
  PrivacyBudget budget;
  budget.epsilon_total = 2.0;
  NoisedTabulation a = ApplyDpDas(tab, budget, 333);
  NoisedTabulation b = ApplyDpDas(tab, budget, 333);
  CHECK(a.tables == b.tables);
  NoisedTabulation c = ApplyDpDas(tab, budget, 334);
  CHECK(a.tables != c.tables);
}

TEST_CASE("budget validation rejects bad epsilon and allocations") {
  PrivacyBudget budget;
  budget.epsilon_total = 0.0;
  CHECK_THROWS_WITH_AS(budget.Validate(), doctest::Contains("dp.epsilon"), Error);
  budget.epsilon_total = 1.0;
  budget.race_table_share = 0.5;
  budget.vap_table_share = 0.6;
  CHECK_THROWS_WITH_AS(budget.Validate(), doctest::Contains("dp.allocation"),
                       Error);
  budget.vap_table_share = -0.5;
  CHECK_THROWS_AS(budget.Validate(), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace censim
