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

#include "censim/rng.h"

#include <array>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "censim/errors.h"

namespace censim {
namespace {

TEST_SUITE("rng") {

TEST_CASE("identical keys give identical streams") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.NextUint64() == b.NextUint64());
  }
}

TEST_CASE("forks are independent of parent consumption") {
  Rng parent(7);
  std::vector<std::uint64_t> before;
  {
    Rng child = parent.Fork("stream", 3);
    for (int i = 0; i < 16; ++i) before.push_back(child.NextUint64());
  }
  parent.NextUint64();
  parent.NextUint64();
  Rng child = parent.Fork("stream", 3);
  for (int i = 0; i < 16; ++i) {
    CHECK(child.NextUint64() == before[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("fork labels and tags separate streams") {
  Rng root(7);
  CHECK(root.Fork("a").NextUint64() != root.Fork("b").NextUint64());
  CHECK(root.Fork("a", 0).NextUint64() != root.Fork("a", 1).NextUint64());
  CHECK(root.Fork("a", 0, 0).NextUint64() != root.Fork("a", 0, 1).NextUint64());
}

TEST_CASE("unit draws stay inside the open interval") {
  Rng rng(11);
  for (int i = 0; i < 100000; ++i) {
    double u = rng.NextUnit();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("bounded draws cover the range without bias") {
  Rng rng(13);
  std::array<int, 10> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    std::uint64_t v = rng.NextBounded(10);
    REQUIRE(v < 10);
    counts[v] += 1;
  }
  // 3-sigma band around n/10 for a binomial with p = 0.1.
  double sigma = std::sqrt(n * 0.1 * 0.9);
  for (int bucket : counts) {
    CHECK(std::abs(bucket - n / 10) <= 3.0 * sigma);
  }
  CHECK_THROWS_AS(rng.NextBounded(0), Error);
}

TEST_CASE("bernoulli honors the boundary probabilities") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(rng.NextBernoulli(0.0));
    CHECK(rng.NextBernoulli(1.0));
  }
}

TEST_CASE("gaussian moments match a standard normal") {
  Rng rng(19);
  const int n = 100000;
  double sum = 0;
  double sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    double x = rng.NextGaussian();
    sum += x;
    sum_sq += x * x;
  }
  double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("gamma moments match the shape parameter") {
  Rng rng(23);
  const int n = 50000;
  for (double shape : {0.4, 1.0, 2.5}) {
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += rng.NextGamma(shape);
    double mean = sum / n;
    // Gamma(shape) has mean and variance both equal to shape.
    double tol = 4.0 * std::sqrt(shape / n);
    CHECK(std::abs(mean - shape) < tol);
  }
  CHECK_THROWS_AS(rng.NextGamma(0.0), Error);
}

TEST_CASE("categorical frequencies follow the weights") {
  Rng rng(29);
  std::vector<double> weights = {1.0, 2.0, 3.0, 4.0};
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    counts[rng.NextCategorical(weights)] += 1;
  }
  for (int k = 0; k < 4; ++k) {
    double p = weights[static_cast<std::size_t>(k)] / 10.0;
    double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(counts[k] - n * p) <= 3.0 * sigma);
  }
  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS(rng.NextCategorical(zero), Error);
}

TEST_CASE("categorical never returns a zero-weight index") {
  Rng rng(31);
  std::vector<double> weights = {0.0, 1.0, 0.0};
  for (int i = 0; i < 10000; ++i) {
    CHECK(rng.NextCategorical(weights) == 1);
  }
}

TEST_CASE("derive seed is stable") {
  CHECK(DeriveSeed(1, "stage") == DeriveSeed(1, "stage"));
  CHECK(DeriveSeed(1, "stage") != DeriveSeed(2, "stage"));
  CHECK(DeriveSeed(1, "stage", 0) != DeriveSeed(1, "stage", 1));
}

}  // TEST_SUITE

}  // namespace
}  // namespace censim
