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

#include "censim/risk.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "censim/dp.h"
#include "censim/errors.h"

namespace censim {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

RaceCategory TrueRaceOrThrow(const PosteriorRecord& rec, const char* op) {
  if (!rec.true_race.has_value()) {
    throw Error(ErrorKind::kContract,
                std::string(op) + ": record " + std::to_string(rec.person_id) +
                    " has no true race");
  }
  return *rec.true_race;
}

json GroupRiskToJson(const GroupRisk& g) {
  json j{{"count", g.count}, {"infinite_count", g.infinite_count}};
  if (g.geometric_mean.has_value()) {
    j["geometric_mean"] = *g.geometric_mean;
  } else {
    j["geometric_mean"] = nullptr;
  }
  return j;
}

std::string FormatFixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string FormatRisk(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", value);
  return buf;
}

}  // namespace

double AbsoluteRisk(const PosteriorRecord& rec) {
  RaceCategory race = TrueRaceOrThrow(rec, "absolute risk");
  return rec.posterior[static_cast<int>(race)];
}

double RelativeRisk(const PosteriorRecord& rec) {
  RaceCategory race = TrueRaceOrThrow(rec, "relative risk");
  double prior = rec.prior[static_cast<int>(race)];
  double posterior = rec.posterior[static_cast<int>(race)];
  if (!(prior > 0) || !(posterior > 0)) return kInf;
  return std::max(posterior / prior, prior / posterior);
}

std::array<std::optional<GroupRisk>, kNumRaces> MeanRelativeRiskByRace(
    std::span<const PosteriorRecord> records) {
  std::array<double, kNumRaces> log_sum{};
  std::array<std::int64_t, kNumRaces> finite{};
  std::array<std::int64_t, kNumRaces> infinite{};
  std::array<std::int64_t, kNumRaces> total{};
  for (const PosteriorRecord& rec : records) {
    int r = static_cast<int>(TrueRaceOrThrow(rec, "relative risk by race"));
    double risk = RelativeRisk(rec);
    total[r] += 1;
    if (std::isinf(risk)) {
      infinite[r] += 1;
    } else {
      finite[r] += 1;
      log_sum[r] += std::log(risk);
    }
  }
  std::array<std::optional<GroupRisk>, kNumRaces> out;
  for (int r = 0; r < kNumRaces; ++r) {
    if (total[r] == 0) continue;  // empty groups are absent, never zero
    GroupRisk g;
    g.count = total[r];
    g.infinite_count = infinite[r];
    if (finite[r] > 0) {
      g.geometric_mean = std::exp(log_sum[r] / static_cast<double>(finite[r]));
    }
    out[r] = g;
  }
  return out;
}

double DpBound(double epsilon) {
  if (epsilon < 0 || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::kContract, "dp bound: epsilon must be >= 0");
  }
  return std::exp(epsilon);
}

RiskReport BuildRiskReport(std::span<const MethodPosteriors> posteriors,
                           std::optional<double> epsilon,
                           std::string condition) {
  if (posteriors.empty()) {
    throw Error(ErrorKind::kContract, "risk report: no methods supplied");
  }
  RiskReport report;
  report.condition = std::move(condition);
  report.epsilon = epsilon;
  if (epsilon.has_value()) {
    report.dp_bound = DpBound(*epsilon);
  }
  for (const MethodPosteriors& mp : posteriors) {
    std::string method(NamePartsName(mp.method));
    if (mp.without_data.empty()) {
      throw Error(ErrorKind::kContract,
                  "risk report: method " + method +
                      ": missing condition \"without Census data\"");
    }
    if (mp.with_data.empty()) {
      throw Error(ErrorKind::kContract,
                  "risk report: method " + method +
                      ": missing condition \"with released data\"");
    }
    RiskRow row;
    row.method = mp.method;
    row.error_rate_without_data = ErrorRate(mp.without_data);
    row.error_rate_with_data = ErrorRate(mp.with_data);
    double max_finite = -kInf;
    for (const PosteriorRecord& rec : mp.with_data) {
      double risk = RelativeRisk(rec);
      if (std::isinf(risk)) {
        row.infinite_risk_count += 1;
      } else {
        max_finite = std::max(max_finite, risk);
      }
    }
    if (max_finite > -kInf) row.max_individual_relative_risk = max_finite;
    row.per_race_relative_risk = MeanRelativeRiskByRace(mp.with_data);
    if (report.dp_bound.has_value() && row.max_individual_relative_risk &&
        *row.max_individual_relative_risk > *report.dp_bound) {
      report.any_relative_risk_exceeds_bound = true;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void SaveRiskReportJson(const RiskReport& report,
                        const std::filesystem::path& path) {
  json rows = json::array();
  for (const RiskRow& row : report.rows) {
    json per_race = json::object();
    for (int r = 0; r < kNumRaces; ++r) {
      if (row.per_race_relative_risk[r].has_value()) {
        per_race[std::string(RaceName(kAllRaces[r]))] =
            GroupRiskToJson(*row.per_race_relative_risk[r]);
      }
    }
    json jrow{{"method", std::string(NamePartsName(row.method))},
              {"error_rate_without_data", row.error_rate_without_data},
              {"error_rate_with_data", row.error_rate_with_data},
              {"infinite_risk_count", row.infinite_risk_count},
              {"per_race_relative_risk", per_race}};
    if (row.max_individual_relative_risk.has_value()) {
      jrow["max_individual_relative_risk"] = *row.max_individual_relative_risk;
    } else {
      jrow["max_individual_relative_risk"] = nullptr;
    }
    rows.push_back(jrow);
  }
  json doc{{"condition", report.condition},
           {"rows", rows},
           {"any_relative_risk_exceeds_bound",
            report.any_relative_risk_exceeds_bound},
           {"bound_semantics", std::string(kBoundSemanticsNote)}};
  doc["epsilon"] = report.epsilon.has_value() ? json(*report.epsilon) : json();
  doc["dp_bound"] = report.dp_bound.has_value() ? json(*report.dp_bound) : json();
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::kFile, "cannot write " + path.string());
  }
  out << doc.dump(2) << '\n';
}

std::string RenderRiskReportText(const RiskReport& report) {
  std::string text;
  text += "BISG error rates and relative disclosure risk - condition: " +
          report.condition + "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %-18s %-18s %s\n", "method",
                "error w/o data", "error w/ data", "max relative risk");
  text += line;
  for (const RiskRow& row : report.rows) {
    std::string risk = row.max_individual_relative_risk.has_value()
                           ? FormatRisk(*row.max_individual_relative_risk)
                           : std::string("n/a");
    if (row.infinite_risk_count > 0) {
      risk += " (+" + std::to_string(row.infinite_risk_count) + " infinite)";
    }
    std::snprintf(line, sizeof(line), "%-20s %-18s %-18s %s\n",
                  std::string(NamePartsName(row.method)).c_str(),
                  FormatFixed(row.error_rate_without_data, 4).c_str(),
                  FormatFixed(row.error_rate_with_data, 4).c_str(),
                  risk.c_str());
    text += line;
  }
  if (!report.rows.empty()) {
    const RiskRow& finest = report.rows.back();
    text += "per-race geometric mean relative risk (" +
            std::string(NamePartsName(finest.method)) + "):";
    for (int r = 0; r < kNumRaces; ++r) {
      const auto& group = finest.per_race_relative_risk[r];
      if (!group.has_value()) continue;
      text += " " + std::string(RaceName(kAllRaces[r])) + "=";
      text += group->geometric_mean.has_value()
                  ? FormatRisk(*group->geometric_mean)
                  : std::string("n/a");
    }
    text += "\n";
  }
  if (report.epsilon.has_value()) {
    text += "epsilon: " + FormatRisk(*report.epsilon) +
            "  exp(epsilon) bound: " + FormatRisk(*report.dp_bound) + "\n";
  }
  text += "note: " + std::string(kBoundSemanticsNote) + "\n";
  return text;
}

// ---------------------------------------------------------------------------
// Mechanism-aware posterior on tiny instances.
// ---------------------------------------------------------------------------

void TinyInstance::Validate() const {
  if (n_blocks < 1 || n_blocks > 3 || n_races < 2 || n_races > 3) {
    throw Error(ErrorKind::kContract,
                "tiny instance: need 1..3 blocks and 2..3 races");
  }
  if (max_count < 1 || max_count > 5) {
    throw Error(ErrorKind::kContract, "tiny instance: max_count must be 1..5");
  }
  if (target_block < 0 || target_block >= n_blocks) {
    throw Error(ErrorKind::kContract, "tiny instance: target_block out of range");
  }
  if (!(epsilon_total > 0) || !std::isfinite(epsilon_total)) {
    throw Error(ErrorKind::kContract, "tiny instance: epsilon must be positive");
  }
}

TinyDraw SampleTinyRelease(const TinyInstance& inst, Rng& rng) {
  inst.Validate();
  const int cells = inst.n_blocks * inst.n_races;
  TinyDraw draw;
  draw.confidential.resize(cells);
  for (int c = 0; c < cells; ++c) {
    draw.confidential[c] = static_cast<std::int64_t>(
        rng.NextBounded(static_cast<std::uint64_t>(inst.max_count) + 1));
  }
  draw.target_race = static_cast<int>(
      rng.NextBounded(static_cast<std::uint64_t>(inst.n_races)));
  draw.confidential[inst.target_block * inst.n_races + draw.target_race] += 1;
  draw.released.resize(cells);
  const double cell_eps = inst.CellEpsilon();
  for (int c = 0; c < cells; ++c) {
    draw.released[c] =
        draw.confidential[c] + SampleTwoSidedGeometric(rng, cell_eps);
  }
  return draw;
}

std::vector<double> MechanismAwarePosterior(
    const TinyInstance& inst, std::span<const std::int64_t> released) {
  inst.Validate();
  const int cells = inst.n_blocks * inst.n_races;
  if (static_cast<int>(released.size()) != cells) {
    throw Error(ErrorKind::kContract,
                "tiny instance: released vector has wrong size");
  }
  const double cell_eps = inst.CellEpsilon();
  // The uniform prior over the rest of the table factorizes cell by cell, so
  // only the target block's cells matter: every other cell contributes the
  // same marginal likelihood to every race hypothesis.
  std::vector<double> weights(inst.n_races);
  for (int y = 0; y < inst.n_races; ++y) {
    const int cell = inst.target_block * inst.n_races + y;
    double with_target = 0;   // cell holds z + 1
    double without_target = 0;  // cell holds z
    for (int z = 0; z <= inst.max_count; ++z) {
      without_target += TwoSidedGeometricPmf(released[cell] - z, cell_eps);
      with_target += TwoSidedGeometricPmf(released[cell] - z - 1, cell_eps);
    }
    weights[y] = with_target / without_target;
  }
  double total = 0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return weights;
}

std::vector<double> MechanismAwarePosteriorEnumerated(
    const TinyInstance& inst, std::span<const std::int64_t> released) {
  inst.Validate();
  const int cells = inst.n_blocks * inst.n_races;
  if (static_cast<int>(released.size()) != cells) {
    throw Error(ErrorKind::kContract,
                "tiny instance: released vector has wrong size");
  }
  const double cell_eps = inst.CellEpsilon();
  const int support = inst.max_count + 1;

  // Likelihood of each (cell, z, shift) combination, precomputed.
  std::vector<double> pmf_plain(static_cast<std::size_t>(cells) * support);
  std::vector<double> pmf_shift(static_cast<std::size_t>(cells) * support);
  for (int c = 0; c < cells; ++c) {
    for (int z = 0; z < support; ++z) {
      pmf_plain[static_cast<std::size_t>(c) * support + z] =
          TwoSidedGeometricPmf(released[c] - z, cell_eps);
      pmf_shift[static_cast<std::size_t>(c) * support + z] =
          TwoSidedGeometricPmf(released[c] - z - 1, cell_eps);
    }
  }

  std::vector<double> weights(inst.n_races, 0.0);
  std::vector<int> z(cells, 0);
  for (int y = 0; y < inst.n_races; ++y) {
    const int target_cell = inst.target_block * inst.n_races + y;
    // Depth-first walk over every table in the prior's support, keeping the
    // running likelihood product per level.
    std::vector<double> prefix(cells + 1);
    prefix[0] = 1.0;
    std::fill(z.begin(), z.end(), 0);
    int level = 0;
    double total = 0;
    for (;;) {
      if (level == cells) {
        total += prefix[cells];
        --level;
        ++z[level];
      }
      while (level >= 0 && z[level] >= support) {
        z[level] = 0;
        --level;
        if (level >= 0) ++z[level];
      }
      if (level < 0) break;
      const double* table =
          (level == target_cell ? pmf_shift.data() : pmf_plain.data());
      prefix[level + 1] =
          prefix[level] * table[static_cast<std::size_t>(level) * support + z[level]];
      ++level;
    }
    weights[y] = total;
  }
  double total = 0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace censim
