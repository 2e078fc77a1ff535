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

#ifndef CENSIM_PIPELINE_H_
#define CENSIM_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "censim/bisg.h"
#include "censim/dp.h"
#include "censim/swap.h"
#include "censim/synth.h"

namespace censim {

struct DpSettings {
  PrivacyBudget budget;        // headline epsilon and allocation
  std::vector<double> sweep;   // additional epsilon values; all > 0
};

struct BisgSettings {
  std::vector<NameParts> methods = {NameParts::kLast, NameParts::kFirstLast,
                                    NameParts::kFirstMiddleLast};
  double lambda = 0.5;
  PopulationTable population = PopulationTable::kVap;
};

struct PolicySettings {
  int n_plans = 20;
  int n_districts = 5;
  double balance_tolerance = 0.05;
  std::vector<double> thresholds = {0.0, 0.10};
};

struct RunConfig {
  GenerationConfig generation;
  double registration_rate = 0.8;
  SwapConfig swap;  // swap.seed is ignored; stage seeds derive from `seed`
  DpSettings dp;
  BisgSettings bisg;
  PolicySettings policy;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  int threads = 1;

  void Validate() const;  // throws Error(kConfig)
};

// Parses and validates the JSON run configuration document.
RunConfig LoadRunConfig(const std::filesystem::path& path);
RunConfig ParseRunConfigJson(const std::string& text,
                             const std::string& origin = "config");

// Stable FNV-1a hash of the canonicalized config document; identical configs
// hash identically across runs and platforms.
std::string ConfigHash(const RunConfig& config);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> threads;
  std::vector<double> epsilons;  // replaces the sweep when non-empty
};

void ApplyOverrides(RunConfig& config, const CliOverrides& overrides);
// CENSIM_OUT and CENSIM_THREADS env vars; only these may override config.
void ApplyEnvOverrides(RunConfig& config);

struct PipelineManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> versions;
  std::vector<std::string> artifacts;  // paths relative to output_dir
  std::string started_at;              // ISO 8601 UTC; not covered by
  std::string finished_at;             // byte-determinism (see README)
  std::string status;                  // "complete" | "failed"
  std::string failed_stage;
  std::string error;
};

// Runs generate -> tabulate -> {swap, dp per epsilon} -> bisg -> risk ->
// policy, writing every artifact under config.output_dir. All report and
// table bytes are a pure function of (config, seed); on stage failure the
// manifest is still written with status "failed" before the error is
// rethrown.
PipelineManifest RunPipeline(const RunConfig& config);

void SaveManifestJson(const PipelineManifest& manifest,
                      const std::filesystem::path& path);

// Condition labels used in artifact names and reports.
std::string DpConditionLabel(double epsilon);
inline constexpr std::string_view kConditionConfidential = "confidential";
inline constexpr std::string_view kConditionSwapped = "swapped";
inline constexpr std::string_view kConditionNamesOnly = "names_only";

}  // namespace censim

#endif  // CENSIM_PIPELINE_H_
