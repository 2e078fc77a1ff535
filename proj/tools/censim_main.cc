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

// Batch driver for the census disclosure-avoidance evaluation pipeline.
//
// Exit codes: 0 success, 2 configuration error, 3 stage failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "censim/bisg.h"
#include "censim/dp.h"
#include "censim/errors.h"
#include "censim/io.h"
#include "censim/pipeline.h"
#include "censim/policy.h"
#include "censim/risk.h"
#include "censim/swap.h"
#include "censim/synth.h"
#include "censim/tabulate.h"
#include "censim/version.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

using censim::Error;
using censim::ErrorKind;

censim::SwapScope ParseScope(const std::string& scope) {
  if (scope == "tract") return censim::SwapScope::kTract;
  if (scope == "county") return censim::SwapScope::kCounty;
  if (scope == "state") return censim::SwapScope::kState;
  throw Error(ErrorKind::kConfig,
              "swap.scope: must be \"tract\", \"county\", or \"state\"");
}

censim::NameParts ParseParts(const std::string& parts) {
  auto method = censim::NamePartsFromName(parts);
  if (!method.has_value()) {
    throw Error(ErrorKind::kConfig,
                "bisg.parts: must be \"last\", \"first_last\", or "
                "\"first_middle_last\"");
  }
  return *method;
}

censim::PopulationTable ParsePopulation(const std::string& population) {
  if (population == "vap") return censim::PopulationTable::kVap;
  if (population == "total") return censim::PopulationTable::kTotal;
  throw Error(ErrorKind::kConfig, "bisg.population: must be \"vap\" or \"total\"");
}

void RequireFile(const std::filesystem::path& path, const std::string& what) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kFile, what + ": no such file " + path.string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"censim: census disclosure-avoidance mechanisms, BISG race "
               "inference, and privacy/utility reports over synthetic "
               "microdata"};
  app.set_version_flag("--version", std::string(censim::kCensimVersion));
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  std::string run_config_path;
  censim::CliOverrides run_overrides;
  std::string run_out;
  std::vector<double> run_epsilons;
  std::uint64_t run_seed = 0;
  int run_threads = 0;
  CLI::App* run = app.add_subcommand("run", "execute the full pipeline");
  run->add_option("--config", run_config_path, "run configuration JSON")
      ->required();
  auto* run_seed_opt = run->add_option("--seed", run_seed, "seed override");
  auto* run_out_opt = run->add_option("--out", run_out, "output directory");
  auto* run_threads_opt =
      run->add_option("--threads", run_threads, "thread cap override");
  run->add_option("--epsilon", run_epsilons,
                  "epsilon sweep override (repeatable)");

  // generate -----------------------------------------------------------
  std::string gen_config_path;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  CLI::App* generate = app.add_subcommand(
      "generate", "generate microdata, name model, and voter file");
  generate->add_option("--config", gen_config_path, "run configuration JSON")
      ->required();
  generate->add_option("--out", gen_out, "output directory")->required();
  auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "seed override");

  // tabulate -----------------------------------------------------------
  std::string tab_microdata;
  std::string tab_out;
  CLI::App* tabulate =
      app.add_subcommand("tabulate", "tabulate block-level tables");
  tabulate->add_option("--microdata", tab_microdata, "microdata directory")
      ->required();
  tabulate->add_option("--out", tab_out, "output tables CSV")->required();

  // swap ----------------------------------------------------------------
  std::string swap_microdata;
  std::string swap_out;
  double swap_rate = 0.05;
  std::string swap_scope = "county";
  std::uint64_t swap_seed = 0;
  CLI::App* swap =
      app.add_subcommand("swap", "apply household swapping to microdata");
  swap->add_option("--microdata", swap_microdata, "microdata directory")
      ->required();
  swap->add_option("--out", swap_out, "swapped microdata directory")
      ->required();
  swap->add_option("--rate", swap_rate, "fraction of households targeted");
  swap->add_option("--scope", swap_scope, "pairing scope: tract|county|state");
  swap->add_option("--seed", swap_seed, "mechanism seed");

  // dpnoise --------------------------------------------------------------
  std::string dp_tables;
  std::string dp_geography;
  std::string dp_out;
  double dp_epsilon = 19.61;
  double dp_race_share = 0.5;
  double dp_vap_share = 0.5;
  std::uint64_t dp_seed = 0;
  CLI::App* dpnoise = app.add_subcommand(
      "dpnoise", "apply the TopDown-lite geometric mechanism to tables");
  dpnoise->add_option("--tables", dp_tables, "confidential tables CSV")
      ->required();
  dpnoise->add_option("--geography", dp_geography, "geography JSON")->required();
  dpnoise->add_option("--out", dp_out, "noised tables CSV")->required();
  dpnoise->add_option("--epsilon", dp_epsilon, "total privacy-loss budget");
  dpnoise->add_option("--race-share", dp_race_share, "race table budget share");
  dpnoise->add_option("--vap-share", dp_vap_share, "VAP table budget share");
  dpnoise->add_option("--seed", dp_seed, "mechanism seed");

  // bisg ----------------------------------------------------------------
  std::string bisg_voters;
  std::string bisg_name_model;
  std::string bisg_tables;
  std::string bisg_geography;
  std::string bisg_parts = "first_middle_last";
  std::string bisg_population = "vap";
  double bisg_lambda = 0.5;
  std::string bisg_out;
  CLI::App* bisg = app.add_subcommand(
      "bisg", "run BISG race inference against released tables");
  bisg->add_option("--voters", bisg_voters, "voter file CSV")->required();
  bisg->add_option("--name-model", bisg_name_model, "name model JSON")
      ->required();
  bisg->add_option("--tables", bisg_tables, "released tables CSV")->required();
  bisg->add_option("--geography", bisg_geography, "geography JSON")->required();
  bisg->add_option("--out", bisg_out, "posterior records CSV")->required();
  bisg->add_option("--parts", bisg_parts,
                   "name parts: last|first_last|first_middle_last");
  bisg->add_option("--population", bisg_population, "table choice: vap|total");
  bisg->add_option("--lambda", bisg_lambda, "additive smoothing constant");

  // risk ----------------------------------------------------------------
  std::vector<std::string> risk_methods;
  std::vector<std::string> risk_without;
  std::vector<std::string> risk_with;
  std::string risk_condition = "release";
  double risk_epsilon = -1;
  std::string risk_out;
  std::string risk_text;
  CLI::App* risk = app.add_subcommand(
      "risk", "assemble the disclosure-risk report from posterior CSVs");
  risk->add_option("--method", risk_methods,
                   "name-parts method (repeat per row)")
      ->required();
  risk->add_option("--without", risk_without,
                   "posterior CSV without census data (repeat per row)")
      ->required();
  risk->add_option("--with", risk_with,
                   "posterior CSV with released data (repeat per row)")
      ->required();
  risk->add_option("--condition", risk_condition, "condition label");
  risk->add_option("--epsilon", risk_epsilon,
                   "epsilon of the release (omit for swapping)");
  risk->add_option("--out", risk_out, "risk report JSON")->required();
  risk->add_option("--text", risk_text, "optional text rendering path");

  // policy ----------------------------------------------------------------
  std::string policy_geography;
  std::string policy_conf;
  std::vector<std::string> policy_conditions;
  int policy_plans = 20;
  int policy_districts = 5;
  double policy_tolerance = 0.05;
  std::vector<double> policy_thresholds;
  std::uint64_t policy_seed = 0;
  std::string policy_out;
  std::string policy_summary;
  std::string policy_plans_dir;
  CLI::App* policy = app.add_subcommand(
      "policy", "evaluate district plans under multiple data conditions");
  policy->add_option("--geography", policy_geography, "geography JSON")
      ->required();
  policy->add_option("--tables", policy_conf, "confidential tables CSV")
      ->required();
  policy->add_option("--cond", policy_conditions,
                     "extra condition LABEL=TABLES_CSV (repeatable)");
  policy->add_option("--n-plans", policy_plans, "plans to generate");
  policy->add_option("--n-districts", policy_districts, "districts per plan");
  policy->add_option("--tolerance", policy_tolerance,
                     "balance tolerance for generated plans");
  policy->add_option("--threshold", policy_thresholds,
                     "compliance threshold (repeatable)");
  policy->add_option("--seed", policy_seed, "plan generation seed");
  policy->add_option("--out", policy_out, "deviation report JSON")->required();
  policy->add_option("--summary", policy_summary, "optional summary CSV");
  policy->add_option("--plans-dir", policy_plans_dir,
                     "directory for per-plan CSVs");

  // report ----------------------------------------------------------------
  std::vector<std::string> report_posteriors;
  CLI::App* report = app.add_subcommand(
      "report", "recompute summary metrics from posterior CSVs");
  report->add_option("--posteriors", report_posteriors,
                     "posterior records CSV (repeatable)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      censim::RunConfig config = censim::LoadRunConfig(run_config_path);
      if (*run_seed_opt) run_overrides.seed = run_seed;
      if (*run_out_opt) run_overrides.output_dir = run_out;
      if (*run_threads_opt) run_overrides.threads = run_threads;
      run_overrides.epsilons = run_epsilons;
      ApplyOverrides(config, run_overrides);
      ApplyEnvOverrides(config);
      censim::PipelineManifest manifest = censim::RunPipeline(config);
      std::printf("pipeline complete: %zu artifacts under %s (config %s)\n",
                  manifest.artifacts.size(),
                  config.output_dir.string().c_str(),
                  manifest.config_hash.c_str());
    } else if (generate->parsed()) {
      censim::RunConfig config = censim::LoadRunConfig(gen_config_path);
      if (*gen_seed_opt) config.seed = gen_seed;
      censim::Microdata md =
          censim::GeneratePopulation(config.generation, config.seed);
      censim::NameModel nm =
          censim::RealizeNameModel(config.generation, config.seed);
      censim::VoterFile voters = censim::ExtractVoterFile(
          md, config.registration_rate,
          censim::DeriveSeed(config.seed, "voterfile"));
      std::filesystem::create_directories(gen_out);
      censim::SaveMicrodata(md, gen_out);
      censim::SaveNameModelJson(nm, std::filesystem::path(gen_out) /
                                        "name_model.json");
      censim::SaveVoterFileCsv(voters, std::filesystem::path(gen_out) /
                                           "voter_file.csv");
      std::printf("generated %zu persons in %zu households, %zu voters\n",
                  md.persons.size(), md.households.size(), voters.size());
    } else if (tabulate->parsed()) {
      censim::Microdata md = censim::LoadMicrodata(tab_microdata);
      censim::TabulationSet tab = censim::Tabulate(md);
      censim::SaveTabulationCsv(tab, tab_out);
      std::printf("tabulated %zu blocks, population %lld\n", tab.blocks.size(),
                  static_cast<long long>(tab.state_totals.population));
    } else if (swap->parsed()) {
      censim::Microdata md = censim::LoadMicrodata(swap_microdata);
      censim::SwapConfig cfg;
      cfg.swap_rate = swap_rate;
      cfg.pairing_scope = ParseScope(swap_scope);
      cfg.seed = swap_seed;
      censim::SwapResult result = censim::ApplySwapping(md, cfg);
      std::filesystem::create_directories(swap_out);
      censim::SaveMicrodata(result.microdata, swap_out);
      censim::SaveSwapLogCsv(result.log, std::filesystem::path(swap_out) /
                                             "swap_log.csv");
      std::printf("swapped %zu household pairs, %lld unmatched selections\n",
                  result.log.pairs.size(),
                  static_cast<long long>(result.log.unmatched));
    } else if (dpnoise->parsed()) {
      RequireFile(dp_tables, "tables");
      censim::Geography geo = censim::LoadGeographyJson(dp_geography);
      censim::TabulationSet tab = censim::LoadTabulationCsv(dp_tables, geo);
      censim::PrivacyBudget budget;
      budget.epsilon_total = dp_epsilon;
      budget.race_table_share = dp_race_share;
      budget.vap_table_share = dp_vap_share;
      censim::NoisedTabulation noised = censim::ApplyDpDas(tab, budget, dp_seed);
      censim::SaveNoisedTabulation(noised, dp_out);
      censim::DistanceReport distance =
          censim::TableDistance(tab, noised.tables);
      std::printf("noised %zu blocks at epsilon %g; total-population L1 %lld\n",
                  tab.blocks.size(), dp_epsilon,
                  static_cast<long long>(distance.total_population_l1));
    } else if (bisg->parsed()) {
      RequireFile(bisg_voters, "voters");
      censim::VoterFile voters = censim::LoadVoterFileCsv(bisg_voters);
      censim::NameModel nm = censim::LoadNameModelJson(bisg_name_model);
      censim::Geography geo = censim::LoadGeographyJson(bisg_geography);
      censim::TabulationSet tab = censim::LoadTabulationCsv(bisg_tables, geo);
      censim::BisgOptions options;
      options.parts = ParseParts(bisg_parts);
      options.population = ParsePopulation(bisg_population);
      options.lambda = bisg_lambda;
      std::vector<censim::PosteriorRecord> records =
          censim::RunBisg(voters, nm, tab, options);
      censim::SavePosteriorsCsv(records, bisg_out);
      std::printf("classified %zu voters; error rate %.4f\n", records.size(),
                  censim::ErrorRate(records));
    } else if (risk->parsed()) {
      if (risk_methods.size() != risk_without.size() ||
          risk_methods.size() != risk_with.size()) {
        throw Error(ErrorKind::kConfig,
                    "risk: --method, --without, and --with must repeat "
                    "together");
      }
      std::vector<censim::MethodPosteriors> posteriors;
      for (std::size_t i = 0; i < risk_methods.size(); ++i) {
        censim::MethodPosteriors mp;
        mp.method = ParseParts(risk_methods[i]);
        mp.without_data = censim::LoadPosteriorsCsv(risk_without[i]);
        mp.with_data = censim::LoadPosteriorsCsv(risk_with[i]);
        posteriors.push_back(std::move(mp));
      }
      std::optional<double> epsilon;
      if (risk_epsilon > 0) epsilon = risk_epsilon;
      censim::RiskReport rr =
          censim::BuildRiskReport(posteriors, epsilon, risk_condition);
      censim::SaveRiskReportJson(rr, risk_out);
      std::string text = censim::RenderRiskReportText(rr);
      if (!risk_text.empty()) {
        std::ofstream out(risk_text);
        out << text;
      }
      std::fputs(text.c_str(), stdout);
    } else if (policy->parsed()) {
      censim::Geography geo = censim::LoadGeographyJson(policy_geography);
      censim::TabulationSet conf = censim::LoadTabulationCsv(policy_conf, geo);
      std::vector<std::pair<std::string, censim::TabulationSet>> extra;
      for (const std::string& spec : policy_conditions) {
        std::size_t eq = spec.find('=');
        if (eq == std::string::npos) {
          throw Error(ErrorKind::kConfig,
                      "policy: --cond expects LABEL=TABLES_CSV, got " + spec);
        }
        extra.emplace_back(spec.substr(0, eq),
                           censim::LoadTabulationCsv(spec.substr(eq + 1), geo));
      }
      if (policy_thresholds.empty()) policy_thresholds = {0.0, 0.10};
      std::vector<censim::Plan> plans =
          censim::GeneratePlans(geo, conf, policy_plans, policy_districts,
                                policy_tolerance, policy_seed);
      std::vector<censim::LabeledTabulation> conditions;
      conditions.push_back({"confidential", &conf});
      for (const auto& [label, tables] : extra) {
        conditions.push_back({label, &tables});
      }
      censim::DeviationReport report =
          censim::BuildDeviationReport(plans, conditions, policy_thresholds);
      censim::SaveDeviationReportJson(report, policy_out);
      if (!policy_summary.empty()) {
        censim::SaveDeviationSummaryCsv(report, policy_summary);
      }
      if (!policy_plans_dir.empty()) {
        std::filesystem::create_directories(policy_plans_dir);
        for (const censim::Plan& plan : plans) {
          censim::SavePlanCsv(plan, std::filesystem::path(policy_plans_dir) /
                                        ("plan_" + std::to_string(plan.plan_id) +
                                         ".csv"));
        }
      }
      std::printf("evaluated %zu plans under %zu conditions\n", plans.size(),
                  conditions.size());
    } else if (report->parsed()) {
      for (const std::string& path : report_posteriors) {
        std::vector<censim::PosteriorRecord> records =
            censim::LoadPosteriorsCsv(path);
        double error = censim::ErrorRate(records);
        double max_risk = 0;
        std::int64_t infinite = 0;
        for (const censim::PosteriorRecord& rec : records) {
          double risk = censim::RelativeRisk(rec);
          if (std::isinf(risk)) {
            ++infinite;
          } else {
            max_risk = std::max(max_risk, risk);
          }
        }
        std::printf("%s: records %zu, error rate %.4f, max relative risk "
                    "%.6g, infinite %lld\n",
                    path.c_str(), records.size(), error, max_risk,
                    static_cast<long long>(infinite));
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "censim: %s error: %s\n", censim::ErrorKindName(e.kind()),
                 e.what());
    return e.kind() == ErrorKind::kConfig ? kExitConfig : kExitStage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "censim: error: %s\n", e.what());
    return kExitStage;
  }
  return kExitOk;
}
