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

#include "censim/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "censim/errors.h"
#include "censim/io.h"
#include "censim/policy.h"
#include "censim/risk.h"
#include "censim/rng.h"
#include "censim/version.h"
#include "internal_csv.h"

namespace censim {

namespace {

using nlohmann::json;

std::string IsoTimestampUtc() {
  std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

[[noreturn]] void ConfigFail(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::kConfig, field + ": " + why);
}

const json* FindField(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double GetNumber(const json& obj, const char* key, double fallback,
                 const std::string& field) {
  const json* v = FindField(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) ConfigFail(field, "expected a number");
  return v->get<double>();
}

std::int64_t GetInt(const json& obj, const char* key, std::int64_t fallback,
                    const std::string& field) {
  const json* v = FindField(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) ConfigFail(field, "expected an integer");
  return v->get<std::int64_t>();
}

IntRangeSpec GetRange(const json& obj, const char* key, IntRangeSpec fallback,
                      const std::string& field) {
  const json* v = FindField(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_object()) ConfigFail(field, "expected {\"min\": .., \"max\": ..}");
  IntRangeSpec range;
  range.min = GetInt(*v, "min", fallback.min, field + ".min");
  range.max = GetInt(*v, "max", fallback.max, field + ".max");
  return range;
}

RaceVector GetRaceVector(const json& arr, const std::string& field) {
  if (!arr.is_array() || arr.size() != kNumRaces) {
    ConfigFail(field, "expected an array of " + std::to_string(kNumRaces) +
                           " numbers");
  }
  RaceVector v{};
  for (int r = 0; r < kNumRaces; ++r) {
    if (!arr[r].is_number()) ConfigFail(field, "expected numbers");
    v[r] = arr[r].get<double>();
  }
  return v;
}

GenerationConfig ParseGeneration(const json& gen) {
  GenerationConfig config;
  if (const json* geo = FindField(gen, "geography")) {
    config.geography.counties = static_cast<int>(
        GetInt(*geo, "counties", 1, "generation.geography.counties"));
    config.geography.tracts_per_county = static_cast<int>(GetInt(
        *geo, "tracts_per_county", 1, "generation.geography.tracts_per_county"));
    config.geography.blocks_per_tract = static_cast<int>(GetInt(
        *geo, "blocks_per_tract", 1, "generation.geography.blocks_per_tract"));
  }
  config.households_per_block =
      GetRange(gen, "households_per_block", config.households_per_block,
               "generation.households_per_block");
  config.adults_per_household =
      GetRange(gen, "adults_per_household", config.adults_per_household,
               "generation.adults_per_household");
  config.children_per_household =
      GetRange(gen, "children_per_household", config.children_per_household,
               "generation.children_per_household");
  config.middle_name_rate = GetNumber(gen, "middle_name_rate", 1.0,
                                      "generation.middle_name_rate");

  if (const json* mix = FindField(gen, "race_mixture")) {
    std::string mode = mix->value("mode", "dirichlet");
    if (mode == "dirichlet") {
      config.race_mixture.mode = RaceMixtureSpec::Mode::kDirichlet;
      if (const json* conc = FindField(*mix, "concentration")) {
        config.race_mixture.concentration =
            GetRaceVector(*conc, "generation.race_mixture.concentration");
      }
    } else if (mode == "explicit") {
      config.race_mixture.mode = RaceMixtureSpec::Mode::kExplicit;
      const json* blocks = FindField(*mix, "blocks");
      if (blocks == nullptr || !blocks->is_array()) {
        ConfigFail("generation.race_mixture.blocks", "required in explicit mode");
      }
      for (std::size_t i = 0; i < blocks->size(); ++i) {
        config.race_mixture.block_mixtures.push_back(GetRaceVector(
            (*blocks)[i],
            "generation.race_mixture.blocks[" + std::to_string(i) + "]"));
      }
    } else {
      ConfigFail("generation.race_mixture.mode",
                 "must be \"dirichlet\" or \"explicit\"");
    }
  }

  if (const json* nm = FindField(gen, "name_model")) {
    std::string mode = nm->value("mode", "dirichlet");
    if (mode == "demo") {
      config.name_model.mode = NameModelSpec::Mode::kDemo;
    } else if (mode == "file") {
      config.name_model.mode = NameModelSpec::Mode::kFile;
      config.name_model.path = nm->value("path", "");
    } else if (mode == "dirichlet") {
      config.name_model.mode = NameModelSpec::Mode::kDirichlet;
      config.name_model.surnames = static_cast<int>(
          GetInt(*nm, "surnames", 200, "generation.name_model.surnames"));
      config.name_model.first_names = static_cast<int>(
          GetInt(*nm, "first_names", 100, "generation.name_model.first_names"));
      config.name_model.middle_names = static_cast<int>(GetInt(
          *nm, "middle_names", 50, "generation.name_model.middle_names"));
      config.name_model.surname_concentration =
          GetNumber(*nm, "surname_concentration", 0.4,
                    "generation.name_model.surname_concentration");
      config.name_model.first_concentration =
          GetNumber(*nm, "first_concentration", 0.5,
                    "generation.name_model.first_concentration");
      config.name_model.middle_concentration =
          GetNumber(*nm, "middle_concentration", 0.5,
                    "generation.name_model.middle_concentration");
      if (const json* prior = FindField(*nm, "national_race_prior")) {
        config.name_model.national_race_prior = GetRaceVector(
            *prior, "generation.name_model.national_race_prior");
      }
    } else {
      ConfigFail("generation.name_model.mode",
                 "must be \"demo\", \"dirichlet\", or \"file\"");
    }
  }
  return config;
}

json GenerationToJson(const GenerationConfig& config) {
  json gen{
      {"geography",
       json{{"counties", config.geography.counties},
            {"tracts_per_county", config.geography.tracts_per_county},
            {"blocks_per_tract", config.geography.blocks_per_tract}}},
      {"households_per_block", json{{"min", config.households_per_block.min},
                                    {"max", config.households_per_block.max}}},
      {"adults_per_household", json{{"min", config.adults_per_household.min},
                                    {"max", config.adults_per_household.max}}},
      {"children_per_household",
       json{{"min", config.children_per_household.min},
            {"max", config.children_per_household.max}}},
      {"middle_name_rate", config.middle_name_rate},
  };
  if (config.race_mixture.mode == RaceMixtureSpec::Mode::kDirichlet) {
    gen["race_mixture"] = json{{"mode", "dirichlet"},
                               {"concentration", config.race_mixture.concentration}};
  } else {
    json blocks = json::array();
    for (const RaceVector& mix : config.race_mixture.block_mixtures) {
      blocks.push_back(mix);
    }
    gen["race_mixture"] = json{{"mode", "explicit"}, {"blocks", blocks}};
  }
  switch (config.name_model.mode) {
    case NameModelSpec::Mode::kDemo:
      gen["name_model"] = json{{"mode", "demo"}};
      break;
    case NameModelSpec::Mode::kFile:
      gen["name_model"] = json{{"mode", "file"}, {"path", config.name_model.path}};
      break;
    case NameModelSpec::Mode::kDirichlet:
      gen["name_model"] =
          json{{"mode", "dirichlet"},
               {"surnames", config.name_model.surnames},
               {"first_names", config.name_model.first_names},
               {"middle_names", config.name_model.middle_names},
               {"surname_concentration", config.name_model.surname_concentration},
               {"first_concentration", config.name_model.first_concentration},
               {"middle_concentration", config.name_model.middle_concentration},
               {"national_race_prior", config.name_model.national_race_prior}};
      break;
  }
  return gen;
}

std::uint64_t Fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void RunConfig::Validate() const {
  generation.Validate();
  if (registration_rate < 0 || registration_rate > 1) {
    ConfigFail("registration_rate", "must lie in [0, 1]");
  }
  swap.Validate();
  dp.budget.Validate();
  for (double eps : dp.sweep) {
    if (!(eps > 0)) {
      ConfigFail("dp.sweep", "epsilon values must be positive, got " +
                                 std::to_string(eps));
    }
  }
  if (bisg.methods.empty()) {
    ConfigFail("bisg.methods", "need at least one name-parts method");
  }
  if (bisg.lambda < 0) {
    ConfigFail("bisg.lambda", "must be non-negative");
  }
  if (policy.n_plans < 1) ConfigFail("policy.n_plans", "must be >= 1");
  if (policy.n_districts < 1) ConfigFail("policy.n_districts", "must be >= 1");
  if (policy.n_districts > generation.block_count()) {
    ConfigFail("policy.n_districts", "exceeds the number of blocks");
  }
  if (policy.balance_tolerance < 0) {
    ConfigFail("policy.balance_tolerance", "must be >= 0");
  }
  if (policy.thresholds.empty()) {
    ConfigFail("policy.thresholds", "need at least one threshold");
  }
  if (threads < 1) ConfigFail("threads", "must be >= 1");
  if (output_dir.empty()) ConfigFail("output_dir", "must not be empty");
}

RunConfig ParseRunConfigJson(const std::string& text,
                             const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kConfig, origin + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kConfig, origin + ": expected a JSON object");
  }
  RunConfig config;
  if (const json* gen = FindField(doc, "generation")) {
    config.generation = ParseGeneration(*gen);
  }
  config.registration_rate =
      GetNumber(doc, "registration_rate", 0.8, "registration_rate");
  if (const json* swap = FindField(doc, "swap")) {
    config.swap.swap_rate = GetNumber(*swap, "rate", 0.05, "swap.rate");
    std::string scope = swap->value("scope", "county");
    if (scope == "tract") {
      config.swap.pairing_scope = SwapScope::kTract;
    } else if (scope == "county") {
      config.swap.pairing_scope = SwapScope::kCounty;
    } else if (scope == "state") {
      config.swap.pairing_scope = SwapScope::kState;
    } else {
      ConfigFail("swap.scope", "must be \"tract\", \"county\", or \"state\"");
    }
  }
  if (const json* dp = FindField(doc, "dp")) {
    config.dp.budget.epsilon_total =
        GetNumber(*dp, "epsilon", 19.61, "dp.epsilon");
    if (const json* alloc = FindField(*dp, "allocation")) {
      config.dp.budget.race_table_share =
          GetNumber(*alloc, "race_table", 0.5, "dp.allocation.race_table");
      config.dp.budget.vap_table_share =
          GetNumber(*alloc, "vap_table", 0.5, "dp.allocation.vap_table");
    }
    if (const json* sweep = FindField(*dp, "sweep")) {
      if (!sweep->is_array()) ConfigFail("dp.sweep", "expected an array");
      config.dp.sweep.clear();
      for (const auto& v : *sweep) {
        if (!v.is_number()) ConfigFail("dp.sweep", "expected numbers");
        config.dp.sweep.push_back(v.get<double>());
      }
    }
  }
  if (const json* bisg = FindField(doc, "bisg")) {
    if (const json* parts = FindField(*bisg, "parts")) {
      if (!parts->is_array()) ConfigFail("bisg.parts", "expected an array");
      config.bisg.methods.clear();
      for (const auto& v : *parts) {
        auto method = NamePartsFromName(v.is_string() ? v.get<std::string>() : "");
        if (!method.has_value()) {
          ConfigFail("bisg.parts",
                     "entries must be \"last\", \"first_last\", or "
                     "\"first_middle_last\"");
        }
        config.bisg.methods.push_back(*method);
      }
    }
    config.bisg.lambda = GetNumber(*bisg, "lambda", 0.5, "bisg.lambda");
    std::string population = bisg->value("population", "vap");
    if (population == "vap") {
      config.bisg.population = PopulationTable::kVap;
    } else if (population == "total") {
      config.bisg.population = PopulationTable::kTotal;
    } else {
      ConfigFail("bisg.population", "must be \"vap\" or \"total\"");
    }
  }
  if (const json* policy = FindField(doc, "policy")) {
    config.policy.n_plans =
        static_cast<int>(GetInt(*policy, "n_plans", 20, "policy.n_plans"));
    config.policy.n_districts = static_cast<int>(
        GetInt(*policy, "n_districts", 5, "policy.n_districts"));
    config.policy.balance_tolerance = GetNumber(
        *policy, "balance_tolerance", 0.05, "policy.balance_tolerance");
    if (const json* thresholds = FindField(*policy, "thresholds")) {
      if (!thresholds->is_array()) {
        ConfigFail("policy.thresholds", "expected an array");
      }
      config.policy.thresholds.clear();
      for (const auto& v : *thresholds) {
        if (!v.is_number()) ConfigFail("policy.thresholds", "expected numbers");
        config.policy.thresholds.push_back(v.get<double>());
      }
    }
  }
  config.seed = static_cast<std::uint64_t>(GetInt(doc, "seed", 1, "seed"));
  config.output_dir = doc.value("output_dir", "out");
  config.threads = static_cast<int>(GetInt(doc, "threads", 1, "threads"));
  config.Validate();
  return config;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kFile, "cannot open config " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return ParseRunConfigJson(text, path.string());
}

std::string ConfigHash(const RunConfig& config) {
  // Canonical form: the full config re-serialized with sorted keys.
  json doc{
      {"generation", GenerationToJson(config.generation)},
      {"registration_rate", config.registration_rate},
      {"swap", json{{"rate", config.swap.swap_rate},
                    {"scope", std::string(SwapScopeName(config.swap.pairing_scope))}}},
      {"dp", json{{"epsilon", config.dp.budget.epsilon_total},
                  {"allocation",
                   json{{"race_table", config.dp.budget.race_table_share},
                        {"vap_table", config.dp.budget.vap_table_share}}},
                  {"sweep", config.dp.sweep}}},
      {"bisg", json{{"lambda", config.bisg.lambda},
                    {"population", config.bisg.population == PopulationTable::kVap
                                       ? "vap"
                                       : "total"}}},
      {"policy", json{{"n_plans", config.policy.n_plans},
                      {"n_districts", config.policy.n_districts},
                      {"balance_tolerance", config.policy.balance_tolerance},
                      {"thresholds", config.policy.thresholds}}},
      {"seed", config.seed},
  };
  json methods = json::array();
  for (NameParts m : config.bisg.methods) {
    methods.push_back(std::string(NamePartsName(m)));
  }
  doc["bisg"]["methods"] = methods;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(doc.dump())));
  return buf;
}

void ApplyOverrides(RunConfig& config, const CliOverrides& overrides) {
  if (overrides.seed.has_value()) config.seed = *overrides.seed;
  if (overrides.output_dir.has_value()) config.output_dir = *overrides.output_dir;
  if (overrides.threads.has_value()) config.threads = *overrides.threads;
  if (!overrides.epsilons.empty()) config.dp.sweep = overrides.epsilons;
  config.Validate();
}

void ApplyEnvOverrides(RunConfig& config) {
  if (const char* out = std::getenv("CENSIM_OUT"); out != nullptr && *out) {
    config.output_dir = out;
  }
  if (const char* threads = std::getenv("CENSIM_THREADS");
      threads != nullptr && *threads) {
    config.threads = std::atoi(threads);
  }
  config.Validate();
}

std::string DpConditionLabel(double epsilon) {
  return "dp_eps_" + internal::FormatDouble(epsilon);
}

void SaveManifestJson(const PipelineManifest& manifest,
                      const std::filesystem::path& path) {
  json doc{{"config_hash", manifest.config_hash},
           {"seed", manifest.seed},
           {"versions", manifest.versions},
           {"artifacts", manifest.artifacts},
           {"started_at", manifest.started_at},
           {"finished_at", manifest.finished_at},
           {"status", manifest.status}};
  if (!manifest.failed_stage.empty()) {
    doc["failed_stage"] = manifest.failed_stage;
    doc["error"] = manifest.error;
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::kFile, "cannot write " + path.string());
  }
  out << doc.dump(2) << '\n';
}

PipelineManifest RunPipeline(const RunConfig& config) {
  config.Validate();
  const std::filesystem::path out = config.output_dir;
  std::filesystem::create_directories(out);
  std::filesystem::create_directories(out / "microdata");
  std::filesystem::create_directories(out / "tables");
  std::filesystem::create_directories(out / "posteriors");
  std::filesystem::create_directories(out / "plans");
  std::filesystem::create_directories(out / "reports");

  PipelineManifest manifest;
  manifest.config_hash = ConfigHash(config);
  manifest.seed = config.seed;
  manifest.versions = {
      {"censim", std::string(kCensimVersion)},
      {"rng", std::string(Rng::kVersion)},
      {"dp_mechanism", std::string(kDpMechanismVersion)},
      {"swap_mechanism", std::string(kSwapMechanismVersion)},
      {"generator", std::string(kGeneratorVersion)},
  };
  manifest.started_at = IsoTimestampUtc();
  manifest.status = "failed";

  auto add_artifact = [&](const std::filesystem::path& p) {
    manifest.artifacts.push_back(
        std::filesystem::relative(p, out).generic_string());
  };

  std::string stage = "generate";
  try {
    // generate
    Microdata md = GeneratePopulation(config.generation, config.seed);
    NameModel nm = RealizeNameModel(config.generation, config.seed);
    VoterFile voters = ExtractVoterFile(
        md, config.registration_rate, DeriveSeed(config.seed, "voterfile"));
    SaveMicrodata(md, out / "microdata");
    add_artifact(out / "microdata" / kHouseholdsCsv);
    add_artifact(out / "microdata" / kPersonsCsv);
    add_artifact(out / "microdata" / kGeographyJson);
    SaveNameModelJson(nm, out / "microdata" / "name_model.json");
    add_artifact(out / "microdata" / "name_model.json");
    SaveVoterFileCsv(voters, out / "microdata" / "voter_file.csv");
    add_artifact(out / "microdata" / "voter_file.csv");

    // tabulate
    stage = "tabulate";
    TabulationSet conf = Tabulate(md);
    SaveTabulationCsv(conf, out / "tables" / "confidential.csv");
    add_artifact(out / "tables" / "confidential.csv");
    add_artifact(out / "tables" / "confidential.aggregates.json");

    // swap
    stage = "swap";
    SwapConfig swap_cfg = config.swap;
    swap_cfg.seed = DeriveSeed(config.seed, "swap");
    SwapResult swapped = ApplySwapping(md, swap_cfg);
    TabulationSet swapped_tab = Tabulate(swapped.microdata);
    SaveSwapLogCsv(swapped.log, out / "tables" / "swap_log.csv");
    add_artifact(out / "tables" / "swap_log.csv");
    SaveTabulationCsv(swapped_tab, out / "tables" / "swapped.csv");
    add_artifact(out / "tables" / "swapped.csv");
    add_artifact(out / "tables" / "swapped.aggregates.json");

    // dp noise, one release per epsilon (headline first, then the sweep)
    stage = "dpnoise";
    std::vector<double> epsilons = {config.dp.budget.epsilon_total};
    for (double eps : config.dp.sweep) {
      if (std::find(epsilons.begin(), epsilons.end(), eps) == epsilons.end()) {
        epsilons.push_back(eps);
      }
    }
    std::vector<std::pair<std::string, NoisedTabulation>> releases;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      PrivacyBudget budget = config.dp.budget;
      budget.epsilon_total = epsilons[i];
      NoisedTabulation noised =
          ApplyDpDas(conf, budget, DeriveSeed(config.seed, "dp", i));
      std::string label = DpConditionLabel(epsilons[i]);
      SaveNoisedTabulation(noised, out / "tables" / (label + ".csv"));
      add_artifact(out / "tables" / (label + ".csv"));
      add_artifact(out / "tables" / (label + ".aggregates.json"));
      add_artifact(out / "tables" / (label + ".provenance.json"));
      releases.emplace_back(label, std::move(noised));
    }

    // bisg under every data condition
    stage = "bisg";
    struct Condition {
      std::string label;
      const TabulationSet* tables;
      std::optional<double> epsilon;
    };
    std::vector<Condition> conditions;
    conditions.push_back(
        {std::string(kConditionConfidential), &conf, std::nullopt});
    conditions.push_back(
        {std::string(kConditionSwapped), &swapped_tab, std::nullopt});
    for (std::size_t i = 0; i < releases.size(); ++i) {
      conditions.push_back(
          {releases[i].first, &releases[i].second.tables, epsilons[i]});
    }

    std::map<std::string, std::map<NameParts, std::vector<PosteriorRecord>>>
        posteriors;
    for (NameParts method : config.bisg.methods) {
      std::vector<PosteriorRecord> prior_records =
          PriorOnlyRecords(voters, nm, method);
      std::string name = std::string(kConditionNamesOnly) + "__" +
                         std::string(NamePartsName(method)) + ".csv";
      SavePosteriorsCsv(prior_records, out / "posteriors" / name);
      add_artifact(out / "posteriors" / name);
      posteriors[std::string(kConditionNamesOnly)][method] =
          std::move(prior_records);

      for (const Condition& cond : conditions) {
        BisgOptions options;
        options.parts = method;
        options.population = config.bisg.population;
        options.lambda = config.bisg.lambda;
        std::vector<PosteriorRecord> records =
            RunBisg(voters, nm, *cond.tables, options);
        std::string fname = cond.label + "__" +
                            std::string(NamePartsName(method)) + ".csv";
        SavePosteriorsCsv(records, out / "posteriors" / fname);
        add_artifact(out / "posteriors" / fname);
        posteriors[cond.label][method] = std::move(records);
      }
    }

    // risk reports, one per data condition
    stage = "risk";
    for (const Condition& cond : conditions) {
      std::vector<MethodPosteriors> method_posteriors;
      for (NameParts method : config.bisg.methods) {
        MethodPosteriors mp;
        mp.method = method;
        mp.without_data = posteriors.at(std::string(kConditionNamesOnly)).at(method);
        mp.with_data = posteriors.at(cond.label).at(method);
        method_posteriors.push_back(std::move(mp));
      }
      RiskReport report =
          BuildRiskReport(method_posteriors, cond.epsilon, cond.label);
      std::filesystem::path json_path =
          out / "reports" / ("risk_" + cond.label + ".json");
      SaveRiskReportJson(report, json_path);
      add_artifact(json_path);
      std::filesystem::path text_path =
          out / "reports" / ("risk_" + cond.label + ".txt");
      std::ofstream text(text_path);
      if (!text) {
        throw Error(ErrorKind::kFile, "cannot write " + text_path.string());
      }
      text << RenderRiskReportText(report);
      add_artifact(text_path);
    }

    // policy evaluation
    stage = "policy";
    std::vector<Plan> plans = GeneratePlans(
        md.geography, conf, config.policy.n_plans, config.policy.n_districts,
        config.policy.balance_tolerance, DeriveSeed(config.seed, "policy"));
    for (const Plan& plan : plans) {
      std::filesystem::path plan_path =
          out / "plans" / ("plan_" + std::to_string(plan.plan_id) + ".csv");
      SavePlanCsv(plan, plan_path);
      add_artifact(plan_path);
    }
    std::vector<LabeledTabulation> labeled;
    for (const Condition& cond : conditions) {
      labeled.push_back(LabeledTabulation{cond.label, cond.tables});
    }
    DeviationReport deviation =
        BuildDeviationReport(plans, labeled, config.policy.thresholds);
    SaveDeviationReportJson(deviation, out / "reports" / "deviation_report.json");
    add_artifact(out / "reports" / "deviation_report.json");
    SaveDeviationSummaryCsv(deviation,
                            out / "reports" / "deviation_summary.csv");
    add_artifact(out / "reports" / "deviation_summary.csv");

    manifest.status = "complete";
    manifest.finished_at = IsoTimestampUtc();
    SaveManifestJson(manifest, out / "manifest.json");
    return manifest;
  } catch (const std::exception& e) {
    // Keep the partial artifacts and mark the manifest incomplete.
    manifest.failed_stage = stage;
    manifest.error = e.what();
    manifest.finished_at = IsoTimestampUtc();
    SaveManifestJson(manifest, out / "manifest.json");
    const Error* err = dynamic_cast<const Error*>(&e);
    ErrorKind kind = err != nullptr ? err->kind() : ErrorKind::kContract;
    throw Error(kind, "pipeline stage \"" + stage + "\" failed: " +
                          std::string(e.what()));
  }
}

}  // namespace censim
