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

// End-to-end checks of the censim binary: exit codes, stage isolation, and
// report reproducibility. argv[1] = censim binary, argv[2] = configs dir.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "censim/io.h"
#include "censim/tabulate.h"

namespace {

namespace fs = std::filesystem;

int g_failures = 0;

void Expect(bool condition, const std::string& what) {
  if (!condition) {
    std::fprintf(stderr, "FAIL: %s\n", what.c_str());
    ++g_failures;
  }
}

int Run(const std::string& command) {
  int status = std::system((command + " >/dev/null 2>&1").c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <censim-binary> <configs-dir>\n", argv[0]);
    return 2;
  }
  const std::string censim_bin = argv[1];
  const fs::path configs = argv[2];
  const fs::path scratch =
      fs::temp_directory_path() / ("censim_e2e_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::string config = (configs / "reference.json").string();

  // Full pipeline, twice: success and byte-identical reports.
  Expect(Run(censim_bin + " run --config " + config + " --out " +
             (scratch / "run1").string()) == 0,
         "pipeline run exits 0");
  Expect(Run(censim_bin + " run --config " + config + " --out " +
             (scratch / "run2").string()) == 0,
         "second pipeline run exits 0");
  Expect(fs::exists(scratch / "run1" / "manifest.json"), "manifest written");
  for (const char* report :
       {"reports/risk_dp_eps_19.61.json", "reports/deviation_report.json"}) {
    Expect(ReadFileBytes(scratch / "run1" / report) ==
               ReadFileBytes(scratch / "run2" / report),
           std::string("byte-identical report: ") + report);
  }

  // A config failing validation exits 2 before any stage runs.
  {
    std::ofstream bad(scratch / "bad.json");
    bad << "{\"dp\": {\"epsilon\": 0.0}}";
  }
  Expect(Run(censim_bin + " run --config " + (scratch / "bad.json").string() +
             " --out " + (scratch / "bad_out").string()) == 2,
         "invalid config exits 2");
  Expect(!fs::exists(scratch / "bad_out" / "manifest.json"),
         "no stage ran on invalid config");
  Expect(Run(censim_bin + " run --config " + (scratch / "nope.json").string() +
             " --out " + (scratch / "x").string()) == 3,
         "missing config file exits 3");

  // Stage isolation: generate, tabulate, swap, tabulate again; block totals
  // must agree exactly.
  const fs::path md_dir = scratch / "md";
  const fs::path swapped_dir = scratch / "swapped";
  Expect(Run(censim_bin + " generate --config " + config + " --out " +
             md_dir.string()) == 0,
         "generate exits 0");
  Expect(Run(censim_bin + " tabulate --microdata " + md_dir.string() +
             " --out " + (scratch / "conf.csv").string()) == 0,
         "tabulate exits 0");
  Expect(Run(censim_bin + " swap --microdata " + md_dir.string() + " --out " +
             swapped_dir.string() + " --rate 0.25 --seed 5") == 0,
         "swap exits 0");
  Expect(Run(censim_bin + " tabulate --microdata " + swapped_dir.string() +
             " --out " + (scratch / "swapped.csv").string()) == 0,
         "tabulate of swapped microdata exits 0");
  {
    censim::Geography geo =
        censim::LoadGeographyJson(md_dir / censim::kGeographyJson);
    censim::TabulationSet conf =
        censim::LoadTabulationCsv(scratch / "conf.csv", geo);
    censim::TabulationSet swapped =
        censim::LoadTabulationCsv(scratch / "swapped.csv", geo);
    censim::DistanceReport distance = censim::TableDistance(conf, swapped);
    Expect(distance.total_population_l1 == 0 && distance.vap_l1 == 0,
           "swap preserves per-block totals through the CLI");
  }

  // dpnoise at a huge budget reproduces the confidential tables exactly.
  Expect(Run(censim_bin + " dpnoise --tables " + (scratch / "conf.csv").string() +
             " --geography " + (md_dir / "geography.json").string() +
             " --epsilon 1e6 --seed 1 --out " +
             (scratch / "noised.csv").string()) == 0,
         "dpnoise exits 0");
  Expect(ReadFileBytes(scratch / "conf.csv") ==
             ReadFileBytes(scratch / "noised.csv"),
         "huge epsilon reproduces the tables byte for byte");

  // bisg and risk over the isolated artifacts.
  Expect(Run(censim_bin + " bisg --voters " +
             (md_dir / "voter_file.csv").string() + " --name-model " +
             (md_dir / "name_model.json").string() + " --tables " +
             (scratch / "noised.csv").string() + " --geography " +
             (md_dir / "geography.json").string() + " --parts last --out " +
             (scratch / "post_with.csv").string()) == 0,
         "bisg exits 0");
  Expect(Run(censim_bin + " report --posteriors " +
             (scratch / "post_with.csv").string()) == 0,
         "report over a real posterior CSV exits 0");

  // report over an empty posterior CSV is an undefined statistic (exit 3).
  {
    std::ofstream empty(scratch / "empty.csv");
    empty << "person_id,flagged,prior_white,prior_black,prior_hispanic,"
             "prior_asian,prior_other,posterior_white,posterior_black,"
             "posterior_hispanic,posterior_asian,posterior_other,map_race,"
             "true_race\n";
  }
  Expect(Run(censim_bin + " report --posteriors " +
             (scratch / "empty.csv").string()) == 3,
         "report over an empty posterior CSV exits 3");

  // Missing input files are named-file errors (exit 3).
  Expect(Run(censim_bin + " tabulate --microdata " +
             (scratch / "missing").string() + " --out " +
             (scratch / "y.csv").string()) == 3,
         "missing microdata exits 3");

  // Unknown flags are configuration errors (exit 2).
  Expect(Run(censim_bin + " run --config " + config + " --frobnicate") == 2,
         "unknown flag exits 2");

  fs::remove_all(scratch);
  if (g_failures == 0) {
    std::printf("cli e2e: all checks passed\n");
    return 0;
  }
  std::printf("cli e2e: %d checks failed\n", g_failures);
  return 1;
}
