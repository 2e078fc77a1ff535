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

#include "censim/io.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "censim/errors.h"
#include "internal_csv.h"

namespace censim {

namespace {

using internal::CsvReader;
using internal::CsvWriter;
using nlohmann::json;

constexpr std::string_view kHouseholdsHeader =
    "household_id,block_id,n_adults,n_children";
constexpr std::string_view kPersonsHeader =
    "person_id,household_id,race,is_adult,surname_id,first_name_id,"
    "middle_name_id";
constexpr std::string_view kVoterHeader =
    "person_id,block_id,surname_id,first_name_id,middle_name_id,true_race";

json LoadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kFile, "cannot open " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return doc;
}

void WriteJsonFile(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::kFile, "cannot write " + path.string());
  }
  out << doc.dump(2) << '\n';
}

RaceCategory RaceFieldOrFail(const CsvReader& reader, std::size_t col) {
  std::int64_t encoding = reader.IntField(col);
  auto race = RaceFromEncoding(encoding);
  if (!race.has_value()) {
    reader.Fail("race encoding out of range: " + std::to_string(encoding));
  }
  return *race;
}

std::vector<double> ProbabilityRowFromJson(const json& arr,
                                           const std::string& what) {
  if (!arr.is_array()) {
    throw Error(ErrorKind::kParse, what + ": expected an array");
  }
  std::vector<double> row;
  row.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) {
      throw Error(ErrorKind::kParse, what + ": expected numbers");
    }
    row.push_back(v.get<double>());
  }
  return row;
}

}  // namespace

void SaveMicrodata(const Microdata& md, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / kHouseholdsCsv, kHouseholdsHeader);
    for (const Household& h : md.households) {
      w.BeginRow();
      w.Add(h.household_id);
      w.Add(h.block_id);
      w.Add(static_cast<std::int64_t>(h.n_adults));
      w.Add(static_cast<std::int64_t>(h.n_children));
      w.EndRow();
    }
  }
  {
    CsvWriter w(dir / kPersonsCsv, kPersonsHeader);
    for (const Person& p : md.persons) {
      w.BeginRow();
      w.Add(p.person_id);
      w.Add(p.household_id);
      w.Add(static_cast<std::int64_t>(p.race));
      w.Add(static_cast<std::int64_t>(p.is_adult ? 1 : 0));
      w.Add(static_cast<std::int64_t>(p.surname_id));
      w.Add(static_cast<std::int64_t>(p.first_name_id));
      if (p.middle_name_id.has_value()) {
        w.Add(static_cast<std::int64_t>(*p.middle_name_id));
      } else {
        w.Add(std::string_view(""));
      }
      w.EndRow();
    }
  }
  SaveGeographyJson(md.geography, dir / kGeographyJson);
}

Microdata LoadMicrodata(const std::filesystem::path& dir) {
  Microdata md;
  md.geography = LoadGeographyJson(dir / kGeographyJson);
  {
    CsvReader r(dir / kHouseholdsCsv, kHouseholdsHeader);
    while (r.ReadRow()) {
      Household h;
      h.household_id = r.IntField(0);
      h.block_id = r.IntField(1);
      h.n_adults = static_cast<std::int32_t>(r.IntField(2));
      h.n_children = static_cast<std::int32_t>(r.IntField(3));
      md.households.push_back(h);
    }
  }
  {
    CsvReader r(dir / kPersonsCsv, kPersonsHeader);
    while (r.ReadRow()) {
      Person p;
      p.person_id = r.IntField(0);
      p.household_id = r.IntField(1);
      p.race = RaceFieldOrFail(r, 2);
      std::int64_t adult = r.IntField(3);
      if (adult != 0 && adult != 1) {
        r.Fail("is_adult must be 0 or 1");
      }
      p.is_adult = adult == 1;
      p.surname_id = static_cast<std::int32_t>(r.IntField(4));
      p.first_name_id = static_cast<std::int32_t>(r.IntField(5));
      auto middle = r.OptionalIntField(6);
      if (middle.has_value()) {
        p.middle_name_id = static_cast<std::int32_t>(*middle);
      }
      md.persons.push_back(p);
    }
  }
  ValidateMicrodata(md);
  return md;
}

void SaveGeographyJson(const Geography& geo, const std::filesystem::path& path) {
  json blocks = json::array();
  for (const BlockGeo& b : geo.blocks) {
    blocks.push_back(json{{"block_id", b.block_id},
                          {"tract_id", b.tract_id},
                          {"county_id", b.county_id},
                          {"state_id", b.state_id}});
  }
  WriteJsonFile(json{{"blocks", blocks}}, path);
}

Geography LoadGeographyJson(const std::filesystem::path& path) {
  json doc = LoadJsonFile(path);
  if (!doc.contains("blocks") || !doc["blocks"].is_array()) {
    throw Error(ErrorKind::kParse, path.string() + ": missing \"blocks\" array");
  }
  Geography geo;
  for (const auto& b : doc["blocks"]) {
    for (const char* key : {"block_id", "tract_id", "county_id", "state_id"}) {
      if (!b.contains(key) || !b[key].is_number_integer()) {
        throw Error(ErrorKind::kParse,
                    path.string() + ": block entry missing integer \"" +
                        std::string(key) + "\"");
      }
    }
    geo.blocks.push_back(BlockGeo{b["block_id"].get<std::int64_t>(),
                                  b["tract_id"].get<std::int64_t>(),
                                  b["county_id"].get<std::int64_t>(),
                                  b["state_id"].get<std::int64_t>()});
  }
  geo.Validate();
  return geo;
}

void SaveNameModelJson(const NameModel& nm, const std::filesystem::path& path) {
  auto table_to_json = [](const std::array<std::vector<double>, kNumRaces>& t) {
    json rows = json::array();
    for (const auto& row : t) rows.push_back(row);
    return rows;
  };
  json doc{
      {"races", json::array({"white", "black", "hispanic", "asian", "other"})},
      {"national_race_prior", nm.national_race_prior},
      {"surname_given_race", table_to_json(nm.surname_given_race)},
      {"first_given_race", table_to_json(nm.first_given_race)},
      {"middle_given_race", table_to_json(nm.middle_given_race)},
  };
  WriteJsonFile(doc, path);
}

NameModel LoadNameModelJson(const std::filesystem::path& path) {
  json doc = LoadJsonFile(path);
  NameModel nm;
  auto table_from_json = [&](const char* key,
                             std::array<std::vector<double>, kNumRaces>& out) {
    if (!doc.contains(key) || !doc[key].is_array() ||
        doc[key].size() != kNumRaces) {
      throw Error(ErrorKind::kParse, path.string() + ": \"" + key +
                                         "\" must be an array of " +
                                         std::to_string(kNumRaces) + " rows");
    }
    for (int r = 0; r < kNumRaces; ++r) {
      out[r] = ProbabilityRowFromJson(doc[key][r], path.string() + ": " + key);
    }
  };
  table_from_json("surname_given_race", nm.surname_given_race);
  table_from_json("first_given_race", nm.first_given_race);
  table_from_json("middle_given_race", nm.middle_given_race);
  std::vector<double> prior = ProbabilityRowFromJson(
      doc.value("national_race_prior", json::array()),
      path.string() + ": national_race_prior");
  if (prior.size() != kNumRaces) {
    throw Error(ErrorKind::kParse,
                path.string() + ": national_race_prior must have " +
                    std::to_string(kNumRaces) + " entries");
  }
  for (int r = 0; r < kNumRaces; ++r) nm.national_race_prior[r] = prior[r];
  try {
    nm.Validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kIntegrity, path.string() + ": " + e.what());
  }
  return nm;
}

void SaveVoterFileCsv(const VoterFile& vf, const std::filesystem::path& path) {
  CsvWriter w(path, kVoterHeader);
  for (const VoterRecord& v : vf) {
    w.BeginRow();
    w.Add(v.person_id);
    w.Add(v.block_id);
    w.Add(static_cast<std::int64_t>(v.surname_id));
    w.Add(static_cast<std::int64_t>(v.first_name_id));
    if (v.middle_name_id.has_value()) {
      w.Add(static_cast<std::int64_t>(*v.middle_name_id));
    } else {
      w.Add(std::string_view(""));
    }
    w.Add(static_cast<std::int64_t>(v.true_race));
    w.EndRow();
  }
}

VoterFile LoadVoterFileCsv(const std::filesystem::path& path) {
  CsvReader r(path, kVoterHeader);
  VoterFile vf;
  while (r.ReadRow()) {
    VoterRecord v;
    v.person_id = r.IntField(0);
    v.block_id = r.IntField(1);
    v.surname_id = static_cast<std::int32_t>(r.IntField(2));
    v.first_name_id = static_cast<std::int32_t>(r.IntField(3));
    auto middle = r.OptionalIntField(4);
    if (middle.has_value()) {
      v.middle_name_id = static_cast<std::int32_t>(*middle);
    }
    v.true_race = RaceFieldOrFail(r, 5);
    vf.push_back(v);
  }
  return vf;
}

}  // namespace censim
