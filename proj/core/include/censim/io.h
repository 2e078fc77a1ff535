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

#ifndef CENSIM_IO_H_
#define CENSIM_IO_H_

#include <filesystem>

#include "censim/types.h"

namespace censim {

// Microdata persists as households.csv + persons.csv + geography.json in a
// directory. Loading validates all structural invariants (integrity errors)
// and reports malformed rows as parse errors with file and line.

inline constexpr std::string_view kHouseholdsCsv = "households.csv";
inline constexpr std::string_view kPersonsCsv = "persons.csv";
inline constexpr std::string_view kGeographyJson = "geography.json";

void SaveMicrodata(const Microdata& md, const std::filesystem::path& dir);
Microdata LoadMicrodata(const std::filesystem::path& dir);

void SaveGeographyJson(const Geography& geo, const std::filesystem::path& path);
Geography LoadGeographyJson(const std::filesystem::path& path);

void SaveNameModelJson(const NameModel& nm, const std::filesystem::path& path);
NameModel LoadNameModelJson(const std::filesystem::path& path);

void SaveVoterFileCsv(const VoterFile& vf, const std::filesystem::path& path);
VoterFile LoadVoterFileCsv(const std::filesystem::path& path);

}  // namespace censim

#endif  // CENSIM_IO_H_
