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

#ifndef CENSIM_VERSION_H_
#define CENSIM_VERSION_H_

#include <string_view>

namespace censim {

inline constexpr std::string_view kCensimVersion = "1.0.0";

// Mechanism version strings recorded in provenance sidecars and manifests.
// Bump whenever a change alters the bytes a fixed (config, seed) produces.
inline constexpr std::string_view kDpMechanismVersion = "topdown-lite-geometric/1";
inline constexpr std::string_view kSwapMechanismVersion = "household-swap/1";
inline constexpr std::string_view kGeneratorVersion = "synth-pop/1";

}  // namespace censim

#endif  // CENSIM_VERSION_H_
