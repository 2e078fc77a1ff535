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

#include "censim/errors.h"

namespace censim {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kParse:
      return "parse";
    case ErrorKind::kIntegrity:
      return "integrity";
    case ErrorKind::kComparability:
      return "comparability";
    case ErrorKind::kUndefinedStat:
      return "undefined-statistic";
    case ErrorKind::kContract:
      return "contract";
    case ErrorKind::kResource:
      return "resource";
    case ErrorKind::kGeneration:
      return "generation";
    case ErrorKind::kFile:
      return "file";
  }
  return "unknown";
}

}  // namespace censim
