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

#ifndef CENSIM_ERRORS_H_
#define CENSIM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace censim {

enum class ErrorKind {
  kConfig,         // invalid configuration value; maps to CLI exit code 2
  kParse,          // malformed input file (message carries file and line)
  kIntegrity,      // loaded data violates a structural invariant
  kComparability,  // operands do not cover the same block set
  kUndefinedStat,  // statistic undefined on the given input (e.g. empty)
  kContract,       // caller violated a documented precondition
  kResource,       // request exceeds an enforced resource limit
  kGeneration,     // randomized search exhausted its retry budget
  kFile,           // missing, unreadable, or unwritable file
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Plan generation could not reach the requested balance tolerance within its
// retry budget; carries the best deviation seen so callers can report it.
class GenerationFailure : public Error {
 public:
  GenerationFailure(const std::string& message, double best_deviation)
      : Error(ErrorKind::kGeneration, message),
        best_deviation_(best_deviation) {}

  double best_deviation() const { return best_deviation_; }

 private:
  double best_deviation_;
};

}  // namespace censim

#endif  // CENSIM_ERRORS_H_
