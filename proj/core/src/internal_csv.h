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

#ifndef CENSIM_SRC_INTERNAL_CSV_H_
#define CENSIM_SRC_INTERNAL_CSV_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace censim::internal {

// Strict comma-separated reader for the numeric file formats: no quoting,
// fixed column count taken from the expected header, parse failures raised
// as Error(kParse) with file, line, and column.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, std::string_view expected_header);

  // Advances to the next data row; false at end of file.
  bool ReadRow();

  std::size_t columns() const { return fields_.size(); }
  std::string_view Field(std::size_t col) const;
  std::int64_t IntField(std::size_t col) const;
  double DoubleField(std::size_t col) const;
  // Empty field -> nullopt.
  std::optional<std::int64_t> OptionalIntField(std::size_t col) const;

  int line() const { return line_; }
  [[noreturn]] void Fail(const std::string& why) const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string row_;
  std::vector<std::string> fields_;
  std::size_t expected_columns_ = 0;
  int line_ = 0;
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view header);

  void BeginRow();
  void Add(std::int64_t value);
  void Add(std::string_view value);
  void AddProbability(double value);  // scientific, 17 significant digits
  void AddOptional(const std::optional<std::int64_t>& value);
  void EndRow();

 private:
  std::ofstream out_;
  bool first_in_row_ = true;
};

// Shortest decimal representation that round-trips the double exactly.
std::string FormatDouble(double value);
// Scientific notation with 16 digits after the point (17 significant).
std::string FormatProbability(double value);

}  // namespace censim::internal

#endif  // CENSIM_SRC_INTERNAL_CSV_H_
