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

#include "internal_csv.h"

#include <charconv>
#include <cstdio>
#include <system_error>

#include "censim/errors.h"

namespace censim::internal {

namespace {

std::vector<std::string> SplitFields(const std::string& row) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = row.find(',', start);
    if (comma == std::string::npos) {
      fields.emplace_back(row.substr(start));
      return fields;
    }
    fields.emplace_back(row.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

CsvReader::CsvReader(const std::filesystem::path& path,
                     std::string_view expected_header)
    : path_(path), in_(path) {
  if (!in_) {
    throw Error(ErrorKind::kFile, "cannot open " + path.string());
  }
  if (!std::getline(in_, row_)) {
    throw Error(ErrorKind::kParse, path.string() + ":1: missing header row");
  }
  if (!row_.empty() && row_.back() == '\r') row_.pop_back();
  line_ = 1;
  if (row_ != expected_header) {
    Fail("unexpected header, want \"" + std::string(expected_header) + "\"");
  }
  expected_columns_ = SplitFields(row_).size();
}

bool CsvReader::ReadRow() {
  if (!std::getline(in_, row_)) return false;
  if (!row_.empty() && row_.back() == '\r') row_.pop_back();
  ++line_;
  fields_ = SplitFields(row_);
  if (fields_.size() != expected_columns_) {
    Fail("expected " + std::to_string(expected_columns_) + " columns, got " +
         std::to_string(fields_.size()));
  }
  return true;
}

std::string_view CsvReader::Field(std::size_t col) const {
  if (col >= fields_.size()) Fail("column " + std::to_string(col) + " out of range");
  return fields_[col];
}

std::int64_t CsvReader::IntField(std::size_t col) const {
  std::string_view f = Field(col);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    Fail("column " + std::to_string(col) + ": not an integer: \"" +
         std::string(f) + "\"");
  }
  return value;
}

double CsvReader::DoubleField(std::size_t col) const {
  std::string_view f = Field(col);
  double value = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    Fail("column " + std::to_string(col) + ": not a number: \"" +
         std::string(f) + "\"");
  }
  return value;
}

std::optional<std::int64_t> CsvReader::OptionalIntField(std::size_t col) const {
  if (Field(col).empty()) return std::nullopt;
  return IntField(col);
}

void CsvReader::Fail(const std::string& why) const {
  throw Error(ErrorKind::kParse,
              path_.string() + ":" + std::to_string(line_) + ": " + why);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view header)
    : out_(path) {
  if (!out_) {
    throw Error(ErrorKind::kFile, "cannot write " + path.string());
  }
  out_ << header << '\n';
}

void CsvWriter::BeginRow() { first_in_row_ = true; }

void CsvWriter::Add(std::int64_t value) {
  if (!first_in_row_) out_ << ',';
  first_in_row_ = false;
  out_ << value;
}

void CsvWriter::Add(std::string_view value) {
  if (!first_in_row_) out_ << ',';
  first_in_row_ = false;
  out_ << value;
}

void CsvWriter::AddProbability(double value) {
  Add(std::string_view(FormatProbability(value)));
}

void CsvWriter::AddOptional(const std::optional<std::int64_t>& value) {
  if (value.has_value()) {
    Add(*value);
  } else {
    Add(std::string_view(""));
  }
}

void CsvWriter::EndRow() { out_ << '\n'; }

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string FormatProbability(double value) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 16);
  return std::string(buf, ptr);
}

}  // namespace censim::internal
