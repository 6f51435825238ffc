// Copyright 2026 The qmlbk Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmlbk {

/// Raised when a computation would exceed the desk-scale resource budget
/// (qubit count, enumeration size, ...).
class BudgetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised by file parsers. Carries the byte offset where parsing failed.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " +
                             std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

/// Raised when a JSON document does not match the expected schema. The
/// message starts with the JSON path of the offending value.
class SchemaError : public std::invalid_argument {
  public:
    SchemaError(const std::string &path, const std::string &what)
        : std::invalid_argument(path + ": " + what), path_(path) {}

    const std::string &path() const noexcept { return path_; }

  private:
    std::string path_;
};

/// Raised when an optimizer run blows up.
class DivergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace qmlbk
