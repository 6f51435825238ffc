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

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmlbk/models/serialize.hpp"

namespace qmlbk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, bad config keys or values. Maps to exit code 2.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Entry point shared by the qmlbk tool and the tests. args excludes the
/// program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Config resolution: defaults, then the --config file, then QMLBK_SEED,
/// then explicit flags. Returns the merged config for `command`.
json resolve_config(const std::string &command, const json &file_config,
                    const json &flag_overrides);

int cmd_map(const json &cfg, std::ostream &out);
int cmd_parity(const json &cfg, std::ostream &out);
int cmd_regression(const json &cfg, std::ostream &out);
int cmd_selftest(const json &cfg, std::ostream &out);

struct SelftestResult {
    std::string module;
    std::string property;
    bool pass = false;
    std::string detail;
};

/// Runs the invariant suite. `filter` selects a module ("" for all).
std::vector<SelftestResult> run_selftest(const std::string &filter,
                                         const std::filesystem::path &fixture_dir);

/// Directory holding the bundled fixtures.
std::filesystem::path default_fixture_dir();

} // namespace qmlbk::cli
