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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "qmlbk/cli/cli.hpp"

namespace qmlbk::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = QMLBK_FIXTURE_DIR;

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("qmlbk_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int code = run_cli(args, o, e);
    return {code, o.str(), e.str()};
}

json load(const fs::path &p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"nosuch"}).code, kExitUsage);
    EXPECT_EQ(run({"parity", "--bogus", "1"}).code, kExitUsage);
    EXPECT_EQ(run({"parity", "--trials", "abc"}).code, kExitUsage);
    const fs::path dir = scratch("usage");
    EXPECT_EQ(run({"parity", "--d", "", "--out", dir.string()}).code, kExitUsage);
    EXPECT_EQ(run({"map", "--input", (kFixtures / "reuploading_d1.json").string(), "--kind", "magic",
                   "--out", dir.string()})
                  .code,
              kExitUsage);
    std::ofstream(dir / "cfg.json") << R"({"trials": 5, "colour": "red"})";
    const Outcome r = run({"parity", "--config", (dir / "cfg.json").string()});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("colour"), std::string::npos);
    std::ofstream(dir / "wrong.json") << R"({"trials": "many"})";
    EXPECT_EQ(run({"parity", "--config", (dir / "wrong.json").string()}).code, kExitUsage);
    EXPECT_EQ(run({"--version"}).code, kExitOk);
}

TEST(Cli, RuntimeErrorExitsOne) {
    const fs::path dir = scratch("runtime");
    EXPECT_EQ(run({"map", "--input", "/nonexistent/model.json", "--kind", "simple", "--out",
                   dir.string()})
                  .code,
              kExitFailure);
}

TEST(Cli, ConfigPrecedence) {
    const json file = {{"trials", 7}, {"seed", 3}};
    ::setenv("QMLBK_SEED", "11", 1);
    json cfg = resolve_config("parity", file, json::object());
    EXPECT_EQ(cfg["trials"], 7);
    EXPECT_EQ(cfg["seed"], 11);
    cfg = resolve_config("parity", file, {{"seed", 5}});
    EXPECT_EQ(cfg["seed"], 5);
    ::unsetenv("QMLBK_SEED");
    cfg = resolve_config("parity", file, json::object());
    EXPECT_EQ(cfg["seed"], 3);
    EXPECT_EQ(resolve_config("parity", json::object(), json::object())["delta"], 0.1);
    EXPECT_THROW(resolve_config("parity", {{"command", "map"}}, json::object()), UsageError);
}

TEST(Cli, MapNestedAndApprox) {
    const fs::path dir = scratch("map");
    const std::string input = (kFixtures / "reuploading_d1.json").string();
    Outcome r = run({"map", "--input", input, "--kind", "nested", "--out", (dir / "nested").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    json rep = load(dir / "nested" / "mapping_report.json");
    EXPECT_EQ(rep["repetitions"], 4);
    EXPECT_DOUBLE_EQ(rep["acceptance_probability"].get<double>(), 0.9375);
    EXPECT_TRUE(load(dir / "nested" / "verify_report.json")["pass"].get<bool>());
    for (const char *f : {"mapped_model.json", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir / "nested" / f));

    r = run({"map", "--input", input, "--kind", "approx", "--out", (dir / "approx").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    rep = load(dir / "approx" / "mapping_report.json");
    EXPECT_EQ(rep["precision_bits"], 5);
}

TEST(Cli, ParityDeterministicAndSeedOverride) {
    const fs::path dir = scratch("parity");
    auto go = [&](const std::string &sub, std::vector<std::string> extra) {
        std::vector<std::string> a{"parity", "--d", "4,6", "--trials", "20", "--out", (dir / sub).string()};
        a.insert(a.end(), extra.begin(), extra.end());
        const Outcome r = run(a);
        EXPECT_EQ(r.code, kExitOk) << r.err;
        return slurp(dir / sub / "separation.csv");
    };
    const std::string a = go("a", {"--seed", "4"}), b = go("b", {"--seed", "4", "--threads", "3"});
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "model,d,k,n,M,epsilon_avg,bound,learner_success_rate,samples_used");
    const json s = load(dir / "a" / "summary.json");
    EXPECT_TRUE(s["oracle_bounds_hold"].get<bool>());
    const json m = load(dir / "a" / "manifest.json");
    EXPECT_EQ(m["command"], "parity");
    EXPECT_EQ(m["seed"], 4);
    ::setenv("QMLBK_SEED", "9", 1);
    go("c", {});
    ::unsetenv("QMLBK_SEED");
    EXPECT_EQ(load(dir / "c" / "manifest.json")["seed"], 9);
}

TEST(Cli, SelftestFilterAndBrokenFixtures) {
    Outcome r = run({"selftest", "--filter", "mappings"});
    EXPECT_EQ(r.code, kExitOk) << r.out;
    std::istringstream lines(r.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line))
        if (line.rfind("PASS ", 0) == 0) {
            ++count;
            EXPECT_EQ(line.rfind("PASS mappings.", 0), 0u) << line;
        }
    EXPECT_GE(count, 3);

    const fs::path dir = scratch("fixtures");
    fs::copy(kFixtures, dir, fs::copy_options::recursive);
    std::ofstream(dir / "two_images.idx", std::ios::binary | std::ios::trunc) << "garbage";
    r = run({"selftest", "--filter", "data", "--fixture", dir.string()});
    EXPECT_EQ(r.code, kExitFailure);
    EXPECT_NE(r.out.find("FAIL data.idx_fixture_parses"), std::string::npos) << r.out;
}

TEST(Cli, InstalledToolExitCodes) {
    const std::string tool = QMLBK_TOOL;
    auto status = [&](const std::string &args) {
        const int s = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status("--version"), 0);
    EXPECT_EQ(status("parity --nonsense"), 2);
    EXPECT_EQ(status("selftest --filter simulator"), 0);
}

} // namespace
} // namespace qmlbk::cli
