// Copyright 2026 The ftlab Authors
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
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "ftlab/ftlab.hpp"

namespace {

using namespace ftlab;
using cli::execute;
using cli::Overrides;

std::string read_file(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

std::string config(const std::string &name) { return read_file(std::string(FTLAB_CONFIG_DIR) + "/" + name); }

json error_of(const cli::RunResult &r) { return json::parse(r.error); }

std::filesystem::path temp_dir() {
    auto d = std::filesystem::temp_directory_path() / ("ftlab_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
}

TEST(CliExecute, EverySampleConfigRuns) {
    for (const auto &entry : std::filesystem::directory_iterator(FTLAB_CONFIG_DIR)) {
        const std::string name = entry.path().filename().string();
        const auto r = execute("", read_file(entry.path().string()), {});
        if (name == "levelred_budget.json") {
            EXPECT_EQ(r.exit_code, cli::kRefused) << name;
            EXPECT_EQ(error_of(r)["code"], "cap_exceeded");
            EXPECT_TRUE(error_of(r).contains("suggestion"));
        } else {
            EXPECT_EQ(r.exit_code, cli::kOk) << name << ": " << r.error;
            const json rep = json::parse(r.report);
            EXPECT_EQ(rep["status"], "ok");
            EXPECT_EQ(rep["tool"]["name"], "ftlab");
        }
    }
}

TEST(CliExecute, MalformedJsonIsValidationError) {
    const auto r = execute("threshold", "{\"params\": ", {});
    EXPECT_EQ(r.exit_code, cli::kInvalid);
    EXPECT_EQ(error_of(r)["code"], "validation_error");
    EXPECT_EQ(error_of(r)["status"], "error");
    EXPECT_TRUE(r.report.empty());
}

TEST(CliExecute, UnknownKeysAreRejected) {
    const auto top = execute("threshold", R"({"params": {"L0": 5, "t": 1}, "extra": 1})", {});
    EXPECT_EQ(top.exit_code, cli::kInvalid);
    EXPECT_NE(error_of(top)["reason"].get<std::string>().find("extra"), std::string::npos);
    const auto inner = execute("threshold", R"({"params": {"L0": 5, "t": 1, "levls": 3}})", {});
    EXPECT_EQ(inner.exit_code, cli::kInvalid);
    EXPECT_NE(error_of(inner)["reason"].get<std::string>().find("levls"), std::string::npos);
}

TEST(CliExecute, CommandMismatchAndUnknownCommand) {
    EXPECT_EQ(execute("levelred", R"({"command": "threshold", "params": {"L0": 5, "t": 1}})", {}).exit_code, cli::kInvalid);
    EXPECT_EQ(execute("", R"({"command": "frobnicate"})", {}).exit_code, cli::kInvalid);
}

TEST(CliExecute, SamplingWithoutSeedIsRejected) {
    const std::string cfg = R"({"params": {"L0": 5, "t": 1, "eps": 0.01, "levels": 2, "samples": 1000}})";
    const auto r = execute("levelred", cfg, {});
    EXPECT_EQ(r.exit_code, cli::kInvalid);
    EXPECT_NE(error_of(r)["reason"].get<std::string>().find("seed"), std::string::npos);
    Overrides ov;
    ov.seed = 4;
    EXPECT_EQ(execute("levelred", cfg, ov).exit_code, cli::kOk);
}

TEST(CliExecute, BudgetOverrunIsRefused) {
    const auto r = execute("", config("levelred_budget.json"), {});
    EXPECT_EQ(r.exit_code, cli::kRefused);
}

TEST(CliExecute, QubitCapIsRefused) {
    const auto r = execute("accuracy", R"({"params": {"circuit": {"n_system": 13, "locations": []}}})", {});
    EXPECT_EQ(r.exit_code, cli::kRefused);
}

TEST(CliExecute, InvalidCircuitListsViolations) {
    const std::string cfg = R"({"params": {"circuit": {"n_system": 1, "locations": [
        {"step": 0, "kind": "gate", "support": [3], "gate": "X"}]}}})";
    const auto r = execute("accuracy", cfg, {});
    EXPECT_EQ(r.exit_code, cli::kInvalid);
    EXPECT_NE(error_of(r)["reason"].get<std::string>().find("location 0"), std::string::npos);
}

TEST(CliExecute, NonLocalNoiseIsRejected) {
    const std::string cfg = R"({"params": {"circuit": {"n_system": 2, "locations": [
        {"step": 0, "kind": "gate", "support": [0], "gate": "X"}]},
        "noise": [{"location": 0, "support": [1], "model": {"kind": "depolarizing", "p": 0.1}}]}})";
    const auto r = execute("accuracy", cfg, {});
    EXPECT_EQ(r.exit_code, cli::kInvalid);
    EXPECT_NE(error_of(r)["reason"].get<std::string>().find("non-local"), std::string::npos);
}

TEST(CliExecute, AboveThresholdReportsNoRequiredLevel) {
    const auto r = execute("threshold", R"({"params": {"L0": 100, "t": 1, "eps": 0.5, "pseudothreshold": "none"}})", {});
    EXPECT_EQ(r.exit_code, cli::kOk) << r.error;
    const json rep = json::parse(r.report);
    EXPECT_FALSE(rep["results"]["below_threshold"].get<bool>());
    EXPECT_TRUE(!rep["results"].contains("k_required") || rep["results"]["k_required"].is_null());
}

TEST(CliReport, ThresholdValuesAndResolvedDefaults) {
    const auto r = execute("", config("threshold.json"), {});
    ASSERT_EQ(r.exit_code, cli::kOk) << r.error;
    const json rep = json::parse(r.report);
    const double eps0 = rep["results"]["eps0"].get<double>();
    EXPECT_NEAR(eps0, 7.431e-5, 1e-8);
    EXPECT_DOUBLE_EQ(eps0, 1.0 / (std::numbers::e * 4950.0));
    EXPECT_EQ(rep["results"]["k_required"], 4);
    EXPECT_EQ(rep["config"]["output"]["format"], "json");
    EXPECT_TRUE(rep["config"]["seed"].is_null());
    EXPECT_EQ(rep["records"].size(), 6u);
}

TEST(CliReport, DefaultsAreRecorded) {
    const auto r = execute("threshold", R"({"params": {"L0": 7, "t": 1, "pseudothreshold": "none"}})", {});
    ASSERT_EQ(r.exit_code, cli::kOk) << r.error;
    const json p = json::parse(r.report)["config"]["params"];
    EXPECT_DOUBLE_EQ(p["xi"].get<double>(), std::numbers::e);
    EXPECT_EQ(p["levels"], 5);
    EXPECT_DOUBLE_EQ(p["delta0"].get<double>(), 1e-3);
}

TEST(CliReport, KeysAreSortedAndLinesEndInLf) {
    const auto r = execute("", config("strength.json"), {});
    ASSERT_EQ(r.exit_code, cli::kOk) << r.error;
    EXPECT_EQ(r.report.find('\r'), std::string::npos);
    ASSERT_FALSE(r.report.empty());
    EXPECT_EQ(r.report.back(), '\n');
    const json rep = json::parse(r.report);
    std::string prev;
    for (const auto &[k, _] : rep.items()) {
        EXPECT_LT(prev, k);
        prev = k;
    }
    EXPECT_EQ(r.report, io::to_json_text(rep));
}

TEST(CliReport, FloatsRoundTrip) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-30, 30);
    for (int i = 0; i < 2000; ++i) {
        const double d = std::ldexp(u(rng), static_cast<int>(u(rng) * 10));
        const std::string s = io::format_double(d);
        EXPECT_EQ(json::parse(s).get<double>(), d) << s;
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), d) << s;
    }
    EXPECT_EQ(io::format_double(1.0), "1.0");
    EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(io::format_double(std::nan("")), "null");
}

TEST(CliCsv, HeaderOnlyWhenNoRows) {
    Overrides ov;
    ov.format = "csv";
    const auto r = execute("threshold", R"({"params": {"L0": 5, "t": 1, "pseudothreshold": "none"}})", ov);
    ASSERT_EQ(r.exit_code, cli::kOk) << r.error;
    EXPECT_EQ(r.report, "level,strength\n");
}

TEST(CliCsv, RowsAndListCells) {
    Overrides ov;
    ov.format = "csv";
    const auto r = execute("", config("threshold.json"), ov);
    ASSERT_EQ(r.exit_code, cli::kOk) << r.error;
    EXPECT_EQ(r.report.rfind("level,strength\n0,3.0000000000000001e-05\n", 0), 0u);
    EXPECT_EQ(r.report.find('\r'), std::string::npos);
    const std::string text = io::to_csv_text({"a", "b"}, json::array({{{"a", json::array({1, 2.5, "x"})}, {"b", true}}}));
    EXPECT_EQ(text, "a,b\n1;2.5;x,true\n");
}

TEST(CliDeterminism, RepeatedRunsAndWorkerCountsAgree) {
    for (const char *name : {"levelred.json", "truncate_sampled.json", "threshold_sampled.json"}) {
        const std::string cfg = config(name);
        Overrides one;
        Overrides many;
        many.workers = 8;
        const auto a = execute("", cfg, one);
        const auto b = execute("", cfg, one);
        const auto c = execute("", cfg, many);
        ASSERT_EQ(a.exit_code, cli::kOk) << name << a.error;
        EXPECT_EQ(a.report, b.report) << name;
        EXPECT_EQ(a.report, c.report) << name;
    }
}

TEST(CliDeterminism, SeedOverrideChangesSampledOutput) {
    const std::string cfg = config("levelred.json");
    Overrides ov;
    ov.seed = 99;
    const auto a = execute("", cfg, {});
    const auto b = execute("", cfg, ov);
    ASSERT_EQ(b.exit_code, cli::kOk);
    EXPECT_NE(a.report, b.report);
    EXPECT_EQ(json::parse(b.report)["config"]["seed"], 99);
}

TEST(CliRun, WritesReportAtomically) {
    const auto dir = temp_dir();
    const auto cfg_path = dir / "cfg.json";
    const auto out_path = dir / "report.csv";
    {
        std::ofstream(cfg_path) << config("threshold.json");
    }
    Overrides ov;
    ov.out = out_path.string();
    ov.format = "csv";
    std::ostringstream out;
    std::ostringstream err;
    EXPECT_EQ(cli::run("threshold", cfg_path.string(), ov, out, err), cli::kOk);
    EXPECT_TRUE(out.str().empty());
    EXPECT_TRUE(err.str().empty());
    EXPECT_EQ(read_file(out_path.string()), execute("", config("threshold.json"), ov).report);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto &e : std::filesystem::directory_iterator(dir)) {
        ++files;
    }
    EXPECT_EQ(files, 2u);
    std::filesystem::remove_all(dir);
}

TEST(CliRun, MissingConfigFileIsValidationError) {
    std::ostringstream out;
    std::ostringstream err;
    EXPECT_EQ(cli::run("threshold", "/nonexistent/ftlab.json", {}, out, err), cli::kInvalid);
    EXPECT_EQ(json::parse(err.str())["code"], "validation_error");
}

int run_binary(const std::string &args, const std::string &capture) {
    const std::string cmd = std::string(FTLAB_CLI_PATH) + " " + args + " >" + capture + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliBinary, ExitCodes) {
    const auto dir = temp_dir();
    const std::string log = (dir / "log.txt").string();
    const std::string cfgs = FTLAB_CONFIG_DIR;
    EXPECT_EQ(run_binary("threshold --config " + cfgs + "/threshold.json", log), 0);
    EXPECT_EQ(json::parse(read_file(log))["status"], "ok");
    EXPECT_EQ(run_binary("levelred --config " + cfgs + "/levelred_budget.json", log), 3);
    EXPECT_EQ(json::parse(read_file(log))["code"], "cap_exceeded");
    EXPECT_EQ(run_binary("levelred --config " + cfgs + "/threshold.json", log), 2);
    EXPECT_EQ(run_binary("threshold", log), 2);
    EXPECT_EQ(run_binary("threshold --config " + cfgs + "/threshold.json --format xml", log), 2);
    EXPECT_EQ(run_binary("--version", log), 0);
    EXPECT_NE(read_file(log).find(cli::kVersion), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(CliBinary, OutputMatchesLibrary) {
    const auto dir = temp_dir();
    const auto out = dir / "r.json";
    const std::string cfgs = FTLAB_CONFIG_DIR;
    EXPECT_EQ(run_binary("truncate --config " + cfgs + "/truncate_example.json --out " + out.string(),
                         (dir / "log.txt").string()),
              0);
    Overrides ov;
    ov.out = out.string();
    EXPECT_EQ(read_file(out.string()), execute("", config("truncate_example.json"), ov).report);
    std::filesystem::remove_all(dir);
}

}  // namespace
