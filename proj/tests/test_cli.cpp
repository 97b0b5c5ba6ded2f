// SPDX-License-Identifier: Apache-2.0
//
// iafb - interference alignment with limited feedback, link-level simulator
// Copyright (C) 2026 The iafb authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "iafb/errors.hpp"
#include "iafb/experiment.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace iafb;
namespace fs = std::filesystem;

namespace
{
    struct Run
    {
        int code;
        std::string out, err;
    };

    Run cli(std::vector<std::string> args)
    {
        args.insert(args.begin(), "iafb");
        std::vector<const char *> argv;
        for (const auto &a : args)
            argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return {code, out.str(), err.str()};
    }

    fs::path scratch(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / ("iafb_test_cli_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }

    fs::path write_config(const fs::path &dir, const std::string &text)
    {
        const fs::path path = dir / "config.json";
        std::ofstream(path) << text;
        return path;
    }

    std::string slurp(const fs::path &path)
    {
        std::ifstream is(path, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }
}

TEST_CASE("config parsing")
{
    const ExperimentConfig cfg = config_from_json(nlohmann::json::parse(R"j({
        "M": 3, "L": 2, "t": 1, "P_dB": 30, "seed": 9, "mode": "fixed(4)",
        "P_grid_dB": {"start": 10, "stop": 40, "step": 10}, "trials": 7, "output": "o", "codebook_dir": "c"})j"));
    CHECK(cfg.params.seed == 9);
    CHECK_THAT(cfg.params.P, Catch::Matchers::WithinRel(1000.0, 1e-12));
    CHECK(cfg.mode == FeedbackMode::fixed(4));
    REQUIRE(cfg.P_grid.size() == 4);
    CHECK_THAT(cfg.P_grid[3], Catch::Matchers::WithinRel(1e4, 1e-12));
    CHECK(cfg.trials == 7);
    CHECK(cfg.output == "o");
    CHECK(cfg.codebook_dir == "c");

    const ExperimentConfig list = config_from_json(nlohmann::json::parse(R"({"P_grid_dB": [0, 20]})"));
    REQUIRE(list.P_grid.size() == 2);
    CHECK_THAT(list.P_grid[1], Catch::Matchers::WithinRel(100.0, 1e-12));

    const ExperimentConfig defaults = config_from_json(nlohmann::json::object());
    CHECK(defaults.P_grid.size() == 7);
    CHECK(defaults.params.M == 3);
    CHECK(defaults.params.L == 2);
    CHECK(defaults.params.t == 1);

    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"Pgrid": [1]})")), ParameterError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"P": 1, "P_dB": 0})")), ParameterError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"mode": "sometimes"})")), ParameterError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"M": "three"})")), ParameterError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seed": -3})")), ParameterError);

    ExperimentConfig unsorted = default_config();
    unsorted.P_grid = {10.0, 5.0};
    CHECK_THROWS_AS(unsorted.validate(), ParameterError);
}

TEST_CASE("codebook directory resolution")
{
    ExperimentConfig cfg = default_config();
    cfg.output = "out";
    ::unsetenv(codebook_dir_env);
    CHECK(cfg.resolved_codebook_dir() == fs::path("out") / "codebooks");
    cfg.codebook_dir = "books";
    CHECK(cfg.resolved_codebook_dir() == "books");
    ::setenv(codebook_dir_env, "/tmp/elsewhere", 1);
    CHECK(cfg.resolved_codebook_dir() == "/tmp/elsewhere");
    ::unsetenv(codebook_dir_env);
}

TEST_CASE("trial prints one JSON result")
{
    const fs::path dir = scratch("trial");
    const fs::path cfg = write_config(dir, R"({"mode": "limited", "P_dB": 30, "seed": 4})");
    const Run r = cli({"trial", "--config", cfg.string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["N_d"] == 10);
    CHECK(doc["seed"] == 4);
    CHECK(doc["rates"].size() == 3);
    CHECK(doc["sum_rate"].get<double>() > 0.0);
    CHECK(fs::exists(dir / "out" / "codebooks" / "cb_L2_Nd10_seed4.json"));
    fs::remove_all(dir);
}

TEST_CASE("sweep writes reproducible artifacts")
{
    const fs::path dir = scratch("sweep");
    const fs::path cfg =
        write_config(dir, R"({"mode": "perfect", "P_grid_dB": {"start": 10, "stop": 70, "step": 10}, "trials": 5})");
    const Run a = cli({"sweep", "--config", cfg.string(), "--out", (dir / "a").string(), "--trials", "20"});
    REQUIRE(a.code == 0);
    CHECK(a.out.find("dof_target 1.3333") != std::string::npos);
    CHECK(a.out.find("slope ") != std::string::npos);
    for (const char *name : {"results.csv", "summary.csv", "summary.txt", "grid.csv"})
        CHECK(fs::exists(dir / "a" / name));

    const std::string results = slurp(dir / "a" / "results.csv");
    CHECK(results.rfind("P,N_d,mode,R_sum,I_total,bound_total,min_direct_gain,max_quant_error,resamples\n", 0) == 0);
    CHECK(std::count(results.begin(), results.end(), '\n') == 1 + 7 * 20);

    const Run b = cli({"sweep", "--config", cfg.string(), "--out", (dir / "b").string(), "--trials", "20"});
    REQUIRE(b.code == 0);
    for (const char *name : {"results.csv", "summary.csv", "grid.csv"})
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));

    const Run c = cli({"sweep", "--config", cfg.string(), "--out", (dir / "c").string(), "--trials", "20", "--seed", "2"});
    REQUIRE(c.code == 0);
    CHECK(slurp(dir / "a" / "results.csv") != slurp(dir / "c" / "results.csv"));
    fs::remove_all(dir);
}

TEST_CASE("exit codes distinguish failure classes")
{
    const fs::path dir = scratch("codes");
    const fs::path m4 = write_config(dir, R"({"M": 4, "mode": "perfect"})");
    const Run unsupported = cli({"trial", "--config", m4.string()});
    CHECK(unsupported.code == exit_code::unsupported);
    CHECK(unsupported.err.find("non-goal") != std::string::npos);

    CHECK(cli({"trial", "--config", (dir / "missing.json").string()}).code == exit_code::config);
    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK(cli({"sweep", "--config", broken.string()}).code == exit_code::config);
    CHECK(cli({}).code == exit_code::config);
    CHECK(cli({"bogus"}).code == exit_code::config);
    CHECK(cli({"trial"}).code == exit_code::config);
    CHECK(cli({"--help"}).code == exit_code::ok);

    const fs::path blocked = write_config(dir, R"({"mode": "perfect", "P_grid_dB": [10, 20], "trials": 2})");
    std::ofstream(dir / "file") << "x";
    CHECK(cli({"sweep", "--config", blocked.string(), "--out", (dir / "file" / "sub").string()}).code ==
          exit_code::runtime);
    fs::remove_all(dir);
}

TEST_CASE("codebook subcommand designs and stores a book")
{
    const fs::path dir = scratch("codebook");
    const Run r = cli({"codebook", "--L", "2", "--bits", "6", "--seed", "3", "--samples", "2000", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("codewords") != std::string::npos);
    CHECK(fs::exists(dir / "cb_L2_Nd6_seed3.json"));
    CHECK(cli({"codebook", "--L", "0", "--bits", "6", "--out", dir.string()}).code == exit_code::config);
    fs::remove_all(dir);
}

TEST_CASE("validate passes on the default configuration")
{
    const fs::path dir = scratch("validate");
    const Run r = cli({"validate", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("validation passed") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("installed binary reports the unsupported exit code")
{
    const fs::path dir = scratch("binary");
    const fs::path m4 = write_config(dir, R"({"M": 4, "mode": "perfect"})");
    const std::string cmd = std::string(IAFB_CLI_PATH) + " trial --config " + m4.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == exit_code::unsupported);
    fs::remove_all(dir);
}
