/*
* Copyright (C) 2026 epildp contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#include "cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        m_dir = fs::temp_directory_path() /
                ("epildp_cli_" + std::to_string(::getpid()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(m_dir);
    }
    void TearDown() override
    {
        fs::remove_all(m_dir);
    }

    int run(std::vector<std::string> args)
    {
        m_out.str("");
        m_err.str("");
        return epildp::cli::run(args, m_out, m_err);
    }

    json error() const
    {
        return json::parse(m_err.str());
    }

    static std::string slurp(const fs::path& path)
    {
        std::ifstream file(path, std::ios::binary);
        return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
    }

    fs::path m_dir;
    std::ostringstream m_out;
    std::ostringstream m_err;
};

TEST_F(CliTest, HelpAndVersion)
{
    EXPECT_EQ(run({"--help"}), 0);
    EXPECT_NE(m_out.str().find("simulate"), std::string::npos);
    EXPECT_EQ(run({"simulate", "--help"}), 0);
    EXPECT_NE(m_out.str().find("--epsilon"), std::string::npos);
    EXPECT_EQ(run({"--version"}), 0);
}

TEST_F(CliTest, UsageErrorsAreJson)
{
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(error()["error"], "UsageError");
    EXPECT_EQ(run({"simulate", "--no-such-flag", "1"}), 2);
    EXPECT_EQ(error()["error"], "UsageError");
    EXPECT_EQ(run({"reproduce", "fig1"}), 2);
}

TEST_F(CliTest, ErrorCategoriesMapToExitCodes)
{
    const auto out = (m_dir / "x").string();
    EXPECT_EQ(run({"simulate", "--params", "delta=2", "--out", out}), 2);
    EXPECT_EQ(error()["error"], "ConfigError");
    EXPECT_EQ(run({"simulate", "--x0", "1.5", "--out", out}), 3);
    EXPECT_EQ(error()["error"], "DomainError");
    EXPECT_EQ(run({"simulate", "--simulator", "euler", "--out", out}), 2);
    EXPECT_EQ(run({"vbar", "--params", "beta=0.5", "--out", out}), 2);
    EXPECT_EQ(error()["error"], "NotBistable");
    EXPECT_EQ(run({"simulate", "--model", (m_dir / "missing.json").string(), "--out", out}), 5);
    EXPECT_EQ(error()["error"], "IoError");

    EXPECT_EQ(epildp::cli::exit_code("BoundaryX"), 3);
    EXPECT_EQ(epildp::cli::exit_code("SingularSystem"), 4);
    EXPECT_EQ(epildp::cli::exit_code("RepairExhausted"), 4);
    EXPECT_EQ(epildp::cli::exit_code("Something"), 1);
}

TEST_F(CliTest, OdeWritesTrajectoryAndManifest)
{
    ASSERT_EQ(run({"ode", "--T", "1", "--h", "0.25", "--x0", "0.2", "--out", m_dir.string()}), 0);
    std::ifstream csv(m_dir / "trajectory.csv");
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "t,I");
    std::getline(csv, line);
    EXPECT_EQ(line, "0,0.20000000000000001");
    int rows = 1;
    while (std::getline(csv, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 5);

    const auto manifest = json::parse(slurp(m_dir / "manifest.json"));
    EXPECT_EQ(manifest["command"], "ode");
    EXPECT_EQ(manifest["outputs"], json::array({"trajectory.csv"}));
    EXPECT_EQ(manifest["config"]["model"]["parameters"]["beta"], 1.5);
    EXPECT_EQ(manifest["config"]["options"]["method"], "nsfd");
    EXPECT_EQ(manifest["config"]["x0"], json::array({0.2}));
}

TEST_F(CliTest, CompareRequiresClosedForm)
{
    EXPECT_EQ(run({"ode", "--model", "siv", "--compare", "--out", m_dir.string()}), 2);
    ASSERT_EQ(run({"ode", "--compare", "--T", "2", "--out", m_dir.string()}), 0);
    for (const char* name : {"nsfd.csv", "explicit.csv", "exact.csv", "errors.csv"}) {
        EXPECT_TRUE(fs::exists(m_dir / name)) << name;
    }
}

TEST_F(CliTest, EnvironmentSetsDefaultOutput)
{
    ::setenv("EPILDP_OUT", m_dir.string().c_str(), 1);
    const int code = run({"simulate", "--N", "100", "--T", "1"});
    ::unsetenv("EPILDP_OUT");
    ASSERT_EQ(code, 0);
    EXPECT_TRUE(fs::exists(m_dir / "trajectory.csv"));
    EXPECT_TRUE(fs::exists(m_dir / "stats.json"));
}

TEST_F(CliTest, ReplayIsByteIdentical)
{
    const auto a = m_dir / "a", b = m_dir / "b";
    ASSERT_EQ(run({"simulate", "--model", "siv", "--N", "1000", "--T", "5", "--replicates", "8", "--simulator",
                   "tau_leap", "--seed", "5", "--out", a.string()}),
              0);
    ASSERT_EQ(run({"replay", (a / "manifest.json").string(), "--out", b.string()}), 0);
    const auto first = slurp(a / "summary.csv");
    EXPECT_FALSE(first.empty());
    EXPECT_EQ(first, slurp(b / "summary.csv"));

    ASSERT_EQ(run({"simulate", "--model", "siv", "--N", "1000", "--T", "5", "--replicates", "8", "--simulator",
                   "tau_leap", "--seed", "6", "--out", b.string()}),
              0);
    EXPECT_NE(first, slurp(b / "summary.csv"));
}

TEST_F(CliTest, BoundaryAndVbar)
{
    ASSERT_EQ(run({"boundary", "--lines", "4", "--out", (m_dir / "b").string()}), 0);
    EXPECT_TRUE(fs::exists(m_dir / "b" / "boundary.csv"));
    EXPECT_TRUE(fs::exists(m_dir / "b" / "equilibria.csv"));

    ASSERT_EQ(run({"vbar", "--grid-dt", "0.05", "--grid-dx", "0.05", "--horizons", "2,4", "--out",
                   (m_dir / "v").string()}),
              0);
    const auto result = json::parse(slurp(m_dir / "v" / "vbar.json"));
    EXPECT_GT(result["vbar"].get<double>(), 0.0);
    EXPECT_TRUE(fs::exists(m_dir / "v" / "path.csv"));
}

TEST_F(CliTest, ReproduceWritesIntoTargetDirectory)
{
    ASSERT_EQ(run({"reproduce", "fig2", "--out", m_dir.string()}), 0);
    EXPECT_TRUE(fs::exists(m_dir / "fig2" / "errors.csv"));
    EXPECT_TRUE(fs::exists(m_dir / "fig2" / "manifest.json"));
}

TEST_F(CliTest, ModelFileIntegratesWithDerivedSplitting)
{
    const std::string file = EPILDP_SOURCE_DIR "/models/siv.json";
    ASSERT_EQ(run({"ode", "--model", file, "--x0", "0.1,0.2,0.7", "--T", "600", "--out", m_dir.string()}), 0)
        << m_err.str();
    std::ifstream csv(m_dir / "trajectory.csv");
    std::string line, last;
    while (std::getline(csv, line)) {
        last = line;
    }
    std::stringstream ss(last);
    std::vector<double> row;
    for (std::string cell; std::getline(ss, cell, ',');) {
        row.push_back(std::stod(cell));
    }
    ASSERT_EQ(row.size(), 4u);
    EXPECT_NEAR(row[1] + row[2] + row[3], 1.0, 1e-12);
    // Starting with many infected the file model settles at the stable endemic state.
    EXPECT_NEAR(row[3], 0.312861, 1e-4);
}

} // namespace
