// Copyright 2026 The epiq Authors
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

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string &args) {
    const std::string cmd = std::string(EPIQ_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE *p = popen(cmd.c_str(), "r");
    if (p == nullptr) {
        return r;
    }
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) {
        r.out.append(buf.data(), n);
    }
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string write_temp(const std::string &name, const std::string &text) {
    const auto path = std::filesystem::temp_directory_path() / ("epiq_cli_" + name);
    std::ofstream(path) << text;
    return path.string();
}

const char *kWigner = R"(name: w
systems:
  S 2
  F 2 candidate
  W observer mW:2
initial:
  S = 1/sqrt(2), 1/sqrt(2)
steps:
  measure id=m_F actor=F target=S basis=std slot=F
checks:
)";

TEST(Cli, PassingFixtureExitsZero) {
    const auto r = run("scenario fr --report");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("1/12"), std::string::npos);
}

TEST(Cli, FailingCheckExitsOne) {
    const auto file = write_temp("fail.epiq", std::string(kWigner) + "  state S at t=1 = 1, 0\n");
    const auto r = run("check " + file);
    EXPECT_EQ(r.code, 1) << r.out;
}

TEST(Cli, PassingFileExitsZero) {
    const auto file = write_temp("pass.epiq", std::string(kWigner) + "  state S at t=1 = mix(1/2: 1, 0; 1/2: 0, 1)\n");
    const auto r = run("check " + file);
    EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, ParseErrorsExitTwoWithCoordinates) {
    const auto file = write_temp("bad.epiq", "name: x\nsystems:\n  S 2\ninitial:\n  S = 1, 1\n");
    const auto r = run("check " + file);
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_NE(r.out.find("5"), std::string::npos) << r.out;
    EXPECT_EQ(run("scenario nope").code, 2);
    EXPECT_EQ(run("admissible fr -c Nobody").code, 2);
}

TEST(Cli, IllFormedFormulaExitsThreeNamingThePair) {
    const auto r = run("eval fr -f \"K[W] K[F] outcome(m_W, fail)\" -t 0");
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("W,F"), std::string::npos) << r.out;
}

TEST(Cli, EvalReportsCellSize) {
    const auto r = run("--json eval fr -f \"P[W](outcome(m_Wbar,okbar) & outcome(m_W,ok))\" -t 0");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("\"value\": true"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\"cell_size\": 4"), std::string::npos) << r.out;
}

TEST(Cli, AdmissibleVerdicts) {
    const auto f = run("--json admissible fr -c F");
    EXPECT_EQ(f.code, 0) << f.out;
    EXPECT_NE(f.out.find("\"admissible\": false"), std::string::npos) << f.out;
    const auto w = run("admissible fr -c W");
    EXPECT_NE(w.out.find("true"), std::string::npos) << w.out;
}

TEST(Cli, JsonIsByteDeterministic) {
    for (const char *args : {"--json scenario fr", "--json admissible fr-leak -c Fbar", "--json axioms fr --community W,Wbar"}) {
        const auto a = run(args);
        const auto b = run(args);
        EXPECT_EQ(a.code, 0) << a.out;
        EXPECT_EQ(a.out, b.out) << args;
    }
}

TEST(Cli, ExportReparses) {
    const auto e = run("export leak-probable");
    ASSERT_EQ(e.code, 0);
    const auto file = write_temp("export.epiq", e.out);
    EXPECT_EQ(run("check " + file).code, 0);
    EXPECT_EQ(run("export " + file).out, e.out);
}

} // namespace
