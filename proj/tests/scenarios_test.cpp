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

#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "epiq/scenarios.hpp"

namespace epiq {
namespace {

class Fixture : public ::testing::TestWithParam<std::string> {};

TEST_P(Fixture, EveryDeclaredCheckPasses) {
    const auto f = scenario_by_name(GetParam());
    ASSERT_FALSE(f.expected.empty());
    for (const auto &r : f.run()) {
        EXPECT_TRUE(r.passed) << r.check.kind << " " << r.check.subject << ": expected " << r.check.expected
                              << ", measured " << r.measured << " (" << r.detail << ")";
    }
}

TEST_P(Fixture, WeightsFormADistribution) {
    const auto f = scenario_by_name(GetParam());
    double total = 0.0;
    for (const auto &h : f.protocol.histories()) {
        EXPECT_GT(h.weight(), 0.0);
        total += h.weight();
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST_P(Fixture, TextMatchesTheBuiltSpec) {
    const auto f = scenario_by_name(GetParam());
    EXPECT_EQ(f.spec->name, GetParam());
    EXPECT_FALSE(scenario_text(GetParam()).empty());
}

INSTANTIATE_TEST_SUITE_P(All, Fixture, ::testing::ValuesIn(scenario_names()),
                         [](const auto &info) {
                             std::string s = info.param;
                             for (auto &c : s) {
                                 c = c == '-' ? '_' : c;
                             }
                             return s;
                         });

bool has_row(const ScenarioFixture &f, const std::string &kind, const std::string &needle) {
    for (const auto &c : f.expected) {
        if (c.kind == kind && (c.expected.find(needle) != std::string::npos || c.subject.find(needle) != std::string::npos)) {
            return true;
        }
    }
    return false;
}

TEST(Rows, FrHaltingProbability) {
    const auto f = scenario_by_name("fr");
    EXPECT_TRUE(has_row(f, "prob", "1/12"));
}

TEST(Rows, MinimalCutStates) {
    const auto f = scenario_by_name("wigner1-min");
    EXPECT_TRUE(has_row(f, "state", "1/sqrt(2), 0, 0, 1/sqrt(2)"));
    EXPECT_TRUE(has_row(f, "state", "mix(1/2: 1, 0; 1/2: 0, 1)"));
}

TEST(Rows, ProbableLeakMixture) {
    const auto f = scenario_by_name("leak-probable");
    EXPECT_TRUE(has_row(f, "state", "mix(1/200: 1, 0, 0, 0; 1/200: 0, 0, 0, 1; 99/100:"));
}

TEST(Names, UnknownScenarioIsRejected) {
    EXPECT_THROW(scenario_by_name("nope"), std::invalid_argument);
}

TEST(Builders, ProbableLeakWeightFollowsPrior) {
    const auto f = scenario2(Leak::Probable, Then::Unmeasured, 0.2);
    double leaked = 0.0;
    for (const auto &h : f.protocol.histories()) {
        if (h.alternative == "leak") {
            leaked += h.weight();
        }
    }
    EXPECT_NEAR(leaked, 0.2, 1e-12);
}

} // namespace
} // namespace epiq
