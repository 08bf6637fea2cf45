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

#include <gtest/gtest.h>

#include "epiq/checker.hpp"
#include "epiq/scenarios.hpp"

namespace epiq {
namespace {

TEST(WellFormed, TwoLabNesting) {
    const auto fr = scenario3_fr(false);
    EXPECT_TRUE(well_formed(*parse_formula("K[W] K[Wbar] outcome(m_W, fail)"), fr.protocol).ok);
    const auto bad = well_formed(*parse_formula("K[W] K[F] outcome(m_W, fail)"), fr.protocol);
    ASSERT_FALSE(bad.ok);
    EXPECT_EQ(*bad.failing, (std::pair<std::string, std::string>{"W", "F"}));

    const auto leak = scenario3_fr(true);
    EXPECT_TRUE(well_formed(*parse_formula("K[W] K[F] outcome(m_W, fail)"), leak.protocol).ok);
}

TEST(WellFormed, EvaluationRefusesIllFormed) {
    const auto fr = scenario3_fr(false);
    try {
        eval(*parse_formula("K[W] K[F] outcome(m_W, fail)"), fr.protocol, 0, 0);
        FAIL();
    } catch (const IllFormedError &e) {
        EXPECT_EQ(e.outer(), "W");
        EXPECT_EQ(e.inner(), "F");
    }
}

TEST(Bind, RejectsUnknownNames) {
    const auto fr = scenario3_fr(false);
    Checker c(fr.protocol);
    EXPECT_THROW(c.bind(*parse_formula("K[Nobody] true")), BindError);
    EXPECT_THROW(c.bind(*parse_formula("outcome(nope, ok)")), BindError);
    EXPECT_THROW(c.bind(*parse_formula("outcome(m_W, maybe)")), BindError);
    EXPECT_NO_THROW(c.bind(*parse_formula("outcome(m_W, ok)")));
}

TEST(Eval, SingletonProtocolKnowsExactlyWhatIsTrue) {
    const auto f = scenario1(Cut::Minimal);
    Checker c(f.protocol);
    for (const auto &phi : formula_battery(f.protocol, {"W"})) {
        for (std::size_t t = 0; t <= f.protocol.length(); ++t) {
            EXPECT_EQ(c.eval(*Formula::know("W", phi), 0, t), c.eval(*phi, 0, t)) << to_string(*phi);
        }
    }
}

TEST(Eval, RecordedOutcomeIsKnownAfterTheMeasurement) {
    const auto f = scenario1_case(2);
    const auto &pi = f.protocol;
    Checker c(pi);
    const auto t = *pi.step_time("m_W");
    for (std::size_t h = 0; h < pi.histories().size(); ++h) {
        const auto &hist = pi.history(h);
        const auto label = hist.steps[t - 1].outcome_label(hist.outcomes.at(t));
        const auto k = Formula::know("W", Formula::outcome("m_W", label));
        EXPECT_TRUE(c.eval(*k, h, t));
        EXPECT_FALSE(c.eval(*k, h, t - 1));
    }
}

TEST(Eval, HaltingIsPossibleAtTheStart) {
    const auto fr = scenario3_fr(false);
    const auto phi = parse_formula("P[W](outcome(m_Wbar, okbar) & outcome(m_W, ok))");
    for (std::size_t h = 0; h < fr.protocol.histories().size(); ++h) {
        EXPECT_TRUE(eval(*phi, fr.protocol, h, 0));
    }
}

TEST(Valid, Examples) {
    const auto fr = scenario3_fr(false);
    EXPECT_TRUE(valid(*parse_formula("true"), fr.protocol));
    EXPECT_FALSE(valid(*parse_formula("outcome(m_Wbar, okbar) -> outcome(m_W, fail)"), fr.protocol));
    EXPECT_TRUE(valid(*parse_formula("K[W] halted -> halted"), fr.protocol));
    EXPECT_TRUE(valid(*parse_formula("halted -> outcome(m_W, ok)"), fr.protocol));
}

TEST(Axioms, TwoLabCommunity) {
    const auto fr = scenario3_fr(false);
    const auto r = axiom_suite(fr.protocol, {"W", "Wbar"});
    EXPECT_TRUE(r.community_ok);
    EXPECT_TRUE(r.factivity);
    EXPECT_TRUE(r.monotonicity);
    EXPECT_TRUE(r.knowledge_transfer);
    EXPECT_TRUE(r.counterexamples.empty());
    EXPECT_GT(r.battery_size, 100U);
}

TEST(Axioms, SingleObserver) {
    for (const auto &name : {"wigner1-min", "wigner1-case2", "leak-probable"}) {
        const auto f = scenario_by_name(name);
        EXPECT_TRUE(axiom_suite(f.protocol, {"W"}).passed()) << name;
    }
}

TEST(Axioms, LeakingTwoLabFullCommunity) {
    const auto leak = scenario3_fr(true);
    const auto r = axiom_suite(leak.protocol, {"W", "Wbar", "F", "Fbar"});
    EXPECT_TRUE(r.passed());
    EXPECT_TRUE(r.counterexamples.empty());
}

TEST(Axioms, RefusesNonCommunity) {
    const auto fr = scenario3_fr(false);
    const auto r = axiom_suite(fr.protocol, {"W", "F"});
    EXPECT_FALSE(r.community_ok);
    EXPECT_FALSE(r.passed());
}

TEST(Cells, AgentCellsShrinkOverTime) {
    for (const auto &name : scenario_names()) {
        const auto f = scenario_by_name(name);
        Checker c(f.protocol);
        for (const auto &agent : f.protocol.background()) {
            for (std::size_t h = 0; h < f.protocol.histories().size(); ++h) {
                for (std::size_t t = 1; t <= f.protocol.length(); ++t) {
                    const auto &now = c.cell_of(agent, h, t);
                    const auto &before = c.cell_of(agent, h, t - 1);
                    for (auto m : now) {
                        EXPECT_NE(std::find(before.begin(), before.end(), m), before.end()) << name;
                    }
                }
            }
        }
    }
}

} // namespace
} // namespace epiq
