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
#include "epiq/formula.hpp"
#include "epiq/scenarios.hpp"

namespace epiq {
namespace {

TEST(Parse, KnowOfOutcome) {
    const auto f = parse_formula("K[W] outcome(m_F, 0)");
    ASSERT_EQ(f->kind, FormulaKind::Know);
    EXPECT_EQ(f->agent, "W");
    ASSERT_EQ(f->lhs->kind, FormulaKind::Outcome);
    EXPECT_EQ(f->lhs->step, "m_F");
    EXPECT_EQ(f->lhs->label, "0");
    EXPECT_EQ(*f, *Formula::know("W", Formula::outcome("m_F", "0")));
}

TEST(Parse, NestedKnow) {
    const auto f = parse_formula("K[W] K[Wbar] !outcome(m_W, ok)");
    const auto want = Formula::know("W", Formula::know("Wbar", Formula::negation(Formula::outcome("m_W", "ok"))));
    EXPECT_EQ(*f, *want);
}

TEST(Parse, Precedence) {
    const auto a = Formula::outcome("s", "a");
    const auto b = Formula::outcome("s", "b");
    const auto c = Formula::outcome("s", "c");
    EXPECT_EQ(*parse_formula("outcome(s,a) | outcome(s,b) & outcome(s,c)"),
              *Formula::disjunction(a, Formula::conjunction(b, c)));
    EXPECT_EQ(*parse_formula("outcome(s,a) -> outcome(s,b) -> outcome(s,c)"),
              *Formula::implication(a, Formula::implication(b, c)));
    EXPECT_EQ(*parse_formula("!outcome(s,a) & outcome(s,b)"), *Formula::conjunction(Formula::negation(a), b));
    EXPECT_EQ(*parse_formula("P[A] (outcome(s,a) & halted)"),
              *Formula::possible("A", Formula::conjunction(a, Formula::halted())));
}

TEST(Parse, SyntaxErrors) {
    for (const char *bad : {"K[W] & outcome", "outcome(m, )", "K[] true", "(true", "true false", "", "K[W]",
                            "outcome(a, b) ->", "!"}) {
        EXPECT_THROW(parse_formula(bad), FormulaSyntaxError) << bad;
    }
    try {
        parse_formula("true & & false");
        FAIL();
    } catch (const FormulaSyntaxError &e) {
        EXPECT_EQ(e.position(), 7U);
    }
}

TEST(Print, RoundTripsOverBattery) {
    const auto f = scenario3_fr(false);
    for (const auto &phi : formula_battery(f.protocol, {"W", "Wbar"})) {
        const auto text = to_string(*phi);
        const auto back = parse_formula(text);
        EXPECT_EQ(*back, *phi) << text;
        EXPECT_EQ(to_string(*back), text);
    }
}

TEST(Print, CanonicalForm) {
    EXPECT_EQ(to_string(*parse_formula("K[W](outcome(m,a)&(outcome(m,b)|halted))")),
              "K[W] (outcome(m, a) & (outcome(m, b) | halted))");
    EXPECT_EQ(to_string(*parse_formula("(true -> false) -> true")), "(true -> false) -> true");
}

} // namespace
} // namespace epiq
