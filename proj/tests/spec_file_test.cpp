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
#include <memory>

#include <gtest/gtest.h>

#include "epiq/observer.hpp"
#include "epiq/scenarios.hpp"
#include "epiq/spec_file.hpp"

namespace epiq {
namespace {

TEST(Numbers, Grammar) {
    EXPECT_DOUBLE_EQ(parse_number("0.25"), 0.25);
    EXPECT_DOUBLE_EQ(parse_number("-1.5e-1"), -0.15);
    EXPECT_DOUBLE_EQ(parse_number("1/sqrt(2)"), 1.0 / std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(parse_number("-1/sqrt(3)"), -1.0 / std::sqrt(3.0));
    EXPECT_DOUBLE_EQ(parse_number("sqrt(2/3)"), std::sqrt(2.0 / 3.0));
    EXPECT_DOUBLE_EQ(parse_number(" 1 "), 1.0);
    EXPECT_DOUBLE_EQ(parse_number("1/12", true), 1.0 / 12.0);
    for (const char *bad : {"", "abc", "1/12", "sqrt(2)", "1/sqrt(0)", "sqrt(1/0)", "1/sqrt(-2)", "0x10"}) {
        EXPECT_THROW(parse_number(bad), std::invalid_argument) << bad;
    }
}

TEST(Numbers, FormatIsExactWhenPossible) {
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(1.0 / std::sqrt(2.0)), "1/sqrt(2)");
    EXPECT_EQ(format_number(-1.0 / std::sqrt(3.0)), "-1/sqrt(3)");
    EXPECT_EQ(format_number(std::sqrt(2.0 / 3.0)), "sqrt(2/3)");
    for (double v : {0.1234, -7.5, 1e-7, 1.0 / std::sqrt(5.0)}) {
        EXPECT_DOUBLE_EQ(parse_number(format_number(v)), v);
    }
}

TEST(Amplitudes, ComplexEntries) {
    const auto a = parse_amplitudes("1/sqrt(2), 0, 0, -1/sqrt(2)");
    ASSERT_EQ(a.size(), 4U);
    EXPECT_DOUBLE_EQ(a[3].real(), -1.0 / std::sqrt(2.0));
    const auto back = parse_amplitudes(format_amplitudes(a));
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_DOUBLE_EQ(std::abs(back[i] - a[i]), 0.0);
    }
}

TEST(Parse, RejectsNonUnitInitialVector) {
    const std::string text = R"(name: bad
systems:
  S 2
initial:
  S = 1, 1
)";
    try {
        parse_spec(text);
        FAIL();
    } catch (const SpecParseError &e) {
        EXPECT_EQ(e.line(), 5U);
    }
}

TEST(Parse, ReportsCoordinatesOfUnknownKeys) {
    const std::string text = R"(name: bad
systems:
  S 2
  W observer mW:2
steps:
  measure id=m actor=W target=S basis=std slot=mW colour=red
)";
    try {
        parse_spec(text);
        FAIL();
    } catch (const SpecParseError &e) {
        EXPECT_EQ(e.line(), 6U);
        EXPECT_GT(e.column(), 1U);
        EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
    }
}

TEST(Parse, RejectsUnknownSectionsAndLabels) {
    EXPECT_THROW(parse_spec("name: x\nsystems:\n  S 2\nbogus:\n  a\n"), SpecParseError);
    EXPECT_THROW(parse_spec("name: x\nsystems:\n  S 2\nsteps:\n  unitary id=u on=T gate=H\n"), SpecParseError);
    EXPECT_THROW(parse_spec("name: x\nsystems:\n  S two\n"), SpecParseError);
}

TEST(Parse, CommentsAndBlankLinesAreIgnored) {
    const auto s = parse_spec("# header\nname: x\n\nsystems:\n  S 2   # a qubit\n");
    EXPECT_EQ(s.name, "x");
    ASSERT_EQ(s.labels.size(), 1U);
}

TEST(RoundTrip, EveryFixtureReparsesToAnEquivalentProtocol) {
    for (const auto &name : scenario_names()) {
        const auto f = scenario_by_name(name);
        const auto text = export_spec(*f.spec);
        const auto again = std::make_shared<const ProtocolSpec>(parse_spec(text));
        EXPECT_EQ(export_spec(*again), text) << name;
        const auto pi = build_gated(again);
        ASSERT_EQ(pi.histories().size(), f.protocol.histories().size()) << name;
        for (std::size_t h = 0; h < pi.histories().size(); ++h) {
            EXPECT_EQ(pi.history(h).id, f.protocol.history(h).id);
            for (std::size_t t = 0; t <= pi.length(); ++t) {
                EXPECT_LE(max_abs_diff(pi.history(h).states[t].op(), f.protocol.history(h).states[t].op()), 1e-9)
                    << name << " " << h << " " << t;
            }
        }
    }
}

} // namespace
} // namespace epiq
