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

#include "epiq/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "epiq/observer.hpp"
#include "epiq/spec_file.hpp"

namespace epiq {

namespace {

constexpr const char *kWignerSystems = R"(systems:
  S 2
  F 2 candidate
  W observer mW:2
initial:
  S = 1/sqrt(2), 1/sqrt(2)
)";

constexpr const char *kFail = "1/sqrt(2), 0, 0, 1/sqrt(2)";
constexpr const char *kHalfHalf = "mix(1/2: 1, 0, 0, 0; 1/2: 0, 0, 0, 1)";
constexpr const char *kMaximallyMixed = "mix(1/2: 1, 0; 1/2: 0, 1)";

// Small-denominator fractions print as p/q so expected rows stay readable.
std::string num(double v) {
    for (long q = 1; q <= 1000; ++q) {
        const double p = std::round(v * static_cast<double>(q));
        if (std::abs(v - p / static_cast<double>(q)) < 1e-15) {
            return q == 1 ? std::to_string(static_cast<long>(p))
                          : std::to_string(static_cast<long>(p)) + "/" + std::to_string(q);
        }
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ScenarioFixture fixture(const std::string &text) {
    auto spec = std::make_shared<const ProtocolSpec>(parse_spec(text));
    Protocol pi = build_gated(spec);
    return ScenarioFixture{spec->name, spec, std::move(pi), spec->checks};
}

std::string scenario1_text(Cut cut) {
    std::string t = std::string("name: ") + (cut == Cut::Minimal ? "wigner1-min" : "wigner1-ext") + "\n";
    t += kWignerSystems;
    t += "steps:\n";
    t += cut == Cut::Minimal ? "  measure id=m_F actor=F target=S basis=std slot=F\n"
                             : "  decohere id=m_F actor=F target=S basis=std slot=F\n";
    t += "checks:\n";
    t += std::string("  state S,F at t=1 = ") + (cut == Cut::Minimal ? kFail : kHalfHalf) + " [reference]\n";
    t += std::string("  state S at t=1 = ") + kMaximallyMixed + " [reference]\n";
    t += "  admissible W = true [trivial]\n";
    return t;
}

std::string scenario1_case_text(int which) {
    if (which != 1 && which != 2) {
        throw std::invalid_argument("scenario 1 has cases 1 and 2");
    }
    std::string t = "name: wigner1-case" + std::to_string(which) + "\n";
    t += kWignerSystems;
    t += "steps:\n  measure id=m_F actor=F target=S basis=std slot=F\n";
    if (which == 1) {
        t += "  measure id=m_W actor=W target=S,F basis=lab slot=mW outcomes=ok,fail,01,10\n";
        t += "checks:\n";
        t += std::string("  state S,F at t=1 = ") + kFail + " [reference]\n";
        t += "  prob outcome(m_W, fail) = 1 [derived]\n";
        t += "  admissible F = false [reference]\n";
    } else {
        t += "  measure id=m_W actor=W target=S basis=std slot=mW\n";
        t += "checks:\n";
        t += std::string("  state S,F at t=1 = ") + kFail + " [reference]\n";
        t += "  admissible F = true [reference]\n";
        t += "  agree F on S,F at t=1 = true [reference]\n";
    }
    return t;
}

std::string scenario2_text(Leak leak, Then then, double p) {
    if (leak == Leak::Probable && !(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("leak probability must lie in (0, 1)");
    }
    std::string name = leak == Leak::Certain ? "leak-certain" : leak == Leak::Probable ? "leak-probable" : "leak-none";
    if (then == Then::Measured) {
        name = leak == Leak::Certain ? "leak-measured" : name + "-measured";
    }
    std::string t = "name: " + name + "\n";
    t += R"(systems:
  S 2
  F 2 candidate
  O 2 candidate
  W observer mW:2
initial:
  S = 1/sqrt(2), 1/sqrt(2)
steps:
  measure id=m_F actor=F target=S basis=std slot=F
)";
    if (leak == Leak::Certain) {
        t += "  leak id=leak from=F to=O slot=O\n";
    } else if (leak == Leak::Probable) {
        t += "  leak id=leak from=F to=O slot=O when=leak\n";
    }
    t += then == Then::Measured ? "  measure id=m_W actor=W target=S,F,O basis=ghz slot=mW\n"
                                : "  measure id=m_W actor=W target=S basis=std slot=mW\n";
    if (leak == Leak::Probable) {
        t += "priors:\n  leak " + num(p) + "\n  noleak " + num(1.0 - p) + "\n";
    }
    const std::string before_w = leak == Leak::None ? "1" : "2";
    t += "checks:\n";
    if (leak == Leak::Certain) {
        t += "  state S,F at t=2 = " + std::string(kHalfHalf) + " [reference]\n";
    } else if (leak == Leak::Probable) {
        t += "  state S,F at t=2 = mix(" + num(p / 2) + ": 1, 0, 0, 0; " + num(p / 2) + ": 0, 0, 0, 1; " +
             num(1.0 - p) + ": " + kFail + ") [reference]\n";
    } else {
        t += "  state S,F at t=1 = " + std::string(kFail) + " [reference]\n";
    }
    if (then == Then::Measured) {
        t += "  admissible F = false [reference]\n";
        t += "  admissible O = false [reference]\n";
    } else if (leak == Leak::Certain) {
        t += "  admissible F = true [derived]\n";
        t += "  admissible O = true [derived]\n";
        t += "  agree F on S,F at t=" + before_w + " = true [reference]\n";
    }
    return t;
}

std::string fr_text(bool leaking) {
    std::string t = std::string("name: ") + (leaking ? "fr-leak" : "fr") + "\n";
    t += "systems:\n  R 2\n  Fbar 2 candidate\n";
    if (leaking) {
        t += "  Ebar 2 plain\n";
    }
    t += "  S 2\n  F 2 candidate\n";
    if (leaking) {
        t += "  E 2 plain\n";
    }
    t += R"(  Wbar observer mWbar:2
  W observer mWhear:2 mW:2
initial:
  R = 1/sqrt(3), sqrt(2/3)
steps:
  measure id=m_Fbar actor=Fbar target=R basis=std slot=Fbar outcomes=h,t
)";
    if (leaking) {
        t += "  leak id=leak_Fbar from=Fbar to=Ebar slot=Ebar\n";
    }
    t += "  unitary id=prep on=Fbar,S gate=CH\n";
    t += "  measure id=m_F actor=F target=S basis=std slot=F\n";
    if (leaking) {
        t += "  leak id=leak_F from=F to=E slot=E\n";
    }
    t += R"(  measure id=m_Wbar actor=Wbar target=R,Fbar basis=lab slot=mWbar,mWhear outcomes=okbar,failbar,ht,th
  measure id=m_W actor=W target=S,F basis=lab slot=mW outcomes=ok,fail,du,ud
halt:
  m_Wbar okbar
  m_W ok
checks:
)";
    if (!leaking) {
        t += R"(  prob halted = 1/12 [reference]
  prob outcome(m_Wbar, okbar) & outcome(m_W, ok) = 1/12 [reference]
  admissible F = false [reference]
  admissible Fbar = false [reference]
  admissible W = true [trivial]
  community W, Wbar = true [reference]
  community W, Wbar, F, Fbar = false [reference]
  record R,Fbar -> S,F at t=3 = false [reference]
  wellformed K[W] K[Wbar] outcome(m_W, fail) = true [reference]
  wellformed K[W] K[F] outcome(m_W, fail) = W,F [reference]
  valid outcome(m_Wbar, okbar) -> outcome(m_W, fail) = false [derived]
)";
    } else {
        t += R"(  prob halted = 1/4 [derived]
  admissible F = true [reference]
  admissible Fbar = true [reference]
  community W, Wbar, F, Fbar = true [derived]
  wellformed K[W] K[F] outcome(m_W, fail) = true [reference]
)";
    }
    return t;
}

} // namespace

ScenarioFixture scenario1(Cut cut) { return fixture(scenario1_text(cut)); }

ScenarioFixture scenario1_case(int which) { return fixture(scenario1_case_text(which)); }

ScenarioFixture scenario2(Leak leak, Then then, double p) { return fixture(scenario2_text(leak, then, p)); }

ScenarioFixture scenario3_fr(bool leaking) { return fixture(fr_text(leaking)); }

std::vector<std::string> scenario_names() {
    return {"wigner1-min",  "wigner1-ext",   "wigner1-case1", "wigner1-case2", "leak-certain",
            "leak-probable", "leak-measured", "fr",            "fr-leak"};
}

std::string scenario_text(const std::string &name) {
    if (name == "wigner1-min") {
        return scenario1_text(Cut::Minimal);
    }
    if (name == "wigner1-ext") {
        return scenario1_text(Cut::Extended);
    }
    if (name == "wigner1-case1") {
        return scenario1_case_text(1);
    }
    if (name == "wigner1-case2") {
        return scenario1_case_text(2);
    }
    if (name == "leak-certain") {
        return scenario2_text(Leak::Certain, Then::Unmeasured, 0.0);
    }
    if (name == "leak-probable") {
        return scenario2_text(Leak::Probable, Then::Unmeasured, 0.01);
    }
    if (name == "leak-measured") {
        return scenario2_text(Leak::Certain, Then::Measured, 0.0);
    }
    if (name == "fr") {
        return fr_text(false);
    }
    if (name == "fr-leak") {
        return fr_text(true);
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

ScenarioFixture scenario_by_name(const std::string &name) { return fixture(scenario_text(name)); }

} // namespace epiq
