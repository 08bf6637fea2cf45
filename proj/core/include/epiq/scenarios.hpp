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

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "epiq/checks.hpp"
#include "epiq/protocol.hpp"

namespace epiq {

/// A built protocol together with the verdicts it is expected to produce.
/// Provenance tags: "reference" (a published value), "derived" (recomputed
/// independently), "trivial".
struct ScenarioFixture {
    std::string name;
    std::shared_ptr<const ProtocolSpec> spec;
    Protocol protocol;
    /// Same list as `spec->checks`.
    std::vector<CheckSpec> expected;

    std::vector<CheckResult> run() const { return run_checks(protocol, expected); }
};

enum class Cut { Minimal, Extended };

/// S prepared in |+>, F measures S in the standard basis into its memory.
/// Minimal: the measurement is a premeasurement unitary (L ends in |fail>).
/// Extended: F's measurement is non-selective (L ends in the 1/2, 1/2 mixture).
ScenarioFixture scenario1(Cut cut);

/// Scenario 1 followed by W's measurement: case 1 measures L in the
/// {ok, fail, 01, 10} basis, case 2 measures only S.
ScenarioFixture scenario1_case(int which);

enum class Leak { Certain, Probable, None };
enum class Then { Unmeasured, Measured };

/// Scenario 1 where F may copy its outcome into an external system O.
/// `Probable` leaks with probability `p` (an undisclosed classical
/// alternative); `Measured` ends with W measuring S, F and O in a GHZ basis.
ScenarioFixture scenario2(Leak leak, Then then, double p = 0.01);

/// Two labs: Fbar tosses R and prepares S, F measures S, then Wbar and W
/// measure the labs and announce. With `leaking`, both friends copy their
/// outcomes into external systems Ebar and E right after measuring.
ScenarioFixture scenario3_fr(bool leaking);

/// Every named fixture: wigner1-min, wigner1-ext, wigner1-case1,
/// wigner1-case2, leak-certain, leak-probable, leak-measured, fr, fr-leak.
std::vector<std::string> scenario_names();
ScenarioFixture scenario_by_name(const std::string &name);

/// Protocol file text of a named fixture.
std::string scenario_text(const std::string &name);

} // namespace epiq
