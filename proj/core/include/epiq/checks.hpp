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

#include <string>
#include <vector>

#include "epiq/checker.hpp"
#include "epiq/protocol.hpp"

namespace epiq {

/// Result of one declared check.
///
/// Check kinds and their subjects:
///   prob <formula>                         expected: number (p/q allowed)
///   admissible <agent> [as <agent>]        expected: true | false
///   community <agent>, <agent>, ...        expected: true | false
///   valid <formula>                        expected: true | false
///   wellformed <formula>                   expected: true | <outer>,<inner>
///   record <labels> -> <labels> at t=<k> [history=<id>]
///                                          expected: true | false
///   state <labels> at t=<k> [history=<id>] expected: amplitudes | mix(w: amps; ...)
///   agree <agent> on <labels> at t=<k>     expected: true | false
///
/// `prob` sums the weights of histories on which the formula holds at the
/// final time. `state` compares the background's described state. `agree`
/// compares, with protocol_compatible, the background's description against
/// the description in the extended cut admitting the agent and against the
/// agent's own re-anchored description.
struct CheckResult {
    CheckSpec check;
    std::string measured;
    bool passed = false;
    /// Extra evidence (distances, failing pairs, error text).
    std::string detail;
};

CheckResult run_check(Checker &checker, const CheckSpec &check);
std::vector<CheckResult> run_checks(const Protocol &pi, const std::vector<CheckSpec> &checks);

/// Density operator from "a, b, ..." (pure) or "mix(w: a, b; w: c, d)" over
/// `labels` in the listed order, returned in universe order.
ComplexMatrix parse_state_expression(const std::string &text, const Universe &u,
                                     const std::vector<std::string> &labels);

} // namespace epiq
