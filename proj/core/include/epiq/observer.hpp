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

#include <optional>
#include <string>
#include <vector>

#include "epiq/protocol.hpp"

namespace epiq {

/// Outcome of a record test: does `b` carry a faithful copy of the
/// standard-basis value of `a`?
struct RecordCheck {
    bool holds = false;
    /// Standard-basis values of `a` (indices over a's ordered labels) with
    /// positive probability, and the pure conditional state of `b` for each.
    std::vector<std::size_t> values;
    std::vector<ComplexMatrix> conditional_states;
    std::vector<std::size_t> zero_prob_values;
    /// Unitary taking e_v to the conditional state of `b` for every listed v.
    std::optional<ComplexMatrix> encoder;
    /// Human-readable reason when the test fails.
    std::string reason;
};

/// `b` is a record of `a` in `state` when, for each standard-basis value of
/// `a` with positive probability, the conditional state of `b` is pure and the
/// conditional states for distinct values are orthogonal. Throws
/// DimensionError unless `a` and `b` have the same dimension.
RecordCheck check_record(const RelativeState &state, const System &a, const System &b);
bool is_record(const RelativeState &state, const System &a, const System &b);

/// Splits a step into a part on `x` and a part on the rest. Returns the
/// (unit-normalized) operator on `x`, in universe order, when every Kraus
/// operator of the step is `U_i (x) T` with the same unitary `T` up to phase.
std::optional<ComplexMatrix> factor_on(const DynamicalStep &step, const Universe &u, const System &x, Tolerance tol);

struct PersistenceResult {
    bool persistent = false;
    /// Start times t (1-based) from which no record chain survives to the end.
    std::vector<std::size_t> failing_starts;
    /// Record chain starting at t=1 when persistent: chain[k] is a record,
    /// just before step k+1, of the previous link (of the candidate for
    /// k = 0), and carrier_ops[k] is what step k+1 does to it. A link whose
    /// source has a single possible value carries no information; its
    /// carrier op is empty.
    std::vector<System> chain;
    std::vector<std::optional<ComplexMatrix>> carrier_ops;
};

/// Informational persistence of `a` along history `h`: from every start time
/// t, the information `a` holds just before step t can be passed along a
/// chain of persistent records to the end of the history. A start at which
/// `a` has a single possible standard-basis value is satisfied trivially.
PersistenceResult informationally_persistent(const Protocol &pi, std::size_t h, const System &a);

struct AdmissibilityVerdict {
    std::string candidate;
    /// Perspective the verdict was computed in (background agent names).
    std::vector<std::string> perspective;
    bool admissible = false;
    /// Ids of histories in which the candidate is persistent.
    std::vector<std::string> persistent_histories;
    /// Earliest (history, time) whose cell holds no persistent history.
    std::optional<std::size_t> known_history;
    std::optional<std::size_t> known_time;
    /// Step after which the candidate's information can no longer be copied
    /// forward in the reported history.
    std::string erasure_step;
    std::optional<std::size_t> erasure_time;
    /// Record chain of the first persistent history (admissible case).
    std::vector<System> witness_chain;
    std::string witness_history;
};

AdmissibilityVerdict admissible_observer(const Protocol &pi, const std::string &candidate);

struct PairVerdict {
    std::string agent;
    /// Perspective agent; empty for the protocol's own background.
    std::string relative_to;
    bool admissible = false;
};

struct CommunityVerdict {
    bool community = false;
    std::vector<std::string> members;
    std::vector<PairVerdict> pairs;
    /// First failing pair in evaluation order.
    std::optional<PairVerdict> first_failure;
};

/// Every member is admissible with respect to the background and with
/// respect to every other member's re-anchored description.
CommunityVerdict observer_community(const Protocol &pi, const std::vector<std::string> &members);

/// Gate for non-selective steps: the actor must be admissible in the
/// minimal cut.
GateFn admissibility_gate();

/// `build_protocol` with the admissibility gate installed.
Protocol build_gated(std::shared_ptr<const ProtocolSpec> spec, BuildOptions options = {});
Protocol build_gated(const ProtocolSpec &spec, BuildOptions options = {});

} // namespace epiq
