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

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epiq/systems.hpp"

namespace epiq {

/// Raised when a protocol cannot be built; `where` carries history/time
/// coordinates when they are known.
class ProtocolError : public InvariantError {
  public:
    ProtocolError(const std::string &what, std::string where = {})
        : InvariantError(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
    const std::string &where() const { return where_; }

  private:
    std::string where_;
};

/// Raised when a non-selective step names an actor that has not passed the
/// admissibility gate.
class GateError : public ProtocolError {
  public:
    using ProtocolError::ProtocolError;
};

// ---------------------------------------------------------------------------
// Declarative protocol description (the in-memory form of a spec file).

/// Amplitudes over the product basis of `labels` (universe order).
struct InitialFactor {
    std::vector<std::string> labels;
    std::vector<cplx> amplitudes;
};

enum class StepSpecKind { Unitary, Measure, Decohere };

/// A protocol step before the cut is chosen. A `Measure` is rendered as a
/// branching measurement when its actor collapses from the background's
/// point of view, as a non-selective step when the actor is admitted into an
/// extended cut, and as a premeasurement unitary otherwise.
struct StepSpec {
    StepSpecKind kind = StepSpecKind::Unitary;
    std::string id;
    std::string actor;
    std::vector<std::string> target;
    /// Named gate for unitaries: I, X, Z, H, CNOT, CH, SWAP.
    std::string gate;
    std::optional<ComplexMatrix> matrix;
    /// Named basis: "std", "lab", "ghz"; otherwise `basis` is explicit.
    std::string basis_name;
    std::vector<ComplexMatrix> basis;
    std::vector<std::string> outcomes;
    /// Memory labels written with the outcome; the first is the actor's.
    std::vector<std::string> slots;
    /// Written from a `leak{from,to,slot}` line; only affects export.
    bool leak = false;
    /// Classical alternative in which this step happens (identity otherwise).
    std::string when;
};

struct Alternative {
    std::string name;
    double weight = 1.0;
};

struct CheckSpec {
    /// prob, admissible, community, valid, wellformed, record, state or agree.
    std::string kind;
    std::string subject;
    std::string expected;
    std::string provenance;
    /// Comparison tolerance; 0 means the protocol tolerance.
    double tolerance = 0.0;
};

/// A stored relative state to be re-derived on load.
struct StoredState {
    std::size_t time = 0;
    std::string history;
    std::vector<std::string> labels;
    std::vector<cplx> amplitudes;
};

struct ProtocolSpec {
    std::string name;
    std::vector<SystemId> labels;
    std::vector<Agent> agents;
    std::vector<InitialFactor> initial;
    std::vector<StepSpec> steps;
    std::vector<Alternative> priors;
    /// First time at which the background learns which alternative occurred.
    std::optional<std::size_t> disclose_at;
    /// Conjunction of (step id, outcome label) pairs defining `halted`.
    std::vector<std::pair<std::string, std::string>> halt;
    std::vector<StoredState> states;
    std::vector<CheckSpec> checks;
    /// Run non-selective steps even when their actor fails the gate.
    bool gate_override = false;

    Universe universe() const;
    const StepSpec &step(const std::string &id) const;
    std::optional<std::size_t> step_time(const std::string &id) const;
};

/// Resolves a named or explicit basis to vectors on `dim`.
std::vector<ComplexMatrix> resolve_basis(const StepSpec &s, std::size_t dim);
/// Resolves a named gate or explicit matrix for `dims` (target order).
ComplexMatrix resolve_gate(const StepSpec &s, const std::vector<std::size_t> &dims);

// ---------------------------------------------------------------------------
// Histories and protocols.

struct History {
    std::string id;
    std::string alternative;
    double prior = 1.0;
    std::vector<RelativeState> states;
    std::vector<DynamicalStep> steps;
    /// step time (1-based) -> realized outcome index
    std::map<std::size_t, std::size_t> outcomes;
    double branch_prob = 1.0;

    double weight() const { return prior * branch_prob; }
    std::size_t length() const { return steps.size(); }
};

struct HistoryPrefix {
    std::vector<RelativeState> states;
    std::vector<DynamicalStep> steps;
};

class Protocol;

/// Decides whether `actor` may collapse states in the extended cut, given the
/// minimal-cut rendering of the same protocol.
using GateFn = std::function<bool(const std::string &actor, const Protocol &minimal)>;

struct BuildOptions {
    Tolerance tol;
    /// Collapsing observers; empty means every agent with role `observer`.
    std::vector<std::string> background;
    /// Agents whose measurements are rendered non-selectively.
    std::set<std::string> extended;
    GateFn gate;
    /// Run non-selective steps even when the gate rejects their actor.
    bool gate_override = false;
    /// Render explicit `decohere` steps unitarily (the minimal cut): as the
    /// premeasurement when they record into slots, as identities otherwise.
    bool minimal = false;
    /// Validate introspection on every state. Re-anchored perspectives turn
    /// this off: their anchor may be acted upon by other agents.
    bool introspective = true;
};

class Protocol {
  public:
    Protocol(std::shared_ptr<const ProtocolSpec> spec, BuildOptions options, UniversePtr universe,
             std::vector<History> histories, std::vector<std::string> warnings);

    const ProtocolSpec &spec() const { return *spec_; }
    const std::shared_ptr<const ProtocolSpec> &spec_ptr() const { return spec_; }
    const BuildOptions &options() const { return options_; }
    const Universe &universe() const { return *universe_; }
    const UniversePtr &universe_ptr() const { return universe_; }
    const std::vector<History> &histories() const { return histories_; }
    const History &history(std::size_t i) const { return histories_.at(i); }
    std::size_t length() const { return length_; }
    Tolerance tolerance() const { return options_.tol; }
    const std::vector<std::string> &warnings() const { return warnings_; }
    /// Names of the agents that form the background observer.
    const std::vector<std::string> &background() const { return background_; }

    std::optional<std::size_t> history_index(const std::string &id) const;
    /// Time index (1-based) of a step id.
    std::optional<std::size_t> step_time(const std::string &id) const;
    /// Branching measurements, i.e. the steps outcome atoms may refer to.
    std::vector<std::string> branching_steps() const;
    /// Outcome labels with positive probability somewhere in the protocol.
    std::vector<std::string> realized_outcomes(const std::string &step_id) const;
    /// Background cell partition: histories h, g share a cell at time t iff
    /// cell_class(h, t) == cell_class(g, t).
    std::size_t cell_class(std::size_t h, std::size_t t) const { return cell_classes_.at(t).at(h); }

  private:
    std::shared_ptr<const ProtocolSpec> spec_;
    BuildOptions options_;
    UniversePtr universe_;
    std::vector<History> histories_;
    std::size_t length_ = 0;
    std::vector<std::string> warnings_;
    std::vector<std::string> background_;
    std::vector<std::vector<std::size_t>> cell_classes_;
};

Protocol build_protocol(std::shared_ptr<const ProtocolSpec> spec, BuildOptions options = {});
Protocol build_protocol(const ProtocolSpec &spec, BuildOptions options = {});

/// Same spec, every agent treated as a quantum system except the background:
/// no extended cut, explicit non-selective steps become identities.
Protocol minimal_cut(const Protocol &pi);

/// The protocol as described by `agent`, which takes the background role.
/// The agent's own measurements (and those it listens to) branch; every other
/// agent's measurements become premeasurement unitaries.
Protocol reanchor(const Protocol &pi, const std::string &agent);

/// Re-applies every step and compares against the stored states.
/// Throws ProtocolError naming history and time on mismatch.
void verify_history(const History &h, Tolerance tol);

HistoryPrefix restrict(const History &h, std::size_t t);

/// `h|t = h'|t` from the background observer's point of view.
bool same_prefix(const Protocol &pi, const History &a, const History &b, std::size_t t);

struct EpistemicCell {
    std::size_t anchor_history = 0;
    std::size_t time = 0;
    std::vector<std::size_t> members;
};

EpistemicCell cell(const Protocol &pi, std::size_t h, std::size_t t);

/// Cell of a non-background agent: histories whose reduced state on the
/// agent's labels agreed with `h` at every time up to `t`.
EpistemicCell agent_cell(const Protocol &pi, const System &agent, std::size_t h, std::size_t t);

/// Weighted mixture over the background cell of the states of `target`.
ComplexMatrix described_state(const Protocol &pi, std::size_t h, std::size_t t, const System &target);

struct MeasurementDistance {
    std::string step;
    std::vector<double> p1;
    std::vector<double> p2;
    /// Total variation distance after conditioning.
    double distance = 0.0;
    /// Past outcome events both descriptions were conditioned on, as
    /// "step=outcome".
    std::vector<std::string> conditioning;
};

struct CompatibilityReport {
    bool compatible = false;
    /// Largest remaining distance over the predicted measurements.
    double distance = 0.0;
    std::vector<MeasurementDistance> per_measurement;
};

/// Protocol-relative compatibility of two descriptions of `target` at time
/// `time`. Every protocol measurement inside `target` that happens after
/// `time` must get the same Born statistics from both descriptions, possibly
/// after conditioning both (Lüders update) on outcomes of measurements at or
/// before `time` that commute with it. Conditioning events must have positive
/// probability under both descriptions.
CompatibilityReport protocol_compatible(const Protocol &pi, const ComplexMatrix &desc1, const ComplexMatrix &desc2,
                                        const System &target, std::size_t time);

/// Total Born weight of the histories whose outcomes satisfy `pred`.
double probability(const Protocol &pi, const std::function<bool(const History &)> &pred);

} // namespace epiq
