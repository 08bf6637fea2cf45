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

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epiq/tensor.hpp"

namespace epiq {

/// Raised when a quantum state or step breaks a structural invariant:
/// density-operator postulates, introspection, memory-slot bookkeeping.
class InvariantError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An elementary system (a tensor factor).
struct SystemId {
    std::string name;
    std::size_t dim = 2;
};

/// A composite system: a set of elementary labels. Factor order is always the
/// universe's declaration order, never the set order.
using System = std::set<std::string>;

enum class Role { Observer, Candidate, Plain };

std::string to_string(Role r);

/// A named participant: the labels it owns, its role, and its memory labels.
struct Agent {
    std::string name;
    Role role = Role::Plain;
    System labels;
    std::vector<std::string> memory;
};

/// The elementary labels in play, the named agents built from them, and the
/// background observer (union of all `Observer` agents unless overridden).
class Universe {
  public:
    Universe(std::vector<SystemId> labels, std::vector<Agent> agents);

    const std::vector<SystemId> &labels() const { return labels_; }
    const std::vector<Agent> &agents() const { return agents_; }
    const System &observer() const { return observer_; }
    const std::vector<std::string> &observer_agents() const { return observer_agents_; }

    bool has_label(const std::string &name) const;
    bool has_agent(const std::string &name) const;
    const Agent &agent(const std::string &name) const;
    /// Resolves an agent name or a bare label name to its label set.
    System resolve(const std::string &name) const;
    std::size_t dim(const std::string &label) const;
    std::size_t index(const std::string &label) const;

    /// Universe-ordered factor indices of `s` inside the full label list.
    std::vector<std::size_t> factors(const System &s) const;
    /// Universe-ordered labels of `s`.
    std::vector<std::string> ordered(const System &s) const;
    std::vector<std::size_t> dims(const System &s) const;
    std::size_t dimension(const System &s) const;
    System all() const;

    /// Same labels and agents, with the observer role moved onto `agents`.
    Universe reanchored(const std::vector<std::string> &agents) const;

  private:
    std::vector<SystemId> labels_;
    std::vector<Agent> agents_;
    System observer_;
    std::vector<std::string> observer_agents_;
};

using UniversePtr = std::shared_ptr<const Universe>;

/// Density operator that `observer` assigns to `system` at tick `time`.
/// Construction validates the density-operator postulate and, when
/// `introspective` is set, that the observer's own part is a standard-basis
/// product state.
class RelativeState {
  public:
    RelativeState(UniversePtr universe, System system, System observer, std::size_t time, ComplexMatrix op,
                  Tolerance tol = {}, bool introspective = true);

    /// Pure state `|v><v|` over `system`.
    static RelativeState pure(UniversePtr universe, System system, System observer, const ComplexMatrix &v,
                              Tolerance tol = {}, bool introspective = true);

    const Universe &universe() const { return *universe_; }
    const UniversePtr &universe_ptr() const { return universe_; }
    const System &system() const { return system_; }
    const System &observer() const { return observer_; }
    std::size_t time() const { return time_; }
    const ComplexMatrix &op() const { return op_; }
    bool introspective() const { return introspective_; }
    const Tolerance &tolerance() const { return tol_; }

    std::vector<std::size_t> dims() const { return universe_->dims(system_); }
    /// Position of each label of `sub` among this state's factors.
    std::vector<std::size_t> local_factors(const System &sub) const;
    /// Standard-basis index of a label, assuming its reduced state is a basis state.
    std::optional<std::size_t> basis_value(const std::string &label) const;

    RelativeState with(ComplexMatrix op, std::size_t time) const;

  private:
    struct Unchecked {};
    RelativeState(Unchecked, UniversePtr universe, System system, System observer, std::size_t time,
                  ComplexMatrix op, Tolerance tol, bool introspective);
    friend RelativeState subsystem_state(const RelativeState &state, const System &sub);

    UniversePtr universe_;
    System system_;
    System observer_;
    std::size_t time_;
    ComplexMatrix op_;
    Tolerance tol_;
    bool introspective_;
};

enum class StepKind { Unitary, Measure, Decohere };

std::string to_string(StepKind k);

/// One tick of evolution.
///
/// `Unitary` applies `matrix` to `target` (in universe order). `Measure` is a
/// branching measurement by `actor` of `target` in `basis`; the outcome index
/// is shifted into every label of `slots`. `Decohere` is the non-selective
/// version: no branching, optionally also recording into `slots`.
struct DynamicalStep {
    StepKind kind = StepKind::Unitary;
    std::string id;
    std::string actor;
    System target;
    std::optional<ComplexMatrix> matrix;
    std::vector<ComplexMatrix> basis;
    std::vector<std::string> outcome_labels;
    std::vector<std::string> slots;
    /// Realized outcome index for a `Measure` step inside a history.
    std::optional<std::size_t> outcome;
    /// Name of the classical alternative this step belongs to, if any.
    std::string alternative;

    std::string outcome_label(std::size_t i) const;
    void validate(const Universe &u, Tolerance tol) const;
};

/// Structural equality: kind, actor, target, slots, and matrices within eps.
bool same_structure(const DynamicalStep &a, const DynamicalStep &b, Tolerance tol);

/// `shift^k` on a `dim`-level register: |m> -> |m+k mod dim>.
ComplexMatrix shift_operator(std::size_t dim, std::size_t k);

/// Kraus operators of `step` over the factors of `system`. A `Measure` step
/// with a realized outcome yields one operator; without one, one per outcome.
std::vector<ComplexMatrix> kraus_operators(const DynamicalStep &step, const Universe &u, const System &system);

std::vector<double> born_distribution(const RelativeState &state, const System &target,
                                      const std::vector<ComplexMatrix> &basis);

/// `U op U†` with `U` over the state's full system.
RelativeState apply_unitary(const RelativeState &state, const ComplexMatrix &u);

struct Branch {
    std::size_t outcome;
    double probability;
    RelativeState state;
};

/// Branches with probability at or below eps are omitted.
std::vector<Branch> measure_and_record(const RelativeState &state, const DynamicalStep &step);

/// Non-selective measurement. The caller is responsible for the admissibility
/// gate on `step.actor`; see `protocol.hpp`.
RelativeState decohere(const RelativeState &state, const DynamicalStep &step);

/// One tick of `step` (a Measure step must carry its realized outcome; the
/// result is renormalized). Operators are applied locally on the step's
/// labels.
RelativeState apply_step(const RelativeState &state, const DynamicalStep &step);

/// Unnormalized `sum_i K_i rho K_i†` over the Kraus operators of `step`.
ComplexMatrix apply_kraus(const RelativeState &state, const DynamicalStep &step);

/// Partial trace onto `sub`; same time and observer.
RelativeState subsystem_state(const RelativeState &state, const System &sub);

/// Nonzero intersection of operator supports. Supports are intersected by a
/// joint rank test with threshold sqrt(eps) on Gram-Schmidt residual norms,
/// which for pure inputs is `|<a|b>| = 1` within eps.
bool compatible(const ComplexMatrix &rho1, const ComplexMatrix &rho2, Tolerance tol = {});

/// Named measurement bases used by the scenario builders and the protocol file format.
std::vector<ComplexMatrix> standard_basis(std::size_t dim);
/// {|ok>, |fail>, |01>, |10>} on two qubits, with |fail> = (|00>+|11>)/sqrt(2)
/// and |ok> = (|00>-|11>)/sqrt(2).
std::vector<ComplexMatrix> lab_basis();
/// GHZ-type basis on three qubits; element 0 is (|000>+|111>)/sqrt(2).
std::vector<ComplexMatrix> ghz_basis();

} // namespace epiq
