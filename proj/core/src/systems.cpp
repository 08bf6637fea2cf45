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

#include "epiq/systems.hpp"

#include <algorithm>
#include <cmath>

namespace epiq {

std::string to_string(Role r) {
    switch (r) {
    case Role::Observer:
        return "observer";
    case Role::Candidate:
        return "candidate";
    case Role::Plain:
        return "plain";
    }
    return "plain";
}

std::string to_string(StepKind k) {
    switch (k) {
    case StepKind::Unitary:
        return "unitary";
    case StepKind::Measure:
        return "measure";
    case StepKind::Decohere:
        return "decohere";
    }
    return "unitary";
}

Universe::Universe(std::vector<SystemId> labels, std::vector<Agent> agents)
    : labels_(std::move(labels)), agents_(std::move(agents)) {
    std::set<std::string> seen;
    for (const auto &l : labels_) {
        if (l.name.empty()) {
            throw InvariantError("empty label name");
        }
        if (l.dim < 2) {
            throw InvariantError("label '" + l.name + "' must have dimension >= 2");
        }
        if (!seen.insert(l.name).second) {
            throw InvariantError("duplicate label '" + l.name + "'");
        }
    }
    std::set<std::string> agent_names;
    std::set<std::string> memory_seen;
    for (const auto &a : agents_) {
        if (!agent_names.insert(a.name).second) {
            throw InvariantError("duplicate agent '" + a.name + "'");
        }
        if (a.labels.empty()) {
            throw InvariantError("agent '" + a.name + "' owns no labels");
        }
        for (const auto &l : a.labels) {
            if (!seen.contains(l)) {
                throw InvariantError("agent '" + a.name + "' references unknown label '" + l + "'");
            }
        }
        for (const auto &m : a.memory) {
            if (!a.labels.contains(m)) {
                throw InvariantError("memory label '" + m + "' is not owned by agent '" + a.name + "'");
            }
            if (!memory_seen.insert(m).second) {
                throw InvariantError("memory label '" + m + "' assigned twice");
            }
        }
        if (a.role == Role::Observer) {
            observer_.insert(a.labels.begin(), a.labels.end());
            observer_agents_.push_back(a.name);
        }
    }
}

bool Universe::has_label(const std::string &name) const {
    return std::any_of(labels_.begin(), labels_.end(), [&](const auto &l) { return l.name == name; });
}

bool Universe::has_agent(const std::string &name) const {
    return std::any_of(agents_.begin(), agents_.end(), [&](const auto &a) { return a.name == name; });
}

const Agent &Universe::agent(const std::string &name) const {
    for (const auto &a : agents_) {
        if (a.name == name) {
            return a;
        }
    }
    throw InvariantError("unknown system '" + name + "'");
}

System Universe::resolve(const std::string &name) const {
    if (has_agent(name)) {
        return agent(name).labels;
    }
    if (has_label(name)) {
        return {name};
    }
    throw InvariantError("unknown system '" + name + "'");
}

std::size_t Universe::index(const std::string &label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].name == label) {
            return i;
        }
    }
    throw InvariantError("unknown label '" + label + "'");
}

std::size_t Universe::dim(const std::string &label) const { return labels_[index(label)].dim; }

std::vector<std::size_t> Universe::factors(const System &s) const {
    std::vector<std::size_t> out;
    out.reserve(s.size());
    for (const auto &l : s) {
        out.push_back(index(l));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Universe::ordered(const System &s) const {
    std::vector<std::string> out;
    for (auto i : factors(s)) {
        out.push_back(labels_[i].name);
    }
    return out;
}

std::vector<std::size_t> Universe::dims(const System &s) const {
    std::vector<std::size_t> out;
    for (auto i : factors(s)) {
        out.push_back(labels_[i].dim);
    }
    return out;
}

std::size_t Universe::dimension(const System &s) const {
    const auto d = dims(s);
    return product(d);
}

System Universe::all() const {
    System s;
    for (const auto &l : labels_) {
        s.insert(l.name);
    }
    return s;
}

Universe Universe::reanchored(const std::vector<std::string> &agents) const {
    std::vector<Agent> next = agents_;
    for (auto &a : next) {
        const bool chosen = std::find(agents.begin(), agents.end(), a.name) != agents.end();
        if (chosen) {
            a.role = Role::Observer;
        } else if (a.role == Role::Observer) {
            a.role = Role::Candidate;
        }
    }
    for (const auto &name : agents) {
        if (!has_agent(name)) {
            throw InvariantError("unknown system '" + name + "'");
        }
    }
    return Universe(labels_, std::move(next));
}

namespace {

bool subset_of(const System &a, const System &b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

System intersect(const System &a, const System &b) {
    System out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()));
    return out;
}

std::string describe(const System &s) {
    std::string out = "{";
    for (const auto &l : s) {
        out += (out.size() > 1 ? "," : "") + l;
    }
    return out + "}";
}

} // namespace

RelativeState::RelativeState(UniversePtr universe, System system, System observer, std::size_t time,
                             ComplexMatrix op, Tolerance tol, bool introspective)
    : universe_(std::move(universe)), system_(std::move(system)), observer_(std::move(observer)), time_(time),
      op_(std::move(op)), tol_(tol), introspective_(introspective) {
    if (!universe_) {
        throw InvariantError("relative state without a universe");
    }
    if (system_.empty()) {
        throw InvariantError("relative state over an empty system");
    }
    if (op_.rows() != universe_->dimension(system_) || !op_.is_square()) {
        throw DimensionError("relative state operator does not match system dimension");
    }
    if (!is_hermitian(op_, tol_) || !is_trace_one(op_, tol_) || !is_psd(op_, tol_)) {
        throw InvariantError("state of " + describe(system_) + " at t=" + std::to_string(time_) +
                             " is not a density operator");
    }
    if (!introspective_) {
        return;
    }
    const System own = intersect(system_, observer_);
    if (own.empty()) {
        return;
    }
    const auto reduced = partial_trace(op_, dims(), local_factors(own));
    bool ok = false;
    for (std::size_t k = 0; k < reduced.rows() && !ok; ++k) {
        if (std::abs(reduced(k, k) - cplx{1.0}) < tol_.eps) {
            ok = approx_equal(reduced, projector(ComplexMatrix::basis_vector(reduced.rows(), k)), tol_);
        }
    }
    if (!ok) {
        throw InvariantError("introspection violated at t=" + std::to_string(time_) + ": observer part " +
                             describe(own) + " is not a standard-basis product state");
    }
}

RelativeState RelativeState::pure(UniversePtr universe, System system, System observer, const ComplexMatrix &v,
                                  Tolerance tol, bool introspective) {
    if (!v.is_column() || std::abs(v.norm() - 1.0) > tol.eps) {
        throw NumericError("pure state vector must be a unit column");
    }
    return {std::move(universe), std::move(system), std::move(observer), 0, v * v.adjoint(), tol, introspective};
}

std::vector<std::size_t> RelativeState::local_factors(const System &sub) const {
    if (!subset_of(sub, system_)) {
        throw InvariantError(describe(sub) + " is not a subsystem of " + describe(system_));
    }
    const auto order = universe_->ordered(system_);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (sub.contains(order[i])) {
            out.push_back(i);
        }
    }
    return out;
}

std::optional<std::size_t> RelativeState::basis_value(const std::string &label) const {
    const auto reduced = partial_trace(op_, dims(), local_factors({label}));
    for (std::size_t k = 0; k < reduced.rows(); ++k) {
        if (std::abs(reduced(k, k) - cplx{1.0}) < tol_.eps) {
            return k;
        }
    }
    return std::nullopt;
}

RelativeState RelativeState::with(ComplexMatrix op, std::size_t time) const {
    return {universe_, system_, observer_, time, std::move(op), tol_, introspective_};
}

std::string DynamicalStep::outcome_label(std::size_t i) const {
    if (i < outcome_labels.size()) {
        return outcome_labels[i];
    }
    return std::to_string(i);
}

void DynamicalStep::validate(const Universe &u, Tolerance tol) const {
    if (target.empty()) {
        throw InvariantError("step '" + id + "' has an empty target");
    }
    for (const auto &l : target) {
        if (!u.has_label(l)) {
            throw InvariantError("step '" + id + "' targets unknown label '" + l + "'");
        }
    }
    const std::size_t d = u.dimension(target);
    if (kind == StepKind::Unitary) {
        if (!matrix || matrix->rows() != d || !is_unitary(*matrix, tol)) {
            throw InvariantError("step '" + id + "' is not a unitary on its target");
        }
        return;
    }
    if (!is_orthonormal_basis(basis, d, tol)) {
        throw InvariantError("step '" + id + "' basis is not orthonormal and complete on its target");
    }
    for (const auto &s : slots) {
        if (!u.has_label(s)) {
            throw InvariantError("step '" + id + "' writes unknown memory label '" + s + "'");
        }
        if (target.contains(s)) {
            throw InvariantError("step '" + id + "' records into its own target '" + s + "'");
        }
    }
    if (kind == StepKind::Measure && slots.empty()) {
        throw InvariantError("measurement '" + id + "' has no memory slot");
    }
    if (outcome && *outcome >= basis.size()) {
        throw InvariantError("step '" + id + "' realized outcome out of range");
    }
}

bool same_structure(const DynamicalStep &a, const DynamicalStep &b, Tolerance tol) {
    if (a.kind != b.kind || a.actor != b.actor || a.target != b.target || a.slots != b.slots ||
        a.alternative != b.alternative) {
        return false;
    }
    if (a.matrix.has_value() != b.matrix.has_value()) {
        return false;
    }
    if (a.matrix && !approx_equal(*a.matrix, *b.matrix, tol)) {
        return false;
    }
    if (a.basis.size() != b.basis.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.basis.size(); ++i) {
        if (!approx_equal(a.basis[i], b.basis[i], tol)) {
            return false;
        }
    }
    return true;
}

ComplexMatrix shift_operator(std::size_t dim, std::size_t k) {
    ComplexMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m((i + k) % dim, i) = 1.0;
    }
    return m;
}

namespace {

std::vector<std::size_t> positions(const Universe &u, const System &system, const System &sub) {
    if (!subset_of(sub, system)) {
        throw InvariantError(describe(sub) + " is not a subsystem of " + describe(system));
    }
    const auto order = u.ordered(system);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (sub.contains(order[i])) {
            out.push_back(i);
        }
    }
    return out;
}

System step_support(const DynamicalStep &step) {
    System s = step.target;
    s.insert(step.slots.begin(), step.slots.end());
    return s;
}

ComplexMatrix branch_operator(const DynamicalStep &step, const Universe &u, const System &system, std::size_t i) {
    const auto dims = u.dims(system);
    ComplexMatrix k = embed(projector(step.basis[i]), dims, positions(u, system, step.target));
    for (const auto &slot : step.slots) {
        const auto d = u.dim(slot);
        k = embed(shift_operator(d, i % d), dims, positions(u, system, {slot})) * k;
    }
    return k;
}

} // namespace

std::vector<ComplexMatrix> kraus_operators(const DynamicalStep &step, const Universe &u, const System &system) {
    const auto dims = u.dims(system);
    if (step.kind == StepKind::Unitary) {
        return {embed(*step.matrix, dims, positions(u, system, step.target))};
    }
    if (step.kind == StepKind::Measure && step.outcome) {
        return {branch_operator(step, u, system, *step.outcome)};
    }
    std::vector<ComplexMatrix> out;
    for (std::size_t i = 0; i < step.basis.size(); ++i) {
        out.push_back(branch_operator(step, u, system, i));
    }
    return out;
}

std::vector<double> born_distribution(const RelativeState &state, const System &target,
                                      const std::vector<ComplexMatrix> &basis) {
    const auto local = state.local_factors(target);
    const auto reduced = partial_trace(state.op(), state.dims(), local);
    if (!is_orthonormal_basis(basis, reduced.rows(), state.tolerance())) {
        throw InvariantError("measurement basis is not orthonormal and complete on the target");
    }
    std::vector<double> p;
    p.reserve(basis.size());
    for (const auto &b : basis) {
        const double v = (b.adjoint() * reduced * b)(0, 0).real();
        p.push_back(std::max(0.0, v));
    }
    return p;
}

RelativeState apply_unitary(const RelativeState &state, const ComplexMatrix &u) {
    if (u.rows() != state.op().rows() || !is_unitary(u, state.tolerance())) {
        throw InvariantError("apply_unitary expects a unitary over the full system");
    }
    return state.with(u * state.op() * u.adjoint(), state.time() + 1);
}

std::vector<Branch> measure_and_record(const RelativeState &state, const DynamicalStep &step) {
    if (step.kind != StepKind::Measure) {
        throw InvariantError("measure_and_record expects a Measure step");
    }
    const Universe &u = state.universe();
    step.validate(u, state.tolerance());
    const auto probs = born_distribution(state, step.target, step.basis);
    for (const auto &slot : step.slots) {
        if (state.observer().contains(slot) && state.introspective()) {
            const auto v = state.basis_value(slot);
            if (!v || *v != 0) {
                throw InvariantError("memory slot '" + slot + "' for step '" + step.id + "' is already written");
            }
        }
    }
    std::vector<Branch> out;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= state.tolerance().eps) {
            continue;
        }
        for (const auto &slot : step.slots) {
            if (i >= u.dim(slot)) {
                throw InvariantError("memory slot '" + slot + "' is too small for outcome " +
                                     step.outcome_label(i) + " of step '" + step.id + "'");
            }
        }
        const System support = step_support(step);
        const auto k = branch_operator(step, u, support, i);
        ComplexMatrix next = conjugate_on(k, state.op(), state.dims(), positions(u, state.system(), support));
        next *= cplx{1.0 / probs[i]};
        out.push_back({i, probs[i], state.with(std::move(next), state.time() + 1)});
    }
    return out;
}

RelativeState decohere(const RelativeState &state, const DynamicalStep &step) {
    if (step.kind != StepKind::Decohere) {
        throw InvariantError("decohere expects a Decohere step");
    }
    step.validate(state.universe(), state.tolerance());
    return state.with(apply_kraus(state, step), state.time() + 1);
}

RelativeState apply_step(const RelativeState &state, const DynamicalStep &step) {
    switch (step.kind) {
    case StepKind::Unitary:
        step.validate(state.universe(), state.tolerance());
        return state.with(apply_kraus(state, step), state.time() + 1);
    case StepKind::Decohere:
        return decohere(state, step);
    case StepKind::Measure:
        if (!step.outcome) {
            throw InvariantError("apply_step needs a realized outcome for measurement '" + step.id + "'");
        }
        {
            ComplexMatrix next = apply_kraus(state, step);
            const double p = next.trace().real();
            if (!(p > state.tolerance().eps)) {
                throw InvariantError("outcome of '" + step.id + "' has zero probability");
            }
            next *= cplx{1.0 / p};
            return state.with(std::move(next), state.time() + 1);
        }
    }
    throw InvariantError("unknown step kind");
}

ComplexMatrix apply_kraus(const RelativeState &state, const DynamicalStep &step) {
    const Universe &u = state.universe();
    const System support = step_support(step);
    const auto where = positions(u, state.system(), support);
    ComplexMatrix next = ComplexMatrix::zeros(state.op().rows(), state.op().cols());
    for (const auto &k : kraus_operators(step, u, support)) {
        next += conjugate_on(k, state.op(), state.dims(), where);
    }
    return next;
}

RelativeState::RelativeState(Unchecked, UniversePtr universe, System system, System observer, std::size_t time,
                             ComplexMatrix op, Tolerance tol, bool introspective)
    : universe_(std::move(universe)), system_(std::move(system)), observer_(std::move(observer)), time_(time),
      op_(std::move(op)), tol_(tol), introspective_(introspective) {}

RelativeState subsystem_state(const RelativeState &state, const System &sub) {
    if (sub.empty()) {
        throw InvariantError("relative state over an empty system");
    }
    // A partial trace of a valid state is valid, so skip re-validation.
    const auto local = state.local_factors(sub);
    return {RelativeState::Unchecked{}, state.universe_ptr(), sub, state.observer(), state.time(),
            partial_trace(state.op(), state.dims(), local), state.tolerance(), state.introspective()};
}

bool compatible(const ComplexMatrix &rho1, const ComplexMatrix &rho2, Tolerance tol) {
    if (rho1.rows() != rho2.rows() || !rho1.is_square() || !rho2.is_square()) {
        throw DimensionError("compatible: operators of different dimension");
    }
    const auto s1 = support_basis(rho1, tol);
    const auto s2 = support_basis(rho2, tol);
    std::vector<ComplexMatrix> joint = s1;
    joint.insert(joint.end(), s2.begin(), s2.end());
    // dim(A ∩ B) = dim A + dim B - dim(A + B)
    return s1.size() + s2.size() > rank_of(joint, tol);
}

std::vector<ComplexMatrix> standard_basis(std::size_t dim) {
    std::vector<ComplexMatrix> out;
    for (std::size_t i = 0; i < dim; ++i) {
        out.push_back(ComplexMatrix::basis_vector(dim, i));
    }
    return out;
}

std::vector<ComplexMatrix> lab_basis() {
    const double r = 1.0 / std::sqrt(2.0);
    return {
        ComplexMatrix::column({r, 0, 0, -r}),
        ComplexMatrix::column({r, 0, 0, r}),
        ComplexMatrix::column({0, 1, 0, 0}),
        ComplexMatrix::column({0, 0, 1, 0}),
    };
}

std::vector<ComplexMatrix> ghz_basis() {
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<ComplexMatrix> out;
    for (std::size_t k = 0; k < 4; ++k) {
        for (double sign : {1.0, -1.0}) {
            std::vector<cplx> v(8, 0.0);
            v[k] = r;
            v[7 - k] = sign * r;
            out.push_back(ComplexMatrix::column(std::move(v)));
        }
    }
    return out;
}

} // namespace epiq
