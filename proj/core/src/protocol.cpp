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

#include "epiq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace epiq {

Universe ProtocolSpec::universe() const { return Universe(labels, agents); }

const StepSpec &ProtocolSpec::step(const std::string &id) const {
    for (const auto &s : steps) {
        if (s.id == id) {
            return s;
        }
    }
    throw ProtocolError("unknown step '" + id + "'");
}

std::optional<std::size_t> ProtocolSpec::step_time(const std::string &id) const {
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (steps[k].id == id) {
            return k + 1;
        }
    }
    return std::nullopt;
}

std::vector<ComplexMatrix> resolve_basis(const StepSpec &s, std::size_t dim) {
    if (s.basis_name.empty() || s.basis_name == "explicit") {
        if (s.basis.size() != dim) {
            throw ProtocolError("step '" + s.id + "' basis has " + std::to_string(s.basis.size()) +
                                " vectors, target dimension is " + std::to_string(dim));
        }
        return s.basis;
    }
    if (s.basis_name == "std") {
        return standard_basis(dim);
    }
    if (s.basis_name == "lab" && dim == 4) {
        return lab_basis();
    }
    if (s.basis_name == "ghz" && dim == 8) {
        return ghz_basis();
    }
    throw ProtocolError("step '" + s.id + "' uses basis '" + s.basis_name + "' on a target of dimension " +
                        std::to_string(dim));
}

ComplexMatrix resolve_gate(const StepSpec &s, const std::vector<std::size_t> &dims) {
    const std::size_t n = product(dims);
    if (s.matrix) {
        if (s.matrix->rows() != n || !s.matrix->is_square()) {
            throw ProtocolError("step '" + s.id + "' matrix does not match its target dimension");
        }
        return *s.matrix;
    }
    const double r = 1.0 / std::sqrt(2.0);
    const auto &g = s.gate;
    if (g == "I") {
        return ComplexMatrix::identity(n);
    }
    if (dims.size() == 1) {
        if (g == "X") {
            return shift_operator(dims[0], 1);
        }
        if (g == "H" && dims[0] == 2) {
            return ComplexMatrix::from_rows({{r, r}, {r, -r}});
        }
        if (g == "Z" && dims[0] == 2) {
            return ComplexMatrix::from_rows({{1, 0}, {0, -1}});
        }
    }
    if (dims.size() == 2) {
        const std::size_t d0 = dims[0];
        const std::size_t d1 = dims[1];
        if (g == "CNOT") {
            // |a, b> -> |a, b + a mod d1>
            ComplexMatrix m(n, n);
            for (std::size_t a = 0; a < d0; ++a) {
                for (std::size_t b = 0; b < d1; ++b) {
                    m(a * d1 + (b + a) % d1, a * d1 + b) = 1.0;
                }
            }
            return m;
        }
        if (g == "SWAP" && d0 == d1) {
            ComplexMatrix m(n, n);
            for (std::size_t a = 0; a < d0; ++a) {
                for (std::size_t b = 0; b < d1; ++b) {
                    m(b * d1 + a, a * d1 + b) = 1.0;
                }
            }
            return m;
        }
        if (g == "CH" && d0 == 2 && d1 == 2) {
            return ComplexMatrix::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, r, r}, {0, 0, r, -r}});
        }
    }
    throw ProtocolError("step '" + s.id + "' uses unknown gate '" + g + "' for its target");
}

namespace {

std::string coords(const std::string &history, std::size_t t) {
    return "history " + history + ", t=" + std::to_string(t);
}

std::vector<std::string> effective_background(const ProtocolSpec &spec, const BuildOptions &opts) {
    if (!opts.background.empty()) {
        return opts.background;
    }
    std::vector<std::string> out;
    for (const auto &a : spec.agents) {
        if (a.role == Role::Observer) {
            out.push_back(a.name);
        }
    }
    return out;
}

System spec_target(const StepSpec &s, bool with_slots) {
    System t(s.target.begin(), s.target.end());
    if (with_slots) {
        t.insert(s.slots.begin(), s.slots.end());
    }
    return t;
}

ComplexMatrix premeasurement(const DynamicalStep &nonselective, const Universe &u, const System &on) {
    const auto ks = kraus_operators(nonselective, u, on);
    ComplexMatrix sum = ComplexMatrix::zeros(ks.front().rows(), ks.front().cols());
    for (const auto &k : ks) {
        sum += k;
    }
    return sum;
}

struct Renderer {
    const ProtocolSpec &spec;
    const Universe &u;
    const BuildOptions &opts;
    std::set<std::string> bg;

    bool collapses(const StepSpec &s) const {
        if (bg.contains(s.actor)) {
            return true;
        }
        for (const auto &slot : s.slots) {
            for (const auto &name : bg) {
                if (u.agent(name).labels.contains(slot)) {
                    return true;
                }
            }
        }
        return false;
    }

    /// Agents that end up with non-selective steps.
    std::set<std::string> decohering_actors() const {
        std::set<std::string> out;
        for (const auto &s : spec.steps) {
            if (s.kind == StepSpecKind::Decohere && !opts.minimal) {
                out.insert(s.actor);
            }
            if (s.kind == StepSpecKind::Measure && !collapses(s) && opts.extended.contains(s.actor)) {
                out.insert(s.actor);
            }
        }
        return out;
    }

    DynamicalStep render(const StepSpec &s, const std::string &alternative) const {
        DynamicalStep d;
        d.id = s.id;
        d.actor = s.actor;
        d.alternative = s.when;
        const bool applies = s.when.empty() || s.when == alternative;
        const bool has_slots = s.kind != StepSpecKind::Unitary;
        if (!applies) {
            d.kind = StepKind::Unitary;
            d.target = spec_target(s, has_slots);
            d.matrix = ComplexMatrix::identity(u.dimension(d.target));
            return d;
        }
        if (s.kind == StepSpecKind::Unitary) {
            d.kind = StepKind::Unitary;
            d.target = spec_target(s, false);
            // The gate is written for the listed label order; move it to universe order.
            std::vector<std::size_t> dims;
            for (const auto &l : s.target) {
                dims.push_back(u.dim(l));
            }
            ComplexMatrix g = resolve_gate(s, dims);
            const auto sorted = u.ordered(d.target);
            std::vector<std::size_t> order;
            for (const auto &l : sorted) {
                order.push_back(static_cast<std::size_t>(
                    std::find(s.target.begin(), s.target.end(), l) - s.target.begin()));
            }
            d.matrix = permute_factors(g, dims, order);
            return d;
        }
        d.target = spec_target(s, false);
        d.basis = basis_in_universe_order(s);
        d.outcome_labels = s.outcomes;
        d.slots = s.slots;
        if (s.kind == StepSpecKind::Decohere && !opts.minimal) {
            d.kind = StepKind::Decohere;
            return d;
        }
        if (s.kind == StepSpecKind::Decohere && s.slots.empty()) {
            d.kind = StepKind::Unitary;
            d.matrix = ComplexMatrix::identity(u.dimension(d.target));
            d.basis.clear();
            return d;
        }
        if (s.kind == StepSpecKind::Measure && collapses(s)) {
            d.kind = StepKind::Measure;
            return d;
        }
        if (s.kind == StepSpecKind::Measure && opts.extended.contains(s.actor)) {
            d.kind = StepKind::Decohere;
            return d;
        }
        DynamicalStep nonselective = d;
        nonselective.kind = StepKind::Decohere;
        d.kind = StepKind::Unitary;
        d.target = spec_target(s, true);
        d.matrix = premeasurement(nonselective, u, d.target);
        d.basis.clear();
        d.slots.clear();
        return d;
    }

    std::vector<ComplexMatrix> basis_in_universe_order(const StepSpec &s) const {
        std::vector<std::size_t> dims;
        for (const auto &l : s.target) {
            dims.push_back(u.dim(l));
        }
        auto basis = resolve_basis(s, product(dims));
        const auto sorted = u.ordered(spec_target(s, false));
        std::vector<std::size_t> order;
        for (const auto &l : sorted) {
            order.push_back(
                static_cast<std::size_t>(std::find(s.target.begin(), s.target.end(), l) - s.target.begin()));
        }
        for (auto &b : basis) {
            b = permute_factors(b, dims, order);
        }
        return basis;
    }
};

ComplexMatrix initial_vector(const ProtocolSpec &spec, const Universe &u, Tolerance tol) {
    std::vector<ComplexMatrix> blocks;
    std::vector<std::string> concat;
    std::vector<std::size_t> concat_dims;
    std::set<std::string> covered;
    for (const auto &f : spec.initial) {
        std::size_t d = 1;
        for (const auto &l : f.labels) {
            if (!covered.insert(l).second) {
                throw ProtocolError("initial state assigns label '" + l + "' twice");
            }
            d *= u.dim(l);
            concat.push_back(l);
            concat_dims.push_back(u.dim(l));
        }
        if (f.amplitudes.size() != d) {
            throw ProtocolError("initial amplitudes for " + f.labels.front() + " have the wrong length");
        }
        auto v = ComplexMatrix::column(f.amplitudes);
        if (std::abs(v.norm() - 1.0) > tol.eps) {
            throw ProtocolError("initial vector over " + f.labels.front() + "... is not normalized");
        }
        blocks.push_back(std::move(v));
    }
    for (const auto &l : u.labels()) {
        if (!covered.contains(l.name)) {
            blocks.push_back(ComplexMatrix::basis_vector(l.dim, 0));
            concat.push_back(l.name);
            concat_dims.push_back(l.dim);
        }
    }
    const auto full = tensor_all(blocks);
    std::vector<std::size_t> order;
    for (const auto &l : u.labels()) {
        order.push_back(static_cast<std::size_t>(std::find(concat.begin(), concat.end(), l.name) - concat.begin()));
    }
    return permute_factors(full, concat_dims, order);
}

void validate_spec(const ProtocolSpec &spec, const Universe &u) {
    std::set<std::string> ids;
    for (const auto &s : spec.steps) {
        if (!ids.insert(s.id).second) {
            throw ProtocolError("duplicate step id '" + s.id + "'");
        }
        if (s.target.empty()) {
            throw ProtocolError("step '" + s.id + "' has no target");
        }
        for (const auto &l : s.target) {
            if (!u.has_label(l)) {
                throw ProtocolError("step '" + s.id + "' targets unknown label '" + l + "'");
            }
        }
        if (s.kind != StepSpecKind::Unitary && !s.actor.empty() && !u.has_agent(s.actor)) {
            throw ProtocolError("step '" + s.id + "' names unknown actor '" + s.actor + "'");
        }
        if (s.kind == StepSpecKind::Measure && s.slots.empty()) {
            throw ProtocolError("measurement '" + s.id + "' has no memory slot");
        }
        for (const auto &slot : s.slots) {
            if (!u.has_label(slot)) {
                throw ProtocolError("step '" + s.id + "' writes unknown label '" + slot + "'");
            }
        }
        if (!s.when.empty()) {
            const bool known = std::any_of(spec.priors.begin(), spec.priors.end(),
                                           [&](const auto &a) { return a.name == s.when; });
            if (!known) {
                throw ProtocolError("step '" + s.id + "' refers to unknown alternative '" + s.when + "'");
            }
        }
    }
    double total = 0.0;
    for (const auto &a : spec.priors) {
        if (!(a.weight > 0.0)) {
            throw ProtocolError("alternative '" + a.name + "' needs a positive weight");
        }
        total += a.weight;
    }
    if (!spec.priors.empty() && std::abs(total - 1.0) > 1e-9) {
        throw ProtocolError("alternative weights sum to " + std::to_string(total) + ", not 1");
    }
    for (const auto &[step, label] : spec.halt) {
        if (!spec.step_time(step)) {
            throw ProtocolError("halt condition names unknown step '" + step + "'");
        }
        (void)label;
    }
}

} // namespace

Protocol::Protocol(std::shared_ptr<const ProtocolSpec> spec, BuildOptions options, UniversePtr universe,
                   std::vector<History> histories, std::vector<std::string> warnings)
    : spec_(std::move(spec)), options_(std::move(options)), universe_(std::move(universe)),
      histories_(std::move(histories)), warnings_(std::move(warnings)) {
    if (histories_.empty()) {
        throw ProtocolError("protocol has no histories");
    }
    length_ = histories_.front().length();
    for (const auto &h : histories_) {
        if (h.length() != length_) {
            throw ProtocolError("histories of different length", "history " + h.id);
        }
        if (!approx_equal(h.states.front().op(), histories_.front().states.front().op(), options_.tol)) {
            throw ProtocolError("histories do not share the initial state", "history " + h.id);
        }
    }
    background_ = universe_->observer_agents();
    // Cells only shrink with t, so a pair split at t-1 stays split.
    cell_classes_.assign(length_ + 1, std::vector<std::size_t>(histories_.size()));
    for (std::size_t t = 0; t <= length_; ++t) {
        std::vector<std::size_t> reps;
        for (std::size_t h = 0; h < histories_.size(); ++h) {
            std::size_t k = 0;
            for (; k < reps.size(); ++k) {
                const auto g = reps[k];
                if ((t == 0 || cell_classes_[t - 1][g] == cell_classes_[t - 1][h]) &&
                    same_prefix(*this, histories_[g], histories_[h], t)) {
                    break;
                }
            }
            if (k == reps.size()) {
                reps.push_back(h);
            }
            cell_classes_[t][h] = k;
        }
    }
}

std::optional<std::size_t> Protocol::history_index(const std::string &id) const {
    for (std::size_t i = 0; i < histories_.size(); ++i) {
        if (histories_[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> Protocol::step_time(const std::string &id) const { return spec_->step_time(id); }

std::vector<std::string> Protocol::branching_steps() const {
    std::vector<std::string> out;
    for (const auto &s : histories_.front().steps) {
        if (s.kind == StepKind::Measure) {
            out.push_back(s.id);
        }
    }
    // Steps that branch only in some alternatives.
    for (const auto &h : histories_) {
        for (const auto &s : h.steps) {
            if (s.kind == StepKind::Measure && std::find(out.begin(), out.end(), s.id) == out.end()) {
                out.push_back(s.id);
            }
        }
    }
    return out;
}

std::vector<std::string> Protocol::realized_outcomes(const std::string &step_id) const {
    std::vector<std::string> out;
    const auto t = step_time(step_id);
    if (!t) {
        return out;
    }
    for (const auto &h : histories_) {
        const auto it = h.outcomes.find(*t);
        if (it == h.outcomes.end()) {
            continue;
        }
        const auto label = h.steps[*t - 1].outcome_label(it->second);
        if (std::find(out.begin(), out.end(), label) == out.end()) {
            out.push_back(label);
        }
    }
    return out;
}

Protocol build_protocol(const ProtocolSpec &spec, BuildOptions options) {
    return build_protocol(std::make_shared<const ProtocolSpec>(spec), std::move(options));
}

Protocol build_protocol(std::shared_ptr<const ProtocolSpec> spec_ptr, BuildOptions options) {
    const ProtocolSpec &spec = *spec_ptr;
    const auto background = effective_background(spec, options);
    if (background.empty()) {
        throw ProtocolError("protocol declares no observer");
    }
    auto universe = std::make_shared<const Universe>(spec.universe().reanchored(background));
    const Universe &u = *universe;
    validate_spec(spec, u);
    const Tolerance tol = options.tol;

    Renderer renderer{spec, u, options, std::set<std::string>(background.begin(), background.end())};
    std::vector<std::string> warnings;

    const auto decohering = renderer.decohering_actors();
    if (!decohering.empty()) {
        std::optional<Protocol> minimal;
        if (options.gate) {
            BuildOptions mopts = options;
            mopts.extended.clear();
            mopts.minimal = true;
            mopts.gate = {};
            minimal = build_protocol(spec_ptr, mopts);
        }
        for (const auto &actor : decohering) {
            const bool approved = minimal && options.gate(actor, *minimal);
            if (approved) {
                continue;
            }
            const std::string why = minimal ? "is not an admissible observer in the minimal cut"
                                            : "has not been checked by an admissibility gate";
            if (!options.gate_override && !spec.gate_override) {
                throw GateError("non-selective steps by '" + actor + "' rejected: '" + actor + "' " + why);
            }
            warnings.push_back("gate override: '" + actor + "' " + why + "; its non-selective steps run anyway");
        }
    }

    const ComplexMatrix psi0 = initial_vector(spec, u, tol);
    std::vector<Alternative> alts = spec.priors;
    if (alts.empty()) {
        alts.push_back({"", 1.0});
    }

    std::vector<History> done;
    for (const auto &alt : alts) {
        History root;
        root.alternative = alt.name;
        root.prior = alt.weight;
        root.id = alt.name;
        try {
            root.states.push_back(
                RelativeState::pure(universe, u.all(), u.observer(), psi0, tol, options.introspective));
        } catch (const InvariantError &e) {
            throw ProtocolError(e.what(), coords(alt.name.empty() ? "main" : alt.name, 0));
        }
        std::vector<History> frontier{std::move(root)};
        for (std::size_t k = 0; k < spec.steps.size(); ++k) {
            const std::size_t t = k + 1;
            std::vector<History> next;
            for (auto &h : frontier) {
                DynamicalStep step = renderer.render(spec.steps[k], alt.name);
                const auto &cur = h.states.back();
                const std::string where = coords(h.id.empty() ? "main" : h.id, t);
                try {
                    step.validate(u, tol);
                    if (step.kind != StepKind::Measure) {
                        h.states.push_back(apply_step(cur, step));
                        h.steps.push_back(std::move(step));
                        next.push_back(std::move(h));
                    } else {
                        auto branches = measure_and_record(cur, step);
                        for (auto &b : branches) {
                            History child = h;
                            DynamicalStep realized = step;
                            realized.outcome = b.outcome;
                            child.outcomes[t] = b.outcome;
                            child.branch_prob *= b.probability;
                            const std::string tag = step.id + "=" + step.outcome_label(b.outcome);
                            child.id = child.id.empty() ? tag : child.id + "/" + tag;
                            child.states.push_back(std::move(b.state));
                            child.steps.push_back(std::move(realized));
                            next.push_back(std::move(child));
                        }
                    }
                } catch (const ProtocolError &) {
                    throw;
                } catch (const std::invalid_argument &e) {
                    throw ProtocolError(e.what(), where);
                } catch (const InvariantError &e) {
                    throw ProtocolError(e.what(), where);
                }
            }
            frontier = std::move(next);
        }
        for (auto &h : frontier) {
            if (h.id.empty()) {
                h.id = "main";
            }
            done.push_back(std::move(h));
        }
    }

    double total = 0.0;
    for (const auto &h : done) {
        total += h.weight();
    }
    if (std::abs(total - 1.0) > tol.eps * 10) {
        throw ProtocolError("history weights sum to " + std::to_string(total));
    }
    for (const auto &h : done) {
        verify_history(h, tol);
    }
    for (const auto &s : spec.states) {
        const auto sys = System(s.labels.begin(), s.labels.end());
        bool matched = false;
        for (const auto &h : done) {
            if (!s.history.empty() && h.id != s.history) {
                continue;
            }
            matched = true;
            if (s.time >= h.states.size()) {
                throw ProtocolError("stored state time out of range", coords(h.id, s.time));
            }
            std::vector<std::size_t> dims;
            for (const auto &l : s.labels) {
                dims.push_back(u.dim(l));
            }
            auto v = ComplexMatrix::column(s.amplitudes);
            if (v.rows() != product(dims)) {
                throw ProtocolError("stored state has the wrong length", coords(h.id, s.time));
            }
            std::vector<std::size_t> order;
            const auto sorted = u.ordered(sys);
            for (const auto &l : sorted) {
                order.push_back(
                    static_cast<std::size_t>(std::find(s.labels.begin(), s.labels.end(), l) - s.labels.begin()));
            }
            v = permute_factors(v, dims, order);
            const auto expected = v * v.adjoint();
            const auto derived = subsystem_state(h.states[s.time], sys).op();
            if (!approx_equal(expected, derived, tol)) {
                throw ProtocolError("stored state of " + s.labels.front() + "... does not match re-derivation",
                                    coords(h.id, s.time));
            }
        }
        if (!matched) {
            throw ProtocolError("stored state names unknown history '" + s.history + "'");
        }
    }
    return Protocol(std::move(spec_ptr), std::move(options), std::move(universe), std::move(done),
                    std::move(warnings));
}

Protocol minimal_cut(const Protocol &pi) {
    BuildOptions opts = pi.options();
    opts.extended.clear();
    opts.minimal = true;
    opts.gate = {};
    opts.gate_override = false;
    return build_protocol(pi.spec_ptr(), opts);
}

Protocol reanchor(const Protocol &pi, const std::string &agent) {
    if (!pi.universe().has_agent(agent)) {
        throw ProtocolError("unknown system '" + agent + "'");
    }
    BuildOptions opts = pi.options();
    opts.background = {agent};
    opts.extended.clear();
    opts.minimal = true;
    opts.gate = {};
    opts.gate_override = false;
    opts.introspective = false;
    return build_protocol(pi.spec_ptr(), opts);
}

void verify_history(const History &h, Tolerance tol) {
    for (std::size_t k = 1; k < h.states.size(); ++k) {
        ComplexMatrix next = apply_kraus(h.states[k - 1], h.steps[k - 1]);
        const double tr = next.trace().real();
        if (!(tr > 0.0)) {
            throw ProtocolError("step annihilates the state", coords(h.id, k));
        }
        next *= cplx{1.0 / tr};
        if (max_abs_diff(next, h.states[k].op()) > tol.eps) {
            throw ProtocolError("stored state does not match re-derivation", coords(h.id, k));
        }
        if (h.states[k].time() != k) {
            throw ProtocolError("state time index out of sequence", coords(h.id, k));
        }
    }
}

HistoryPrefix restrict(const History &h, std::size_t t) {
    if (t > h.length()) {
        throw ProtocolError("restriction time " + std::to_string(t) + " exceeds history length " +
                            std::to_string(h.length()));
    }
    HistoryPrefix p;
    p.states.assign(h.states.begin(), h.states.begin() + static_cast<std::ptrdiff_t>(t + 1));
    p.steps.assign(h.steps.begin(), h.steps.begin() + static_cast<std::ptrdiff_t>(t));
    return p;
}

bool same_prefix(const Protocol &pi, const History &a, const History &b, std::size_t t) {
    const Tolerance tol = pi.tolerance();
    const auto &disclose = pi.spec().disclose_at;
    const bool hidden = !disclose || t < *disclose;
    for (std::size_t k = 1; k <= t; ++k) {
        const auto &sa = a.steps[k - 1];
        const auto &sb = b.steps[k - 1];
        if (sa.outcome != sb.outcome) {
            return false;
        }
        const bool masked = hidden && !sa.alternative.empty() && sa.alternative == sb.alternative;
        if (masked ? sa.id != sb.id : !same_structure(sa, sb, tol)) {
            return false;
        }
    }
    // Undisclosed alternatives differ in their actual states; the background
    // can only compare its own part of them.
    const bool same_alt = a.alternative == b.alternative;
    const System &own = pi.universe().observer();
    for (std::size_t k = 0; k <= t; ++k) {
        if (same_alt) {
            if (!approx_equal(a.states[k].op(), b.states[k].op(), tol)) {
                return false;
            }
        } else if (!own.empty()) {
            if (!approx_equal(subsystem_state(a.states[k], own).op(), subsystem_state(b.states[k], own).op(),
                              tol)) {
                return false;
            }
        }
    }
    return true;
}

EpistemicCell cell(const Protocol &pi, std::size_t h, std::size_t t) {
    if (h >= pi.histories().size()) {
        throw ProtocolError("history index out of range");
    }
    if (t > pi.length()) {
        throw ProtocolError("time out of range");
    }
    EpistemicCell c{h, t, {}};
    for (std::size_t i = 0; i < pi.histories().size(); ++i) {
        if (pi.cell_class(i, t) == pi.cell_class(h, t)) {
            c.members.push_back(i);
        }
    }
    return c;
}

EpistemicCell agent_cell(const Protocol &pi, const System &agent, std::size_t h, std::size_t t) {
    if (h >= pi.histories().size() || t > pi.length()) {
        throw ProtocolError("cell coordinates out of range");
    }
    EpistemicCell c{h, t, {}};
    const auto &anchor = pi.history(h);
    for (std::size_t i = 0; i < pi.histories().size(); ++i) {
        bool same = true;
        const auto &other = pi.history(i);
        for (std::size_t k = 0; k <= t && same && i != h; ++k) {
            same = approx_equal(subsystem_state(anchor.states[k], agent).op(),
                                subsystem_state(other.states[k], agent).op(), pi.tolerance());
        }
        if (same) {
            c.members.push_back(i);
        }
    }
    return c;
}

ComplexMatrix described_state(const Protocol &pi, std::size_t h, std::size_t t, const System &target) {
    const auto c = cell(pi, h, t);
    std::optional<ComplexMatrix> mix;
    double total = 0.0;
    for (auto i : c.members) {
        const auto &m = pi.history(i);
        auto part = subsystem_state(m.states[t], target).op();
        part *= cplx{m.weight()};
        total += m.weight();
        if (mix) {
            *mix += part;
        } else {
            mix = std::move(part);
        }
    }
    *mix *= cplx{1.0 / total};
    return *mix;
}

namespace {

struct TargetMeasurement {
    std::string id;
    std::vector<std::string> labels;
    std::vector<ComplexMatrix> projectors; // on the target space
    std::size_t time = 0;
};

std::vector<TargetMeasurement> measurements_within(const Protocol &pi, const System &target) {
    const Universe &u = pi.universe();
    std::vector<TargetMeasurement> out;
    const auto order = u.ordered(target);
    const auto dims = u.dims(target);
    Renderer r{pi.spec(), u, pi.options(), {}};
    for (const auto &s : pi.spec().steps) {
        if (s.kind == StepSpecKind::Unitary) {
            continue;
        }
        const System st(s.target.begin(), s.target.end());
        if (!std::includes(target.begin(), target.end(), st.begin(), st.end())) {
            continue;
        }
        std::vector<std::size_t> pos;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (st.contains(order[i])) {
                pos.push_back(i);
            }
        }
        TargetMeasurement m;
        m.id = s.id;
        m.time = *pi.step_time(s.id);
        const auto basis = r.basis_in_universe_order(s);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            m.labels.push_back(i < s.outcomes.size() ? s.outcomes[i] : std::to_string(i));
            m.projectors.push_back(embed(projector(basis[i]), dims, pos));
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<double> born(const ComplexMatrix &rho, const TargetMeasurement &m) {
    std::vector<double> p;
    for (const auto &proj : m.projectors) {
        p.push_back(std::max(0.0, (proj * rho).trace().real()));
    }
    return p;
}

} // namespace

CompatibilityReport protocol_compatible(const Protocol &pi, const ComplexMatrix &desc1, const ComplexMatrix &desc2,
                                        const System &target, std::size_t time) {
    const Tolerance tol = pi.tolerance();
    const std::size_t d = pi.universe().dimension(target);
    if (desc1.rows() != d || desc2.rows() != d) {
        throw DimensionError("protocol_compatible: descriptions do not live on the target space");
    }
    const auto ms = measurements_within(pi, target);

    auto commutes = [&](const TargetMeasurement &x, const TargetMeasurement &y) {
        for (const auto &p : x.projectors) {
            for (const auto &q : y.projectors) {
                if (max_abs_diff(p * q, q * p) > tol.eps) {
                    return false;
                }
            }
        }
        return true;
    };
    auto tv = [](const std::vector<double> &p, const std::vector<double> &q) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += 0.5 * std::abs(p[i] - q[i]);
        }
        return s;
    };

    struct Node {
        ComplexMatrix a;
        ComplexMatrix b;
        std::vector<std::string> events;
        std::set<std::size_t> used;
    };

    CompatibilityReport report;
    report.compatible = true;
    for (const auto &m : ms) {
        if (m.time <= time) {
            continue;
        }
        // Past outcomes that can be known jointly with m.
        std::vector<const TargetMeasurement *> past;
        for (const auto &c : ms) {
            if (c.time <= time && commutes(c, m)) {
                past.push_back(&c);
            }
        }
        std::optional<MeasurementDistance> best;
        std::deque<Node> queue{{desc1, desc2, {}, {}}};
        std::set<std::set<std::string>> seen{{}};
        while (!queue.empty()) {
            Node n = std::move(queue.front());
            queue.pop_front();
            MeasurementDistance md{m.id, born(n.a, m), born(n.b, m), 0.0, n.events};
            md.distance = tv(md.p1, md.p2);
            if (!best || md.distance < best->distance) {
                best = md;
            }
            if (best->distance < tol.eps) {
                break;
            }
            for (std::size_t k = 0; k < past.size(); ++k) {
                if (n.used.contains(k)) {
                    continue;
                }
                const auto &c = *past[k];
                const auto pa = born(n.a, c);
                const auto pb = born(n.b, c);
                for (std::size_t o = 0; o < c.projectors.size(); ++o) {
                    if (pa[o] <= tol.eps || pb[o] <= tol.eps) {
                        continue;
                    }
                    auto events = n.events;
                    events.push_back(c.id + "=" + c.labels[o]);
                    if (!seen.insert(std::set<std::string>(events.begin(), events.end())).second) {
                        continue;
                    }
                    auto used = n.used;
                    used.insert(k);
                    const auto &p = c.projectors[o];
                    queue.push_back({p * n.a * p * cplx{1.0 / pa[o]}, p * n.b * p * cplx{1.0 / pb[o]},
                                     std::move(events), std::move(used)});
                }
            }
        }
        report.distance = std::max(report.distance, best->distance);
        report.compatible = report.compatible && best->distance < tol.eps;
        report.per_measurement.push_back(std::move(*best));
    }
    return report;
}

double probability(const Protocol &pi, const std::function<bool(const History &)> &pred) {
    double p = 0.0;
    for (const auto &h : pi.histories()) {
        if (pred(h)) {
            p += h.weight();
        }
    }
    return p;
}

} // namespace epiq
