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

#include "epiq/checker.hpp"

#include <algorithm>

#include "epiq/observer.hpp"

namespace epiq {

namespace {

bool realizes(const History &h, std::size_t time, const std::string &label) {
    const auto it = h.outcomes.find(time);
    return it != h.outcomes.end() && h.steps[time - 1].outcome_label(it->second) == label;
}

bool halted(const Protocol &pi, const History &h) {
    const auto &halt = pi.spec().halt;
    if (halt.empty()) {
        return false;
    }
    return std::all_of(halt.begin(), halt.end(),
                       [&](const auto &c) { return realizes(h, *pi.step_time(c.first), c.second); });
}

bool is_background(const Protocol &pi, const std::string &agent) {
    return pi.background().size() == 1 && pi.background().front() == agent;
}

} // namespace

Checker::Checker(const Protocol &pi) : pi_(pi) {}

void Checker::bind(const Formula &f) const {
    switch (f.kind) {
    case FormulaKind::Outcome: {
        const auto steps = pi_.branching_steps();
        if (std::find(steps.begin(), steps.end(), f.step) == steps.end()) {
            if (!pi_.step_time(f.step)) {
                throw BindError("unknown step '" + f.step + "'");
            }
            throw BindError("step '" + f.step + "' is not a branching measurement in this protocol");
        }
        const auto &spec = pi_.spec().step(f.step);
        const auto &rendered = pi_.history(0).steps[*pi_.step_time(f.step) - 1];
        const std::size_t n = std::max(spec.outcomes.size(), rendered.basis.size());
        bool known = false;
        for (std::size_t i = 0; i < n && !known; ++i) {
            known = rendered.outcome_label(i) == f.label;
        }
        if (!known) {
            throw BindError("step '" + f.step + "' has no outcome '" + f.label + "'");
        }
        return;
    }
    case FormulaKind::Know:
    case FormulaKind::Possible:
        if (!pi_.universe().has_agent(f.agent)) {
            throw BindError("unknown agent '" + f.agent + "'");
        }
        bind(*f.lhs);
        return;
    default:
        if (f.lhs) {
            bind(*f.lhs);
        }
        if (f.rhs) {
            bind(*f.rhs);
        }
    }
}

bool Checker::admissible_wrt(const std::string &outer, const std::string &inner) {
    const auto key = std::make_pair(outer, inner);
    if (const auto it = admissible_.find(key); it != admissible_.end()) {
        return it->second;
    }
    bool ok = false;
    if (outer.empty()) {
        const auto &bg = pi_.background();
        ok = std::find(bg.begin(), bg.end(), inner) != bg.end() || admissible_observer(pi_, inner).admissible;
    } else if (outer == inner) {
        ok = true;
    } else {
        auto it = anchored_.find(outer);
        if (it == anchored_.end()) {
            it = anchored_.emplace(outer, reanchor(pi_, outer)).first;
        }
        ok = admissible_observer(it->second, inner).admissible;
    }
    admissible_[key] = ok;
    return ok;
}

WellFormedness Checker::well_formed(const Formula &f) {
    bind(f);
    WellFormedness w;
    // Depth-first, left to right; the first failing pair is reported.
    std::vector<std::pair<const Formula *, std::string>> stack{{&f, std::string()}};
    while (!stack.empty() && w.ok) {
        auto [node, outer] = stack.back();
        stack.pop_back();
        std::string enclosing = outer;
        if (node->is_modal()) {
            if (!admissible_wrt(outer, node->agent)) {
                w.ok = false;
                w.failing = std::make_pair(outer, node->agent);
                break;
            }
            enclosing = node->agent;
        }
        if (node->rhs) {
            stack.emplace_back(node->rhs.get(), enclosing);
        }
        if (node->lhs) {
            stack.emplace_back(node->lhs.get(), enclosing);
        }
    }
    return w;
}

void Checker::check_well_formed(const Formula &f) {
    const auto w = well_formed(f);
    if (!w.ok) {
        throw IllFormedError(w.failing->first, w.failing->second);
    }
}

const std::vector<std::size_t> &Checker::cell_of(const std::string &agent, std::size_t h, std::size_t t) {
    auto &table = cells_[agent];
    if (table.empty()) {
        table.resize(points());
        const System labels = pi_.universe().resolve(agent);
        for (std::size_t hh = 0; hh < pi_.histories().size(); ++hh) {
            for (std::size_t tt = 0; tt <= pi_.length(); ++tt) {
                const auto c = is_background(pi_, agent) ? cell(pi_, hh, tt) : agent_cell(pi_, labels, hh, tt);
                table[index(hh, tt)] = c.members;
            }
        }
    }
    return table[index(h, t)];
}

const TruthSet &Checker::truth(const Formula &f) {
    const auto key = to_string(f);
    if (const auto it = truth_.find(key); it != truth_.end()) {
        return it->second;
    }
    auto set = compute(f);
    return truth_.emplace(key, std::move(set)).first->second;
}

TruthSet Checker::compute(const Formula &f) {
    const std::size_t hn = pi_.histories().size();
    const std::size_t tn = pi_.length() + 1;
    TruthSet out(points(), false);
    switch (f.kind) {
    case FormulaKind::True:
        out.assign(points(), true);
        break;
    case FormulaKind::False:
        break;
    case FormulaKind::Halted:
        for (std::size_t h = 0; h < hn; ++h) {
            const bool v = halted(pi_, pi_.history(h));
            for (std::size_t t = 0; t < tn; ++t) {
                out[index(h, t)] = v;
            }
        }
        break;
    case FormulaKind::Outcome: {
        // Absolute-time atom: readable at every point of the history.
        const auto time = *pi_.step_time(f.step);
        for (std::size_t h = 0; h < hn; ++h) {
            const bool v = realizes(pi_.history(h), time, f.label);
            for (std::size_t t = 0; t < tn; ++t) {
                out[index(h, t)] = v;
            }
        }
        break;
    }
    case FormulaKind::Not: {
        const auto &a = truth(*f.lhs);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = !a[i];
        }
        break;
    }
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies: {
        const TruthSet a = truth(*f.lhs);
        const auto &b = truth(*f.rhs);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = f.kind == FormulaKind::And  ? (a[i] && b[i])
                     : f.kind == FormulaKind::Or ? (a[i] || b[i])
                                                 : (!a[i] || b[i]);
        }
        break;
    }
    case FormulaKind::Know:
    case FormulaKind::Possible: {
        const TruthSet a = truth(*f.lhs);
        const bool know = f.kind == FormulaKind::Know;
        for (std::size_t h = 0; h < hn; ++h) {
            for (std::size_t t = 0; t < tn; ++t) {
                const auto &members = cell_of(f.agent, h, t);
                const auto holds = [&](std::size_t m) { return static_cast<bool>(a[index(m, t)]); };
                out[index(h, t)] = know ? std::all_of(members.begin(), members.end(), holds)
                                        : std::any_of(members.begin(), members.end(), holds);
            }
        }
        break;
    }
    }
    return out;
}

bool Checker::eval(const Formula &f, std::size_t h, std::size_t t) {
    if (h >= pi_.histories().size() || t > pi_.length()) {
        throw ProtocolError("evaluation point out of range");
    }
    check_well_formed(f);
    return truth(f)[index(h, t)];
}

bool Checker::valid(const Formula &f) {
    check_well_formed(f);
    const auto &set = truth(f);
    return std::all_of(set.begin(), set.end(), [](bool b) { return b; });
}

WellFormedness well_formed(const Formula &f, const Protocol &pi) { return Checker(pi).well_formed(f); }

bool eval(const Formula &f, const Protocol &pi, std::size_t h, std::size_t t) { return Checker(pi).eval(f, h, t); }

bool valid(const Formula &f, const Protocol &pi) { return Checker(pi).valid(f); }

std::vector<FormulaPtr> formula_battery(const Protocol &pi, const std::vector<std::string> &agents) {
    std::vector<FormulaPtr> level0;
    for (const auto &step : pi.branching_steps()) {
        for (const auto &label : pi.realized_outcomes(step)) {
            level0.push_back(Formula::outcome(step, label));
        }
    }
    if (!pi.spec().halt.empty()) {
        level0.push_back(Formula::halted());
    }
    level0.push_back(Formula::truth());
    level0.push_back(Formula::falsity());
    const std::size_t atoms = level0.size();
    for (std::size_t i = 0; i < atoms; ++i) {
        level0.push_back(Formula::negation(level0[i]));
    }
    std::vector<FormulaPtr> level1;
    for (const auto &a : agents) {
        for (const auto &f : level0) {
            level1.push_back(Formula::know(a, f));
            level1.push_back(Formula::possible(a, f));
        }
    }
    for (std::size_t i = 0; i < level0.size(); ++i) {
        for (std::size_t j = i + 1; j < level0.size(); ++j) {
            level1.push_back(Formula::conjunction(level0[i], level0[j]));
            level1.push_back(Formula::disjunction(level0[i], level0[j]));
        }
    }
    std::vector<FormulaPtr> out = level0;
    out.insert(out.end(), level1.begin(), level1.end());
    for (const auto &a : agents) {
        for (const auto &f : level1) {
            out.push_back(Formula::know(a, f));
            out.push_back(Formula::possible(a, f));
        }
    }
    return out;
}

AxiomReport axiom_suite(const Protocol &pi, const std::vector<std::string> &community) {
    AxiomReport r;
    r.community = community;
    r.community_ok = observer_community(pi, community).community;
    if (!r.community_ok) {
        return r;
    }
    Checker c(pi);
    const auto battery = formula_battery(pi, community);
    r.battery_size = battery.size();
    const std::size_t tn = pi.length() + 1;
    const auto first_gap = [&](const TruthSet &lhs, const TruthSet &rhs) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            if (lhs[i] && !rhs[i]) {
                return i;
            }
        }
        return std::nullopt;
    };
    const auto record = [&](const std::string &axiom, const Formula &f, std::size_t i) {
        r.counterexamples.push_back({axiom, to_string(f), i / tn, i % tn});
    };

    std::vector<TruthSet> sets;
    for (const auto &f : battery) {
        sets.push_back(c.truth(*f));
    }
    r.factivity = true;
    for (const auto &a : community) {
        for (std::size_t i = 0; i < battery.size(); ++i) {
            const auto k = Formula::know(a, battery[i]);
            ++r.factivity_checked;
            if (const auto gap = first_gap(c.truth(*k), sets[i])) {
                r.factivity = false;
                record("factivity", *Formula::implication(k, battery[i]), *gap);
            }
        }
    }
    r.monotonicity = true;
    for (const auto &a : community) {
        std::vector<TruthSet> known;
        for (const auto &f : battery) {
            known.push_back(c.truth(*Formula::know(a, f)));
        }
        for (std::size_t i = 0; i < battery.size(); ++i) {
            for (std::size_t j = 0; j < battery.size(); ++j) {
                if (i == j || first_gap(sets[i], sets[j])) {
                    continue;
                }
                ++r.monotonicity_checked;
                if (const auto gap = first_gap(known[i], known[j])) {
                    r.monotonicity = false;
                    record("monotonicity",
                           *Formula::implication(Formula::know(a, battery[i]), Formula::know(a, battery[j])), *gap);
                }
            }
        }
    }
    r.knowledge_transfer = true;
    for (const auto &a : community) {
        for (const auto &b : community) {
            for (const auto &f : battery) {
                const auto lhs = Formula::know(a, Formula::know(b, f));
                const auto rhs = Formula::know(a, f);
                ++r.transfer_checked;
                if (const auto gap = first_gap(c.truth(*lhs), c.truth(*rhs))) {
                    r.knowledge_transfer = false;
                    record("knowledge transfer", *Formula::implication(lhs, rhs), *gap);
                }
            }
        }
    }
    return r;
}

} // namespace epiq
