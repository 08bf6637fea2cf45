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

#include "epiq/observer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>

namespace epiq {

namespace {

std::vector<std::size_t> positions_in(const Universe &u, const System &outer, const System &inner) {
    std::vector<std::size_t> out;
    const auto order = u.ordered(outer);
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (inner.contains(order[i])) {
            out.push_back(i);
        }
    }
    return out;
}

System support_of(const DynamicalStep &s) {
    System l = s.target;
    l.insert(s.slots.begin(), s.slots.end());
    return l;
}

/// Frobenius inner product <a, b> = tr(a† b).
cplx frobenius(const ComplexMatrix &a, const ComplexMatrix &b) {
    cplx s = 0.0;
    const auto x = a.entries();
    const auto y = b.entries();
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += std::conj(x[i]) * y[i];
    }
    return s;
}

/// Splits `k` over dims (dr, dx) as u (x) t. Returns t, or nothing.
std::optional<ComplexMatrix> kron_right_factor(const ComplexMatrix &k, std::size_t dr, std::size_t dx, double tol) {
    const auto block = [&](std::size_t r, std::size_t c) {
        ComplexMatrix b(dx, dx);
        for (std::size_t i = 0; i < dx; ++i) {
            for (std::size_t j = 0; j < dx; ++j) {
                b(i, j) = k(r * dx + i, c * dx + j);
            }
        }
        return b;
    };
    double best = -1.0;
    ComplexMatrix t(dx, dx);
    for (std::size_t r = 0; r < dr; ++r) {
        for (std::size_t c = 0; c < dr; ++c) {
            auto b = block(r, c);
            const double n = b.norm();
            if (n > best) {
                best = n;
                t = std::move(b);
            }
        }
    }
    if (best <= tol) {
        return std::nullopt;
    }
    const cplx tt = frobenius(t, t);
    ComplexMatrix u(dr, dr);
    for (std::size_t r = 0; r < dr; ++r) {
        for (std::size_t c = 0; c < dr; ++c) {
            u(r, c) = frobenius(t, block(r, c)) / tt;
        }
    }
    if (max_abs_diff(tensor(u, t), k) > tol) {
        return std::nullopt;
    }
    return t;
}

/// Unitary with column v equal to the given state for each listed v, the
/// remaining columns completed from the standard basis.
ComplexMatrix encoder_for(std::size_t d, const std::vector<std::size_t> &values,
                          const std::vector<ComplexMatrix> &states) {
    ComplexMatrix enc(d, d);
    std::vector<ComplexMatrix> basis = states;
    std::vector<bool> used(d, false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        used[values[i]] = true;
        for (std::size_t r = 0; r < d; ++r) {
            enc(r, values[i]) = states[i](r, 0);
        }
    }
    std::size_t next_std = 0;
    for (std::size_t v = 0; v < d; ++v) {
        if (used[v]) {
            continue;
        }
        for (; next_std < d; ++next_std) {
            auto w = ComplexMatrix::basis_vector(d, next_std);
            for (const auto &b : basis) {
                w -= b * inner(b, w);
            }
            const double n = w.norm();
            if (n > 1e-6) {
                w *= cplx{1.0 / n};
                for (std::size_t r = 0; r < d; ++r) {
                    enc(r, v) = w(r, 0);
                }
                basis.push_back(std::move(w));
                ++next_std;
                break;
            }
        }
    }
    return enc;
}

} // namespace

RecordCheck check_record(const RelativeState &state, const System &a, const System &b) {
    const Universe &u = state.universe();
    const Tolerance tol = state.tolerance();
    if (a.empty() || b.empty()) {
        throw InvariantError("record test needs two non-empty systems");
    }
    if (u.dimension(a) != u.dimension(b)) {
        throw DimensionError("record test needs systems of equal dimension");
    }
    System joint = a;
    joint.insert(b.begin(), b.end());
    const auto reduced = subsystem_state(state, joint).op();
    const auto dims = u.dims(joint);
    const auto pa = positions_in(u, joint, a);
    const auto pb = positions_in(u, joint, b);
    const std::size_t da = u.dimension(a);
    const double slack = std::sqrt(tol.eps);

    RecordCheck out;
    std::vector<ComplexMatrix> conditionals;
    for (std::size_t v = 0; v < da; ++v) {
        const auto proj = embed(projector(ComplexMatrix::basis_vector(da, v)), dims, pa);
        const auto cut = proj * reduced * proj;
        const double p = cut.trace().real();
        if (p <= tol.eps) {
            out.zero_prob_values.push_back(v);
            continue;
        }
        auto sigma = partial_trace(cut, dims, pb);
        sigma *= cplx{1.0 / p};
        const double purity = (sigma * sigma).trace().real();
        if (purity < 1.0 - slack) {
            out.reason = "conditional state for value " + std::to_string(v) + " is mixed";
            return out;
        }
        for (std::size_t j = 0; j < conditionals.size(); ++j) {
            if (std::abs((sigma * conditionals[j]).trace()) > slack) {
                out.reason = "conditional states for values " + std::to_string(out.values[j]) + " and " +
                             std::to_string(v) + " overlap";
                return out;
            }
        }
        out.values.push_back(v);
        const auto eig = eigh(sigma, tol);
        out.conditional_states.push_back(eig.vectors.back());
        conditionals.push_back(std::move(sigma));
    }
    out.holds = true;
    out.encoder = encoder_for(da, out.values, out.conditional_states);
    return out;
}

bool is_record(const RelativeState &state, const System &a, const System &b) {
    return check_record(state, a, b).holds;
}

std::optional<ComplexMatrix> factor_on(const DynamicalStep &step, const Universe &u, const System &x, Tolerance tol) {
    const System support = support_of(step);
    System xs;
    std::set_intersection(x.begin(), x.end(), support.begin(), support.end(), std::inserter(xs, xs.begin()));
    if (xs.empty()) {
        return ComplexMatrix::identity(u.dimension(x));
    }
    const auto labels = u.ordered(support);
    std::vector<std::size_t> dims;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        dims.push_back(u.dim(labels[i]));
        if (!xs.contains(labels[i])) {
            order.push_back(i);
        }
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (xs.contains(labels[i])) {
            order.push_back(i);
        }
    }
    const std::size_t dx = u.dimension(xs);
    const std::size_t dr = u.dimension(support) / dx;

    std::optional<ComplexMatrix> common;
    for (const auto &k : kraus_operators(step, u, support)) {
        const auto moved = permute_factors(k, dims, order);
        const double scale = tol.eps * std::max(1.0, moved.norm());
        auto t = kron_right_factor(moved, dr, dx, scale);
        if (!t) {
            return std::nullopt;
        }
        // Only unitary dynamics on x (up to a scalar) leaves a record intact.
        const auto gram = t->adjoint() * *t;
        const double c = gram.trace().real() / static_cast<double>(dx);
        if (!(c > 0.0) || !approx_equal(gram, ComplexMatrix::identity(dx) * cplx{c}, Tolerance(tol.eps * c))) {
            return std::nullopt;
        }
        *t *= cplx{1.0 / std::sqrt(c)};
        if (!common) {
            common = std::move(*t);
            continue;
        }
        const cplx phase = frobenius(*common, *t) / static_cast<double>(dx);
        if (std::abs(std::abs(phase) - 1.0) > tol.eps || max_abs_diff(*t, *common * phase) > tol.eps) {
            return std::nullopt;
        }
    }
    return embed(*common, u.dims(x), positions_in(u, x, xs));
}

namespace {

bool single_valued(const RelativeState &state, const System &a) {
    const auto rho = subsystem_state(state, a).op();
    std::size_t positive = 0;
    for (std::size_t i = 0; i < rho.rows(); ++i) {
        positive += rho(i, i).real() > state.tolerance().eps ? 1 : 0;
    }
    return positive == 1;
}

/// Memoized search for record chains along one history.
class ChainSearch {
  public:
    ChainSearch(const Protocol &pi, std::size_t h) : pi_(pi), h_(pi.history(h)), u_(pi.universe()) {
        for (const auto &l : u_.labels()) {
            names_.push_back(l.name);
        }
        if (names_.size() > 24) {
            throw InvariantError("record search supports at most 24 labels");
        }
    }

    std::uint32_t mask(const System &s) const {
        std::uint32_t m = 0;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (s.contains(names_[i])) {
                m |= 1u << i;
            }
        }
        return m;
    }

    System system(std::uint32_t m) const {
        System s;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (m & (1u << i)) {
                s.insert(names_[i]);
            }
        }
        return s;
    }

    /// Whether the information held by `y` just before step t can be copied
    /// forward to the end of the history; fills `next` with the copy used.
    bool ok(std::size_t t, std::uint32_t y) {
        const auto key = std::make_pair(t, y);
        if (const auto it = memo_.find(key); it != memo_.end()) {
            return it->second.has_value();
        }
        std::optional<std::uint32_t> found;
        const System ys = system(y);
        const auto &step = h_.steps[t - 1];
        if (single_valued(h_.states[t - 1], ys)) {
            // A definite value carries no information that could be lost.
            memo_[key] = y;
            vacuous_.insert(key);
            return true;
        }
        for (const auto x : candidates(y)) {
            const System xs = system(x);
            if (!factors(t, x, step)) {
                continue;
            }
            if (!is_record(h_.states[t - 1], ys, xs)) {
                continue;
            }
            if (t == h_.length() || ok(t + 1, x)) {
                found = x;
                break;
            }
        }
        memo_[key] = found;
        return found.has_value();
    }

    std::uint32_t next(std::size_t t, std::uint32_t y) const { return *memo_.at({t, y}); }
    bool vacuous(std::size_t t, std::uint32_t y) const { return vacuous_.contains({t, y}); }

  private:
    bool factors(std::size_t t, std::uint32_t x, const DynamicalStep &step) {
        const auto key = std::make_pair(t, x);
        if (const auto it = factor_memo_.find(key); it != factor_memo_.end()) {
            return it->second;
        }
        const bool f = factor_on(step, u_, system(x), pi_.tolerance()).has_value();
        factor_memo_[key] = f;
        return f;
    }

    /// Label sets of the same dimension as `y`: `y` itself first, then the
    /// rest in lexicographic order of their universe positions.
    const std::vector<std::uint32_t> &candidates(std::uint32_t y) {
        if (const auto it = cands_.find(y); it != cands_.end()) {
            return it->second;
        }
        const std::size_t d = u_.dimension(system(y));
        std::vector<std::vector<std::size_t>> keyed;
        const std::uint32_t n = static_cast<std::uint32_t>(names_.size());
        for (std::uint32_t m = 1; m < (1u << n); ++m) {
            if (m == y) {
                continue;
            }
            std::size_t dm = 1;
            std::vector<std::size_t> idx;
            for (std::uint32_t i = 0; i < n && dm <= d; ++i) {
                if (m & (1u << i)) {
                    dm *= u_.labels()[i].dim;
                    idx.push_back(i);
                }
            }
            if (dm == d) {
                keyed.push_back(std::move(idx));
            }
        }
        std::sort(keyed.begin(), keyed.end());
        std::vector<std::uint32_t> out{y};
        for (const auto &idx : keyed) {
            std::uint32_t m = 0;
            for (auto i : idx) {
                m |= 1u << i;
            }
            out.push_back(m);
        }
        return cands_[y] = std::move(out);
    }

    const Protocol &pi_;
    const History &h_;
    const Universe &u_;
    std::vector<std::string> names_;
    std::map<std::pair<std::size_t, std::uint32_t>, std::optional<std::uint32_t>> memo_;
    std::map<std::pair<std::size_t, std::uint32_t>, bool> factor_memo_;
    std::set<std::pair<std::size_t, std::uint32_t>> vacuous_;
    std::map<std::uint32_t, std::vector<std::uint32_t>> cands_;
};

} // namespace

PersistenceResult informationally_persistent(const Protocol &pi, std::size_t h, const System &a) {
    if (a.empty()) {
        throw InvariantError("persistence needs a non-empty system");
    }
    ChainSearch search(pi, h);
    const auto y = search.mask(a);
    const std::size_t n = pi.history(h).length();
    PersistenceResult r;
    for (std::size_t t = 1; t <= n; ++t) {
        if (!search.ok(t, y)) {
            r.failing_starts.push_back(t);
        }
    }
    r.persistent = r.failing_starts.empty();
    if (r.persistent) {
        auto cur = y;
        for (std::size_t t = 1; t <= n; ++t) {
            if (!search.ok(t, cur)) {
                cur = y;
            }
            const bool vacuous = search.vacuous(t, cur);
            cur = search.next(t, cur);
            r.chain.push_back(search.system(cur));
            r.carrier_ops.push_back(
                vacuous ? std::nullopt
                        : factor_on(pi.history(h).steps[t - 1], pi.universe(), r.chain.back(), pi.tolerance()));
        }
    }
    return r;
}

AdmissibilityVerdict admissible_observer(const Protocol &pi, const std::string &candidate) {
    const System a = pi.universe().resolve(candidate);
    AdmissibilityVerdict v;
    v.candidate = candidate;
    v.perspective = pi.background();

    std::vector<PersistenceResult> per;
    std::vector<bool> persistent;
    for (std::size_t h = 0; h < pi.histories().size(); ++h) {
        per.push_back(informationally_persistent(pi, h, a));
        persistent.push_back(per.back().persistent);
        if (per.back().persistent) {
            v.persistent_histories.push_back(pi.history(h).id);
            if (v.witness_history.empty()) {
                v.witness_history = pi.history(h).id;
                v.witness_chain = per.back().chain;
            }
        }
    }
    for (std::size_t t = 0; t <= pi.length() && !v.known_time; ++t) {
        for (std::size_t h = 0; h < pi.histories().size(); ++h) {
            const auto c = cell(pi, h, t);
            const bool any = std::any_of(c.members.begin(), c.members.end(), [&](auto i) { return persistent[i]; });
            if (!any) {
                v.known_history = h;
                v.known_time = t;
                break;
            }
        }
    }
    v.admissible = !v.known_time.has_value();
    if (!v.admissible) {
        const auto &fails = per[*v.known_history].failing_starts;
        v.erasure_time = fails.back();
        v.erasure_step = pi.history(*v.known_history).steps[fails.back() - 1].id;
        v.witness_chain.clear();
        v.witness_history.clear();
    }
    return v;
}

CommunityVerdict observer_community(const Protocol &pi, const std::vector<std::string> &members) {
    CommunityVerdict out;
    out.members = members;
    for (const auto &m : members) {
        if (!pi.universe().has_agent(m)) {
            throw ProtocolError("unknown system '" + m + "'");
        }
    }
    std::map<std::string, Protocol> anchored;
    for (const auto &a : members) {
        PairVerdict bg{a, "", admissible_observer(pi, a).admissible};
        out.pairs.push_back(bg);
        for (const auto &b : members) {
            if (b == a) {
                continue;
            }
            auto it = anchored.find(b);
            if (it == anchored.end()) {
                it = anchored.emplace(b, reanchor(pi, b)).first;
            }
            out.pairs.push_back({a, b, admissible_observer(it->second, a).admissible});
        }
    }
    for (const auto &p : out.pairs) {
        if (!p.admissible) {
            out.first_failure = p;
            break;
        }
    }
    out.community = !out.first_failure.has_value();
    return out;
}

GateFn admissibility_gate() {
    return [](const std::string &actor, const Protocol &minimal) {
        return admissible_observer(minimal, actor).admissible;
    };
}

Protocol build_gated(std::shared_ptr<const ProtocolSpec> spec, BuildOptions options) {
    options.gate = admissibility_gate();
    return build_protocol(std::move(spec), std::move(options));
}

Protocol build_gated(const ProtocolSpec &spec, BuildOptions options) {
    return build_gated(std::make_shared<const ProtocolSpec>(spec), std::move(options));
}

} // namespace epiq
