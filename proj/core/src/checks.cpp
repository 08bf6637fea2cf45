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

#include "epiq/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "epiq/observer.hpp"
#include "epiq/spec_file.hpp"

namespace epiq {

namespace {

std::string trimmed(const std::string &s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> comma_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trimmed(part);
        if (!part.empty()) {
            out.push_back(part);
        }
    }
    return out;
}

bool expect_bool(const std::string &s) {
    if (s == "true") {
        return true;
    }
    if (s == "false") {
        return false;
    }
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// "<head> at t=<k> [history=<id>]"
struct Point {
    std::string head;
    std::size_t time = 0;
    std::size_t history = 0;
};

Point split_point(const Protocol &pi, const std::string &subject) {
    const auto at = subject.rfind(" at ");
    if (at == std::string::npos) {
        throw std::invalid_argument("missing 'at t=<k>'");
    }
    Point p;
    p.head = trimmed(subject.substr(0, at));
    std::stringstream ss(subject.substr(at + 4));
    std::string tok;
    bool have_t = false;
    while (ss >> tok) {
        if (tok.rfind("t=", 0) == 0) {
            p.time = std::stoul(tok.substr(2));
            have_t = true;
        } else if (tok.rfind("history=", 0) == 0) {
            const auto idx = pi.history_index(tok.substr(8));
            if (!idx) {
                throw std::invalid_argument("unknown history '" + tok.substr(8) + "'");
            }
            p.history = *idx;
        } else {
            throw std::invalid_argument("unexpected '" + tok + "'");
        }
    }
    if (!have_t || p.time > pi.length()) {
        throw std::invalid_argument("time out of range");
    }
    return p;
}

/// Labels in the listed order; agent names expand to their labels.
std::vector<std::string> expand(const Universe &u, const std::vector<std::string> &names) {
    std::vector<std::string> out;
    for (const auto &n : names) {
        for (const auto &l : u.ordered(u.resolve(n))) {
            out.push_back(l);
        }
    }
    return out;
}

bool outcomes_agree(const History &a, const History &b) {
    for (const auto &[t, o] : a.outcomes) {
        const auto it = b.outcomes.find(t);
        if (it != b.outcomes.end() &&
            a.steps[t - 1].outcome_label(o) != b.steps[t - 1].outcome_label(it->second)) {
            return false;
        }
    }
    return true;
}

CheckResult agree(const Protocol &pi, const CheckSpec &c) {
    CheckResult r{c, "", false, ""};
    const auto on = c.subject.find(" on ");
    if (on == std::string::npos) {
        throw std::invalid_argument("expected '<agent> on <labels> at t=<k>'");
    }
    const std::string agent = trimmed(c.subject.substr(0, on));
    const auto point = split_point(pi, c.subject.substr(on + 4));
    const auto labels = expand(pi.universe(), comma_list(point.head));
    const System target(labels.begin(), labels.end());

    BuildOptions ext_opts = pi.options();
    ext_opts.extended = {agent};
    ext_opts.minimal = false;
    ext_opts.gate_override = false;
    const Protocol extended = build_gated(pi.spec_ptr(), ext_opts);
    const Protocol anchored = reanchor(pi, agent);

    bool all = true;
    double worst = 0.0;
    std::string detail;
    for (const Protocol *other : {&extended, &anchored}) {
        for (std::size_t h1 = 0; h1 < pi.histories().size(); ++h1) {
            const auto mine = described_state(pi, h1, point.time, target);
            for (std::size_t h2 = 0; h2 < other->histories().size(); ++h2) {
                if (!outcomes_agree(pi.history(h1), other->history(h2))) {
                    continue;
                }
                const auto theirs = described_state(*other, h2, point.time, target);
                const auto rep = protocol_compatible(pi, mine, theirs, target, point.time);
                worst = std::max(worst, rep.distance);
                if (!rep.compatible) {
                    all = false;
                    detail = (other == &extended ? "extended cut" : "re-anchored") + std::string(" history ") +
                             other->history(h2).id + " differs (distance " + fmt(rep.distance) + ")";
                }
            }
        }
    }
    r.measured = all ? "true" : "false";
    if (detail.empty()) {
        detail = "max distance " + fmt(worst);
    }
    r.detail = detail;
    r.passed = all == expect_bool(c.expected);
    return r;
}

} // namespace

ComplexMatrix parse_state_expression(const std::string &text, const Universe &u,
                                     const std::vector<std::string> &labels) {
    std::vector<std::size_t> dims;
    for (const auto &l : labels) {
        dims.push_back(u.dim(l));
    }
    const std::size_t n = product(dims);
    std::vector<std::pair<double, std::vector<cplx>>> terms;
    const auto body = trimmed(text);
    if (body.rfind("mix(", 0) == 0 && body.back() == ')') {
        std::stringstream ss(body.substr(4, body.size() - 5));
        std::string term;
        while (std::getline(ss, term, ';')) {
            const auto colon = term.find(':');
            if (colon == std::string::npos) {
                throw std::invalid_argument("mixture terms look like 'w: a, b, ...'");
            }
            terms.emplace_back(parse_number(term.substr(0, colon), true), parse_amplitudes(term.substr(colon + 1)));
        }
    } else {
        terms.emplace_back(1.0, parse_amplitudes(body));
    }
    ComplexMatrix rho = ComplexMatrix::zeros(n, n);
    for (auto &[w, amps] : terms) {
        if (amps.size() != n) {
            throw std::invalid_argument("state expression has " + std::to_string(amps.size()) +
                                        " amplitudes, expected " + std::to_string(n));
        }
        const auto v = ComplexMatrix::column(amps);
        rho += v * v.adjoint() * cplx{w};
    }
    const System sys(labels.begin(), labels.end());
    const auto sorted = u.ordered(sys);
    std::vector<std::size_t> order;
    for (const auto &l : sorted) {
        order.push_back(static_cast<std::size_t>(std::find(labels.begin(), labels.end(), l) - labels.begin()));
    }
    return permute_factors(rho, dims, order);
}

CheckResult run_check(Checker &checker, const CheckSpec &c) {
    const Protocol &pi = checker.protocol();
    const double tol = c.tolerance > 0.0 ? c.tolerance : pi.tolerance().eps;
    CheckResult r{c, "", false, ""};
    try {
        if (c.kind == "prob") {
            const auto f = parse_formula(c.subject);
            double p = 0.0;
            for (std::size_t h = 0; h < pi.histories().size(); ++h) {
                if (checker.eval(*f, h, pi.length())) {
                    p += pi.history(h).weight();
                }
            }
            const double want = parse_number(c.expected, true);
            r.measured = fmt(p);
            r.detail = "deviation " + fmt(std::abs(p - want));
            r.passed = std::abs(p - want) <= tol;
        } else if (c.kind == "admissible") {
            std::string candidate = c.subject;
            const Protocol *in = &pi;
            std::optional<Protocol> anchored;
            if (const auto as = c.subject.find(" as "); as != std::string::npos) {
                candidate = trimmed(c.subject.substr(0, as));
                anchored = reanchor(pi, trimmed(c.subject.substr(as + 4)));
                in = &*anchored;
            }
            const auto v = admissible_observer(*in, candidate);
            r.measured = v.admissible ? "true" : "false";
            if (!v.admissible) {
                r.detail = "known at history " + in->history(*v.known_history).id + ", t=" +
                           std::to_string(*v.known_time) + "; erased by " + v.erasure_step;
            } else {
                r.detail = "persistent in " + std::to_string(v.persistent_histories.size()) + " histories";
            }
            r.passed = v.admissible == expect_bool(c.expected);
        } else if (c.kind == "community") {
            const auto v = observer_community(pi, comma_list(c.subject));
            r.measured = v.community ? "true" : "false";
            if (v.first_failure) {
                r.detail = v.first_failure->agent + " not admissible wrt " +
                           (v.first_failure->relative_to.empty() ? "background" : v.first_failure->relative_to);
            }
            r.passed = v.community == expect_bool(c.expected);
        } else if (c.kind == "valid") {
            const bool v = checker.valid(*parse_formula(c.subject));
            r.measured = v ? "true" : "false";
            r.passed = v == expect_bool(c.expected);
        } else if (c.kind == "wellformed") {
            const auto w = checker.well_formed(*parse_formula(c.subject));
            r.measured = w.ok ? "true" : w.failing->first + "," + w.failing->second;
            r.passed = r.measured == c.expected;
        } else if (c.kind == "record") {
            const auto point = split_point(pi, c.subject);
            const auto arrow = point.head.find("->");
            if (arrow == std::string::npos) {
                throw std::invalid_argument("expected '<labels> -> <labels>'");
            }
            const auto a = expand(pi.universe(), comma_list(point.head.substr(0, arrow)));
            const auto b = expand(pi.universe(), comma_list(point.head.substr(arrow + 2)));
            const auto rc = check_record(pi.history(point.history).states[point.time], System(a.begin(), a.end()),
                                         System(b.begin(), b.end()));
            r.measured = rc.holds ? "true" : "false";
            r.detail = rc.reason;
            r.passed = rc.holds == expect_bool(c.expected);
        } else if (c.kind == "state") {
            const auto point = split_point(pi, c.subject);
            const auto labels = expand(pi.universe(), comma_list(point.head));
            const auto want = parse_state_expression(c.expected, pi.universe(), labels);
            const auto got =
                described_state(pi, point.history, point.time, System(labels.begin(), labels.end()));
            const double dev = max_abs_diff(want, got);
            r.measured = "deviation " + fmt(dev);
            r.passed = dev <= tol;
        } else if (c.kind == "agree") {
            return agree(pi, c);
        } else {
            throw std::invalid_argument("unknown check kind '" + c.kind + "'");
        }
    } catch (const IllFormedError &e) {
        r.measured = "ill-formed";
        r.detail = e.what();
        r.passed = false;
    } catch (const std::exception &e) {
        r.measured = "error";
        r.detail = e.what();
        r.passed = false;
    }
    return r;
}

std::vector<CheckResult> run_checks(const Protocol &pi, const std::vector<CheckSpec> &checks) {
    Checker checker(pi);
    std::vector<CheckResult> out;
    for (const auto &c : checks) {
        out.push_back(run_check(checker, c));
    }
    return out;
}

} // namespace epiq
