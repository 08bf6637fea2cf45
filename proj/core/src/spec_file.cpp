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

#include "epiq/spec_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace epiq {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_uint(std::string_view s, unsigned long long &out) {
    if (s.empty()) {
        return false;
    }
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_decimal(std::string_view s, double &out) {
    if (s.empty()) {
        return false;
    }
    // from_chars accepts "inf"/"nan"; the grammar does not.
    for (char c : s) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' || c == 'e' ||
              c == 'E')) {
            return false;
        }
    }
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '[' || s[i] == '(') {
            ++depth;
        } else if ((s[i] == ']' || s[i] == ')') && depth > 0) {
            --depth;
        } else if (s[i] == sep && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(s.substr(start)));
    return out;
}

std::vector<std::string> names(std::string_view s) {
    std::vector<std::string> out;
    for (auto part : split(s, ',')) {
        out.emplace_back(part);
    }
    return out;
}

std::string join(const std::vector<std::string> &parts, const char *sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? sep : "") + parts[i];
    }
    return out;
}

/// Whitespace-separated tokens with their 0-based columns; brackets group.
std::vector<std::pair<std::string_view, std::size_t>> tokens(std::string_view line) {
    std::vector<std::pair<std::string_view, std::size_t>> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i >= line.size()) {
            break;
        }
        const std::size_t start = i;
        std::size_t depth = 0;
        while (i < line.size() && (depth > 0 || !std::isspace(static_cast<unsigned char>(line[i])))) {
            if (line[i] == '[') {
                ++depth;
            } else if (line[i] == ']' && depth > 0) {
                --depth;
            }
            ++i;
        }
        out.emplace_back(line.substr(start, i - start), start);
    }
    return out;
}

/// "[[a, b], [c, d]]" -> rows.
std::vector<std::vector<cplx>> parse_rows(std::string_view text) {
    text = trim(text);
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
        throw std::invalid_argument("expected a bracketed list of rows");
    }
    std::vector<std::vector<cplx>> rows;
    for (auto row : split(text.substr(1, text.size() - 2), ',')) {
        if (row.size() < 2 || row.front() != '[' || row.back() != ']') {
            throw std::invalid_argument("expected a bracketed row, got '" + std::string(row) + "'");
        }
        rows.push_back(parse_amplitudes(row.substr(1, row.size() - 2)));
    }
    if (rows.empty()) {
        throw std::invalid_argument("empty row list");
    }
    return rows;
}

std::string format_rows(const std::vector<std::vector<cplx>> &rows) {
    std::string out = "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += (i ? ", [" : "[") + format_amplitudes(rows[i]) + "]";
    }
    return out + "]";
}

Role parse_role(std::string_view s) {
    if (s == "observer") {
        return Role::Observer;
    }
    if (s == "candidate") {
        return Role::Candidate;
    }
    if (s == "plain") {
        return Role::Plain;
    }
    throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

struct LineParser {
    ProtocolSpec spec;
    std::size_t line_no = 0;
    std::string_view line;
    std::set<std::string> declared_labels;

    [[noreturn]] void fail(std::size_t column, const std::string &what) const {
        throw SpecParseError(line_no, column + 1, what);
    }

    std::size_t column_of(std::string_view part) const {
        if (part.data() >= line.data() && part.data() <= line.data() + line.size()) {
            return static_cast<std::size_t>(part.data() - line.data());
        }
        return 0;
    }

    void systems_line() {
        const auto toks = tokens(line);
        if (toks.size() < 2) {
            fail(0, "expected '<label> <dim> [role]' or '<agent> <role> <label:dim>...'");
        }
        const std::string name(toks[0].first);
        unsigned long long dim = 0;
        if (parse_uint(toks[1].first, dim)) {
            if (dim < 2) {
                fail(toks[1].second, "dimension must be at least 2");
            }
            add_label(name, dim, toks[0].second);
            if (toks.size() == 3) {
                Agent a{name, role_at(toks[2]), {name}, {name}};
                spec.agents.push_back(std::move(a));
            } else if (toks.size() > 3) {
                fail(toks[3].second, "unexpected token");
            }
            return;
        }
        Agent a{name, role_at(toks[1]), {}, {}};
        if (toks.size() < 3) {
            fail(toks[1].second, "agent needs at least one label:dim");
        }
        for (std::size_t i = 2; i < toks.size(); ++i) {
            const auto [tok, col] = toks[i];
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos || !parse_uint(tok.substr(colon + 1), dim) || dim < 2) {
                fail(col, "expected label:dim with dim >= 2");
            }
            const std::string label(tok.substr(0, colon));
            add_label(label, dim, col);
            a.labels.insert(label);
            a.memory.push_back(label);
        }
        spec.agents.push_back(std::move(a));
    }

    Role role_at(const std::pair<std::string_view, std::size_t> &tok) const {
        try {
            return parse_role(tok.first);
        } catch (const std::invalid_argument &e) {
            fail(tok.second, e.what());
        }
    }

    void add_label(const std::string &name, std::size_t dim, std::size_t col) {
        if (!declared_labels.insert(name).second) {
            fail(col, "label '" + name + "' declared twice");
        }
        spec.labels.push_back({name, dim});
    }

    void need_labels(const std::vector<std::string> &labels, std::size_t col) const {
        for (const auto &l : labels) {
            if (!declared_labels.contains(l)) {
                fail(col, "unknown label '" + l + "'");
            }
        }
    }

    std::size_t dim_of(const std::vector<std::string> &labels) const {
        std::size_t d = 1;
        for (const auto &l : labels) {
            for (const auto &s : spec.labels) {
                if (s.name == l) {
                    d *= s.dim;
                }
            }
        }
        return d;
    }

    void initial_line() {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(0, "expected '<labels> = <amplitudes>'");
        }
        InitialFactor f;
        for (const auto &[tok, col] : tokens(line.substr(0, eq))) {
            f.labels.emplace_back(tok);
            need_labels({f.labels.back()}, col);
        }
        if (f.labels.empty()) {
            fail(0, "missing labels");
        }
        const auto rhs = line.substr(eq + 1);
        try {
            f.amplitudes = parse_amplitudes(rhs);
        } catch (const std::invalid_argument &e) {
            fail(column_of(trim(rhs)), e.what());
        }
        if (f.amplitudes.size() != dim_of(f.labels)) {
            fail(column_of(trim(rhs)), "expected " + std::to_string(dim_of(f.labels)) + " amplitudes, got " +
                                           std::to_string(f.amplitudes.size()));
        }
        double norm = 0.0;
        for (const auto &a : f.amplitudes) {
            norm += std::norm(a);
        }
        if (std::abs(norm - 1.0) > 1e-9) {
            fail(column_of(trim(rhs)), "initial vector is not normalized (squared norm " + std::to_string(norm) + ")");
        }
        spec.initial.push_back(std::move(f));
    }

    void steps_line() {
        const auto toks = tokens(line);
        const std::string kind(toks[0].first);
        std::map<std::string, std::pair<std::string_view, std::size_t>> kv;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            const auto [tok, col] = toks[i];
            const auto eq = tok.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                fail(col, "expected key=value");
            }
            const std::string key(tok.substr(0, eq));
            if (!kv.emplace(key, std::make_pair(tok.substr(eq + 1), col)).second) {
                fail(col, "duplicate key '" + key + "'");
            }
        }
        std::set<std::string> allowed;
        StepSpec s;
        if (kind == "unitary") {
            s.kind = StepSpecKind::Unitary;
            allowed = {"id", "on", "gate", "matrix", "when"};
        } else if (kind == "measure" || kind == "decohere") {
            s.kind = kind == "measure" ? StepSpecKind::Measure : StepSpecKind::Decohere;
            allowed = {"id", "actor", "target", "basis", "slot", "outcomes", "when"};
        } else if (kind == "leak") {
            s.kind = StepSpecKind::Measure;
            s.leak = true;
            allowed = {"id", "from", "to", "slot", "when"};
        } else {
            fail(toks[0].second, "unknown step kind '" + kind + "'");
        }
        for (const auto &[key, val] : kv) {
            if (!allowed.contains(key)) {
                fail(val.second, "unknown key '" + key + "' for " + kind);
            }
        }
        const auto get = [&](const std::string &key, bool required) -> std::string_view {
            const auto it = kv.find(key);
            if (it == kv.end()) {
                if (required) {
                    fail(toks[0].second, kind + " step needs '" + key + "='");
                }
                return {};
            }
            return it->second.first;
        };
        const auto col = [&](const std::string &key) { return kv.at(key).second; };

        s.id = std::string(get("id", false));
        if (s.id.empty()) {
            s.id = "step" + std::to_string(spec.steps.size() + 1);
        }
        s.when = std::string(get("when", false));
        if (kind == "unitary") {
            s.target = names(get("on", true));
            need_labels(s.target, col("on"));
            const auto gate = get("gate", false);
            const auto matrix = get("matrix", false);
            if (gate.empty() == matrix.empty()) {
                fail(toks[0].second, "unitary needs exactly one of gate= or matrix=");
            }
            if (!gate.empty()) {
                s.gate = std::string(gate);
            } else {
                try {
                    const auto rows = parse_rows(matrix);
                    ComplexMatrix m(rows.size(), rows.size());
                    for (std::size_t r = 0; r < rows.size(); ++r) {
                        if (rows[r].size() != rows.size()) {
                            throw std::invalid_argument("matrix must be square");
                        }
                        for (std::size_t c = 0; c < rows.size(); ++c) {
                            m(r, c) = rows[r][c];
                        }
                    }
                    if (!is_unitary(m)) {
                        throw std::invalid_argument("matrix is not unitary");
                    }
                    s.matrix = std::move(m);
                } catch (const std::invalid_argument &e) {
                    fail(col("matrix"), e.what());
                }
            }
            try {
                std::vector<std::size_t> dims;
                for (const auto &l : s.target) {
                    dims.push_back(dim_of({l}));
                }
                resolve_gate(s, dims);
            } catch (const std::exception &e) {
                fail(toks[0].second, e.what());
            }
        } else if (kind == "leak") {
            s.target = {std::string(get("from", true))};
            need_labels(s.target, col("from"));
            s.actor = std::string(get("to", true));
            s.basis_name = "std";
            s.slots = names(get("slot", true));
            need_labels(s.slots, col("slot"));
        } else {
            s.actor = std::string(get("actor", true));
            s.target = names(get("target", true));
            need_labels(s.target, col("target"));
            const auto basis = get("basis", true);
            if (!basis.empty() && basis.front() == '[') {
                s.basis_name = "explicit";
                try {
                    for (auto &v : parse_rows(basis)) {
                        s.basis.push_back(ComplexMatrix::column(std::move(v)));
                    }
                } catch (const std::invalid_argument &e) {
                    fail(col("basis"), e.what());
                }
            } else {
                s.basis_name = std::string(basis);
            }
            const auto slot = get("slot", s.kind == StepSpecKind::Measure);
            if (!slot.empty()) {
                s.slots = names(slot);
                need_labels(s.slots, col("slot"));
            }
            if (const auto o = get("outcomes", false); !o.empty()) {
                s.outcomes = names(o);
            }
            try {
                const auto vecs = resolve_basis(s, dim_of(s.target));
                if (!is_orthonormal_basis(vecs, dim_of(s.target))) {
                    throw std::invalid_argument("basis is not orthonormal");
                }
                if (!s.outcomes.empty() && s.outcomes.size() != vecs.size()) {
                    throw std::invalid_argument("outcomes= must name every basis vector");
                }
            } catch (const std::exception &e) {
                fail(col("basis"), e.what());
            }
        }
        for (const auto &prev : spec.steps) {
            if (prev.id == s.id) {
                fail(toks[0].second, "duplicate step id '" + s.id + "'");
            }
        }
        spec.steps.push_back(std::move(s));
    }

    void priors_line() {
        const auto toks = tokens(line);
        if (toks.size() != 2) {
            fail(0, "expected '<alternative> <weight>' or 'disclose_at <t>'");
        }
        if (toks[0].first == "disclose_at") {
            unsigned long long t = 0;
            if (!parse_uint(toks[1].first, t)) {
                fail(toks[1].second, "expected a time index");
            }
            spec.disclose_at = t;
            return;
        }
        double w = 0.0;
        try {
            w = parse_number(toks[1].first, true);
        } catch (const std::invalid_argument &e) {
            fail(toks[1].second, e.what());
        }
        if (!(w > 0.0 && w <= 1.0)) {
            fail(toks[1].second, "weight must lie in (0, 1]");
        }
        spec.priors.push_back({std::string(toks[0].first), w});
    }

    void halt_line() {
        const auto toks = tokens(line);
        if (toks.size() != 2) {
            fail(0, "expected '<step> <outcome>'");
        }
        spec.halt.emplace_back(std::string(toks[0].first), std::string(toks[1].first));
    }

    void options_line() {
        const auto toks = tokens(line);
        if (toks.size() != 2 || toks[0].first != "gate_override") {
            fail(0, "unknown option");
        }
        if (toks[1].first != "true" && toks[1].first != "false") {
            fail(toks[1].second, "expected true or false");
        }
        spec.gate_override = toks[1].first == "true";
    }

    void states_line() {
        const auto eq = line.find(" = ");
        if (eq == std::string_view::npos) {
            fail(0, "expected 't=<k> [history=<id>] on=<labels> = <amplitudes>'");
        }
        StoredState st;
        bool have_t = false;
        for (const auto &[tok, col] : tokens(line.substr(0, eq))) {
            const auto e = tok.find('=');
            const auto key = tok.substr(0, e);
            const auto val = e == std::string_view::npos ? std::string_view{} : tok.substr(e + 1);
            unsigned long long t = 0;
            if (key == "t" && parse_uint(val, t)) {
                st.time = t;
                have_t = true;
            } else if (key == "history" && !val.empty()) {
                st.history = std::string(val);
            } else if (key == "on" && !val.empty()) {
                st.labels = names(val);
                need_labels(st.labels, col);
            } else {
                fail(col, "unknown key '" + std::string(key) + "'");
            }
        }
        if (!have_t || st.labels.empty()) {
            fail(0, "stored state needs t= and on=");
        }
        const auto rhs = line.substr(eq + 3);
        try {
            st.amplitudes = parse_amplitudes(rhs);
        } catch (const std::invalid_argument &e) {
            fail(column_of(trim(rhs)), e.what());
        }
        if (st.amplitudes.size() != dim_of(st.labels)) {
            fail(column_of(trim(rhs)), "wrong number of amplitudes");
        }
        spec.states.push_back(std::move(st));
    }

    void checks_line() {
        const auto eq = line.rfind(" = ");
        if (eq == std::string_view::npos) {
            fail(0, "expected '<kind> <subject> = <expected>'");
        }
        const auto lhs = trim(line.substr(0, eq));
        const auto sp = lhs.find(' ');
        CheckSpec c;
        c.kind = std::string(lhs.substr(0, sp));
        static const std::set<std::string> kinds{"prob",  "admissible", "community", "valid",
                                                 "wellformed", "record", "state", "agree"};
        if (!kinds.contains(c.kind)) {
            fail(column_of(lhs), "unknown check kind '" + c.kind + "'");
        }
        if (sp == std::string_view::npos) {
            fail(column_of(lhs), "check needs a subject");
        }
        c.subject = std::string(trim(lhs.substr(sp + 1)));
        auto rhs = trim(line.substr(eq + 3));
        if (!rhs.empty() && rhs.back() == ']') {
            const auto open = rhs.rfind('[');
            if (open != std::string_view::npos && (open == 0 || rhs[open - 1] == ' ')) {
                c.provenance = std::string(rhs.substr(open + 1, rhs.size() - open - 2));
                rhs = trim(rhs.substr(0, open));
            }
        }
        if (const auto w = rhs.rfind(" within "); w != std::string_view::npos) {
            try {
                c.tolerance = parse_number(trim(rhs.substr(w + 8)));
            } catch (const std::invalid_argument &e) {
                fail(column_of(rhs) + w + 8, e.what());
            }
            rhs = trim(rhs.substr(0, w));
        }
        if (rhs.empty()) {
            fail(eq + 3, "missing expected value");
        }
        c.expected = std::string(rhs);
        spec.checks.push_back(std::move(c));
    }
};

} // namespace

double parse_number(std::string_view text, bool allow_ratio) {
    auto s = trim(text);
    const std::string original(s);
    double sign = 1.0;
    if (!s.empty() && s.front() == '-' && (s.substr(1, 7) == "1/sqrt(" || s.substr(1, 5) == "sqrt(" ||
                                           (allow_ratio && s.find('/') != std::string_view::npos))) {
        sign = -1.0;
        s.remove_prefix(1);
    }
    unsigned long long a = 0;
    unsigned long long b = 0;
    if (s.substr(0, 7) == "1/sqrt(" && s.back() == ')') {
        if (parse_uint(s.substr(7, s.size() - 8), a) && a > 0) {
            return sign / std::sqrt(static_cast<double>(a));
        }
    } else if (s.substr(0, 5) == "sqrt(" && s.back() == ')') {
        const auto inner = s.substr(5, s.size() - 6);
        const auto slash = inner.find('/');
        if (slash != std::string_view::npos && parse_uint(inner.substr(0, slash), a) &&
            parse_uint(inner.substr(slash + 1), b) && b > 0) {
            return sign * std::sqrt(static_cast<double>(a) / static_cast<double>(b));
        }
    } else if (allow_ratio && s.find('/') != std::string_view::npos) {
        const auto slash = s.find('/');
        if (parse_uint(s.substr(0, slash), a) && parse_uint(s.substr(slash + 1), b) && b > 0) {
            return sign * static_cast<double>(a) / static_cast<double>(b);
        }
    } else {
        double v = 0.0;
        if (parse_decimal(s, v)) {
            return v;
        }
    }
    throw std::invalid_argument("malformed number '" + original + "'");
}

std::string format_number(double v) {
    constexpr double exact = 1e-15;
    if (std::abs(v - std::round(v)) < exact) {
        return std::to_string(static_cast<long long>(std::round(v)));
    }
    const char *sign = v < 0 ? "-" : "";
    const double a = std::abs(v);
    for (int k = 2; k <= 64; ++k) {
        if (std::abs(a - 1.0 / std::sqrt(static_cast<double>(k))) < exact) {
            return std::string(sign) + "1/sqrt(" + std::to_string(k) + ")";
        }
    }
    for (int q = 2; q <= 16; ++q) {
        for (int p = 1; p < q; ++p) {
            if (std::abs(a - std::sqrt(static_cast<double>(p) / q)) < exact) {
                return std::string(sign) + "sqrt(" + std::to_string(p) + "/" + std::to_string(q) + ")";
            }
        }
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<cplx> parse_amplitudes(std::string_view text) {
    std::vector<cplx> out;
    for (auto part : split(text, ',')) {
        out.emplace_back(parse_number(part), 0.0);
    }
    return out;
}

std::string format_amplitudes(const std::vector<cplx> &amps) {
    std::vector<std::string> parts;
    for (const auto &a : amps) {
        if (std::abs(a.imag()) > 1e-15) {
            throw std::invalid_argument("the file format holds real amplitudes only");
        }
        parts.push_back(format_number(a.real()));
    }
    return join(parts, ", ");
}

ProtocolSpec parse_spec(std::string_view text) {
    LineParser p;
    std::string section;
    static const std::set<std::string> sections{"systems", "initial", "steps", "priors",
                                                "halt",    "options", "states", "checks"};
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++p.line_no;
        std::string_view raw = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
            raw = raw.substr(0, hash);
        }
        p.line = raw;
        const auto body = trim(raw);
        if (body.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        if (body.substr(0, 5) == "name:") {
            p.spec.name = std::string(trim(body.substr(5)));
            section.clear();
        } else if (body.back() == ':' && body.find(' ') == std::string_view::npos) {
            section = std::string(body.substr(0, body.size() - 1));
            if (!sections.contains(section)) {
                p.fail(p.column_of(body), "unknown section '" + section + "'");
            }
        } else if (section == "systems") {
            p.systems_line();
        } else if (section == "initial") {
            p.initial_line();
        } else if (section == "steps") {
            p.steps_line();
        } else if (section == "priors") {
            p.priors_line();
        } else if (section == "halt") {
            p.halt_line();
        } else if (section == "options") {
            p.options_line();
        } else if (section == "states") {
            p.states_line();
        } else if (section == "checks") {
            p.checks_line();
        } else {
            p.fail(p.column_of(body), "content outside of a section");
        }
        if (end == text.size()) {
            break;
        }
    }
    if (p.spec.labels.empty()) {
        throw SpecParseError(p.line_no, 1, "no systems declared");
    }
    // Cross references that need the whole file.
    for (const auto &s : p.spec.steps) {
        if (!s.actor.empty() && std::none_of(p.spec.agents.begin(), p.spec.agents.end(),
                                             [&](const Agent &a) { return a.name == s.actor; })) {
            throw SpecParseError(p.line_no, 1, "step '" + s.id + "' names unknown agent '" + s.actor + "'");
        }
    }
    return std::move(p.spec);
}

ProtocolSpec load_spec(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

std::string export_spec(const ProtocolSpec &spec) {
    std::ostringstream out;
    if (!spec.name.empty()) {
        out << "name: " << spec.name << "\n";
    }
    out << "systems:\n";
    std::set<std::string> in_agent;
    for (const auto &a : spec.agents) {
        if (a.labels.size() == 1 && a.labels.contains(a.name)) {
            continue;
        }
        in_agent.insert(a.labels.begin(), a.labels.end());
    }
    std::set<std::string> written;
    for (const auto &l : spec.labels) {
        if (written.contains(l.name)) {
            continue;
        }
        if (!in_agent.contains(l.name)) {
            out << "  " << l.name << " " << l.dim;
            for (const auto &a : spec.agents) {
                if (a.name == l.name && a.labels.size() == 1 && a.labels.contains(l.name)) {
                    out << " " << to_string(a.role);
                }
            }
            out << "\n";
            written.insert(l.name);
            continue;
        }
        for (const auto &a : spec.agents) {
            if (!a.labels.contains(l.name)) {
                continue;
            }
            out << "  " << a.name << " " << to_string(a.role);
            for (const auto &m : spec.labels) {
                if (a.labels.contains(m.name)) {
                    out << " " << m.name << ":" << m.dim;
                    written.insert(m.name);
                }
            }
            out << "\n";
            break;
        }
    }
    if (!spec.initial.empty()) {
        out << "initial:\n";
        for (const auto &f : spec.initial) {
            out << "  " << join(f.labels, " ") << " = " << format_amplitudes(f.amplitudes) << "\n";
        }
    }
    out << "steps:\n";
    for (const auto &s : spec.steps) {
        out << "  ";
        if (s.kind == StepSpecKind::Unitary) {
            out << "unitary id=" << s.id << " on=" << join(s.target);
            if (s.matrix) {
                std::vector<std::vector<cplx>> rows(s.matrix->rows());
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    for (std::size_t c = 0; c < s.matrix->cols(); ++c) {
                        rows[r].push_back((*s.matrix)(r, c));
                    }
                }
                out << " matrix=" << format_rows(rows);
            } else {
                out << " gate=" << s.gate;
            }
        } else if (s.leak) {
            out << "leak id=" << s.id << " from=" << join(s.target) << " to=" << s.actor
                << " slot=" << join(s.slots);
        } else {
            out << (s.kind == StepSpecKind::Measure ? "measure" : "decohere") << " id=" << s.id
                << " actor=" << s.actor << " target=" << join(s.target) << " basis=";
            if (s.basis_name.empty() || s.basis_name == "explicit") {
                std::vector<std::vector<cplx>> rows;
                for (const auto &v : s.basis) {
                    rows.emplace_back(v.entries().begin(), v.entries().end());
                }
                out << format_rows(rows);
            } else {
                out << s.basis_name;
            }
            if (!s.slots.empty()) {
                out << " slot=" << join(s.slots);
            }
            if (!s.outcomes.empty()) {
                out << " outcomes=" << join(s.outcomes);
            }
        }
        if (!s.when.empty()) {
            out << " when=" << s.when;
        }
        out << "\n";
    }
    if (!spec.priors.empty() || spec.disclose_at) {
        out << "priors:\n";
        for (const auto &a : spec.priors) {
            out << "  " << a.name << " " << format_number(a.weight) << "\n";
        }
        if (spec.disclose_at) {
            out << "  disclose_at " << *spec.disclose_at << "\n";
        }
    }
    if (!spec.halt.empty()) {
        out << "halt:\n";
        for (const auto &[step, label] : spec.halt) {
            out << "  " << step << " " << label << "\n";
        }
    }
    if (spec.gate_override) {
        out << "options:\n  gate_override true\n";
    }
    if (!spec.states.empty()) {
        out << "states:\n";
        for (const auto &st : spec.states) {
            out << "  t=" << st.time;
            if (!st.history.empty()) {
                out << " history=" << st.history;
            }
            out << " on=" << join(st.labels) << " = " << format_amplitudes(st.amplitudes) << "\n";
        }
    }
    if (!spec.checks.empty()) {
        out << "checks:\n";
        for (const auto &c : spec.checks) {
            out << "  " << c.kind << " " << c.subject << " = " << c.expected;
            if (c.tolerance > 0.0) {
                out << " within " << format_number(c.tolerance);
            }
            if (!c.provenance.empty()) {
                out << " [" << c.provenance << "]";
            }
            out << "\n";
        }
    }
    return out.str();
}

} // namespace epiq
