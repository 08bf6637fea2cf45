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

#include "epiq/formula.hpp"

#include <cctype>

namespace epiq {

namespace {

FormulaPtr make(FormulaKind kind) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    return f;
}

FormulaPtr unary(FormulaKind kind, FormulaPtr x) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->lhs = std::move(x);
    return f;
}

FormulaPtr binary(FormulaKind kind, FormulaPtr a, FormulaPtr b) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->lhs = std::move(a);
    f->rhs = std::move(b);
    return f;
}

FormulaPtr modal(FormulaKind kind, std::string agent, FormulaPtr x) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->agent = std::move(agent);
    f->lhs = std::move(x);
    return f;
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

class Parser {
  public:
    explicit Parser(std::string_view text) : s_(text) {}

    FormulaPtr parse() {
        auto f = implication();
        skip();
        if (i_ != s_.size()) {
            fail("unexpected '" + std::string(1, s_[i_]) + "'");
        }
        return f;
    }

  private:
    [[noreturn]] void fail(const std::string &what) const { throw FormulaSyntaxError(what, i_); }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            ++i_;
        }
    }

    bool eat(std::string_view tok) {
        skip();
        if (s_.substr(i_, tok.size()) == tok) {
            i_ += tok.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view tok) {
        if (!eat(tok)) {
            fail("expected '" + std::string(tok) + "'");
        }
    }

    std::string ident(const char *what) {
        skip();
        const std::size_t start = i_;
        // '-' is allowed inside names but never starts "->".
        while (i_ < s_.size() && ident_char(s_[i_]) && !(s_[i_] == '-' && i_ + 1 < s_.size() && s_[i_ + 1] == '>')) {
            ++i_;
        }
        if (i_ == start) {
            fail(std::string("expected ") + what);
        }
        return std::string(s_.substr(start, i_ - start));
    }

    /// Keyword followed by a non-identifier character.
    bool keyword(std::string_view kw) {
        skip();
        if (s_.substr(i_, kw.size()) != kw) {
            return false;
        }
        const std::size_t end = i_ + kw.size();
        if (end < s_.size() && ident_char(s_[end]) && s_[end] != '-') {
            return false;
        }
        i_ = end;
        return true;
    }

    FormulaPtr implication() {
        auto lhs = disjunction();
        if (eat("->")) {
            return binary(FormulaKind::Implies, std::move(lhs), implication());
        }
        return lhs;
    }

    FormulaPtr disjunction() {
        auto lhs = conjunction();
        while (eat("|")) {
            lhs = binary(FormulaKind::Or, std::move(lhs), conjunction());
        }
        return lhs;
    }

    FormulaPtr conjunction() {
        auto lhs = prefix();
        while (eat("&")) {
            lhs = binary(FormulaKind::And, std::move(lhs), prefix());
        }
        return lhs;
    }

    FormulaPtr prefix() {
        skip();
        if (i_ >= s_.size()) {
            fail("expected a formula");
        }
        if (eat("!")) {
            return unary(FormulaKind::Not, prefix());
        }
        for (const auto &[tok, kind] : {std::pair{"K[", FormulaKind::Know}, std::pair{"P[", FormulaKind::Possible}}) {
            if (eat(tok)) {
                auto agent = ident("an agent name");
                expect("]");
                return modal(kind, std::move(agent), prefix());
            }
        }
        if (eat("(")) {
            auto f = implication();
            expect(")");
            return f;
        }
        if (keyword("outcome")) {
            expect("(");
            auto step = ident("a step id");
            expect(",");
            auto label = ident("an outcome label");
            expect(")");
            return Formula::outcome(std::move(step), std::move(label));
        }
        if (keyword("halted")) {
            return Formula::halted();
        }
        if (keyword("true")) {
            return Formula::truth();
        }
        if (keyword("false")) {
            return Formula::falsity();
        }
        fail("expected a formula");
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

int precedence(const Formula &f) {
    switch (f.kind) {
    case FormulaKind::Implies:
        return 1;
    case FormulaKind::Or:
        return 2;
    case FormulaKind::And:
        return 3;
    case FormulaKind::Not:
    case FormulaKind::Know:
    case FormulaKind::Possible:
        return 4;
    default:
        return 5;
    }
}

std::string wrap(const Formula &f, bool parens) {
    return parens ? "(" + to_string(f) + ")" : to_string(f);
}

} // namespace

FormulaPtr Formula::outcome(std::string step, std::string label) {
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Outcome;
    f->step = std::move(step);
    f->label = std::move(label);
    return f;
}
FormulaPtr Formula::halted() { return make(FormulaKind::Halted); }
FormulaPtr Formula::truth() { return make(FormulaKind::True); }
FormulaPtr Formula::falsity() { return make(FormulaKind::False); }
FormulaPtr Formula::negation(FormulaPtr f) { return unary(FormulaKind::Not, std::move(f)); }
FormulaPtr Formula::conjunction(FormulaPtr a, FormulaPtr b) {
    return binary(FormulaKind::And, std::move(a), std::move(b));
}
FormulaPtr Formula::disjunction(FormulaPtr a, FormulaPtr b) {
    return binary(FormulaKind::Or, std::move(a), std::move(b));
}
FormulaPtr Formula::implication(FormulaPtr a, FormulaPtr b) {
    return binary(FormulaKind::Implies, std::move(a), std::move(b));
}
FormulaPtr Formula::know(std::string agent, FormulaPtr f) {
    return modal(FormulaKind::Know, std::move(agent), std::move(f));
}
FormulaPtr Formula::possible(std::string agent, FormulaPtr f) {
    return modal(FormulaKind::Possible, std::move(agent), std::move(f));
}

bool operator==(const Formula &a, const Formula &b) {
    if (a.kind != b.kind || a.step != b.step || a.label != b.label || a.agent != b.agent) {
        return false;
    }
    const auto same = [](const FormulaPtr &x, const FormulaPtr &y) { return (!x && !y) || (x && y && *x == *y); };
    return same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
}

FormulaPtr parse_formula(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Formula &f) {
    switch (f.kind) {
    case FormulaKind::Outcome:
        return "outcome(" + f.step + ", " + f.label + ")";
    case FormulaKind::Halted:
        return "halted";
    case FormulaKind::True:
        return "true";
    case FormulaKind::False:
        return "false";
    case FormulaKind::Not:
        return "!" + wrap(*f.lhs, precedence(*f.lhs) < 4);
    case FormulaKind::Know:
    case FormulaKind::Possible: {
        const char *op = f.kind == FormulaKind::Know ? "K[" : "P[";
        return op + f.agent + "] " + wrap(*f.lhs, precedence(*f.lhs) < 4);
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
        const int p = precedence(f);
        const char *op = f.kind == FormulaKind::And ? " & " : " | ";
        return wrap(*f.lhs, precedence(*f.lhs) < p) + op + wrap(*f.rhs, precedence(*f.rhs) <= p);
    }
    case FormulaKind::Implies:
        return wrap(*f.lhs, precedence(*f.lhs) <= 1) + " -> " + wrap(*f.rhs, precedence(*f.rhs) < 1);
    }
    return {};
}

} // namespace epiq
