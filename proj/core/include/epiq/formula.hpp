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

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace epiq {

enum class FormulaKind { Outcome, Halted, True, False, Not, And, Or, Implies, Know, Possible };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula node.
///
///   phi ::= outcome(step, label) | halted | true | false
///         | !phi | phi & phi | phi | phi | phi -> phi
///         | K[agent] phi | P[agent] phi
///
/// Precedence from tightest: prefix operators, &, |, -> (right associative).
struct Formula {
    FormulaKind kind = FormulaKind::True;
    /// Outcome atoms.
    std::string step;
    std::string label;
    /// Know / Possible.
    std::string agent;
    FormulaPtr lhs;
    FormulaPtr rhs;

    static FormulaPtr outcome(std::string step, std::string label);
    static FormulaPtr halted();
    static FormulaPtr truth();
    static FormulaPtr falsity();
    static FormulaPtr negation(FormulaPtr f);
    static FormulaPtr conjunction(FormulaPtr a, FormulaPtr b);
    static FormulaPtr disjunction(FormulaPtr a, FormulaPtr b);
    static FormulaPtr implication(FormulaPtr a, FormulaPtr b);
    static FormulaPtr know(std::string agent, FormulaPtr f);
    static FormulaPtr possible(std::string agent, FormulaPtr f);

    bool is_atom() const { return kind <= FormulaKind::False; }
    bool is_modal() const { return kind == FormulaKind::Know || kind == FormulaKind::Possible; }
};

bool operator==(const Formula &a, const Formula &b);

/// Syntax error; `position` is a 0-based byte offset into the input.
class FormulaSyntaxError : public std::invalid_argument {
  public:
    FormulaSyntaxError(const std::string &what, std::size_t position)
        : std::invalid_argument("at " + std::to_string(position + 1) + ": " + what), position_(position) {}
    std::size_t position() const { return position_; }

  private:
    std::size_t position_;
};

FormulaPtr parse_formula(std::string_view text);

/// Canonical form: minimal parentheses, single spaces around binary
/// operators, "K[A] phi", "outcome(s, l)".
std::string to_string(const Formula &f);

} // namespace epiq
