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
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "epiq/formula.hpp"
#include "epiq/protocol.hpp"

namespace epiq {

/// A formula names an agent or step the protocol does not have.
class BindError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct WellFormedness {
    bool ok = true;
    /// First (outer, inner) agent pair whose nesting is not admissible. The
    /// outer agent is empty when the inner one fails against the background.
    std::optional<std::pair<std::string, std::string>> failing;
};

/// Evaluation was requested for a formula that is not well formed.
class IllFormedError : public std::invalid_argument {
  public:
    IllFormedError(std::string outer, std::string inner)
        : std::invalid_argument("'" + inner + "' is not an admissible observer for '" +
                                (outer.empty() ? std::string("background") : outer) + "'"),
          outer_(std::move(outer)), inner_(std::move(inner)) {}
    const std::string &outer() const { return outer_; }
    const std::string &inner() const { return inner_; }

  private:
    std::string outer_;
    std::string inner_;
};

/// Truth value at every (history, time) point; index h * (length + 1) + t.
using TruthSet = std::vector<bool>;

/// Model checker for one protocol. Caches admissibility verdicts,
/// re-anchored protocols, cells, and truth sets.
class Checker {
  public:
    explicit Checker(const Protocol &pi);

    const Protocol &protocol() const { return pi_; }

    /// Throws BindError on unknown agents, unknown steps, non-branching
    /// steps, or labels the step cannot produce.
    void bind(const Formula &f) const;
    WellFormedness well_formed(const Formula &f);
    /// Throws IllFormedError when the formula is not well formed.
    bool eval(const Formula &f, std::size_t h, std::size_t t);
    bool valid(const Formula &f);
    const TruthSet &truth(const Formula &f);

    /// Whether `inner` is admissible with respect to `outer` (empty: the
    /// background observer).
    bool admissible_wrt(const std::string &outer, const std::string &inner);
    /// Histories `agent` cannot tell apart from `h` at time `t`.
    const std::vector<std::size_t> &cell_of(const std::string &agent, std::size_t h, std::size_t t);

    std::size_t points() const { return pi_.histories().size() * (pi_.length() + 1); }
    std::size_t index(std::size_t h, std::size_t t) const { return h * (pi_.length() + 1) + t; }

  private:
    void check_well_formed(const Formula &f);
    TruthSet compute(const Formula &f);

    const Protocol &pi_;
    std::map<std::pair<std::string, std::string>, bool> admissible_;
    std::map<std::string, Protocol> anchored_;
    std::map<std::string, std::vector<std::vector<std::size_t>>> cells_;
    std::map<std::string, TruthSet> truth_;
};

WellFormedness well_formed(const Formula &f, const Protocol &pi);
bool eval(const Formula &f, const Protocol &pi, std::size_t h, std::size_t t);
bool valid(const Formula &f, const Protocol &pi);

struct AxiomCounterexample {
    std::string axiom;
    std::string formula;
    std::size_t history = 0;
    std::size_t time = 0;
};

struct AxiomReport {
    std::vector<std::string> community;
    bool community_ok = false;
    std::size_t battery_size = 0;
    bool factivity = false;
    bool monotonicity = false;
    bool knowledge_transfer = false;
    std::size_t factivity_checked = 0;
    std::size_t monotonicity_checked = 0;
    std::size_t transfer_checked = 0;
    std::vector<AxiomCounterexample> counterexamples;

    bool passed() const { return community_ok && factivity && monotonicity && knowledge_transfer; }
};

/// Formula battery up to modal depth 2: atoms and their negations (level 0);
/// Know/Possible of level-0 formulas for each agent and pairwise conjunctions
/// and disjunctions of level-0 formulas (level 1); Know/Possible of level-1
/// formulas for each agent.
std::vector<FormulaPtr> formula_battery(const Protocol &pi, const std::vector<std::string> &agents);

/// Factivity, Monotonicity and Knowledge Transfer over the battery, for the
/// agents of a verified community.
AxiomReport axiom_suite(const Protocol &pi, const std::vector<std::string> &community);

} // namespace epiq
