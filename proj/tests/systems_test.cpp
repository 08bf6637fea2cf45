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

#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "epiq/systems.hpp"
#include "util.hpp"

namespace epiq {
namespace {

using testing_util::density;

constexpr double kEps = 1e-9;
const double kS = 1.0 / std::sqrt(2.0);

/// S and F are qubits, W is an observer with one memory qubit mW.
UniversePtr lab_universe() {
    return std::make_shared<const Universe>(
        std::vector<SystemId>{{"S", 2}, {"F", 2}, {"mW", 2}},
        std::vector<Agent>{{"F", Role::Candidate, {"F"}, {"F"}}, {"W", Role::Observer, {"mW"}, {"mW"}}});
}

RelativeState lab_state(const std::vector<cplx> &sf) {
    // |sf> on S,F with mW in |0>.
    std::vector<cplx> amps(8);
    for (std::size_t i = 0; i < 4; ++i) {
        amps[2 * i] = sf[i];
    }
    return RelativeState::pure(lab_universe(), {"S", "F", "mW"}, {"mW"}, ComplexMatrix::column(amps));
}

DynamicalStep measure(std::string actor, System target, std::vector<ComplexMatrix> basis, std::string slot) {
    DynamicalStep s;
    s.kind = StepKind::Measure;
    s.id = "m";
    s.actor = std::move(actor);
    s.target = std::move(target);
    s.basis = std::move(basis);
    s.slots = {std::move(slot)};
    return s;
}

TEST(Universe, ObserverIsUnionOfObserverAgents) {
    const auto u = lab_universe();
    EXPECT_EQ(u->observer(), System{"mW"});
    EXPECT_EQ(u->observer_agents(), std::vector<std::string>{"W"});
    EXPECT_EQ(u->ordered({"mW", "S"}), (std::vector<std::string>{"S", "mW"}));
    EXPECT_EQ(u->dimension({"S", "F"}), 4U);
}

TEST(Universe, RejectsBadDeclarations) {
    EXPECT_THROW(Universe({{"S", 1}}, {}), InvariantError);
    EXPECT_THROW(Universe({{"S", 2}, {"S", 2}}, {}), InvariantError);
    EXPECT_THROW(Universe({{"S", 2}}, {{"A", Role::Observer, {"T"}, {}}}), InvariantError);
}

TEST(RelativeState, RejectsNonDensityOperators) {
    const auto u = lab_universe();
    auto bad = ComplexMatrix::identity(8);
    EXPECT_THROW(RelativeState(u, {"S", "F", "mW"}, {"mW"}, 0, bad), InvariantError);
    EXPECT_THROW(RelativeState(u, {"S", "F"}, {"mW"}, 0, ComplexMatrix::identity(2)), DimensionError);
}

TEST(RelativeState, EnforcesIntrospection) {
    const auto u = lab_universe();
    std::vector<cplx> amps(8);
    amps[0] = kS;
    amps[1] = kS; // mW in |+>
    EXPECT_THROW(RelativeState::pure(u, {"S", "F", "mW"}, {"mW"}, ComplexMatrix::column(amps)), InvariantError);
    EXPECT_NO_THROW(
        RelativeState::pure(u, {"S", "F", "mW"}, {"mW"}, ComplexMatrix::column(amps), Tolerance{}, false));
}

TEST(Born, Examples) {
    const auto u = std::make_shared<const Universe>(std::vector<SystemId>{{"S", 2}, {"F", 2}}, std::vector<Agent>{});
    const auto plus = RelativeState::pure(u, {"S"}, {}, ComplexMatrix::column({kS, kS}));
    const auto p = born_distribution(plus, {"S"}, standard_basis(2));
    EXPECT_NEAR(p[0], 0.5, kEps);
    EXPECT_NEAR(p[1], 0.5, kEps);

    const auto coin =
        RelativeState::pure(u, {"S"}, {}, ComplexMatrix::column({1.0 / std::sqrt(3.0), std::sqrt(2.0 / 3.0)}));
    const auto q = born_distribution(coin, {"S"}, standard_basis(2));
    EXPECT_NEAR(q[0], 1.0 / 3.0, kEps);
    EXPECT_NEAR(q[1], 2.0 / 3.0, kEps);

    const auto fail = RelativeState::pure(u, {"S", "F"}, {}, ComplexMatrix::column({kS, 0.0, 0.0, kS}));
    const auto r = born_distribution(fail, {"S", "F"}, lab_basis());
    EXPECT_NEAR(r[1], 1.0, kEps);
    EXPECT_NEAR(r[0] + r[2] + r[3], 0.0, kEps);
}

TEST(Evolution, IdentityAdvancesTime) {
    const auto s = lab_state({1.0, 0.0, 0.0, 0.0});
    const auto t = apply_unitary(s, ComplexMatrix::identity(8));
    EXPECT_EQ(t.time(), s.time() + 1);
    EXPECT_LE(max_abs_diff(t.op(), s.op()), kEps);
}

TEST(Evolution, EntanglingUnitaryGivesFail) {
    const auto s = lab_state({kS, 0.0, kS, 0.0}); // |+>_S |0>_F
    const auto cnot = ComplexMatrix::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
    const auto t = apply_unitary(s, tensor(cnot, ComplexMatrix::identity(2)));
    EXPECT_LE(max_abs_diff(subsystem_state(t, {"S", "F"}).op(), density({kS, 0.0, 0.0, kS})), kEps);
}

TEST(Evolution, HadamardOnZero) {
    const auto u = std::make_shared<const Universe>(std::vector<SystemId>{{"S", 2}}, std::vector<Agent>{});
    const auto s = RelativeState::pure(u, {"S"}, {}, ComplexMatrix::column({1.0, 0.0}));
    const auto h = ComplexMatrix::from_rows({{kS, kS}, {kS, -kS}});
    EXPECT_LE(max_abs_diff(apply_unitary(s, h).op(), density({kS, kS})), kEps);
}

TEST(Measurement, PlusBranchesEvenlyAndRecords) {
    const auto s = lab_state({kS, 0.0, kS, 0.0});
    const auto branches = measure_and_record(s, measure("W", {"S"}, standard_basis(2), "mW"));
    ASSERT_EQ(branches.size(), 2U);
    for (const auto &b : branches) {
        EXPECT_NEAR(b.probability, 0.5, kEps);
        EXPECT_EQ(b.state.basis_value("S"), b.outcome);
        EXPECT_EQ(b.state.basis_value("mW"), b.outcome);
    }
}

TEST(Measurement, DefiniteStateHasOneBranch) {
    const auto branches = measure_and_record(lab_state({1.0, 0.0, 0.0, 0.0}), measure("W", {"S"}, standard_basis(2), "mW"));
    ASSERT_EQ(branches.size(), 1U);
    EXPECT_NEAR(branches[0].probability, 1.0, kEps);
}

TEST(Measurement, LabBasisOnFailIsCertain) {
    const auto branches = measure_and_record(lab_state({kS, 0.0, 0.0, kS}), measure("W", {"S", "F"}, lab_basis(), "mW"));
    ASSERT_EQ(branches.size(), 1U);
    EXPECT_EQ(branches[0].outcome, 1U);
    EXPECT_NEAR(branches[0].probability, 1.0, kEps);
}

TEST(Decoherence, FailBecomesClassicalMixture) {
    auto step = measure("F", {"S"}, standard_basis(2), "mW");
    step.kind = StepKind::Decohere;
    step.slots.clear();
    const auto t = decohere(lab_state({kS, 0.0, 0.0, kS}), step);
    auto want = density({1.0, 0.0, 0.0, 0.0}) * cplx{0.5};
    want += density({0.0, 0.0, 0.0, 1.0}) * cplx{0.5};
    EXPECT_LE(max_abs_diff(subsystem_state(t, {"S", "F"}).op(), want), kEps);
}

TEST(Decoherence, DiagonalUnchangedAndPlusBecomesMixed) {
    const auto u = std::make_shared<const Universe>(std::vector<SystemId>{{"S", 2}}, std::vector<Agent>{});
    DynamicalStep step;
    step.kind = StepKind::Decohere;
    step.id = "d";
    step.target = {"S"};
    step.basis = standard_basis(2);
    const auto diag = RelativeState(u, {"S"}, {}, 0, ComplexMatrix::diagonal(std::vector<cplx>{0.3, 0.7}));
    EXPECT_LE(max_abs_diff(decohere(diag, step).op(), diag.op()), kEps);
    const auto plus = RelativeState::pure(u, {"S"}, {}, ComplexMatrix::column({kS, kS}));
    EXPECT_LE(max_abs_diff(decohere(plus, step).op(), ComplexMatrix::identity(2) * cplx{0.5}), kEps);
}

TEST(Subsystem, Examples) {
    const auto fail = lab_state({kS, 0.0, 0.0, kS});
    EXPECT_LE(max_abs_diff(subsystem_state(fail, {"S"}).op(), ComplexMatrix::identity(2) * cplx{0.5}), kEps);

    const auto product = lab_state({0.0, 0.0, kS, kS}); // |1>_S |+>_F
    EXPECT_LE(max_abs_diff(subsystem_state(product, {"S"}).op(), density({0.0, 1.0})), kEps);

    // GHZ-type |fail>_{LO}: tracing out O leaves the classical mixture on L.
    const auto u =
        std::make_shared<const Universe>(std::vector<SystemId>{{"S", 2}, {"F", 2}, {"O", 2}}, std::vector<Agent>{});
    std::vector<cplx> ghz(8);
    ghz[0] = kS;
    ghz[7] = kS;
    const auto lo = RelativeState::pure(u, {"S", "F", "O"}, {}, ComplexMatrix::column(ghz));
    auto want = density({1.0, 0.0, 0.0, 0.0}) * cplx{0.5};
    want += density({0.0, 0.0, 0.0, 1.0}) * cplx{0.5};
    EXPECT_LE(max_abs_diff(subsystem_state(lo, {"S", "F"}).op(), want), kEps);
}

TEST(Compatible, Examples) {
    EXPECT_TRUE(compatible(density({1.0, 0.0}), density({1.0, 0.0})));
    EXPECT_FALSE(compatible(density({1.0, 0.0, 0.0, 0.0}), density({kS, 0.0, 0.0, kS})));
    EXPECT_TRUE(compatible(ComplexMatrix::identity(2) * cplx{0.5}, density({1.0, 0.0})));
    EXPECT_THROW(compatible(density({1.0, 0.0}), density({1.0, 0.0, 0.0, 0.0})), DimensionError);
}

TEST(Compatible, Symmetric) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = density(oracle::random_state(3, rng));
        auto b = density(oracle::random_state(3, rng)) * cplx{0.5};
        b += a * cplx{0.5};
        EXPECT_EQ(compatible(a, b), compatible(b, a));
        EXPECT_TRUE(compatible(a, b));
    }
}

TEST(Bases, NamedBasesAreOrthonormal) {
    const auto lab = lab_basis();
    const auto ghz = ghz_basis();
    EXPECT_TRUE(is_orthonormal_basis(lab, 4));
    EXPECT_TRUE(is_orthonormal_basis(ghz, 8));
    EXPECT_LE(max_abs_diff(lab[1], ComplexMatrix::column({kS, 0.0, 0.0, kS})), kEps);
    EXPECT_LE(max_abs_diff(lab[0], ComplexMatrix::column({kS, 0.0, 0.0, -kS})), kEps);
}

TEST(Kraus, MeasurementOperatorsFormCompleteSet) {
    const auto u = lab_universe();
    const auto step = measure("W", {"S", "F"}, lab_basis(), "mW");
    const auto ks = kraus_operators(step, *u, {"S", "F", "mW"});
    ASSERT_EQ(ks.size(), 4U);
    ComplexMatrix sum = ComplexMatrix::zeros(8, 8);
    for (const auto &k : ks) {
        sum += k.adjoint() * k;
    }
    EXPECT_LE(max_abs_diff(sum, ComplexMatrix::identity(8)), kEps);
}

} // namespace
} // namespace epiq
