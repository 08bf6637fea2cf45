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
#include <random>

#include <gtest/gtest.h>

#include "epiq/tensor.hpp"
#include "util.hpp"

namespace epiq {
namespace {

using testing_util::density;
using testing_util::from_epiq;
using testing_util::to_epiq;

constexpr double kEps = 1e-9;
const double kS = 1.0 / std::sqrt(2.0);

TEST(Tensor, KroneckerOfIdentitiesIsIdentity) {
    EXPECT_TRUE(approx_equal(tensor(ComplexMatrix::identity(2), ComplexMatrix::identity(2)),
                             ComplexMatrix::identity(4)));
}

TEST(Tensor, KroneckerOfBasisVectors) {
    const auto v = tensor(ComplexMatrix::basis_vector(2, 0), ComplexMatrix::basis_vector(2, 0));
    EXPECT_TRUE(approx_equal(v, ComplexMatrix::basis_vector(4, 0)));
}

TEST(Tensor, KroneckerOfPlusAndZero) {
    const auto plus = ComplexMatrix::column({kS, kS});
    const auto v = tensor(plus, ComplexMatrix::basis_vector(2, 0));
    EXPECT_TRUE(approx_equal(v, ComplexMatrix::column({kS, 0.0, kS, 0.0})));
}

TEST(Tensor, KroneckerMatchesIndexFormula) {
    std::mt19937_64 rng(7);
    const auto a = to_epiq(oracle::random_unitary(3, rng));
    const auto b = to_epiq(oracle::random_unitary(2, rng));
    const auto k = tensor(a, b);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            EXPECT_NEAR(std::abs(k(i, j) - a(i / 2, j / 2) * b(i % 2, j % 2)), 0.0, 1e-14);
        }
    }
}

TEST(PartialTrace, FailStateKeepFirstIsMaximallyMixed) {
    const std::vector<std::size_t> dims{2, 2};
    const std::vector<std::size_t> keep{0};
    const auto rho = partial_trace(density({kS, 0.0, 0.0, kS}), dims, keep);
    EXPECT_LE(max_abs_diff(rho, ComplexMatrix::identity(2) * cplx{0.5}), kEps);
}

TEST(PartialTrace, ProductStateFactorizes) {
    std::mt19937_64 rng(11);
    const auto a = density(oracle::random_state(3, rng));
    const auto b = density(oracle::random_state(2, rng));
    const std::vector<std::size_t> dims{3, 2};
    EXPECT_LE(max_abs_diff(partial_trace(tensor(a, b), dims, std::vector<std::size_t>{0}), a), kEps);
    EXPECT_LE(max_abs_diff(partial_trace(tensor(a, b), dims, std::vector<std::size_t>{1}), b), kEps);
}

TEST(PartialTrace, KeepSecondOfBasisState) {
    const std::vector<std::size_t> dims{2, 2};
    const auto rho = partial_trace(density({1.0, 0.0, 0.0, 0.0}), dims, std::vector<std::size_t>{1});
    EXPECT_LE(max_abs_diff(rho, density({1.0, 0.0})), kEps);
}

TEST(PartialTrace, AgreesWithOracleOnRandomStates) {
    std::mt19937_64 rng(3);
    const std::vector<std::size_t> dims{2, 2, 2, 2};
    for (int trial = 0; trial < 50; ++trial) {
        const auto v = oracle::random_state(16, rng);
        const std::vector<std::size_t> keep{3, 1};
        const auto got = from_epiq(partial_trace(density(v), dims, keep));
        EXPECT_LE(oracle::max_diff(got, oracle::reduce(oracle::outer(v), 4, keep)), 1e-12);
    }
}

TEST(PartialTrace, RejectsBadFactorLists) {
    const std::vector<std::size_t> dims{2, 2};
    EXPECT_THROW(partial_trace(ComplexMatrix::identity(4), dims, std::vector<std::size_t>{2}), DimensionError);
    EXPECT_THROW(partial_trace(ComplexMatrix::identity(3), dims, std::vector<std::size_t>{0}), DimensionError);
}

TEST(Projector, Examples) {
    EXPECT_TRUE(approx_equal(projector(ComplexMatrix::basis_vector(2, 0)),
                             ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}})));
    EXPECT_TRUE(approx_equal(projector(ComplexMatrix::column({kS, kS})),
                             ComplexMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})));
    const auto fail = projector(ComplexMatrix::column({kS, 0.0, 0.0, kS}));
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const bool corner = (i == 0 || i == 3) && (j == 0 || j == 3);
            EXPECT_NEAR(std::abs(fail(i, j) - cplx{corner ? 0.5 : 0.0}), 0.0, kEps);
        }
    }
}

TEST(Projector, IdempotentOnRandomVectors) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = projector(to_epiq(oracle::random_state(5, rng)));
        EXPECT_LE(max_abs_diff(p * p, p), 10 * kEps);
        EXPECT_TRUE(is_hermitian(p));
    }
}

TEST(Projector, RejectsNonUnitVector) {
    EXPECT_THROW(projector(ComplexMatrix::column({1.0, 1.0})), NumericError);
}

TEST(Eigen, SupportExamples) {
    const auto half = ComplexMatrix::identity(2) * cplx{0.5};
    EXPECT_EQ(support_basis(half).size(), 2U);
    const auto s0 = support_basis(density({1.0, 0.0}));
    ASSERT_EQ(s0.size(), 1U);
    EXPECT_NEAR(std::abs(s0[0](0, 0)), 1.0, kEps);

    auto mix = density({1.0, 0.0, 0.0, 0.0}) * cplx{0.5};
    mix += density({0.0, 0.0, 0.0, 1.0}) * cplx{0.5};
    const auto s = support_basis(mix);
    ASSERT_EQ(s.size(), 2U);
    for (const auto &v : s) {
        EXPECT_NEAR(std::abs(v(0, 0)) + std::abs(v(3, 0)), 1.0, kEps);
    }
}

TEST(Eigen, ReconstructsRandomHermitian) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = to_epiq(oracle::random_unitary(6, rng));
        std::vector<cplx> d;
        for (int i = 0; i < 6; ++i) {
            d.emplace_back(static_cast<double>(i) - 2.5);
        }
        const auto h = u * ComplexMatrix::diagonal(d) * u.adjoint();
        const auto es = eigh(h);
        ComplexMatrix back = ComplexMatrix::zeros(6, 6);
        for (std::size_t k = 0; k < es.values.size(); ++k) {
            EXPECT_NEAR(es.values[k], static_cast<double>(k) - 2.5, 1e-9);
            back += es.vectors[k] * es.vectors[k].adjoint() * cplx{es.values[k]};
        }
        EXPECT_LE(max_abs_diff(back, h), 1e-9);
    }
}

TEST(Predicates, Examples) {
    const auto h = ComplexMatrix::from_rows({{kS, kS}, {kS, -kS}});
    EXPECT_TRUE(is_unitary(h));
    const auto half = ComplexMatrix::identity(2) * cplx{0.5};
    EXPECT_TRUE(is_psd(half));
    EXPECT_TRUE(is_trace_one(half));
    EXPECT_FALSE(is_hermitian(ComplexMatrix::from_rows({{0.0, 1.0}, {0.0, 0.0}})));
    EXPECT_FALSE(is_psd(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -0.5}})));
}

TEST(Predicates, LargePsdTestSeesNegativeDirection) {
    // 64-dim operator: takes the pivoted-Cholesky path.
    std::mt19937_64 rng(17);
    const auto u = to_epiq(oracle::random_unitary(64, rng));
    std::vector<cplx> d(64, cplx{1.0 / 64});
    EXPECT_TRUE(is_psd(u * ComplexMatrix::diagonal(d) * u.adjoint()));
    d[10] = -1e-3;
    EXPECT_FALSE(is_psd(u * ComplexMatrix::diagonal(d) * u.adjoint()));
}

TEST(LocalOps, ApplyOnMatchesEmbed) {
    std::mt19937_64 rng(19);
    const std::vector<std::size_t> dims{2, 3, 2};
    const std::vector<std::size_t> targets{2, 0};
    const auto op = to_epiq(oracle::random_unitary(4, rng));
    const auto rho = density(oracle::random_state(12, rng));
    const auto full = embed(op, dims, targets);
    EXPECT_LE(max_abs_diff(apply_on(op, rho, dims, targets), full * rho), 1e-12);
    EXPECT_LE(max_abs_diff(conjugate_on(op, rho, dims, targets), full * rho * full.adjoint()), 1e-12);
}

TEST(LocalOps, PermuteFactorsSwapsQubits) {
    const std::vector<std::size_t> dims{2, 2};
    const std::vector<std::size_t> order{1, 0};
    const auto v = permute_factors(ComplexMatrix::basis_vector(4, 1), dims, order);
    EXPECT_TRUE(approx_equal(v, ComplexMatrix::basis_vector(4, 2)));
}

} // namespace
} // namespace epiq
