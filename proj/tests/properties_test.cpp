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

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "epiq/scenarios.hpp"
#include "oracle.hpp"
#include "util.hpp"

namespace epiq {
namespace {

using testing_util::to_epiq;

// Mixture of `rank` random pure states.
ComplexMatrix random_density(std::size_t n, std::size_t rank, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> w(0.1, 1.0);
    std::vector<double> ws(rank);
    double total = 0.0;
    for (auto &x : ws) {
        x = w(rng);
        total += x;
    }
    ComplexMatrix rho(n, n);
    for (std::size_t k = 0; k < rank; ++k) {
        rho += testing_util::density(oracle::random_state(n, rng)) * cplx(ws[k] / total, 0.0);
    }
    return rho;
}

TEST(RandomUnitaries, PreserveDensityOperatorProperties) {
    std::mt19937_64 rng(20261015);
    const Tolerance tol(1e-8);
    const std::vector<std::vector<std::size_t>> shapes = {{2}, {2, 2}, {2, 3}, {2, 2, 2}, {4, 2}};
    for (int trial = 0; trial < 1000; ++trial) {
        const auto &dims = shapes[trial % shapes.size()];
        const std::size_t n = product(dims);
        const auto rho = random_density(n, 1 + trial % n, rng);
        ASSERT_TRUE(is_density_operator(rho, tol));
        // Full unitary, then one on a single factor.
        const auto u = to_epiq(oracle::random_unitary(n, rng));
        ASSERT_TRUE(is_unitary(u, tol));
        const auto out = u * rho * u.adjoint();
        EXPECT_TRUE(is_trace_one(out, tol)) << trial;
        EXPECT_TRUE(is_hermitian(out, tol)) << trial;
        EXPECT_TRUE(is_psd(out, tol)) << trial;

        const std::size_t f = trial % dims.size();
        const auto v = to_epiq(oracle::random_unitary(dims[f], rng));
        const std::vector<std::size_t> on = {f};
        const auto local = conjugate_on(v, out, dims, on);
        EXPECT_TRUE(is_trace_one(local, tol)) << trial;
        EXPECT_TRUE(is_hermitian(local, tol)) << trial;
        EXPECT_TRUE(is_psd(local, tol)) << trial;
    }
}

// Cells at each time partition the histories, and refine as time passes.
void check_partitions(const Protocol &pi, const std::function<EpistemicCell(std::size_t, std::size_t)> &cell_of,
                      const std::string &what) {
    const std::size_t n = pi.histories().size();
    for (std::size_t t = 0; t <= pi.length(); ++t) {
        for (std::size_t h = 0; h < n; ++h) {
            const auto c = cell_of(h, t);
            ASSERT_TRUE(std::is_sorted(c.members.begin(), c.members.end()));
            EXPECT_TRUE(std::binary_search(c.members.begin(), c.members.end(), h)) << what;
            for (auto g : c.members) {
                EXPECT_EQ(cell_of(g, t).members, c.members) << what << " t=" << t;
            }
            if (t > 0) {
                const auto before = cell_of(h, t - 1);
                EXPECT_TRUE(std::includes(before.members.begin(), before.members.end(), c.members.begin(),
                                          c.members.end()))
                    << what << " h=" << h << " t=" << t;
            }
        }
    }
}

class Cells : public ::testing::TestWithParam<std::string> {};

TEST_P(Cells, PartitionAndShrink) {
    const auto f = scenario_by_name(GetParam());
    const auto &pi = f.protocol;
    check_partitions(pi, [&](std::size_t h, std::size_t t) { return cell(pi, h, t); }, "background");
    for (const auto &a : pi.universe().agents()) {
        check_partitions(
            pi, [&](std::size_t h, std::size_t t) { return agent_cell(pi, a.labels, h, t); }, a.name);
    }
}

INSTANTIATE_TEST_SUITE_P(All, Cells, ::testing::ValuesIn(scenario_names()), [](const auto &info) {
    std::string s = info.param;
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
});

} // namespace
} // namespace epiq
