/*
 Copyright 2026 The ENE Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <doctest.h>

#include "ene/checks.hpp"
#include "ene/oracle.hpp"
#include "helpers.hpp"

using namespace ene;
using ene::test::mat;

TEST_CASE("scalar two-step Riccati by hand") {
    const Mat one = Mat::Identity(1, 1);
    const LqrGains g = discrete_lqr(one, one, one, one, one, 2);
    CHECK(g.P[2](0, 0) == 1.0);
    CHECK(g.P[1](0, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(g.K[1](0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.K[0](0, 0) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("one-step Riccati closed form") {
    const Mat A = mat(2, 2, {1, 0.2, -0.1, 0.9}), B = mat(2, 1, {0.3, 1}), Q = Mat::Identity(2, 2);
    const Mat R = mat(1, 1, {0.7}), Qf = mat(2, 2, {2, 0.5, 0.5, 1});
    const LqrGains g = discrete_lqr(A, B, Q, R, Qf, 1);
    const Mat expect = (R + B.transpose() * Qf * B).inverse() * B.transpose() * Qf * A;
    CHECK(test::max_abs(g.K[0] - expect) < 1e-14);
}

TEST_CASE("zero perturbation gives the zero solution") {
    const OracleFixture fx = oracle_fixture(4);
    const NominalSolution& nom = fx.nominal;
    const StackedQpSolution s =
        solve_stacked_qp(fx.problem, nom.trajectory, nom.costates, nom.trajectory.active,
                         Vec::Zero(fx.problem.n()), Vec::Zero(fx.problem.nw()));
    CHECK(test::max_abs(s.z) == 0.0);
    CHECK(s.objective == 0.0);
}

TEST_CASE("stacked QP layout") {
    const OracleFixture fx = oracle_fixture(5);
    const NominalSolution& nom = fx.nominal;
    const StackedQp qp = build_stacked_qp(fx.problem, nom.trajectory, nom.costates, nom.trajectory.active, fx.dx0,
                                          fx.dw0);
    const int N = qp.N, n = qp.n, m = qp.m, nw = qp.nw;
    CHECK(qp.size() == (N + 1) * (n + nw) + N * m);
    CHECK(qp.u_index(0) == (N + 1) * n);
    CHECK(qp.w_index(N) + nw == qp.size());
    CHECK(test::max_abs(qp.H - qp.H.transpose()) == 0.0);
    const StackedQpSolution s = solve_stacked_qp(qp, nom.trajectory.active);
    CHECK(test::max_abs(s.dx[0] - fx.dx0) < 1e-14);
    CHECK(test::max_abs(s.dw[0] - fx.dw0) < 1e-14);
    CHECK(test::max_abs(qp.A * s.z - qp.b) < 1e-12);
}

TEST_CASE("stacked QP solution is optimal along feasible directions") {
    for (std::uint64_t seed : {1u, 6u, 9u}) {
        const OracleFixture fx = oracle_fixture(seed);
        const NominalSolution& nom = fx.nominal;
        const StackedQp qp = build_stacked_qp(fx.problem, nom.trajectory, nom.costates, nom.trajectory.active,
                                              fx.dx0, fx.dw0);
        const StackedQpSolution s = solve_stacked_qp(qp, nom.trajectory.active);
        const Mat null = Eigen::FullPivLU<Mat>(qp.A).kernel();
        REQUIRE(null.cols() > 0);
        Lcg64 rng(seed);
        for (int trial = 0; trial < 20; ++trial) {
            Vec coef(null.cols());
            for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = 2.0 * rng.next_unit() - 1.0;
            Vec dir = null * coef;
            dir /= dir.norm();
            CHECK(test::max_abs(qp.A * dir) < 1e-10);
            const double step = 1e-2;
            CHECK(qp.objective(s.z + step * dir) >= s.objective - 1e-12);
            CHECK(qp.objective(s.z - step * dir) >= s.objective - 1e-12);
            // First-order term vanishes: f(z + t d) - f(z) is quadratic in t.
            const double plus = qp.objective(s.z + step * dir) - s.objective;
            const double minus = qp.objective(s.z - step * dir) - s.objective;
            CHECK(std::abs(plus - minus) < 1e-9);
        }
    }
}

TEST_CASE("fixtures have mixed activity and a tight oracle gap") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        CHECK(fx.problem.n() <= 4);
        CHECK(fx.problem.m() <= 2);
        CHECK(fx.problem.horizon <= 6);
        CHECK(fx.active_steps > 0);
        CHECK(fx.active_steps < fx.problem.horizon);
        CHECK(oracle_mismatch(fx) <= 1e-6);
    }
}
