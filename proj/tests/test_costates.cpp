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
#include "ene/costates.hpp"
#include "ene/ocp.hpp"
#include "ene/systems.hpp"
#include "helpers.hpp"

using namespace ene;
using ene::test::vec;

namespace {

/// Adjoint sweep written directly from the fixture matrices.
void hand_adjoint(const LinearQuadraticData& d, const Trajectory& t, std::vector<Vec>& lam, std::vector<Vec>& lamb,
                  std::vector<Vec>& mu) {
    const int N = t.horizon();
    lam.assign(N + 1, Vec());
    lamb.assign(N + 1, Vec());
    mu.assign(N, Vec());
    lam[N] = d.Qf * t.x[N];
    lamb[N] = d.Qfw * t.w[N];
    for (int k = N - 1; k >= 0; --k) {
        const Mat cu = select_rows(d.Du, t.active[k]);
        const Vec gu = d.R * t.u[k] + d.B.transpose() * lam[k + 1];
        mu[k] = cu.rows() ? Vec(-(cu * cu.transpose()).inverse() * cu * gu) : Vec::Zero(0);
        lam[k] = d.Q * t.x[k] + d.A.transpose() * lam[k + 1] + d.G.transpose() * lamb[k + 1] +
                 select_rows(d.Dx, t.active[k]).transpose() * mu[k];
        lamb[k] = d.Qw * t.w[k] + d.E.transpose() * lam[k + 1] + d.H.transpose() * lamb[k + 1] +
                  select_rows(d.Dw, t.active[k]).transpose() * mu[k];
    }
}

}  // namespace

TEST_CASE("costates without active constraints") {
    const LinearQuadraticData d = test::double_integrator(5);
    const OcpProblem p = linear_quadratic_problem(d);
    const Trajectory t = rollout(p, {vec({0.1}), vec({-0.2}), vec({0.3}), vec({0}), vec({1})});
    const CostateTrajectory c = backward_costates(p, t);
    REQUIRE(c.lambda.size() == 6);
    REQUIRE(c.mu.size() == 5);
    for (const Vec& mu : c.mu) CHECK(mu.size() == 0);
    for (int k = 4; k >= 0; --k) {
        const Vec expect = d.Q * t.x[k] + d.A.transpose() * c.lambda[k + 1];
        CHECK(test::max_abs(c.lambda[k] - expect) < 1e-14);
    }
}

TEST_CASE("zero terminal cost gives zero terminal costates") {
    OcpProblem p = linear_quadratic_problem(test::double_integrator(3));
    p.cost.terminal = [](const Vec&, const Vec&) { return 0.0; };
    p.cost.terminal_grad = [](const Vec&, const Vec&) { return TerminalGradient{Vec::Zero(2), Vec::Zero(1)}; };
    const Trajectory t = rollout(p, {vec({1}), vec({1}), vec({1})});
    const CostateTrajectory c = backward_costates(p, t);
    CHECK(test::max_abs(c.lambda[3]) == 0.0);
    CHECK(test::max_abs(c.lambda_bar[3]) == 0.0);
}

TEST_CASE("costates match the adjoint sweep on constrained fixtures") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        const int n = fx.problem.n(), m = fx.problem.m(), N = fx.problem.horizon;
        const LinearQuadraticData d = lqr_preview_system(n, m, seed, true, N);
        const Trajectory& t = fx.nominal.trajectory;
        const CostateTrajectory c = backward_costates(fx.problem, t);
        std::vector<Vec> lam, lamb, mu;
        hand_adjoint(d, t, lam, lamb, mu);
        CHECK(test::max_gap(c.lambda, lam) < 1e-9);
        CHECK(test::max_gap(c.lambda_bar, lamb) < 1e-9);
        for (int k = 0; k < N; ++k) {
            REQUIRE(c.mu[k].size() == mu[k].size());
            CHECK(test::max_abs(c.mu[k] - mu[k]) < 1e-9);
        }
    }
}

TEST_CASE("rank-deficient active rows are rejected") {
    OcpProblem p = linear_quadratic_problem(test::double_integrator(2));
    p.constraints.l = 2;
    p.constraints.c = [](const Vec&, const Vec& u, const Vec&) { return vec({u(0) - 1, u(0) - 1}); };
    p.constraints.c_jac = [](const Vec&, const Vec&, const Vec&) {
        return StageJacobians{Mat::Zero(2, 2), test::mat(2, 1, {1, 1}), Mat::Zero(2, 1)};
    };
    Trajectory t = rollout(p, {vec({0}), vec({0})});
    t.active[1] = {0, 1};
    CHECK_THROWS_AS(backward_costates(p, t), Error);
}
