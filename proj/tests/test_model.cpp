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

#include <algorithm>
#include <cmath>

#include "ene/checks.hpp"
#include "ene/model.hpp"
#include "ene/systems.hpp"
#include "helpers.hpp"

using namespace ene;
using ene::test::vec;

namespace {

double check_error(const DerivativeReport& report, const std::string& name) {
    for (const auto& c : report.checks)
        if (c.name == name) return c.max_rel_error;
    FAIL("no check named " << name);
    return 0.0;
}

std::vector<ProbePoint> lq_probes(const OcpProblem& p) {
    return probe_points(Vec::Zero(p.n()), Vec::Ones(p.n()), Vec::Zero(p.m()), Vec::Ones(p.m()), Vec::Zero(p.nw()),
                        Vec::Ones(p.nw()), 5, 11);
}

}  // namespace

TEST_CASE("force bound activity") {
    const ConstraintSet cs = pendulum_constraints(PendulumParams{});
    const Vec x = Vec::Zero(4), w = Vec::Zero(4);
    CHECK(active_indices(cs, x, vec({300}), w, 1) == std::vector<int>{0});
    CHECK(active_indices(cs, x, vec({-300}), w, 1) == std::vector<int>{1});
    CHECK(active_indices(cs, x, vec({0}), w, 1).empty());
    CHECK(active_indices(cs, x, vec({300 - 1e-9}), w, 1) == std::vector<int>{0});
    CHECK(active_indices(cs, x, vec({300 - 1e-6}), w, 1).empty());
}

TEST_CASE("activity grows with the activation tolerance") {
    ConstraintSet cs = pendulum_constraints(PendulumParams{});
    const Vec x = Vec::Zero(4), w = Vec::Zero(4);
    size_t previous = 0;
    for (double t : {1e-10, 1e-8, 1e-4, 1.0, 50.0}) {
        cs.activation_tol = t;
        const auto act = active_indices(cs, x, vec({299.99}), w, 1);
        CHECK(act.size() >= previous);
        previous = act.size();
    }
    CHECK(previous == 1);
}

TEST_CASE("more active rows than controls is rejected") {
    ConstraintSet cs;
    cs.l = 2;
    cs.c = [](const Vec&, const Vec& u, const Vec&) { return vec({u(0), -u(0)}); };
    try {
        active_indices(cs, Vec::Zero(1), vec({0}), Vec::Zero(1), 1, 4);
        FAIL("expected TooManyActive");
    } catch (const TooManyActive& e) {
        CHECK(e.step == 4);
    }
}

TEST_CASE("derivative gate on an affine system") {
    const OcpProblem p = linear_quadratic_problem(lqr_preview_system(3, 2, 5));
    const DerivativeReport report = verify_derivatives(p.model, p.constraints, p.cost, lq_probes(p));
    CHECK(report.passed());
    CHECK(report.worst() <= 1e-10);
}

TEST_CASE("derivative gate catches a scaled state jacobian") {
    OcpProblem p = linear_quadratic_problem(lqr_preview_system(3, 1, 2));
    const auto good = p.model.f_jac;
    p.model.f_jac = [good](const Vec& x, const Vec& u, const Vec& w) {
        StageJacobians j = good(x, u, w);
        j.x *= 2.0;
        return j;
    };
    const DerivativeReport report = verify_derivatives(p.model, p.constraints, p.cost, lq_probes(p));
    CHECK_FALSE(report.passed());
    CHECK(check_error(report, "f_x") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(check_error(report, "f_u") <= 1e-10);
}

TEST_CASE("derivative gate on the pendulum at the hanging equilibrium") {
    const ScenarioSpec s = ScenarioSpec::small();
    const OcpProblem p = s.problem();
    const std::vector<ProbePoint> probes{{s.x0_nominal, vec({0}), Vec::Zero(4)}};
    CHECK(verify_derivatives(p.model, p.constraints, p.cost, probes).passed());
}

TEST_CASE("finite-difference fallback fills missing suppliers") {
    PlantModel model;
    model.n = 1;
    model.m = 1;
    model.nw = 1;
    model.f = [](const Vec& x, const Vec& u, const Vec& w) { return vec({std::sin(x(0)) + x(0) * u(0) + w(0)}); };
    model.g = [](const Vec&, const Vec& w) { return w; };
    const StageJacobians j = dynamics_jacobians(model, vec({0.5}), vec({2}), vec({0}));
    CHECK(j.x(0, 0) == doctest::Approx(std::cos(0.5) + 2.0).epsilon(1e-9));
    CHECK(j.u(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(j.w(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    // Hessian of weight * f over [x; u; w]: d2/dx2 = -sin x, d2/dxdu = 1.
    const Mat h = dynamics_curvature(model, vec({0.5}), vec({2}), vec({0}), vec({3}));
    CHECK(h(0, 0) == doctest::Approx(-3.0 * std::sin(0.5)).epsilon(1e-5));
    CHECK(h(0, 1) == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(std::abs(h(2, 2)) < 1e-5);
}

TEST_CASE("lcg draws and the preview generator") {
    Lcg64 a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        const double u = a.next_unit();
        CHECK(u == b.next_unit());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    PreviewGenerator gen{0.5, 0.25, 0.1, 9};
    const auto s = gen.samples(4);
    Lcg64 rng(9);
    for (int k = 0; k < 4; ++k) CHECK(s[k] == 0.5 * std::sin(k) + 0.25 * rng.next_unit() + 0.1);

    const auto ws = PreviewSignal::from_generator(gen, {1, 3}, 4).generate(4);
    REQUIRE(ws.size() == 4);
    CHECK(ws[2](0) == 0.0);
    CHECK(ws[2](1) == s[2]);
    CHECK(ws[2](3) == s[2]);
    CHECK_THROWS_AS(PreviewSignal::hold_constant().generate(3), Error);
}

TEST_CASE("hold-constant preview model") {
    const PlantModel model = with_hold_constant_preview(pendulum_discrete(PendulumParams{}));
    const Vec w = vec({0.1, 0.2, 0.3, 0.4});
    CHECK(model.g(vec({1, 2, 3, 4}), w) == w);
    const PreviewJacobians j = preview_jacobians(model, Vec::Zero(4), w);
    CHECK(test::max_abs(j.x) == 0.0);
    CHECK(j.w == Mat::Identity(4, 4));
}
