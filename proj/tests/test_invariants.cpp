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

// Property checks swept over fixture seeds and perturbation scales.

#include <doctest.h>

#include "ene/checks.hpp"
#include "ene/mene.hpp"
#include "ene/sim.hpp"
#include "helpers.hpp"

using namespace ene;

TEST_CASE("value-function blocks stay symmetric") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        for (GainMode mode : {GainMode::Optimal, GainMode::NonOptimal}) {
            const GainSchedule g =
                riccati_backward(second_variation(fx.problem, fx.nominal.trajectory), {mode, 0.0, {}});
            for (int k = 0; k <= g.horizon(); ++k) {
                CHECK(test::max_abs(g.S[k] - g.S[k].transpose()) <= 1e-7);
                CHECK(test::max_abs(g.Wbar[k] - g.Wbar[k].transpose()) <= 1e-7);
                CHECK(test::max_abs(g.Sbar[k] - g.W[k].transpose()) <= 1e-7);
            }
        }
    }
}

TEST_CASE("active rows are preserved and the origin is a fixed point") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        const GainSchedule g = riccati_backward(second_variation(fx.problem, fx.nominal.trajectory));
        for (double scale : {0.1, 1.0, 10.0}) {
            const DeltaTrajectory d = propagate_linear(g, scale * fx.dx0, scale * fx.dw0);
            for (int k = 0; k < g.horizon(); ++k)
                for (int row : g.stage[k].active) CHECK(std::abs(d.dc[k](row)) <= 1e-8);
        }
        const DeltaTrajectory zero = propagate_linear(g, Vec::Zero(fx.problem.n()), Vec::Zero(fx.problem.nw()));
        for (const Vec& du : zero.du) CHECK(test::max_abs(du) == 0.0);
    }
}

TEST_CASE("homotopy fractions telescope and adapted controls respect the bounds") {
    int multi = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        for (double scale : {1.0, 5.0, 20.0}) {
            AdaptationResult r;
            try {
                r = adapt_multi_segment(fx.problem, fx.nominal, scale * fx.dx0, scale * fx.dw0);
            } catch (const TooManyActive&) {
                continue;  // more rows want to be active than there are inputs
            }
            double total = 0.0;
            for (const SegmentRecord& s : r.segments) total += s.fraction_of_total;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            multi += r.segments.size() > 1;
            // Linear plant: the adapted plan is the exact constrained optimum, so it stays feasible.
            CHECK(r.clean());
        }
    }
    CHECK(multi > 0);
}

TEST_CASE("fixtures and scenario runs are deterministic") {
    for (std::uint64_t seed : {0u, 5u, 9u}) {
        const OracleFixture a = oracle_fixture(seed), b = oracle_fixture(seed);
        CHECK(a.nominal.trajectory.u == b.nominal.trajectory.u);
        CHECK(a.dx0 == b.dx0);
        CHECK(oracle_mismatch(a) == oracle_mismatch(b));
    }
    const ScenarioSpec s = ScenarioSpec::large();
    const ScenarioPlan plan = prepare_scenario(s);
    for (ControllerKind kind : {ControllerKind::MENE, ControllerKind::CLNMPC}) {
        const SimResult a = run_scenario(s, plan, kind), b = run_scenario(s, plan, kind);
        CHECK(a.x == b.x);
        CHECK(a.u == b.u);
    }
}

TEST_CASE("preview feedback does not hurt across generator seeds") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        ScenarioSpec s = ScenarioSpec::small();
        s.generator.seed = seed;
        const ScenarioPlan plan = prepare_scenario(s);
        const SimResult ene = run_scenario(s, plan, ControllerKind::ENE);
        const SimResult ne = run_scenario(s, plan, ControllerKind::NE);
        CAPTURE(seed);
        CHECK(ene.performance <= ne.performance);
    }
}
