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

// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ene/checks.hpp"
#include "ene/ene.hpp"
#include "ene/mene.hpp"
#include "ene/oracle.hpp"
#include "ene/sim.hpp"

using namespace ene;
using K = ControllerKind;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 1e-6;
constexpr double kOracleSeconds = 5.0;
constexpr double kReductionTol = 1e-12;
constexpr double kAffineTermTol = 1e-8;
constexpr double kLqrTol = 1e-8;
constexpr double kSmallSeconds = 60.0;
constexpr double kOpenLoopFactor = 2.0;
constexpr double kSpeedup = 10.0;
constexpr double kSymmetryTol = 1e-7;
constexpr double kActiveRowTol = 1e-8;
constexpr double kTelescopeTol = 1e-12;
constexpr double kDerivativeTol = 1e-4;
constexpr int kHessianProbes = 20;
constexpr int kFixtures = 10;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

const SimResult& get(const Comparison& c, K kind) {
    for (const SimResult& r : c.results)
        if (r.kind == kind) return r;
    throw Error("controller missing from comparison");
}

double perf(const Comparison& c, K kind) {
    const SimResult& r = get(c, kind);
    return r.completed ? r.performance : INFINITY;
}

bool same_controls(const SimResult& a, const SimResult& b) {
    if (!a.completed || !b.completed || a.u.size() != b.u.size()) return false;
    for (size_t k = 0; k < a.u.size(); ++k)
        if (a.u[k] != b.u[k]) return false;
    return true;
}

std::string ordering(const Comparison& c) {
    std::ostringstream s;
    for (K kind : all_controllers()) s << to_string(kind) << "=" << fmt(perf(c, kind)) << " ";
    return s.str();
}

// Shared runs, computed once.
struct Runs {
    double small_seconds = 0.0;
    Comparison small, large, sweep;
    SweepReport sweep_report;
};

Verdict criterion1() {
    Verdict v;
    const auto t0 = Clock::now();
    double worst = 0.0;
    int mixed = 0;
    for (int seed = 0; seed < kFixtures; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        worst = std::max(worst, oracle_mismatch(fx));
        mixed += fx.active_steps > 0 && fx.active_steps < fx.problem.horizon;
    }
    const double secs = seconds_since(t0);
    v.detail << "max gap " << fmt(worst) << " over " << kFixtures << " fixtures (" << mixed << " with mixed activity) in "
             << fmt(secs) << " s";
    v.require(worst <= kOracleTol, "gap above " + fmt(kOracleTol));
    v.require(mixed == kFixtures, "every fixture needs mixed activity");
    v.require(secs < kOracleSeconds, "runtime");
    return v;
}

Verdict criterion2() {
    Verdict v;
    double law_gap = 0.0, affine = 0.0;
    auto check = [&](const OcpProblem& p, const NominalSolution& nom, const Vec& dx, const Vec& dw) {
        SecondVariation sv = second_variation(p, nom.trajectory);
        for (Vec& h : sv.hu) h.setZero();
        const GainSchedule opt = riccati_backward(sv, {GainMode::Optimal, 0.0, {}});
        const GainSchedule non = riccati_backward(sv, {GainMode::NonOptimal, 0.0, {}});
        for (int k = 0; k <= non.horizon(); ++k) affine = std::max({affine, non.T[k].norm(), non.Tbar[k].norm()});
        for (int k = 0; k < non.horizon(); ++k) {
            const PerturbationState pert{dx, dw};
            const Vec plain = ene_control(opt, k, pert);
            law_gap = std::max(law_gap, max_abs(mene_control(non, k, pert) - plain));
            law_gap = std::max(law_gap, max_abs(mene_control(non, k, pert, non.T[k + 1], sv.hu[k]) - plain));
        }
    };
    for (int seed = 0; seed < kFixtures; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        check(fx.problem, fx.nominal, fx.dx0, fx.dw0);
    }
    const ScenarioSpec s = ScenarioSpec::small();
    const ScenarioPlan plan = prepare_scenario(s);
    check(plan.problem, plan.nominal, s.dx0, s.actual_preview().generate(1)[0] - plan.problem.w0);
    v.detail << "law gap " << fmt(law_gap) << ", max |T|, |Tbar| " << fmt(affine);
    v.require(law_gap <= kReductionTol, "law gap");
    v.require(affine <= kAffineTermTol, "affine terms");
    return v;
}

Verdict criterion3() {
    Verdict v;
    double worst = 0.0, k2 = 0.0;
    for (int seed = 0; seed < kFixtures; ++seed) {
        const int n = 2 + seed % 3, m = 1 + (seed / 3) % 2, N = 3 + seed % 4;
        LinearQuadraticData d = lqr_preview_system(n, m, seed, false, N);
        d.Dx = Mat::Zero(0, n);
        d.Du = Mat::Zero(0, m);
        d.Dw = Mat::Zero(0, n);
        d.d = Vec::Zero(0);
        const OcpProblem p = linear_quadratic_problem(d);
        const NominalSolution nom = solve_nominal(p);
        const GainSchedule g = riccati_backward(second_variation(p, nom.trajectory));
        const LqrGains lqr = discrete_lqr(d.A, d.B, d.Q, d.R, d.Qf, N);
        for (int k = 0; k < N; ++k) {
            worst = std::max(worst, max_abs(g.stage[k].K1 + lqr.K[k]));
            k2 = std::max(k2, max_abs(g.stage[k].K2));
        }
    }
    v.detail << "max |K1 - K_lqr| " << fmt(worst) << ", max |K2| " << fmt(k2);
    v.require(worst <= kLqrTol, "K1 gap");
    v.require(k2 == 0.0, "K2 not identically zero");
    return v;
}

Verdict criterion4(const Runs& runs) {
    Verdict v;
    const Comparison& c = runs.small;
    v.detail << ordering(c) << "OL/ENE " << fmt(perf(c, K::OLNMPC) / perf(c, K::ENE)) << ", " << fmt(runs.small_seconds)
             << " s";
    v.require(perf(c, K::CLNMPC) <= perf(c, K::MENE), "CLNMPC <= MENE");
    v.require(same_controls(get(c, K::ENE), get(c, K::MENE)), "ENE and MENE controls identical");
    v.require(same_controls(get(c, K::NE), get(c, K::MNE)), "NE and MNE controls identical");
    v.require(perf(c, K::ENE) < perf(c, K::NE), "ENE < NE");
    v.require(perf(c, K::NE) < perf(c, K::OLNMPC), "NE < OLNMPC");
    v.require(perf(c, K::OLNMPC) >= kOpenLoopFactor * perf(c, K::ENE), "OLNMPC >= 2 ENE");
    v.require(runs.small_seconds < kSmallSeconds, "runtime");
    return v;
}

Verdict criterion5(const Runs& runs) {
    Verdict v;
    const Comparison& c = runs.large;
    const SimResult& ene = get(c, K::ENE);
    const SimResult& mene = get(c, K::MENE);
    v.detail << ordering(c) << "ENE violations " << ene.violations.size() << ", MENE violations "
             << mene.violations.size() << ", MENE flips " << mene.flips;
    v.require(perf(c, K::CLNMPC) <= perf(c, K::MENE), "CLNMPC <= MENE");
    v.require(perf(c, K::MENE) <= perf(c, K::ENE), "MENE <= ENE");
    v.require(perf(c, K::ENE) <= perf(c, K::MNE), "ENE <= MNE");
    v.require(perf(c, K::MNE) <= perf(c, K::NE), "MNE <= NE");
    v.require(perf(c, K::NE) < perf(c, K::OLNMPC), "NE < OLNMPC");
    v.require(!ene.violations.empty(), "ENE logs a violation");
    v.require(mene.completed && mene.violations.empty(), "MENE clean");
    v.require(mene.flips >= 1, "MENE flips");
    return v;
}

Verdict criterion6(const Runs& runs) {
    Verdict v;
    for (const Comparison* c : {&runs.small, &runs.large}) {
        const double cl = get(*c, K::CLNMPC).timing.median_ms;
        const double ene = get(*c, K::ENE).timing.median_ms;
        const double mene = get(*c, K::MENE).timing.median_ms;
        v.detail << c->scenario << ": CLNMPC " << fmt(cl) << " ms, ENE " << fmt(ene) << " ms, MENE " << fmt(mene)
                 << " ms; ";
        v.require(ene <= cl / kSpeedup && mene <= cl / kSpeedup, c->scenario + " speedup");
    }
    return v;
}

Verdict criterion7() {
    Verdict v;
    double terminal = 0.0, symmetry = 0.0, active_rows = 0.0, fixed_point = 0.0, telescope = 0.0;
    bool deterministic = true;

    auto schedule_checks = [&](const OcpProblem& p, const NominalSolution& nom, const Vec& dx, const Vec& dw) {
        const SecondVariation sv = second_variation(p, nom.trajectory);
        const GainSchedule g = riccati_backward(sv);
        const int N = g.horizon();
        terminal = std::max({terminal, max_abs(g.S[N] - sv.blocks.psi_xx), max_abs(g.Wbar[N] - sv.blocks.psi_ww),
                             max_abs(g.W[N]), max_abs(g.Sbar[N]), max_abs(g.T[N]), max_abs(g.Tbar[N])});
        for (int k = 0; k <= N; ++k)
            symmetry = std::max({symmetry, max_abs(g.S[k] - g.S[k].transpose()),
                                 max_abs(g.Wbar[k] - g.Wbar[k].transpose()), max_abs(g.Sbar[k] - g.W[k].transpose())});
        const DeltaTrajectory d = propagate_linear(g, dx, dw);
        for (int k = 0; k < N; ++k)
            for (int row : g.stage[k].active) active_rows = std::max(active_rows, std::abs(d.dc[k](row)));
        const DeltaTrajectory zero = propagate_linear(g, Vec::Zero(p.n()), Vec::Zero(p.nw()));
        for (const Vec& du : zero.du) fixed_point = std::max(fixed_point, max_abs(du));
    };
    for (int seed = 0; seed < kFixtures; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        schedule_checks(fx.problem, fx.nominal, fx.dx0, fx.dw0);
    }
    const ScenarioSpec large = ScenarioSpec::large();
    const ScenarioPlan plan = prepare_scenario(large);
    const Vec dw0 = large.actual_preview().generate(1)[0] - plan.problem.w0;
    schedule_checks(plan.problem, plan.nominal, large.dx0, dw0);

    // Zero perturbation on the plant: every closed-loop law reproduces the nominal.
    ScenarioSpec still = ScenarioSpec::small();
    still.dx0.setZero();
    still.actual_is_nominal = true;
    const ScenarioPlan still_plan = prepare_scenario(still);
    for (K kind : {K::ENE, K::MENE, K::NE, K::MNE}) {
        const SimResult r = run_scenario(still, still_plan, kind);
        for (size_t k = 0; k < r.u.size(); ++k)
            fixed_point = std::max(fixed_point, max_abs(r.u[k] - still_plan.nominal.trajectory.u[k]));
    }

    AdaptOptions opt;
    opt.actual_preview = large.actual_preview();
    const AdaptationResult ad = adapt_multi_segment(plan.problem, plan.nominal, large.dx0, dw0, opt);
    double total = 0.0;
    for (const SegmentRecord& s : ad.segments) total += s.fraction_of_total;
    telescope = std::abs(total - 1.0);

    for (K kind : {K::ENE, K::MENE, K::CLNMPC}) {
        const SimResult a = run_scenario(large, plan, kind), b = run_scenario(large, plan, kind);
        deterministic = deterministic && a.x == b.x && a.u == b.u && a.w == b.w;
    }
    const OracleFixture f1 = oracle_fixture(3), f2 = oracle_fixture(3);
    deterministic = deterministic && f1.nominal.trajectory.u == f2.nominal.trajectory.u;

    v.detail << "terminal " << fmt(terminal) << ", symmetry " << fmt(symmetry) << ", active rows " << fmt(active_rows)
             << ", fixed point " << fmt(fixed_point) << ", telescoping " << fmt(telescope) << " over "
             << ad.segments.size() << " segments, deterministic " << (deterministic ? "yes" : "no");
    v.require(terminal == 0.0, "terminal conditions");
    v.require(symmetry <= kSymmetryTol, "symmetry");
    v.require(active_rows <= kActiveRowTol, "active rows");
    v.require(fixed_point == 0.0, "zero-perturbation fixed point");
    v.require(ad.segments.size() > 1, "multi-segment run");
    v.require(telescope <= kTelescopeTol, "telescoping");
    v.require(deterministic, "determinism");
    return v;
}

Verdict criterion8() {
    Verdict v;
    const ScenarioSpec s = ScenarioSpec::small();
    const OcpProblem p = s.problem();
    const DerivativeReport pend = verify_derivatives(p.model, p.constraints, p.cost, pendulum_probes(kHessianProbes, 1));
    double fixtures = 0.0;
    for (int seed = 0; seed < kFixtures; ++seed) {
        const OracleFixture fx = oracle_fixture(seed);
        const OcpProblem& q = fx.problem;
        const auto probes = probe_points(Vec::Zero(q.n()), Vec::Ones(q.n()), Vec::Zero(q.m()), Vec::Ones(q.m()),
                                         Vec::Zero(q.nw()), Vec::Ones(q.nw()), 5, seed);
        fixtures = std::max(fixtures, verify_derivatives(q.model, q.constraints, q.cost, probes).worst());
    }
    const NominalSolution nom = solve_nominal(p);
    std::vector<int> steps;
    for (int i = 0; i < kHessianProbes; ++i) steps.push_back(i * p.horizon / kHessianProbes);
    const double hess = hamiltonian_hessian_mismatch(p, nom.trajectory, nom.costates, steps);
    v.detail << "pendulum " << fmt(pend.worst()) << ", fixtures " << fmt(fixtures) << ", hamiltonian hessian "
             << fmt(hess) << " at " << steps.size() << " points";
    v.require(pend.worst() <= kDerivativeTol, "pendulum suppliers");
    v.require(fixtures <= kDerivativeTol, "fixture suppliers");
    v.require(hess <= kDerivativeTol, "hamiltonian hessian");
    return v;
}

Verdict criterion9(const Runs& runs) {
    Verdict v;
    const SweepReport& rep = runs.sweep_report;
    v.require(rep.entries.size() == 2, "two preview models");
    for (const SweepEntry& e : rep.entries) {
        v.detail << "(" << fmt(e.model.a_x) << ", " << fmt(e.model.a_w) << "): ENE " << fmt(e.ene_performance)
                 << ", MENE " << fmt(e.mene_performance) << ", MENE violations " << e.mene_violations << "; ";
        v.require(e.completed, "model completes");
        v.require(e.mene_violations == 0, "MENE clean");
    }
    v.require(rep.best >= 0, "best model reported");
    return v;
}

Verdict criterion10(const Runs& runs) {
    Verdict v;
    for (const Comparison* c : {&runs.small, &runs.large, &runs.sweep}) {
        const double ene = perf(*c, K::ENE), ne = perf(*c, K::NE);
        v.detail << c->scenario << ": ENE " << fmt(ene) << " vs NE " << fmt(ne) << "; ";
        v.require(ene <= ne, c->scenario + " ENE <= NE");
        v.require(!same_controls(get(*c, K::ENE), get(*c, K::NE)), c->scenario + " preview must matter");
    }
    return v;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string& title, const std::function<Verdict()>& fn) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "threw: " << e.what();
        }
        failures += !v.pass;
        std::printf("%s criterion %d: %s: %s\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.str().c_str());
        std::fflush(stdout);
    };

    Runs runs;
    {
        const auto t0 = Clock::now();
        runs.small = compare_controllers(ScenarioSpec::small(), all_controllers());
        runs.small_seconds = seconds_since(t0);
        runs.large = compare_controllers(ScenarioSpec::large(), all_controllers());
        runs.sweep = compare_controllers(ScenarioSpec::sweep(), {K::ENE, K::NE});
        runs.sweep_report =
            preview_model_sweep(ScenarioSpec::sweep(), {PreviewRecursion::hold_constant(), PreviewRecursion{}});
    }

    report(1, "gain recursion matches the stacked QP", criterion1);
    report(2, "modified law reduces to the plain law", criterion2);
    report(3, "LQR exactness", criterion3);
    report(4, "small-perturbation ordering", [&] { return criterion4(runs); });
    report(5, "large-perturbation ordering", [&] { return criterion5(runs); });
    report(6, "adaptation speed", [&] { return criterion6(runs); });
    report(7, "invariants", criterion7);
    report(8, "derivative gate", criterion8);
    report(9, "preview model sweep", [&] { return criterion9(runs); });
    report(10, "preview feedback never hurts", [&] { return criterion10(runs); });
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
