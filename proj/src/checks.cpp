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

#include "ene/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ene/costates.hpp"
#include "ene/ene.hpp"
#include "ene/oracle.hpp"

namespace ene {

namespace {

Vec concat(const Vec& a, const Vec& b, const Vec& c) {
    Vec out(a.size() + b.size() + c.size());
    out << a, b, c;
    return out;
}

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double rel_gap(const Mat& got, const Mat& ref) { return max_abs(got - ref) / std::max(1.0, max_abs(ref)); }

double max_gap(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) worst = std::max(worst, max_abs(a[k] - b[k]));
    return worst;
}

Vec random_vec(Lcg64& rng, Eigen::Index size, double scale) {
    Vec v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = scale * (2.0 * rng.next_unit() - 1.0);
    return v;
}

Vec hamiltonian_gradient(const OcpProblem& p, const Vec& x, const Vec& u, const Vec& w, const Vec& lambda,
                         const Vec& lambda_bar, const ActiveSet& active, const Vec& mu) {
    const StageGradient g = stage_gradient(p.cost, x, u, w);
    const StageJacobians fj = dynamics_jacobians(p.model, x, u, w);
    const PreviewJacobians gj = preview_jacobians(p.model, x, w);
    Vec hx = g.x + fj.x.transpose() * lambda + gj.x.transpose() * lambda_bar;
    Vec hu = g.u + fj.u.transpose() * lambda;
    Vec hw = g.w + fj.w.transpose() * lambda + gj.w.transpose() * lambda_bar;
    if (!active.empty()) {
        const StageJacobians cj = constraint_jacobians(p.constraints, x, u, w);
        hx += select_rows(cj.x, active).transpose() * mu;
        hu += select_rows(cj.u, active).transpose() * mu;
        hw += select_rows(cj.w, active).transpose() * mu;
    }
    return concat(hx, hu, hw);
}

CheckResult make(std::string name, double value, double limit, std::string detail = {}) {
    return {std::move(name), value <= limit, value, limit, std::move(detail)};
}

}  // namespace

OracleFixture oracle_fixture(std::uint64_t seed, bool coupled) {
    OracleFixture fx;
    fx.seed = seed;
    const int n = 2 + static_cast<int>(seed % 3);
    const int m = 1 + static_cast<int>((seed / 3) % 2);
    const int N = 3 + static_cast<int>(seed % 4);
    LinearQuadraticData data = lqr_preview_system(n, m, seed, coupled, N);
    // Tighten each box row to 70% of its unconstrained peak so that activity is mixed.
    data.d.setConstant(1e6);
    const NominalSolution free = solve_nominal(linear_quadratic_problem(data));
    for (int i = 0; i < data.d.size(); ++i) {
        double peak = 0.0;
        for (const Vec& u : free.trajectory.u) peak = std::max(peak, data.Du.row(i).dot(u));
        data.d(i) = peak > 1e-6 ? 0.7 * peak : 1.0;
    }
    fx.problem = linear_quadratic_problem(data);
    fx.nominal = solve_nominal(fx.problem);
    for (const ActiveSet& a : fx.nominal.trajectory.active) fx.active_steps += a.empty() ? 0 : 1;
    Lcg64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    fx.dx0 = random_vec(rng, n, 0.1);
    fx.dw0 = random_vec(rng, fx.problem.nw(), 0.1);
    return fx;
}

double oracle_mismatch(const OracleFixture& fx) {
    const Trajectory& traj = fx.nominal.trajectory;
    const GainSchedule gains = riccati_backward(second_variation(fx.problem, traj), {GainMode::Optimal, 0.0, {}});
    const DeltaTrajectory ene = propagate_linear(gains, fx.dx0, fx.dw0);
    const StackedQpSolution qp =
        solve_stacked_qp(fx.problem, traj, fx.nominal.costates, traj.active, fx.dx0, fx.dw0);
    return std::max({max_gap(ene.dx, qp.dx), max_gap(ene.du, qp.du), max_gap(ene.dw, qp.dw), max_gap(ene.dmu, qp.dmu)});
}

std::vector<ProbePoint> probe_points(const Vec& xc, const Vec& xs, const Vec& uc, const Vec& us, const Vec& wc,
                                     const Vec& ws, int count, std::uint64_t seed) {
    Lcg64 rng(seed);
    std::vector<ProbePoint> out;
    for (int i = 0; i < count; ++i) {
        ProbePoint p;
        p.x = xc + xs.cwiseProduct(random_vec(rng, xs.size(), 1.0));
        p.u = uc + us.cwiseProduct(random_vec(rng, us.size(), 1.0));
        p.w = wc + ws.cwiseProduct(random_vec(rng, ws.size(), 1.0));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<ProbePoint> pendulum_probes(int count, std::uint64_t seed) {
    Vec xs(4);
    xs << 2.0, 3.0, std::numbers::pi, 5.0;
    return probe_points(Vec::Zero(4), xs, Vec::Zero(1), Vec::Constant(1, 300.0), Vec::Zero(4),
                        Vec::Constant(4, 0.1), count, seed);
}

double hamiltonian_hessian_mismatch(const OcpProblem& p, const Trajectory& traj, const CostateTrajectory& co,
                                    const std::vector<int>& steps) {
    const HamiltonianBlocks blocks = hamiltonian_blocks(p, traj, co);
    const int n = p.n(), m = p.m(), nw = p.nw();
    double worst = 0.0;
    for (int k : steps) {
        const Vec& mu = co.mu[k];
        const Mat ref = symmetrized(fd_jacobian(
            [&](const Vec& z) {
                return hamiltonian_gradient(p, z.head(n), z.segment(n, m), z.tail(nw), co.lambda[k + 1],
                                            co.lambda_bar[k + 1], traj.active[k], mu);
            },
            concat(traj.x[k], traj.u[k], traj.w[k]), tol::fd_hess_step));
        const StageHessian& h = blocks.stage[k];
        Mat got(n + m + nw, n + m + nw);
        got << h.xx, h.xu, h.xw, h.ux, h.uu, h.uw, h.wx, h.wu, h.ww;
        worst = std::max(worst, rel_gap(got, ref));
    }
    return worst;
}

std::vector<CheckResult> run_checks(const CheckOptions& options) {
    std::vector<CheckResult> out;

    OcpProblem pendulum = options.scenario.problem();
    pendulum.model.fd_step = options.fd_step;
    {
        const DerivativeReport r =
            verify_derivatives(pendulum.model, pendulum.constraints, pendulum.cost, pendulum_probes(20, 7));
        std::string worst;
        for (const SupplierCheck& c : r.checks)
            if (c.max_rel_error == r.worst()) worst = c.name;
        out.push_back(make("derivatives: pendulum", r.worst(), r.tolerance, "worst supplier " + worst));
    }

    double fixture_deriv = 0.0, oracle = 0.0;
    std::string oracle_detail;
    for (int s = 0; s < options.fixtures; ++s) {
        const OracleFixture fx = oracle_fixture(static_cast<std::uint64_t>(s));
        const Trajectory& t = fx.nominal.trajectory;
        std::vector<ProbePoint> probes;
        for (int k = 0; k < t.horizon(); ++k) probes.push_back({t.x[k], t.u[k], t.w[k]});
        fixture_deriv = std::max(
            fixture_deriv, verify_derivatives(fx.problem.model, fx.problem.constraints, fx.problem.cost, probes).worst());
        const double gap = oracle_mismatch(fx);
        if (gap > oracle) oracle_detail = "worst seed " + std::to_string(s);
        oracle = std::max(oracle, gap);
    }
    out.push_back(make("derivatives: linear-quadratic fixtures", fixture_deriv, 1e-4));
    out.push_back(make("gain recursion vs stacked QP", oracle, 1e-6, oracle_detail));

    // Everything below needs a converged pendulum nominal.
    NominalSolution nominal;
    try {
        nominal = solve_nominal(pendulum);
    } catch (const Error& e) {
        out.push_back({"pendulum nominal solve", false, 0.0, 0.0, e.what()});
        return out;
    }
    std::vector<int> steps;
    for (int k = 0; k < pendulum.horizon && static_cast<int>(steps.size()) < 20; ++k) steps.push_back(k);
    out.push_back(make("hamiltonian hessian vs finite differences",
                       hamiltonian_hessian_mismatch(pendulum, nominal.trajectory, nominal.costates, steps), 1e-4));
    try {
        const GainSchedule g = riccati_backward(second_variation(pendulum, nominal.trajectory), {GainMode::Optimal, 0.0, {}});
        double sym = 0.0;
        for (std::size_t k = 0; k < g.S.size(); ++k) {
            sym = std::max({sym, max_abs(g.S[k] - g.S[k].transpose()), max_abs(g.Wbar[k] - g.Wbar[k].transpose()),
                            max_abs(g.Sbar[k] - g.W[k].transpose())});
        }
        out.push_back(make("value-function symmetry", sym, 1e-7));
    } catch (const Error& e) {
        out.push_back({"value-function symmetry", false, 0.0, 1e-7, e.what()});
    }
    return out;
}

}  // namespace ene
