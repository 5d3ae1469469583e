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

#include "ene/systems.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

namespace ene {

void PendulumParams::validate() const {
    if (!(m > 0 && M > 0 && L > 0 && g > 0 && Kd > 0 && Ts > 0 && force_bound > 0))
        throw Error("pendulum parameters must all be positive");
}

Vec pendulum_continuous(const Vec& x, double F, double w_z, double w_theta, const PendulumParams& p) {
    const double zd = x(1), th = x(2), thd = x(3);
    const double s = std::sin(th), c = std::cos(th);
    const double zdd = (F - p.Kd * zd - p.m * (p.L * thd * thd * s - p.g * s * c) - 2.0 * w_z) / (p.M + p.m * s * s);
    const double thdd = (zdd * c + p.g * s) / p.L - w_theta / (p.m * p.L * p.L);
    Vec out(4);
    out << zd, zdd, thd, thdd;
    return out;
}

PlantModel pendulum_discrete(const PendulumParams& params, const PreviewRecursion& preview, Discretization method) {
    params.validate();
    PlantModel model;
    model.n = 4;
    model.m = 1;
    model.nw = 4;
    model.f = [params, method](const Vec& x, const Vec& u, const Vec& w) -> Vec {
        auto rate = [&](const Vec& s) { return pendulum_continuous(s, u(0), w(1), w(3), params); };
        const double h = params.Ts;
        if (method == Discretization::Euler) return x + h * rate(x);
        const Vec k1 = rate(x);
        const Vec k2 = rate(x + 0.5 * h * k1);
        const Vec k3 = rate(x + 0.5 * h * k2);
        const Vec k4 = rate(x + h * k3);
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    const double ax = preview.a_x, aw = preview.a_w;
    model.g = [ax, aw](const Vec& x, const Vec& w) -> Vec { return ax * x + aw * w; };
    model.g_jac = [ax, aw](const Vec&, const Vec&) {
        return PreviewJacobians{ax * Mat::Identity(4, 4), aw * Mat::Identity(4, 4)};
    };
    model.g_affine = true;
    return model;
}

ConstraintSet pendulum_constraints(const PendulumParams& params) {
    const double b = params.force_bound;
    ConstraintSet cs;
    cs.l = 2;
    cs.affine = true;
    cs.c = [b](const Vec&, const Vec& u, const Vec&) -> Vec {
        Vec c(2);
        c << u(0) - b, -u(0) - b;
        return c;
    };
    cs.c_jac = [](const Vec&, const Vec&, const Vec&) {
        StageJacobians j{Mat::Zero(2, 4), Mat::Zero(2, 1), Mat::Zero(2, 4)};
        j.u << 1.0, -1.0;
        return j;
    };
    return cs;
}

CostSpec pendulum_cost(const PendulumWeights& wt) {
    CostSpec cost;
    const double qz = wt.q_z, qt = wt.q_theta, rf = wt.r_force, ts = wt.terminal_scale;
    const double rz = wt.ref_z, rt = wt.ref_theta;
    cost.stage = [=](const Vec& x, const Vec& u, const Vec&) {
        const double ez = x(0) - rz, et = x(2) - rt;
        return qz * ez * ez + qt * et * et + rf * u(0) * u(0);
    };
    cost.terminal = [=](const Vec& x, const Vec&) {
        const double ez = x(0) - rz, et = x(2) - rt;
        return ts * (qz * ez * ez + qt * et * et);
    };
    cost.stage_grad = [=](const Vec& x, const Vec& u, const Vec&) {
        StageGradient g{Vec::Zero(4), Vec::Zero(1), Vec::Zero(4)};
        g.x(0) = 2.0 * qz * (x(0) - rz);
        g.x(2) = 2.0 * qt * (x(2) - rt);
        g.u(0) = 2.0 * rf * u(0);
        return g;
    };
    cost.stage_hess = [=](const Vec&, const Vec&, const Vec&) {
        Mat h = Mat::Zero(9, 9);
        h(0, 0) = 2.0 * qz;
        h(2, 2) = 2.0 * qt;
        h(4, 4) = 2.0 * rf;
        return h;
    };
    cost.terminal_grad = [=](const Vec& x, const Vec&) {
        TerminalGradient g{Vec::Zero(4), Vec::Zero(4)};
        g.x(0) = 2.0 * ts * qz * (x(0) - rz);
        g.x(2) = 2.0 * ts * qt * (x(2) - rt);
        return g;
    };
    cost.terminal_hess = [=](const Vec&, const Vec&) {
        TerminalHessian h{Mat::Zero(4, 4), Mat::Zero(4, 4)};
        h.xx(0, 0) = 2.0 * ts * qz;
        h.xx(2, 2) = 2.0 * ts * qt;
        return h;
    };
    return cost;
}

ScenarioSpec::ScenarioSpec() {
    x0_nominal = Vec::Zero(4);
    x0_nominal(2) = -std::numbers::pi;
    w0_nominal = Vec::Zero(4);
    w0_nominal(1) = 0.1;
    w0_nominal(3) = 0.1;
    dx0 = Vec::Zero(4);
}

ScenarioSpec ScenarioSpec::small() {
    ScenarioSpec s;
    s.name = "small";
    s.dx0 = Vec::Constant(4, 0.01);
    s.generator = {0.004, 0.004, 0.002, 1};
    return s;
}

ScenarioSpec ScenarioSpec::large() {
    ScenarioSpec s;
    s.name = "large";
    s.dx0 = Vec::Constant(4, 0.2);
    s.generator = {0.015, 0.015, 0.01, 1};
    return s;
}

ScenarioSpec ScenarioSpec::sweep() {
    ScenarioSpec s;
    s.name = "sweep";
    s.dx0 = Vec::Constant(4, 0.1);
    s.generator = {0.008, 0.008, 0.004, 1};
    return s;
}

void ScenarioSpec::validate() const {
    if (horizon < 1) throw Error("scenario horizon must be at least 1, got " + std::to_string(horizon));
    if (x0_nominal.size() != 4 || w0_nominal.size() != 4 || dx0.size() != 4)
        throw DimensionMismatch("pendulum scenario vectors must have 4 entries");
    params.validate();
    if (weights.r_force <= 0.0) throw Error("force weight must be positive");
    if (weights.q_z < 0.0 || weights.q_theta < 0.0 || weights.terminal_scale < 0.0)
        throw Error("output weights must be nonnegative");
}

OcpProblem ScenarioSpec::problem() const {
    validate();
    OcpProblem p;
    p.horizon = horizon;
    p.model = pendulum_discrete(params, preview, method);
    p.constraints = pendulum_constraints(params);
    p.cost = pendulum_cost(weights);
    p.x0 = x0_nominal;
    p.w0 = w0_nominal;
    return p;
}

PreviewSignal ScenarioSpec::actual_preview() const { return PreviewSignal::from_generator(generator, {1, 3}, 4); }

OcpProblem linear_quadratic_problem(const LinearQuadraticData& d) {
    const int n = static_cast<int>(d.A.rows()), m = static_cast<int>(d.B.cols()), nw = static_cast<int>(d.H.rows());
    OcpProblem p;
    p.horizon = d.horizon;
    p.x0 = d.x0;
    p.w0 = d.w0;
    PlantModel& model = p.model;
    model.n = n;
    model.m = m;
    model.nw = nw;
    model.f = [d](const Vec& x, const Vec& u, const Vec& w) -> Vec { return d.A * x + d.B * u + d.E * w; };
    model.g = [d](const Vec& x, const Vec& w) -> Vec { return d.G * x + d.H * w; };
    model.f_jac = [d](const Vec&, const Vec&, const Vec&) { return StageJacobians{d.A, d.B, d.E}; };
    model.g_jac = [d](const Vec&, const Vec&) { return PreviewJacobians{d.G, d.H}; };
    model.f_affine = true;
    model.g_affine = true;
    model.origin_equilibrium = true;

    ConstraintSet& cs = p.constraints;
    cs.l = static_cast<int>(d.d.size());
    cs.affine = true;
    if (cs.l > 0) {
        cs.c = [d](const Vec& x, const Vec& u, const Vec& w) -> Vec { return d.Dx * x + d.Du * u + d.Dw * w - d.d; };
        cs.c_jac = [d](const Vec&, const Vec&, const Vec&) { return StageJacobians{d.Dx, d.Du, d.Dw}; };
    }

    CostSpec& cost = p.cost;
    cost.stage = [d](const Vec& x, const Vec& u, const Vec& w) {
        return 0.5 * (x.dot(d.Q * x) + u.dot(d.R * u) + w.dot(d.Qw * w));
    };
    cost.terminal = [d](const Vec& x, const Vec& w) { return 0.5 * (x.dot(d.Qf * x) + w.dot(d.Qfw * w)); };
    cost.stage_grad = [d](const Vec& x, const Vec& u, const Vec& w) {
        return StageGradient{d.Q * x, d.R * u, d.Qw * w};
    };
    cost.stage_hess = [d, n, m, nw](const Vec&, const Vec&, const Vec&) {
        Mat h = Mat::Zero(n + m + nw, n + m + nw);
        h.block(0, 0, n, n) = d.Q;
        h.block(n, n, m, m) = d.R;
        h.block(n + m, n + m, nw, nw) = d.Qw;
        return h;
    };
    cost.terminal_grad = [d](const Vec& x, const Vec& w) { return TerminalGradient{d.Qf * x, d.Qfw * w}; };
    cost.terminal_hess = [d](const Vec&, const Vec&) { return TerminalHessian{d.Qf, d.Qfw}; };
    return p;
}

namespace {

Mat random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mat a(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) a(i, j) = dist(rng);
    return a;
}

Mat scaled_to_radius(Mat a, double radius) {
    const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 1e-12) a *= radius / rho;
    return a;
}

Mat random_psd(std::mt19937_64& rng, int n, double shift) {
    const Mat b = random_matrix(rng, n, n);
    return b * b.transpose() + shift * Mat::Identity(n, n);
}

}  // namespace

LinearQuadraticData lqr_preview_system(int n, int m, std::uint64_t seed, bool coupled, int horizon) {
    if (n < 1 || n > 4 || m < 1 || m > 2) throw Error("lqr_preview_system supports 1 <= n <= 4 and 1 <= m <= 2");
    std::mt19937_64 rng(seed);
    const int nw = n;
    LinearQuadraticData d;
    d.horizon = horizon;
    d.A = scaled_to_radius(random_matrix(rng, n, n), 0.9);
    d.B = random_matrix(rng, n, m);
    const Mat e = random_matrix(rng, n, nw);
    const Mat g = 0.3 * random_matrix(rng, nw, n);
    const Mat h = scaled_to_radius(random_matrix(rng, nw, nw), 0.8);
    d.E = coupled ? e : Mat::Zero(n, nw);
    d.G = coupled ? g : Mat::Zero(nw, n);
    d.H = coupled ? h : Mat::Zero(nw, nw);
    d.Q = random_psd(rng, n, 0.1);
    d.R = random_psd(rng, m, 0.5);
    d.Qw = random_psd(rng, nw, 0.1);
    d.Qf = random_psd(rng, n, 0.5);
    d.Qfw = random_psd(rng, nw, 0.1);
    // Input box rows u_0 <= d_0 and -u_{1 mod m} <= d_1.
    d.Dx = Mat::Zero(2, n);
    d.Du = Mat::Zero(2, m);
    d.Du(0, 0) = 1.0;
    d.Du(1, 1 % m) = -1.0;
    d.Dw = Mat::Zero(2, nw);
    d.d = Vec::Constant(2, 1.0);
    d.x0 = random_matrix(rng, n, 1);
    d.w0 = random_matrix(rng, nw, 1);
    return d;
}

}  // namespace ene
