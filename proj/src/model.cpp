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

#include "ene/model.hpp"

#include <algorithm>
#include <cmath>

namespace ene {

namespace {

Vec stack(const Vec& a, const Vec& b) {
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

Vec stack(const Vec& a, const Vec& b, const Vec& c) {
    Vec out(a.size() + b.size() + c.size());
    out << a, b, c;
    return out;
}

StageJacobians fd_stage_jacobians(const StageMap& map, const Vec& x, const Vec& u, const Vec& w, double step) {
    const auto n = x.size(), m = u.size(), nw = w.size();
    const Mat jac = fd_jacobian(
        [&](const Vec& z) { return map(z.head(n), z.segment(n, m), z.tail(nw)); }, stack(x, u, w), step);
    return {jac.leftCols(n), jac.middleCols(n, m), jac.rightCols(nw)};
}

Mat fd_stage_curvature(const StageMap& map, const Vec& x, const Vec& u, const Vec& w, const Vec& weight) {
    const auto n = x.size(), m = u.size(), nw = w.size();
    return fd_hessian(
        [&](const Vec& z) { return weight.dot(map(z.head(n), z.segment(n, m), z.tail(nw))); },
        stack(x, u, w));
}

double rel_error(const Mat& got, const Mat& ref) {
    if (got.rows() != ref.rows() || got.cols() != ref.cols()) return INFINITY;
    if (ref.size() == 0) return 0.0;
    const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-3);
    return (got - ref).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

StageJacobians dynamics_jacobians(const PlantModel& model, const Vec& x, const Vec& u, const Vec& w) {
    if (model.f_jac) return model.f_jac(x, u, w);
    return fd_stage_jacobians(model.f, x, u, w, model.fd_step);
}

PreviewJacobians preview_jacobians(const PlantModel& model, const Vec& x, const Vec& w) {
    if (model.g_jac) return model.g_jac(x, w);
    const auto n = x.size(), nw = w.size();
    const Mat jac = fd_jacobian([&](const Vec& z) { return model.g(z.head(n), z.tail(nw)); }, stack(x, w),
                                model.fd_step);
    return {jac.leftCols(n), jac.rightCols(nw)};
}

Mat dynamics_curvature(const PlantModel& model, const Vec& x, const Vec& u, const Vec& w, const Vec& weight) {
    const auto dim = x.size() + u.size() + w.size();
    if (model.f_affine) return Mat::Zero(dim, dim);
    if (model.f_curvature) return model.f_curvature(x, u, w, weight);
    return fd_stage_curvature(model.f, x, u, w, weight);
}

Mat preview_curvature(const PlantModel& model, const Vec& x, const Vec& w, const Vec& weight) {
    const auto n = x.size(), nw = w.size();
    if (model.g_affine) return Mat::Zero(n + nw, n + nw);
    if (model.g_curvature) return model.g_curvature(x, w, weight);
    return fd_hessian([&](const Vec& z) { return weight.dot(model.g(z.head(n), z.tail(nw))); }, stack(x, w));
}

StageJacobians constraint_jacobians(const ConstraintSet& cs, const Vec& x, const Vec& u, const Vec& w) {
    if (cs.c_jac) return cs.c_jac(x, u, w);
    return fd_stage_jacobians(cs.c, x, u, w, cs.fd_step);
}

Mat constraint_curvature(const ConstraintSet& cs, const Vec& x, const Vec& u, const Vec& w, const Vec& weight) {
    const auto dim = x.size() + u.size() + w.size();
    if (cs.affine || cs.l == 0) return Mat::Zero(dim, dim);
    if (cs.c_curvature) return cs.c_curvature(x, u, w, weight);
    return fd_stage_curvature(cs.c, x, u, w, weight);
}

StageGradient stage_gradient(const CostSpec& cost, const Vec& x, const Vec& u, const Vec& w) {
    if (cost.stage_grad) return cost.stage_grad(x, u, w);
    const auto n = x.size(), m = u.size(), nw = w.size();
    const Vec g = fd_gradient([&](const Vec& z) { return cost.stage(z.head(n), z.segment(n, m), z.tail(nw)); },
                              stack(x, u, w));
    return {g.head(n), g.segment(n, m), g.tail(nw)};
}

Mat stage_hessian(const CostSpec& cost, const Vec& x, const Vec& u, const Vec& w) {
    if (cost.stage_hess) return cost.stage_hess(x, u, w);
    const auto n = x.size(), m = u.size(), nw = w.size();
    if (cost.stage_grad) {
        return symmetrized(fd_jacobian(
            [&](const Vec& z) {
                const StageGradient g = cost.stage_grad(z.head(n), z.segment(n, m), z.tail(nw));
                return stack(g.x, g.u, g.w);
            },
            stack(x, u, w)));
    }
    return fd_hessian([&](const Vec& z) { return cost.stage(z.head(n), z.segment(n, m), z.tail(nw)); },
                      stack(x, u, w));
}

TerminalGradient terminal_gradient(const CostSpec& cost, const Vec& x, const Vec& w) {
    if (cost.terminal_grad) return cost.terminal_grad(x, w);
    const auto n = x.size(), nw = w.size();
    const Vec g = fd_gradient([&](const Vec& z) { return cost.terminal(z.head(n), z.tail(nw)); }, stack(x, w));
    return {g.head(n), g.tail(nw)};
}

TerminalHessian terminal_hessian(const CostSpec& cost, const Vec& x, const Vec& w) {
    if (cost.terminal_hess) return cost.terminal_hess(x, w);
    const auto n = x.size(), nw = w.size();
    Mat h;
    if (cost.terminal_grad) {
        h = symmetrized(fd_jacobian(
            [&](const Vec& z) {
                const TerminalGradient g = cost.terminal_grad(z.head(n), z.tail(nw));
                return stack(g.x, g.w);
            },
            stack(x, w)));
    } else {
        h = fd_hessian([&](const Vec& z) { return cost.terminal(z.head(n), z.tail(nw)); }, stack(x, w));
    }
    return {h.topLeftCorner(n, n), h.bottomRightCorner(nw, nw)};
}

std::vector<int> active_indices(const ConstraintSet& cs, const Vec& x, const Vec& u, const Vec& w, int m,
                                int step) {
    std::vector<int> active;
    if (cs.l == 0) return active;
    const Vec c = cs.c(x, u, w);
    for (int i = 0; i < cs.l; ++i) {
        if (c(i) >= -cs.activation_tol) active.push_back(i);
    }
    if (static_cast<int>(active.size()) > m) throw TooManyActive(step, static_cast<int>(active.size()), m);
    return active;
}

bool DerivativeReport::passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [this](const SupplierCheck& c) { return c.max_rel_error <= tolerance; });
}

double DerivativeReport::worst() const {
    double worst = 0.0;
    for (const auto& c : checks) worst = std::max(worst, c.max_rel_error);
    return worst;
}

DerivativeReport verify_derivatives(const PlantModel& model, const ConstraintSet& cs, const CostSpec& cost,
                                    const std::vector<ProbePoint>& probes) {
    DerivativeReport report;
    auto record = [&report](const std::string& name, double err) {
        auto it = std::find_if(report.checks.begin(), report.checks.end(),
                               [&](const SupplierCheck& c) { return c.name == name; });
        if (it == report.checks.end()) {
            report.checks.push_back({name, err});
        } else {
            it->max_rel_error = std::max(it->max_rel_error, err);
        }
    };

    // Finite-difference suppliers are checked against a second step size.
    const double ref_step = tol::fd_step;
    const double alt_step = 10.0 * tol::fd_step;
    Lcg64 rng(0x5eed);
    auto random_weight = [&rng](Eigen::Index size) {
        Vec v(size);
        for (Eigen::Index i = 0; i < size; ++i) v(i) = 2.0 * rng.next_unit() - 1.0;
        return v;
    };

    for (const auto& p : probes) {
        const auto n = p.x.size(), m = p.u.size(), nw = p.w.size();
        {
            const StageJacobians got = dynamics_jacobians(model, p.x, p.u, p.w);
            const StageJacobians ref =
                fd_stage_jacobians(model.f, p.x, p.u, p.w, model.f_jac ? ref_step : alt_step);
            record("f_x", rel_error(got.x, ref.x));
            record("f_u", rel_error(got.u, ref.u));
            record("f_w", rel_error(got.w, ref.w));
        }
        {
            const PreviewJacobians got = preview_jacobians(model, p.x, p.w);
            const Mat ref = fd_jacobian([&](const Vec& z) { return model.g(z.head(n), z.tail(nw)); },
                                        stack(p.x, p.w), model.g_jac ? ref_step : alt_step);
            record("g_x", rel_error(got.x, ref.leftCols(n)));
            record("g_w", rel_error(got.w, ref.rightCols(nw)));
        }
        {
            const Vec weight = random_weight(n);
            const Mat got = dynamics_curvature(model, p.x, p.u, p.w, weight);
            // Reference: differentiate weight^T f_z with the Jacobian supplier.
            const Mat ref = symmetrized(fd_jacobian(
                [&](const Vec& z) {
                    const StageJacobians j =
                        dynamics_jacobians(model, z.head(n), z.segment(n, m), z.tail(nw));
                    return stack(j.x.transpose() * weight, j.u.transpose() * weight, j.w.transpose() * weight);
                },
                stack(p.x, p.u, p.w), model.f_jac ? ref_step : 1e-3));
            record("f_curvature", rel_error(got, ref));
        }
        {
            const Vec weight = random_weight(nw);
            const Mat got = preview_curvature(model, p.x, p.w, weight);
            const Mat ref = symmetrized(fd_jacobian(
                [&](const Vec& z) {
                    const PreviewJacobians j = preview_jacobians(model, z.head(n), z.tail(nw));
                    return stack(j.x.transpose() * weight, j.w.transpose() * weight);
                },
                stack(p.x, p.w), model.g_jac ? ref_step : 1e-3));
            record("g_curvature", rel_error(got, ref));
        }
        if (cs.l > 0) {
            const StageJacobians got = constraint_jacobians(cs, p.x, p.u, p.w);
            const StageJacobians ref = fd_stage_jacobians(cs.c, p.x, p.u, p.w, cs.c_jac ? ref_step : alt_step);
            record("C_x", rel_error(got.x, ref.x));
            record("C_u", rel_error(got.u, ref.u));
            record("C_w", rel_error(got.w, ref.w));
            const Vec weight = random_weight(cs.l);
            const Mat ref_curv = symmetrized(fd_jacobian(
                [&](const Vec& z) {
                    const StageJacobians j = constraint_jacobians(cs, z.head(n), z.segment(n, m), z.tail(nw));
                    return stack(j.x.transpose() * weight, j.u.transpose() * weight, j.w.transpose() * weight);
                },
                stack(p.x, p.u, p.w), cs.c_jac ? ref_step : 1e-3));
            record("C_curvature", rel_error(constraint_curvature(cs, p.x, p.u, p.w, weight), ref_curv));
        }
        {
            const StageGradient got = stage_gradient(cost, p.x, p.u, p.w);
            const Vec ref = fd_gradient(
                [&](const Vec& z) { return cost.stage(z.head(n), z.segment(n, m), z.tail(nw)); },
                stack(p.x, p.u, p.w));
            record("phi_grad", rel_error(stack(got.x, got.u, got.w), ref));
            const Mat hess = stage_hessian(cost, p.x, p.u, p.w);
            const Mat href = symmetrized(fd_jacobian(
                [&](const Vec& z) {
                    const StageGradient g = stage_gradient(cost, z.head(n), z.segment(n, m), z.tail(nw));
                    return stack(g.x, g.u, g.w);
                },
                stack(p.x, p.u, p.w)));
            record("phi_hess", rel_error(hess, href));
        }
        {
            const TerminalGradient got = terminal_gradient(cost, p.x, p.w);
            const Vec ref =
                fd_gradient([&](const Vec& z) { return cost.terminal(z.head(n), z.tail(nw)); }, stack(p.x, p.w));
            record("psi_grad", rel_error(stack(got.x, got.w), ref));
            const TerminalHessian h = terminal_hessian(cost, p.x, p.w);
            const Mat href = symmetrized(fd_jacobian(
                [&](const Vec& z) {
                    const TerminalGradient g = terminal_gradient(cost, z.head(n), z.tail(nw));
                    return stack(g.x, g.w);
                },
                stack(p.x, p.w)));
            record("psi_xx", rel_error(h.xx, href.topLeftCorner(n, n)));
            record("psi_ww", rel_error(h.ww, href.bottomRightCorner(nw, nw)));
        }
    }
    return report;
}

std::vector<double> PreviewGenerator::samples(int count) const {
    std::vector<double> out;
    out.reserve(std::max(count, 0));
    Lcg64 rng(seed);
    for (int k = 0; k < count; ++k) {
        out.push_back(a * std::sin(static_cast<double>(k)) + b * rng.next_unit() + c);
    }
    return out;
}

std::vector<Vec> PreviewSignal::generate(int count) const {
    if (source != Source::Generator) throw Error("PreviewSignal::generate requires a generator source");
    const std::vector<double> s = generator.samples(count);
    std::vector<Vec> out;
    out.reserve(s.size());
    for (double value : s) {
        Vec w = Vec::Zero(nw);
        for (int ch : channels) w(ch) = value;
        out.push_back(std::move(w));
    }
    return out;
}

PlantModel with_hold_constant_preview(PlantModel model) {
    const int n = model.n, nw = model.nw;
    model.g = [](const Vec&, const Vec& w) { return w; };
    model.g_jac = [n, nw](const Vec&, const Vec&) {
        return PreviewJacobians{Mat::Zero(nw, n), Mat::Identity(nw, nw)};
    };
    model.g_curvature = nullptr;
    model.g_affine = true;
    return model;
}

}  // namespace ene
