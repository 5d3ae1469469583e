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

#include "ene/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "ene/ene.hpp"

namespace ene {

namespace {

// Active rows for a rollout. Unlike active_indices this never throws: when more
// than m rows are active the m most violated ones are kept.
ActiveSet rollout_active(const ConstraintSet& cs, const Vec& c, int m) {
    ActiveSet out;
    for (int i = 0; i < cs.l; ++i)
        if (c(i) >= -cs.activation_tol) out.push_back(i);
    if (static_cast<int>(out.size()) > m) {
        std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return c(a) > c(b); });
        out.resize(m);
        std::sort(out.begin(), out.end());
    }
    return out;
}

double total_violation(const Linearization& lin) {
    double v = 0.0;
    for (const auto& s : lin.stage)
        for (int i = 0; i < s.c.size(); ++i) v += std::max(0.0, s.c(i));
    return v;
}

double total_violation(const OcpProblem& problem, const Trajectory& t) {
    const ConstraintSet& cs = problem.constraints;
    if (cs.l == 0) return 0.0;
    double v = 0.0;
    for (int k = 0; k < t.horizon(); ++k) {
        const Vec c = cs.c(t.x[k], t.u[k], t.w[k]);
        for (int i = 0; i < c.size(); ++i) v += std::max(0.0, c(i));
    }
    return v;
}

void toggle(ActiveSet& set, int row) {
    auto it = std::lower_bound(set.begin(), set.end(), row);
    if (it != set.end() && *it == row)
        set.erase(it);
    else
        set.insert(it, row);
}

bool contains(const ActiveSet& set, int row) { return std::binary_search(set.begin(), set.end(), row); }

// Nonlinear forward pass under u = u_nom + K1 dx + K2 dw + eta u_ff.
bool forward_pass(const OcpProblem& problem, const Trajectory& cur, const GainSchedule& gains, double eta,
                  Trajectory& out) {
    const int N = cur.horizon();
    out = Trajectory{};
    out.x.resize(N + 1);
    out.w.resize(N + 1);
    out.u.resize(N);
    out.x[0] = problem.x0;
    out.w[0] = problem.w0;
    for (int k = 0; k < N; ++k) {
        const StageGains& g = gains.stage[k];
        const Vec dx = out.x[k] - cur.x[k];
        const Vec dw = out.w[k] - cur.w[k];
        out.u[k] = cur.u[k] + g.K1 * dx + g.K2 * dw + eta * g.u_ff;
        out.x[k + 1] = problem.model.f(out.x[k], out.u[k], out.w[k]);
        out.w[k + 1] = problem.model.g(out.x[k], out.w[k]);
        if (!all_finite(out.x[k + 1]) || !all_finite(out.w[k + 1]) || !all_finite(out.u[k])) return false;
    }
    out.rolled_out = true;
    return true;
}

// Below this stationarity residual the exact Hessian replaces Gauss-Newton.
constexpr double kFullHessianSwitch = 1e-2;
// Blocking fractions below this flip the row instead of taking a vanishing step.
constexpr double kTinyStep = 1e-4;

}  // namespace

Trajectory rollout(const OcpProblem& problem, const std::vector<Vec>& controls,
                   const std::optional<PreviewSignal>& preview_override) {
    return rollout(problem, problem.x0, problem.w0, controls, preview_override);
}

Trajectory rollout(const OcpProblem& problem, const Vec& x0, const Vec& w0, const std::vector<Vec>& controls,
                   const std::optional<PreviewSignal>& preview_override) {
    const int N = static_cast<int>(controls.size());
    const PlantModel& model = problem.model;
    if (x0.size() != model.n || w0.size() != model.nw) throw DimensionMismatch("rollout: initial state size");
    using Source = PreviewSignal::Source;
    const Source source = preview_override ? preview_override->source : Source::NominalModel;
    std::vector<Vec> generated;
    if (source == Source::Generator) {
        generated = preview_override->generate(N + 1);
        if (!generated.empty() && generated[0].size() != model.nw)
            throw DimensionMismatch("rollout: generated preview has wrong dimension");
    }

    Trajectory t;
    t.x.resize(N + 1);
    t.w.resize(N + 1);
    t.u = controls;
    t.active.resize(N);
    t.x[0] = x0;
    t.w[0] = source == Source::Generator ? generated[0] : w0;
    for (int k = 0; k < N; ++k) {
        if (controls[k].size() != model.m) throw DimensionMismatch("rollout: control size at step " + std::to_string(k));
        t.x[k + 1] = model.f(t.x[k], t.u[k], t.w[k]);
        switch (source) {
            case Source::NominalModel: t.w[k + 1] = model.g(t.x[k], t.w[k]); break;
            case Source::HoldConstant: t.w[k + 1] = t.w[k]; break;
            case Source::Generator: t.w[k + 1] = generated[k + 1]; break;
        }
        if (!all_finite(t.x[k + 1]) || !all_finite(t.w[k + 1]))
            throw NonFinite("rollout diverged at step " + std::to_string(k + 1));
        if (problem.constraints.l > 0)
            t.active[k] = rollout_active(problem.constraints, problem.constraints.c(t.x[k], t.u[k], t.w[k]), model.m);
    }
    t.rolled_out = true;
    return t;
}

double evaluate_cost(const OcpProblem& problem, const Trajectory& traj) {
    double j = 0.0;
    for (int k = 0; k < traj.horizon(); ++k) j += problem.cost.stage(traj.x[k], traj.u[k], traj.w[k]);
    return j + problem.cost.terminal(traj.x.back(), traj.w.back());
}

KktResidual kkt_residual(const OcpProblem& problem, const Trajectory& traj, const CostateTrajectory& costates) {
    return kkt_residual(traj, linearize(problem, traj), costates);
}

KktResidual kkt_residual(const Trajectory& traj, const Linearization& lin, const CostateTrajectory& costates) {
    const int N = traj.horizon();
    KktResidual r;
    r.hu.resize(N);
    r.stationarity.resize(N);
    r.complementarity.resize(N);
    r.violation.resize(N);
    bool any_active = false;
    double min_mu = std::numeric_limits<double>::infinity();
    for (int k = 0; k < N; ++k) {
        const StageLinearization& s = lin.stage[k];
        const ActiveSet& act = traj.active[k];
        const Vec& mu = costates.mu[k];
        Vec hu = s.phi_u + s.fu.transpose() * costates.lambda[k + 1];
        if (!act.empty()) hu += select_rows(s.cu, act).transpose() * mu;
        r.stationarity[k] = hu.size() ? hu.cwiseAbs().maxCoeff() : 0.0;
        double comp = 0.0;
        for (size_t a = 0; a < act.size(); ++a) {
            comp = std::max(comp, std::abs(mu(a) * s.c(act[a])));
            min_mu = std::min(min_mu, mu(a));
            any_active = true;
        }
        r.complementarity[k] = comp;
        r.violation[k] = s.c.size() ? std::max(0.0, s.c.maxCoeff()) : 0.0;
        r.hu[k] = std::move(hu);
        r.max_stationarity = std::max(r.max_stationarity, r.stationarity[k]);
        r.max_complementarity = std::max(r.max_complementarity, comp);
        r.max_violation = std::max(r.max_violation, r.violation[k]);
    }
    r.min_multiplier = any_active ? min_mu : 0.0;
    return r;
}

SolveFailed::SolveFailed(double best_kkt_norm, NominalSolution best)
    : Error("nominal solve did not reach the optimality tolerance (best KKT norm " +
            std::to_string(best_kkt_norm) + ")"),
      best_kkt_norm(best_kkt_norm), best(std::move(best)) {}

NominalSolution solve_nominal(const OcpProblem& problem, const SolveOptions& options) {
    problem.validate();
    const int N = problem.horizon;
    const int m = problem.m();
    const ConstraintSet& cs = problem.constraints;
    const double feas_tol = 1e-6;

    std::vector<Vec> controls = options.init_controls;
    if (controls.empty()) controls.assign(N, Vec::Zero(m));
    if (static_cast<int>(controls.size()) != N) throw DimensionMismatch("init_controls must have horizon entries");

    Trajectory cur = rollout(problem, controls);
    if (!options.init_active.empty()) {
        if (static_cast<int>(options.init_active.size()) != N)
            throw DimensionMismatch("init_active must have horizon entries");
        for (int k = 0; k < N; ++k) {
            ActiveSet merged = options.init_active[k];
            for (int i : cur.active[k])
                if (!contains(merged, i)) merged.push_back(i);
            std::sort(merged.begin(), merged.end());
            if (static_cast<int>(merged.size()) <= m) cur.active[k] = merged;
        }
    }

    NominalSolution sol;
    sol.trajectory = cur;
    sol.cost = evaluate_cost(problem, cur);
    sol.cost_history.push_back(sol.cost);

    // Gauss-Newton copy: curvature of the dynamics and preview model dropped.
    OcpProblem gauss_newton = problem;
    gauss_newton.model.f_affine = true;
    gauss_newton.model.g_affine = true;
    bool force_gauss_newton = false;

    NominalSolution best;
    double best_score = std::numeric_limits<double>::infinity();
    double reg = 0.0;
    std::set<std::pair<int, int>> released_rows;  // rows dropped since the last accepted step

    for (int it = 0;; ++it) {
        const Linearization lin = linearize(problem, cur);
        CostateTrajectory co = backward_costates(cur, lin);
        const KktResidual res = kkt_residual(cur, lin, co);

        double tight = 0.0;  // active rows must sit on their bound
        for (int k = 0; k < N; ++k)
            for (int i : cur.active[k]) tight = std::max(tight, std::abs(lin.stage[k].c(i)));

        sol.trajectory = cur;
        sol.costates = co;
        sol.kkt_norm = res.max_stationarity;
        sol.iterations = it;
        sol.cost = evaluate_cost(problem, cur);
        const bool feasible = res.max_violation <= feas_tol && tight <= feas_tol;
        const double score = sol.kkt_norm + (feasible ? 0.0 : 1e6 * (1.0 + res.max_violation + tight));
        if (score < best_score) {
            best_score = score;
            best = sol;
        }
        if (options.max_iters == 0) {
            sol.is_optimal = false;
            return sol;
        }
        if (feasible && sol.kkt_norm <= options.opt_tol && res.min_multiplier >= -options.opt_tol) {
            sol.is_optimal = true;
            return sol;
        }
        if (it >= options.max_iters) break;

        const bool full_hessian = !force_gauss_newton && sol.kkt_norm < kFullHessianSwitch;
        force_gauss_newton = false;
        const SecondVariation sv = second_variation(full_hessian ? problem : gauss_newton, cur, lin, co);
        RiccatiOptions ropt;
        ropt.mode = GainMode::NonOptimal;
        ropt.control_regularization = reg;
        ropt.constraint_residuals.resize(N);
        for (int k = 0; k < N; ++k) ropt.constraint_residuals[k] = select_entries(lin.stage[k].c, cur.active[k]);

        GainSchedule gains;
        try {
            gains = riccati_backward(sv, ropt);
        } catch (const ZuuNotPositive&) {
            if (full_hessian) {
                force_gauss_newton = true;
                continue;
            }
            reg = std::max(1e-6, reg * 10.0);
            if (reg > 1e8) break;
            continue;
        } catch (const SingularKkt&) {
            reg = std::max(1e-6, reg * 10.0);
            if (reg > 1e8) break;
            continue;
        }

        const DeltaTrajectory pred = propagate_linear(gains, Vec::Zero(problem.n()), Vec::Zero(problem.nw()));

        // Working-set update from the QP multipliers mu + dmu: the most negative row per
        // step leaves, unless it already left once since the last accepted step.
        bool released = false;
        for (int k = 0; k < N; ++k) {
            int worst = -1;
            double worst_mu = -options.opt_tol;
            for (size_t a = 0; a < cur.active[k].size(); ++a) {
                const int row = cur.active[k][a];
                const double q = co.mu[k](a) + pred.dmu[k](a);
                if (q < worst_mu && !released_rows.count({k, row})) {
                    worst_mu = q;
                    worst = row;
                }
            }
            if (worst >= 0) {
                toggle(cur.active[k], worst);
                released_rows.insert({k, worst});
                released = true;
            }
        }
        if (released) continue;

        // Inactive rows reached along the step block it.
        std::vector<double> step_alpha(N, 1.0);
        std::vector<int> step_row(N, -1);
        int block_step = -1;
        double lambda = 1.0;
        for (int k = 0; k < N; ++k) {
            const Vec& c = lin.stage[k].c;
            for (int i = 0; i < cs.l; ++i) {
                const double d = pred.dc[k](i);
                if (contains(cur.active[k], i) || d <= 1e-12) continue;
                const double a = c(i) >= -cs.activation_tol ? 0.0 : std::min(1.0, -c(i) / d);
                if (a < step_alpha[k]) {
                    step_alpha[k] = a;
                    step_row[k] = i;
                }
            }
            if (step_row[k] >= 0 && step_alpha[k] < lambda) {
                lambda = step_alpha[k];
                block_step = k;
            }
        }
        if (block_step >= 0 && lambda <= kTinyStep) {
            bool added = false;
            for (int k = 0; k < N; ++k) {
                if (step_row[k] < 0 || step_alpha[k] > kTinyStep) continue;
                if (static_cast<int>(cur.active[k].size()) >= m) continue;
                toggle(cur.active[k], step_row[k]);
                added = true;
            }
            if (added) continue;
            lambda = 1.0;
            block_step = -1;
        }

        double dj = lin.psi_x.dot(pred.dx[N]) + lin.psi_w.dot(pred.dw[N]);
        for (int k = 0; k < N; ++k) {
            const StageLinearization& s = lin.stage[k];
            dj += s.phi_x.dot(pred.dx[k]) + s.phi_u.dot(pred.du[k]) + s.phi_w.dot(pred.dw[k]);
        }

        double max_mu = 0.0;
        for (const Vec& mu : co.mu)
            if (mu.size()) max_mu = std::max(max_mu, mu.cwiseAbs().maxCoeff());
        const double rho = 10.0 * (1.0 + max_mu);
        const double merit0 = sol.cost + rho * total_violation(lin);

        const double eta_max = std::min(1.0, lambda);
        bool accepted = false;
        Trajectory trial;
        double eta = eta_max;
        double trial_cost = 0.0;
        for (int ls = 0; ls <= 10; ++ls, eta *= 0.5) {
            if (!forward_pass(problem, cur, gains, eta, trial)) continue;
            trial_cost = evaluate_cost(problem, trial);
            const double merit = trial_cost + rho * total_violation(problem, trial);
            const bool armijo = dj < 0.0 ? merit <= merit0 + 1e-4 * eta * dj : merit < merit0;
            if (armijo || (ls == 0 && eta_max < 1.0 && merit <= merit0)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (full_hessian) {
                force_gauss_newton = true;
                continue;
            }
            reg = std::max(1e-6, reg * 10.0);
            if (reg > 1e8) break;
            continue;
        }

        trial.active = cur.active;
        if (block_step >= 0 && eta == eta_max && lambda < 1.0) {
            const int row = step_row[block_step];
            ActiveSet next = trial.active[block_step];
            toggle(next, row);
            if (static_cast<int>(next.size()) <= m) trial.active[block_step] = std::move(next);
        }
        // Rows the nonlinear step pushed onto or past their bound join the active set.
        for (int k = 0; k < N && cs.l > 0; ++k) {
            const Vec c = cs.c(trial.x[k], trial.u[k], trial.w[k]);
            for (int i = 0; i < cs.l; ++i)
                if (c(i) >= -cs.activation_tol && !contains(trial.active[k], i) &&
                    static_cast<int>(trial.active[k].size()) < m)
                    toggle(trial.active[k], i);
        }

        cur = std::move(trial);
        sol.cost_history.push_back(trial_cost);
        released_rows.clear();
        reg = reg > 1e-6 ? reg * 0.1 : 0.0;
    }
    throw SolveFailed(best.kkt_norm, best);
}

}  // namespace ene
