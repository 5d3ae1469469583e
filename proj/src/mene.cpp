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

#include "ene/mene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace ene {

namespace {

Vec ff_rhs(const StageGains& g, const Vec& t_next, const Vec& hu) {
    const int m = static_cast<int>(g.K1.rows());
    Vec rhs = Vec::Zero(m + static_cast<int>(g.active.size()));
    rhs.head(m) = g.lin.fu.transpose() * t_next + hu;
    return rhs;
}

double map_alpha(double a) { return (a < 0.0 || a > 1.0) ? 1.0 : a; }

void toggle(ActiveSet& set, int row) {
    auto it = std::lower_bound(set.begin(), set.end(), row);
    if (it != set.end() && *it == row)
        set.erase(it);
    else
        set.insert(it, row);
}

// Nonlinear rollout of the segment law u = u_nom + K1 dx + K2 dw + scale * u_ff from the
// shifted origin, with the preview following the nominal model.
Trajectory closed_loop_rollout(const OcpProblem& problem, const Trajectory& cur, const GainSchedule& gains,
                               const Vec& dx0, const Vec& dw0, double scale) {
    const int N = cur.horizon();
    Trajectory t;
    t.x.resize(N + 1);
    t.w.resize(N + 1);
    t.u.resize(N);
    t.active = cur.active;
    t.x[0] = cur.x[0] + dx0;
    t.w[0] = cur.w[0] + dw0;
    for (int k = 0; k < N; ++k) {
        const StageGains& g = gains.stage[k];
        t.u[k] = cur.u[k] + g.K1 * (t.x[k] - cur.x[k]) + g.K2 * (t.w[k] - cur.w[k]);
        if (gains.mode == GainMode::NonOptimal) t.u[k] += scale * g.u_ff;
        t.x[k + 1] = problem.model.f(t.x[k], t.u[k], t.w[k]);
        t.w[k + 1] = problem.model.g(t.x[k], t.w[k]);
        if (!all_finite(t.x[k + 1])) throw NonFinite("segment rollout diverged at step " + std::to_string(k + 1));
    }
    t.rolled_out = true;
    return t;
}

}  // namespace

Vec mene_control(const GainSchedule& gains, int k, const PerturbationState& pert, const Vec& t_next,
                 const Vec& hu) {
    const StageGains& g = gains.stage.at(k);
    return g.K1 * pert.dx + g.K2 * pert.dw + g.K3 * ff_rhs(g, t_next, hu);
}

Vec mene_control(const GainSchedule& gains, int k, const PerturbationState& pert) {
    const StageGains& g = gains.stage.at(k);
    // An Optimal schedule carries no feedforward, which keeps the law identical to ene_control.
    if (gains.mode == GainMode::Optimal) return g.K1 * pert.dx + g.K2 * pert.dw;
    return g.K1 * pert.dx + g.K2 * pert.dw + g.u_ff;
}

ConstraintPerturbation multiplier_and_constraint_perturbations(const GainSchedule& gains, int k,
                                                               const PerturbationState& pert) {
    const StageGains& g = gains.stage.at(k);
    ConstraintPerturbation out;
    out.dmu = g.K4 * pert.dx + g.K5 * pert.dw;
    if (gains.mode == GainMode::NonOptimal) out.dmu += g.mu_ff;
    const Vec du = mene_control(gains, k, pert);
    out.dc = g.lin.cx * pert.dx + g.lin.cu * du + g.lin.cw * pert.dw;
    return out;
}

StepAlpha segment_alpha(const Vec& mu0, const Vec& c0, const Vec& dmu, const Vec& dc, const ActiveSet& active,
                        double activation_tol) {
    StepAlpha best;
    auto consider = [&](double a, int row, bool on_active) {
        if (a < best.alpha || (a == best.alpha && best.component >= 0 && row < best.component && a < 1.0)) {
            best.alpha = a;
            best.component = row;
            best.on_active = on_active;
        }
    };
    for (size_t a = 0; a < active.size(); ++a) {
        const double m0 = mu0(a), d = dmu(a);
        if (std::abs(d) <= kAlphaDenominatorFloor) continue;
        double alpha;
        if (m0 <= kMultiplierZeroTol)
            alpha = d < 0.0 ? 0.0 : 1.0;
        else
            alpha = map_alpha(-m0 / d);
        if (alpha < 1.0) consider(alpha, active[a], true);
    }
    for (int i = 0; i < c0.size(); ++i) {
        if (std::binary_search(active.begin(), active.end(), i)) continue;
        const double d = dc(i);
        if (std::abs(d) <= kAlphaDenominatorFloor) continue;
        double alpha;
        if (c0(i) >= -activation_tol)
            alpha = d > 0.0 ? 0.0 : 1.0;
        else
            alpha = map_alpha(-c0(i) / d);
        if (alpha < 1.0) consider(alpha, i, false);
    }
    return best;
}

std::vector<StepAlpha> segment_alpha(const std::vector<Vec>& mu0, const std::vector<Vec>& c0,
                                     const DeltaTrajectory& delta, const std::vector<ActiveSet>& active,
                                     double activation_tol, int start) {
    const int N = static_cast<int>(active.size());
    std::vector<StepAlpha> out(N);
    for (int k = start; k < N; ++k)
        out[k] = segment_alpha(mu0[k], c0[k], delta.dmu[k], delta.dc[k], active[k], activation_tol);
    return out;
}

namespace {

/*
 * Releasing a bound can expose negative curvature of Z_uu that the active row
 * used to hide. Retry with a growing Levenberg shift instead of giving up.
 */
GainSchedule shifted_gains(const SecondVariation& sv, RiccatiOptions options, double& shift) {
    constexpr double kFirstShift = 1e-8;
    constexpr double kMaxShift = 1e8;
    for (shift = options.control_regularization;;) {
        options.control_regularization = shift;
        try {
            return riccati_backward(sv, options);
        } catch (const ZuuNotPositive&) {
            if (shift >= kMaxShift) throw;
            shift = shift <= 0.0 ? kFirstShift : 10.0 * shift;
        }
    }
}

}  // namespace

AdaptationResult adapt_multi_segment(const OcpProblem& problem, const NominalSolution& nominal, const Vec& dx0,
                                     const Vec& dw0, AdaptOptions options) {
    options.nominal_optimal = options.nominal_optimal || nominal.is_optimal;
    return adapt_multi_segment(problem, nominal.trajectory, dx0, dw0, options);
}

AdaptationResult adapt_multi_segment(const OcpProblem& problem, const Trajectory& nominal, const Vec& dx0,
                                     const Vec& dw0, const AdaptOptions& options) {
    const int N = nominal.horizon();
    const int m = problem.m();
    const ConstraintSet& cs = problem.constraints;
    if (dx0.size() != problem.n() || dw0.size() != problem.nw())
        throw DimensionMismatch("adapt_multi_segment: perturbation size");

    AdaptationResult result;
    Trajectory cur = nominal;
    Vec rem_dx = dx0, rem_dw = dw0;
    double remaining = 1.0;
    bool first_build = true;
    std::optional<SegmentFlip> pending;
    std::set<std::pair<int, int>> flipped_since_progress;
    double cumulative_du = 0.0;

    for (;;) {
        const Linearization lin = linearize(problem, cur);
        const CostateTrajectory co = backward_costates(cur, lin);
        SecondVariation sv = second_variation(problem, cur, lin, co);
        if (options.variant == FeedbackVariant::StateOnly) {
            sv = strip_preview(std::move(sv));
            rem_dw.setZero();
        }

        RiccatiOptions ropt;
        ropt.mode = (first_build && options.nominal_optimal) ? GainMode::Optimal : GainMode::NonOptimal;
        first_build = false;
        if (ropt.mode == GainMode::NonOptimal) {
            // Rows activated mid-homotopy sit on their surface only to first order; the
            // feedforward removes what the nonlinear rollout left over.
            ropt.constraint_residuals.resize(N);
            for (int k = 0; k < N; ++k) ropt.constraint_residuals[k] = select_entries(lin.stage[k].c, cur.active[k]);
        }
        double shift = 0.0;
        GainSchedule gains = shifted_gains(sv, ropt, shift);
        const DeltaTrajectory pred = propagate_linear(gains, rem_dx, rem_dw);

        std::vector<Vec> c0(N);
        for (int k = 0; k < N; ++k) c0[k] = lin.stage[k].c;
        const std::vector<StepAlpha> alphas = segment_alpha(co.mu, c0, pred, cur.active, cs.activation_tol);

        double lambda = 1.0;
        int block = -1;
        for (int k = 0; k < N; ++k)
            if (alphas[k].component >= 0 && alphas[k].alpha < lambda) {
                lambda = alphas[k].alpha;
                block = k;
            }

        if (block >= 0 && lambda <= 0.0) {
            const int row = alphas[block].component;
            if (!flipped_since_progress.insert({block, row}).second) throw CycleDetected(block, row);
            const bool activate = !alphas[block].on_active;
            toggle(cur.active[block], row);
            if (static_cast<int>(cur.active[block].size()) > m)
                throw TooManyActive(block, static_cast<int>(cur.active[block].size()), m);
            pending = SegmentFlip{block, row, activate};
            ++result.flips;
            continue;
        }

        if (static_cast<int>(result.segments.size()) >= options.max_segments)
            throw SegmentBudgetExceeded(result.segments);

        Trajectory next = closed_loop_rollout(problem, cur, gains, lambda * rem_dx, lambda * rem_dw, lambda);

        SegmentRecord rec;
        rec.index = static_cast<int>(result.segments.size());
        rec.x0_nominal = cur.x[0];
        rec.w0_nominal = cur.w[0];
        rec.alpha.resize(N);
        for (int k = 0; k < N; ++k) rec.alpha[k] = alphas[k].alpha;
        rec.lambda = lambda;
        rec.fraction_of_total = lambda * remaining;
        rec.flip = pending;
        rec.du.resize(N);
        double sq = 0.0;
        for (int k = 0; k < N; ++k) {
            rec.du[k] = next.u[k] - cur.u[k];
            sq += rec.du[k].squaredNorm();
        }
        cumulative_du += std::sqrt(sq);
        rec.cumulative_du_norm = cumulative_du;
        rec.control_shift = shift;
        pending.reset();
        result.segments.push_back(std::move(rec));

        if (lambda >= 1.0) {
            result.u_star = next.u;
            result.final_nominal = std::move(cur);
            result.final_costates = co;
            result.final_gains = std::move(gains);
            result.final_perturbation = PerturbationState{rem_dx, rem_dw};
            break;
        }
        if (lambda >= 1e-10) flipped_since_progress.clear();

        // The blocking row reaches its switching surface at the new nominal.
        const int row = alphas[block].component;
        cur = std::move(next);
        toggle(cur.active[block], row);
        if (static_cast<int>(cur.active[block].size()) > m)
            throw TooManyActive(block, static_cast<int>(cur.active[block].size()), m);
        pending = SegmentFlip{block, row, !alphas[block].on_active};
        ++result.flips;
        flipped_since_progress.insert({block, row});
        rem_dx *= (1.0 - lambda);
        rem_dw *= (1.0 - lambda);
        remaining *= (1.0 - lambda);
    }

    const Vec x_start = nominal.x[0] + dx0;
    const Vec w_start = nominal.w[0] + dw0;
    result.trajectory = rollout(problem, x_start, w_start, result.u_star, options.actual_preview);
    for (int k = 0; k < N && cs.l > 0; ++k) {
        const Vec c = cs.c(result.trajectory.x[k], result.trajectory.u[k], result.trajectory.w[k]);
        for (int i = 0; i < cs.l; ++i)
            if (c(i) > options.violation_tol) result.violations.push_back({k, i, c(i)});
    }
    return result;
}

RecedingStep closed_loop_mene_step(const OcpProblem& problem, const Trajectory& plan, bool plan_optimal,
                                   const Vec& x_measured, const Vec& w_measured, AdaptOptions options) {
    options.nominal_optimal = plan_optimal;
    RecedingStep step;
    step.adaptation = adapt_multi_segment(problem, plan, x_measured - plan.x[0], w_measured - plan.w[0], options);
    step.u = step.adaptation.u_star.at(0);
    Trajectory next = options.actual_preview ? rollout(problem, x_measured, w_measured, step.adaptation.u_star)
                                             : step.adaptation.trajectory;
    step.next_plan = next.tail(1);
    return step;
}

}  // namespace ene
