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

#include "ene/ene.hpp"

namespace ene {

HamiltonianBlocks hamiltonian_blocks(const OcpProblem& problem, const Trajectory& traj,
                                     const CostateTrajectory& costates) {
    const int N = traj.horizon();
    const int n = problem.n(), m = problem.m(), nw = problem.nw();
    const ConstraintSet& cs = problem.constraints;
    HamiltonianBlocks out;
    out.stage.resize(N);
    for (int k = 0; k < N; ++k) {
        const Vec& x = traj.x[k];
        const Vec& u = traj.u[k];
        const Vec& w = traj.w[k];
        Mat full = stage_hessian(problem.cost, x, u, w);
        full += dynamics_curvature(problem.model, x, u, w, costates.lambda[k + 1]);

        const Mat p = preview_curvature(problem.model, x, w, costates.lambda_bar[k + 1]);
        full.block(0, 0, n, n) += p.topLeftCorner(n, n);
        full.block(0, n + m, n, nw) += p.topRightCorner(n, nw);
        full.block(n + m, 0, nw, n) += p.bottomLeftCorner(nw, n);
        full.block(n + m, n + m, nw, nw) += p.bottomRightCorner(nw, nw);

        const ActiveSet& act = traj.active[k];
        if (!act.empty()) {
            Vec weight = Vec::Zero(cs.l);
            for (std::size_t i = 0; i < act.size(); ++i) weight(act[i]) = costates.mu[k](static_cast<Eigen::Index>(i));
            full += constraint_curvature(cs, x, u, w, weight);
        }

        StageHessian& h = out.stage[k];
        h.xx = full.block(0, 0, n, n);
        h.xu = full.block(0, n, n, m);
        h.xw = full.block(0, n + m, n, nw);
        h.ux = full.block(n, 0, m, n);
        h.uu = full.block(n, n, m, m);
        h.uw = full.block(n, n + m, m, nw);
        h.wx = full.block(n + m, 0, nw, n);
        h.wu = full.block(n + m, n, nw, m);
        h.ww = full.block(n + m, n + m, nw, nw);
    }
    const TerminalHessian th = terminal_hessian(problem.cost, traj.x[N], traj.w[N]);
    out.psi_xx = th.xx;
    out.psi_ww = th.ww;
    return out;
}

SecondVariation second_variation(const OcpProblem& problem, const Trajectory& traj) {
    Linearization lin = linearize(problem, traj);
    const CostateTrajectory co = backward_costates(traj, lin);
    return second_variation(problem, traj, lin, co);
}

SecondVariation second_variation(const OcpProblem& problem, const Trajectory& traj, const Linearization& lin,
                                 const CostateTrajectory& costates) {
    const int N = traj.horizon();
    SecondVariation sv;
    sv.lin = lin;
    sv.blocks = hamiltonian_blocks(problem, traj, costates);
    sv.active = traj.active;
    sv.mu = costates.mu;
    sv.hu.resize(N);
    for (int k = 0; k < N; ++k) {
        const StageLinearization& s = lin.stage[k];
        Vec hu = s.phi_u + s.fu.transpose() * costates.lambda[k + 1];
        if (!traj.active[k].empty()) hu += select_rows(s.cu, traj.active[k]).transpose() * costates.mu[k];
        sv.hu[k] = std::move(hu);
    }
    return sv;
}

SecondVariation strip_preview(SecondVariation sv) {
    for (auto& s : sv.lin.stage) {
        s.fw.setZero();
        s.gx.setZero();
        s.gw.setZero();
        s.cw.setZero();
    }
    for (auto& h : sv.blocks.stage) {
        h.xw.setZero();
        h.uw.setZero();
        h.wx.setZero();
        h.wu.setZero();
        h.ww.setZero();
    }
    sv.preview_stripped = true;
    return sv;
}

KktInverse kmat(int step, const Mat& zuu, const Mat& cu_active) {
    const int m = static_cast<int>(zuu.rows());
    const int la = static_cast<int>(cu_active.rows());
    const Mat zs = symmetrized(zuu);
    if (!zs.allFinite() || !is_positive_definite(zs)) throw ZuuNotPositive(step);
    if (la > m) throw SingularKkt(step);
    KktInverse out;
    out.m = m;
    out.la = la;
    if (la == 0) {
        out.inverse = solve_symmetric_indefinite(zs, Mat::Identity(m, m));
        return out;
    }
    Mat kkt = Mat::Zero(m + la, m + la);
    kkt.topLeftCorner(m, m) = zs;
    kkt.topRightCorner(m, la) = cu_active.transpose();
    kkt.bottomLeftCorner(la, m) = cu_active;
    try {
        out.inverse = solve_symmetric_indefinite(kkt, Mat::Identity(m + la, m + la));
    } catch (const SingularMatrix&) {
        throw SingularKkt(step);
    }
    return out;
}

GainSchedule riccati_backward(const SecondVariation& sv, const RiccatiOptions& options) {
    const int N = static_cast<int>(sv.lin.stage.size());
    if (N == 0) throw Error("riccati_backward: empty horizon");
    const int n = static_cast<int>(sv.lin.stage[0].fx.rows());
    const int m = static_cast<int>(sv.lin.stage[0].fu.cols());
    const int nw = static_cast<int>(sv.lin.stage[0].gw.rows());
    const bool affine_terms = options.mode == GainMode::NonOptimal;

    GainSchedule gs;
    gs.mode = options.mode;
    gs.preview_stripped = sv.preview_stripped;
    gs.n = n;
    gs.m = m;
    gs.nw = nw;
    gs.stage.resize(N);
    gs.S.resize(N + 1);
    gs.W.resize(N + 1);
    gs.Sbar.resize(N + 1);
    gs.Wbar.resize(N + 1);
    gs.T.resize(N + 1);
    gs.Tbar.resize(N + 1);

    gs.S[N] = sv.blocks.psi_xx;
    gs.W[N] = Mat::Zero(n, nw);
    gs.Sbar[N] = Mat::Zero(nw, n);
    gs.Wbar[N] = sv.blocks.psi_ww;
    gs.T[N] = Vec::Zero(n);
    gs.Tbar[N] = Vec::Zero(nw);

    for (int k = N - 1; k >= 0; --k) {
        const StageLinearization& s = sv.lin.stage[k];
        const StageHessian& h = sv.blocks.stage[k];
        const Mat& S1 = gs.S[k + 1];
        const Mat& W1 = gs.W[k + 1];
        const Mat& Sb1 = gs.Sbar[k + 1];
        const Mat& Wb1 = gs.Wbar[k + 1];
        const Vec& T1 = gs.T[k + 1];
        const Vec& Tb1 = gs.Tbar[k + 1];

        StageGains& g = gs.stage[k];
        g.active = sv.active[k];
        g.lin = s;
        g.hu = sv.hu[k];

        const Mat fuS = s.fu.transpose() * S1;
        const Mat fuW = s.fu.transpose() * W1;
        const Mat fxS = s.fx.transpose() * S1;
        const Mat fxW = s.fx.transpose() * W1;
        const Mat gxSb = s.gx.transpose() * Sb1;
        const Mat gxWb = s.gx.transpose() * Wb1;
        const Mat fwS = s.fw.transpose() * S1;
        const Mat fwW = s.fw.transpose() * W1;
        const Mat gwSb = s.gw.transpose() * Sb1;
        const Mat gwWb = s.gw.transpose() * Wb1;

        g.Zux = h.ux + fuS * s.fx + fuW * s.gx;
        g.Zuu = h.uu + fuS * s.fu;
        if (options.control_regularization > 0.0) g.Zuu += options.control_regularization * Mat::Identity(m, m);
        g.Zuw = h.uw + fuS * s.fw + fuW * s.gw;
        g.Zxx = h.xx + fxS * s.fx + fxW * s.gx + gxSb * s.fx + gxWb * s.gx;
        g.Zxu = h.xu + fxS * s.fu + gxSb * s.fu;
        g.Zxw = h.xw + fxS * s.fw + fxW * s.gw + gxSb * s.fw + gxWb * s.gw;
        g.Zwx = h.wx + fwS * s.fx + fwW * s.gx + gwSb * s.fx + gwWb * s.gx;
        g.Zwu = h.wu + fwS * s.fu + gwSb * s.fu;
        g.Zww = h.ww + fwS * s.fw + fwW * s.gw + gwSb * s.fw + gwWb * s.gw;

        const Mat cxa = select_rows(s.cx, g.active);
        const Mat cua = select_rows(s.cu, g.active);
        const Mat cwa = select_rows(s.cw, g.active);
        const int la = static_cast<int>(g.active.size());

        g.kkt = kmat(k, g.Zuu, cua);
        const Mat& kinv = g.kkt.inverse;

        Mat bx(m + la, n), bw(m + la, nw);
        bx << g.Zux, cxa;
        bw << g.Zuw, cwa;
        const Mat gx = kinv * bx;
        const Mat gw = kinv * bw;
        g.K1 = -gx.topRows(m);
        g.K2 = -gw.topRows(m);
        g.K4 = -gx.bottomRows(la);
        g.K5 = -gw.bottomRows(la);
        g.K3 = -kinv.topRows(m);

        Mat lx(n, m + la), lw(nw, m + la);
        lx << g.Zxu, cxa.transpose();
        lw << g.Zwu, cwa.transpose();
        gs.S[k] = g.Zxx - lx * gx;
        gs.W[k] = g.Zxw - lx * gw;
        gs.Sbar[k] = g.Zwx - lw * gx;
        gs.Wbar[k] = g.Zww - lw * gw;

        if (affine_terms) {
            Vec rhs = Vec::Zero(m + la);
            rhs.head(m) = s.fu.transpose() * T1 + g.hu;
            if (!options.constraint_residuals.empty() && la > 0) rhs.tail(la) = options.constraint_residuals[k];
            const Vec q = kinv * rhs;
            g.u_ff = -q.head(m);
            g.mu_ff = -q.tail(la);
            gs.T[k] = s.gx.transpose() * Tb1 + s.fx.transpose() * T1 - lx * q;
            gs.Tbar[k] = s.gw.transpose() * Tb1 + s.fw.transpose() * T1 - lw * q;
        } else {
            g.u_ff = Vec::Zero(m);
            g.mu_ff = Vec::Zero(la);
            gs.T[k] = Vec::Zero(n);
            gs.Tbar[k] = Vec::Zero(nw);
        }
        require_finite(gs.S[k], "riccati_backward");
        require_finite(gs.Wbar[k], "riccati_backward");
    }
    return gs;
}

Vec ene_control(const GainSchedule& gains, int k, const PerturbationState& pert, FeedbackVariant variant) {
    const StageGains& g = gains.stage.at(k);
    if (variant == FeedbackVariant::StateOnly) return g.K1 * pert.dx;
    return g.K1 * pert.dx + g.K2 * pert.dw;
}

DeltaTrajectory propagate_linear(const GainSchedule& gains, const Vec& dx0, const Vec& dw0, int start,
                                 double ff_scale) {
    const int N = gains.horizon();
    DeltaTrajectory d;
    d.dx.resize(N + 1);
    d.dw.resize(N + 1);
    d.du.resize(N);
    d.dmu.resize(N);
    d.dc.resize(N);
    d.dx[start] = dx0;
    d.dw[start] = dw0;
    for (int k = start; k < N; ++k) {
        const StageGains& g = gains.stage[k];
        const StageLinearization& s = g.lin;
        const Vec& dx = d.dx[k];
        const Vec& dw = d.dw[k];
        Vec du = g.K1 * dx + g.K2 * dw;
        Vec dmu = g.K4 * dx + g.K5 * dw;
        if (ff_scale != 0.0) {
            du += ff_scale * g.u_ff;
            dmu += ff_scale * g.mu_ff;
        }
        d.dc[k] = s.cx * dx + s.cu * du + s.cw * dw;
        d.dx[k + 1] = s.fx * dx + s.fu * du + s.fw * dw;
        d.dw[k + 1] = s.gx * dx + s.gw * dw;
        d.du[k] = std::move(du);
        d.dmu[k] = std::move(dmu);
    }
    return d;
}

}  // namespace ene
