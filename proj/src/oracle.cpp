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

#include "ene/oracle.hpp"

#include <Eigen/LU>

namespace ene {

StackedQp build_stacked_qp(const OcpProblem& problem, const Trajectory& traj, const CostateTrajectory& costates,
                           const std::vector<ActiveSet>& active, const Vec& dx0, const Vec& dw0,
                           const std::optional<std::vector<Vec>>& hu) {
    StackedQp qp;
    const int N = qp.N = traj.horizon();
    const int n = qp.n = problem.n(), m = qp.m = problem.m(), nw = qp.nw = problem.nw();
    if (static_cast<int>(active.size()) != N) throw DimensionMismatch("active sets must have horizon entries");
    const int dim = (N + 1) * n + N * m + (N + 1) * nw;

    Trajectory at = traj;
    at.active = active;
    const Linearization lin = linearize(problem, at);
    const HamiltonianBlocks hb = hamiltonian_blocks(problem, at, costates);

    qp.H = Mat::Zero(dim, dim);
    qp.h = Vec::Zero(dim);
    for (int k = 0; k < N; ++k) {
        const StageHessian& s = hb.stage[k];
        const int ix = qp.x_index(k), iu = qp.u_index(k), iw = qp.w_index(k);
        qp.H.block(ix, ix, n, n) += s.xx;
        qp.H.block(ix, iu, n, m) += s.xu;
        qp.H.block(ix, iw, n, nw) += s.xw;
        qp.H.block(iu, ix, m, n) += s.ux;
        qp.H.block(iu, iu, m, m) += s.uu;
        qp.H.block(iu, iw, m, nw) += s.uw;
        qp.H.block(iw, ix, nw, n) += s.wx;
        qp.H.block(iw, iu, nw, m) += s.wu;
        qp.H.block(iw, iw, nw, nw) += s.ww;
        if (hu) qp.h.segment(iu, m) = (*hu)[k];
    }
    qp.H.block(qp.x_index(N), qp.x_index(N), n, n) += hb.psi_xx;
    qp.H.block(qp.w_index(N), qp.w_index(N), nw, nw) += hb.psi_ww;

    int rows = (N + 1) * (n + nw);
    for (const auto& a : active) rows += static_cast<int>(a.size());
    qp.A = Mat::Zero(rows, dim);
    qp.b = Vec::Zero(rows);

    // Row order: for k = 0..N the dx(k) rows then the dw(k) rows; active rows last.
    int r = 0;
    for (int k = 0; k <= N; ++k) {
        qp.A.block(r, qp.x_index(k), n, n) = -Mat::Identity(n, n);
        if (k == 0) {
            qp.b.segment(r, n) = -dx0;
        } else {
            const StageLinearization& s = lin.stage[k - 1];
            qp.A.block(r, qp.x_index(k - 1), n, n) += s.fx;
            qp.A.block(r, qp.u_index(k - 1), n, m) += s.fu;
            qp.A.block(r, qp.w_index(k - 1), n, nw) += s.fw;
        }
        r += n;
        qp.A.block(r, qp.w_index(k), nw, nw) = -Mat::Identity(nw, nw);
        if (k == 0) {
            qp.b.segment(r, nw) = -dw0;
        } else {
            const StageLinearization& s = lin.stage[k - 1];
            qp.A.block(r, qp.x_index(k - 1), nw, n) += s.gx;
            qp.A.block(r, qp.w_index(k - 1), nw, nw) += s.gw;
        }
        r += nw;
    }
    for (int k = 0; k < N; ++k) {
        const StageLinearization& s = lin.stage[k];
        for (int i : active[k]) {
            qp.A.block(r, qp.x_index(k), 1, n) = s.cx.row(i);
            qp.A.block(r, qp.u_index(k), 1, m) = s.cu.row(i);
            qp.A.block(r, qp.w_index(k), 1, nw) = s.cw.row(i);
            ++r;
        }
    }
    return qp;
}

StackedQpSolution solve_stacked_qp(const StackedQp& qp, const std::vector<ActiveSet>& active) {
    const int dim = qp.size();
    const int rows = static_cast<int>(qp.A.rows());
    Mat kkt = Mat::Zero(dim + rows, dim + rows);
    kkt.topLeftCorner(dim, dim) = qp.H;
    kkt.topRightCorner(dim, rows) = qp.A.transpose();
    kkt.bottomLeftCorner(rows, dim) = qp.A;
    Vec rhs(dim + rows);
    rhs << -qp.h, qp.b;

    Eigen::FullPivLU<Mat> lu(kkt);
    if (!lu.isInvertible()) throw SingularMatrix("stacked QP KKT matrix is singular");
    const Vec sol = lu.solve(rhs);
    if (!all_finite(sol)) throw SingularMatrix("stacked QP solution is not finite");

    const int N = qp.N, n = qp.n, m = qp.m, nw = qp.nw;
    StackedQpSolution out;
    out.z = sol.head(dim);
    out.objective = qp.objective(out.z);
    for (int k = 0; k <= N; ++k) {
        out.dx.push_back(out.z.segment(qp.x_index(k), n));
        out.dw.push_back(out.z.segment(qp.w_index(k), nw));
        if (k < N) out.du.push_back(out.z.segment(qp.u_index(k), m));
    }
    int r = dim;
    for (int k = 0; k <= N; ++k) {
        out.dlambda.push_back(sol.segment(r, n));
        r += n;
        out.dlambda_bar.push_back(sol.segment(r, nw));
        r += nw;
    }
    for (int k = 0; k < N; ++k) {
        const int la = static_cast<int>(active[k].size());
        out.dmu.push_back(sol.segment(r, la));
        r += la;
    }
    return out;
}

StackedQpSolution solve_stacked_qp(const OcpProblem& problem, const Trajectory& traj,
                                   const CostateTrajectory& costates, const std::vector<ActiveSet>& active,
                                   const Vec& dx0, const Vec& dw0, const std::optional<std::vector<Vec>>& hu) {
    return solve_stacked_qp(build_stacked_qp(problem, traj, costates, active, dx0, dw0, hu), active);
}

LqrGains discrete_lqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& Qf, int N) {
    LqrGains out;
    out.K.resize(N);
    out.P.resize(N + 1);
    out.P[N] = Qf;
    for (int k = N - 1; k >= 0; --k) {
        const Mat& P = out.P[k + 1];
        const Mat btp = B.transpose() * P;
        const Mat gram = R + btp * B;
        out.K[k] = gram.fullPivLu().solve(btp * A);
        out.P[k] = Q + A.transpose() * P * A - A.transpose() * P * B * out.K[k];
        out.P[k] = 0.5 * (out.P[k] + out.P[k].transpose()).eval();
    }
    return out;
}

}  // namespace ene
