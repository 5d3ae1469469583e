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

#include "ene/problem.hpp"

#include <string>

namespace ene {

void OcpProblem::validate() const {
    if (horizon < 1) throw Error("horizon must be at least 1, got " + std::to_string(horizon));
    if (model.n <= 0 || model.m <= 0 || model.nw < 0) throw Error("model dimensions must be positive");
    if (!model.f || !model.g) throw Error("model requires both f and g");
    if (!cost.stage || !cost.terminal) throw Error("cost requires stage and terminal functions");
    if (constraints.l > 0 && !constraints.c) throw Error("constraint set declares rows but no function");
    if (x0.size() != model.n) throw DimensionMismatch("x0 has wrong dimension");
    if (w0.size() != model.nw) throw DimensionMismatch("w0 has wrong dimension");
}

Trajectory Trajectory::tail(int k) const {
    Trajectory out;
    out.x.assign(x.begin() + k, x.end());
    out.u.assign(u.begin() + k, u.end());
    out.w.assign(w.begin() + k, w.end());
    out.active.assign(active.begin() + k, active.end());
    out.rolled_out = rolled_out;
    return out;
}

Linearization linearize(const OcpProblem& problem, const Trajectory& traj) {
    const int N = traj.horizon();
    const int n = problem.n(), m = problem.m(), nw = problem.nw();
    const ConstraintSet& cs = problem.constraints;
    Linearization lin;
    lin.stage.resize(N);
    for (int k = 0; k < N; ++k) {
        const Vec& x = traj.x[k];
        const Vec& u = traj.u[k];
        const Vec& w = traj.w[k];
        StageLinearization& s = lin.stage[k];
        StageJacobians fj = dynamics_jacobians(problem.model, x, u, w);
        s.fx = std::move(fj.x);
        s.fu = std::move(fj.u);
        s.fw = std::move(fj.w);
        PreviewJacobians gj = preview_jacobians(problem.model, x, w);
        s.gx = std::move(gj.x);
        s.gw = std::move(gj.w);
        if (cs.l > 0) {
            StageJacobians cj = constraint_jacobians(cs, x, u, w);
            s.cx = std::move(cj.x);
            s.cu = std::move(cj.u);
            s.cw = std::move(cj.w);
            s.c = cs.c(x, u, w);
        } else {
            s.cx = Mat::Zero(0, n);
            s.cu = Mat::Zero(0, m);
            s.cw = Mat::Zero(0, nw);
            s.c = Vec::Zero(0);
        }
        StageGradient g = stage_gradient(problem.cost, x, u, w);
        s.phi_x = std::move(g.x);
        s.phi_u = std::move(g.u);
        s.phi_w = std::move(g.w);
    }
    TerminalGradient tg = terminal_gradient(problem.cost, traj.x[N], traj.w[N]);
    lin.psi_x = std::move(tg.x);
    lin.psi_w = std::move(tg.w);
    return lin;
}

}  // namespace ene
