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

#include "ene/costates.hpp"

namespace ene {

CostateTrajectory backward_costates(const OcpProblem& problem, const Trajectory& traj) {
    return backward_costates(traj, linearize(problem, traj));
}

CostateTrajectory backward_costates(const Trajectory& traj, const Linearization& lin) {
    const int N = traj.horizon();
    CostateTrajectory co;
    co.lambda.resize(N + 1);
    co.lambda_bar.resize(N + 1);
    co.mu.resize(N);
    co.lambda[N] = lin.psi_x;
    co.lambda_bar[N] = lin.psi_w;
    for (int k = N - 1; k >= 0; --k) {
        const StageLinearization& s = lin.stage[k];
        const ActiveSet& act = traj.active[k];
        const Vec& lam = co.lambda[k + 1];
        const Vec& lam_bar = co.lambda_bar[k + 1];
        Vec mu = Vec::Zero(static_cast<Eigen::Index>(act.size()));
        Vec lx = s.phi_x + s.fx.transpose() * lam + s.gx.transpose() * lam_bar;
        Vec lw = s.phi_w + s.fw.transpose() * lam + s.gw.transpose() * lam_bar;
        if (!act.empty()) {
            const Mat cua = select_rows(s.cu, act);
            const Vec hu0 = s.phi_u + s.fu.transpose() * lam;
            try {
                mu = -solve_symmetric_indefinite(cua * cua.transpose(), cua * hu0);
            } catch (const SingularMatrix&) {
                throw RankDeficientActiveSet(k);
            }
            lx += select_rows(s.cx, act).transpose() * mu;
            lw += select_rows(s.cw, act).transpose() * mu;
        }
        require_finite(lx, "backward_costates");
        require_finite(lw, "backward_costates");
        co.lambda[k] = std::move(lx);
        co.lambda_bar[k] = std::move(lw);
        co.mu[k] = std::move(mu);
    }
    return co;
}

}  // namespace ene
