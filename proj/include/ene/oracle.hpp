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

#ifndef ENE_ORACLE_HPP
#define ENE_ORACLE_HPP

#include <optional>
#include <vector>

#include "ene/ene.hpp"

namespace ene {

/**
 * @brief Dense equality-constrained QP over z = [dx(0..N); du(0..N-1); dw(0..N)].
 *
 * Objective 1/2 z^T H z + h^T z; constraints A z = b hold the initial
 * conditions, the linearized dynamics and preview model, and the active
 * constraint rows.
 */
struct StackedQp {
    Mat H;
    Vec h;
    Mat A;
    Vec b;
    int N = 0, n = 0, m = 0, nw = 0;

    int x_index(int k) const { return k * n; }
    int u_index(int k) const { return (N + 1) * n + k * m; }
    int w_index(int k) const { return (N + 1) * n + N * m + k * nw; }
    int size() const { return static_cast<int>(H.rows()); }
    double objective(const Vec& z) const { return 0.5 * z.dot(H * z) + h.dot(z); }
};

struct StackedQpSolution {
    std::vector<Vec> dx, du, dw;
    std::vector<Vec> dlambda;      // N + 1, multipliers of dx rows (k = 0 is the initial condition)
    std::vector<Vec> dlambda_bar;  // N + 1
    std::vector<Vec> dmu;          // N, active rows
    Vec z;
    double objective = 0.0;
};

/// `hu` adds sum_k H_u(k)^T du(k) to the objective.
StackedQp build_stacked_qp(const OcpProblem& problem, const Trajectory& traj, const CostateTrajectory& costates,
                           const std::vector<ActiveSet>& active, const Vec& dx0, const Vec& dw0,
                           const std::optional<std::vector<Vec>>& hu = std::nullopt);

/// Solves the stacked first-order system with a full-pivot LU. Throws SingularMatrix.
StackedQpSolution solve_stacked_qp(const OcpProblem& problem, const Trajectory& traj,
                                   const CostateTrajectory& costates, const std::vector<ActiveSet>& active,
                                   const Vec& dx0, const Vec& dw0,
                                   const std::optional<std::vector<Vec>>& hu = std::nullopt);
StackedQpSolution solve_stacked_qp(const StackedQp& qp, const std::vector<ActiveSet>& active);

struct LqrGains {
    std::vector<Mat> K;  // du = -K(k) dx
    std::vector<Mat> P;  // N + 1
};

/// Classical finite-horizon discrete Riccati recursion.
LqrGains discrete_lqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& Qf, int N);

}  // namespace ene

#endif  // ENE_ORACLE_HPP
