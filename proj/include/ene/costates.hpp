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

#ifndef ENE_COSTATES_HPP
#define ENE_COSTATES_HPP

#include "ene/problem.hpp"

namespace ene {

/**
 * @brief Backward sweep for the multipliers along a trajectory.
 *
 * At each step the active-constraint multiplier is the least-squares solution
 * of the control stationarity condition,
 *   mu = -(Cu Cu^T)^{-1} Cu (phi_u + f_u^T lambda(k+1)),
 * followed by
 *   lambda(k)     = phi_x + f_x^T lambda(k+1) + g_x^T lambda_bar(k+1) + Cx^T mu,
 *   lambda_bar(k) = phi_w + f_w^T lambda(k+1) + g_w^T lambda_bar(k+1) + Cw^T mu,
 * with lambda(N) = psi_x and lambda_bar(N) = psi_w. Gradients are column vectors.
 *
 * Throws RankDeficientActiveSet when Cu restricted to the active rows loses rank.
 */
CostateTrajectory backward_costates(const OcpProblem& problem, const Trajectory& traj);
CostateTrajectory backward_costates(const Trajectory& traj, const Linearization& lin);

}  // namespace ene

#endif  // ENE_COSTATES_HPP
