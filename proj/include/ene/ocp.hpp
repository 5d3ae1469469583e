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

#ifndef ENE_OCP_HPP
#define ENE_OCP_HPP

#include <optional>
#include <vector>

#include "ene/costates.hpp"
#include "ene/problem.hpp"

namespace ene {

/**
 * Simulates x(k+1) = f(x, u, w). The preview follows the nominal model g unless
 * an override is given (HoldConstant keeps w0, Generator supplies every w(k)
 * including w(0)). Active sets are filled with `active_indices`.
 * Throws NonFinite if the state diverges.
 */
Trajectory rollout(const OcpProblem& problem, const std::vector<Vec>& controls,
                   const std::optional<PreviewSignal>& preview_override = std::nullopt);
Trajectory rollout(const OcpProblem& problem, const Vec& x0, const Vec& w0, const std::vector<Vec>& controls,
                   const std::optional<PreviewSignal>& preview_override = std::nullopt);

/// Sum of stage costs plus the terminal cost.
double evaluate_cost(const OcpProblem& problem, const Trajectory& traj);

struct KktResidual {
    std::vector<Vec> hu;                 // H_u(k)
    std::vector<double> stationarity;    // ||H_u(k)||_inf
    std::vector<double> complementarity; // max_i |mu_i C_i| over active rows
    std::vector<double> violation;       // max(0, max_i C_i)
    double max_stationarity = 0.0;
    double max_complementarity = 0.0;
    double max_violation = 0.0;
    double min_multiplier = 0.0;  // over all active rows; 0 when none are active
};

KktResidual kkt_residual(const OcpProblem& problem, const Trajectory& traj, const CostateTrajectory& costates);
KktResidual kkt_residual(const Trajectory& traj, const Linearization& lin, const CostateTrajectory& costates);

struct NominalSolution {
    Trajectory trajectory;
    CostateTrajectory costates;
    double kkt_norm = 0.0;  // max_k ||H_u(k)||_inf
    bool is_optimal = false;
    int iterations = 0;
    double cost = 0.0;
    std::vector<double> cost_history;  // cost after every accepted step
};

struct SolveOptions {
    int max_iters = 500;
    double opt_tol = 1e-6;
    std::vector<Vec> init_controls;  // empty: zeros
    /// Optional warm-start active sets matching init_controls.
    std::vector<ActiveSet> init_active;
};

class SolveFailed : public Error {
public:
    SolveFailed(double best_kkt_norm, NominalSolution best);
    double best_kkt_norm;
    NominalSolution best;
};

/**
 * @brief Solves the horizon problem by iterating the modified neighboring-extremal step.
 *
 * Each iteration computes costates and H_u residuals at the current iterate, runs
 * the backward recursion in NonOptimal mode with the current active set, and
 * forward-simulates the nonlinear plant under the resulting affine feedback law
 * with a backtracking line search. Activity changes are detected with the
 * intermediate-point test (at most one flip per step per iteration). A Levenberg
 * shift of H_uu is added only while Z_uu fails to be positive definite.
 *
 * max_iters = 0 returns the initial guess with is_optimal = false. Otherwise
 * throws SolveFailed (carrying the best iterate) when the tolerance is not met.
 */
NominalSolution solve_nominal(const OcpProblem& problem, const SolveOptions& options = {});

}  // namespace ene

#endif  // ENE_OCP_HPP
