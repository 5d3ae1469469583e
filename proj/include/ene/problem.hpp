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

#ifndef ENE_PROBLEM_HPP
#define ENE_PROBLEM_HPP

#include <vector>

#include "ene/model.hpp"

namespace ene {

/// Horizon-N constrained optimal control problem.
struct OcpProblem {
    int horizon = 1;
    PlantModel model;
    ConstraintSet constraints;
    CostSpec cost;
    Vec x0;
    Vec w0;

    int n() const { return model.n; }
    int m() const { return model.m; }
    int nw() const { return model.nw; }
    /// Throws Error when shapes or the horizon are inconsistent.
    void validate() const;
};

using ActiveSet = std::vector<int>;

/// State, control and preview sequences plus the per-step active constraint sets.
struct Trajectory {
    std::vector<Vec> x;  // N + 1
    std::vector<Vec> u;  // N
    std::vector<Vec> w;  // N + 1
    std::vector<ActiveSet> active;  // N
    bool rolled_out = false;

    int horizon() const { return static_cast<int>(u.size()); }
    /// Steps k .. N as a new trajectory of horizon N - k.
    Trajectory tail(int k) const;
};

/// Multipliers of the dynamics (lambda), preview model (lambda_bar) and active constraints (mu).
struct CostateTrajectory {
    std::vector<Vec> lambda;      // N + 1
    std::vector<Vec> lambda_bar;  // N + 1
    std::vector<Vec> mu;          // N, sized by the active set at each step
};

/// First-order data of one stage, evaluated at a trajectory point.
struct StageLinearization {
    Mat fx, fu, fw;
    Mat gx, gw;
    Mat cx, cu, cw;  // all l constraint rows
    Vec c;           // constraint values
    Vec phi_x, phi_u, phi_w;
};

struct Linearization {
    std::vector<StageLinearization> stage;
    Vec psi_x, psi_w;
};

Linearization linearize(const OcpProblem& problem, const Trajectory& traj);

}  // namespace ene

#endif  // ENE_PROBLEM_HPP
