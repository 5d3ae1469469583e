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

#ifndef ENE_ENE_HPP
#define ENE_ENE_HPP

#include <vector>

#include "ene/costates.hpp"
#include "ene/problem.hpp"

namespace ene {

/// Second derivatives of the stage Hamiltonian at a nominal point.
struct StageHessian {
    Mat xx, xu, xw;
    Mat ux, uu, uw;
    Mat wx, wu, ww;
};

struct HamiltonianBlocks {
    std::vector<StageHessian> stage;
    Mat psi_xx, psi_ww;
};

/**
 * Hessian blocks of H = phi + lambda(k+1)^T f + lambda_bar(k+1)^T g + mu^T C^a,
 * including the multiplier-weighted curvature of f, g and the active constraints.
 */
HamiltonianBlocks hamiltonian_blocks(const OcpProblem& problem, const Trajectory& traj,
                                     const CostateTrajectory& costates);

/// Everything the backward recursion consumes, captured at one nominal.
struct SecondVariation {
    Linearization lin;
    HamiltonianBlocks blocks;
    std::vector<ActiveSet> active;
    std::vector<Vec> hu;  // control stationarity residual H_u(k)
    std::vector<Vec> mu;  // nominal active multipliers
    bool preview_stripped = false;
};

SecondVariation second_variation(const OcpProblem& problem, const Trajectory& traj);
SecondVariation second_variation(const OcpProblem& problem, const Trajectory& traj, const Linearization& lin,
                                 const CostateTrajectory& costates);

/**
 * Removes every preview coupling (f_w, g_x, g_w, C_w and the Hessian blocks
 * involving w). Running the recursion on the result gives the classical
 * state-only neighboring extremal gains.
 */
SecondVariation strip_preview(SecondVariation sv);

/// Inverse of the control KKT block at one step.
struct KktInverse {
    Mat inverse;  // (m + la) square
    int m = 0;
    int la = 0;
};

/**
 * Active step: inverse of [[Z_uu, Cu^T], [Cu, 0]]. Inactive step (Cu has zero
 * rows): Z_uu^{-1}, the multiplier block being zero-dimensional.
 * Throws ZuuNotPositive or SingularKkt (tagged with `step`).
 */
KktInverse kmat(int step, const Mat& zuu, const Mat& cu_active);

enum class GainMode {
    Optimal,     // H_u = 0 assumed; T and T_bar vanish identically
    NonOptimal,  // H_u residuals drive the affine terms T, T_bar
};

struct RiccatiOptions {
    GainMode mode = GainMode::Optimal;
    /// Explicit Levenberg shift added to H_uu; zero unless the caller opts in.
    double control_regularization = 0.0;
    /// Optional per-step residuals of the active constraints, appended to the
    /// lower block of the feedforward right-hand side. Empty means zero.
    std::vector<Vec> constraint_residuals;
};

struct StageGains {
    ActiveSet active;
    Mat K1, K2;      // m x n, m x nw
    Mat K3;          // m x (m + la)
    Mat K4, K5;      // la x n, la x nw
    KktInverse kkt;
    Mat Zxx, Zxu, Zxw, Zux, Zuu, Zuw, Zwx, Zwu, Zww;
    Vec hu;
    Vec u_ff;   // K3 [f_u^T T(k+1) + H_u(k); r_C(k)]
    Vec mu_ff;  // multiplier counterpart of u_ff
    StageLinearization lin;
};

/// Time-varying gains and value-function terms over the horizon.
struct GainSchedule {
    GainMode mode = GainMode::Optimal;
    bool preview_stripped = false;
    int n = 0, m = 0, nw = 0;
    std::vector<StageGains> stage;  // N
    std::vector<Mat> S, W, Sbar, Wbar;  // N + 1
    std::vector<Vec> T, Tbar;           // N + 1

    int horizon() const { return static_cast<int>(stage.size()); }
};

/// Backward recursion from k = N-1 to 0. Throws ZuuNotPositive or SingularKkt.
GainSchedule riccati_backward(const SecondVariation& sv, const RiccatiOptions& options = {});

struct PerturbationState {
    Vec dx;
    Vec dw;
};

enum class FeedbackVariant {
    Extended,   // K1 dx + K2 dw
    StateOnly,  // K1 dx
};

Vec ene_control(const GainSchedule& gains, int k, const PerturbationState& pert,
                FeedbackVariant variant = FeedbackVariant::Extended);

/// Linearized perturbation trajectory under the full gain law.
struct DeltaTrajectory {
    std::vector<Vec> dx;   // N + 1
    std::vector<Vec> du;   // N
    std::vector<Vec> dw;   // N + 1
    std::vector<Vec> dmu;  // N, active rows only
    std::vector<Vec> dc;   // N, all constraint rows
};

/**
 * Propagates dx(k+1) = f_x dx + f_u du + f_w dw and dw(k+1) = g_x dx + g_w dw
 * from `start` with du = K1 dx + K2 dw + ff_scale * u_ff. Entries before
 * `start` are left empty.
 */
DeltaTrajectory propagate_linear(const GainSchedule& gains, const Vec& dx0, const Vec& dw0, int start = 0,
                                 double ff_scale = 1.0);

}  // namespace ene

#endif  // ENE_ENE_HPP
