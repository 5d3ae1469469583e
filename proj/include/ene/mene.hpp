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

#ifndef ENE_MENE_HPP
#define ENE_MENE_HPP

#include <optional>
#include <vector>

#include "ene/ene.hpp"
#include "ene/ocp.hpp"

namespace ene {

/// du = K1 dx + K2 dw + K3 [f_u^T T(k+1) + H_u(k); 0].
Vec mene_control(const GainSchedule& gains, int k, const PerturbationState& pert, const Vec& t_next,
                 const Vec& hu);
/// Same law using the T(k+1) and H_u(k) stored in the schedule.
Vec mene_control(const GainSchedule& gains, int k, const PerturbationState& pert);

struct ConstraintPerturbation {
    Vec dmu;  // active rows
    Vec dc;   // all rows
};

/**
 * Predicted multiplier change K4 dx + K5 dw (plus the feedforward part for
 * NonOptimal schedules) and predicted change of every constraint row under the
 * modified law.
 */
ConstraintPerturbation multiplier_and_constraint_perturbations(const GainSchedule& gains, int k,
                                                               const PerturbationState& pert);

/// Smallest crossing fraction at one step.
struct StepAlpha {
    double alpha = 1.0;
    int component = -1;  // constraint row, -1 when nothing crosses
    bool on_active = false;
};

inline constexpr double kAlphaDenominatorFloor = 1e-12;
inline constexpr double kMultiplierZeroTol = 1e-9;

/**
 * Fraction alpha at which a component changes activity: mu0 + alpha dmu = 0 for
 * active rows, C0 + alpha dC = 0 for inactive rows. Values outside [0, 1] and
 * vanishing denominators map to 1. A row already on its switching surface
 * (C0 >= -activation_tol, or mu0 <= kMultiplierZeroTol) gives 0 when the
 * perturbation pushes it across and 1 otherwise. Ties go to the lowest row.
 */
StepAlpha segment_alpha(const Vec& mu0, const Vec& c0, const Vec& dmu, const Vec& dc, const ActiveSet& active,
                        double activation_tol);

std::vector<StepAlpha> segment_alpha(const std::vector<Vec>& mu0, const std::vector<Vec>& c0,
                                     const DeltaTrajectory& delta, const std::vector<ActiveSet>& active,
                                     double activation_tol, int start = 0);

struct SegmentFlip {
    int step = -1;
    int constraint = -1;
    bool activated = false;
};

struct SegmentRecord {
    int index = 0;
    Vec x0_nominal, w0_nominal;
    std::vector<double> alpha;
    double lambda = 1.0;            // fraction of the remaining perturbation
    double fraction_of_total = 1.0; // fraction of the original perturbation
    std::optional<SegmentFlip> flip;
    std::vector<Vec> du;
    double cumulative_du_norm = 0.0;
    /// Levenberg shift on Z_uu this segment's gains needed; zero when the plain recursion succeeded.
    double control_shift = 0.0;
};

struct ViolationEntry {
    int step = 0;
    int constraint = 0;
    double magnitude = 0.0;
};

struct AdaptationResult {
    std::vector<Vec> u_star;
    Trajectory trajectory;  // u_star rolled out on the actual plant and preview
    std::vector<SegmentRecord> segments;
    std::vector<ViolationEntry> violations;
    int flips = 0;

    /// Nominal, gains and remaining perturbation of the last segment.
    Trajectory final_nominal;
    CostateTrajectory final_costates;
    GainSchedule final_gains;
    PerturbationState final_perturbation;

    bool clean() const { return violations.empty(); }
};

class SegmentBudgetExceeded : public Error {
public:
    explicit SegmentBudgetExceeded(std::vector<SegmentRecord> partial)
        : Error("multi-segment adaptation exceeded its segment budget"), partial(std::move(partial)) {}
    std::vector<SegmentRecord> partial;
};

class CycleDetected : public Error {
public:
    CycleDetected(int step, int constraint)
        : Error("activity of constraint " + std::to_string(constraint) + " at step " + std::to_string(step) +
                " flipped twice without progress"),
          step(step), constraint(constraint) {}
    int step, constraint;
};

struct AdaptOptions {
    int max_segments = 32;
    FeedbackVariant variant = FeedbackVariant::Extended;
    /// The nominal satisfies H_u = 0; the first segment then uses the unmodified law.
    bool nominal_optimal = false;
    /// Actual preview used for the final rollout; the nominal model when absent.
    std::optional<PreviewSignal> actual_preview;
    double violation_tol = 1e-6;
};

/**
 * @brief Multi-segment adaptation along the line from the nominal origin to the perturbed one.
 *
 * Each pass rebuilds costates and NonOptimal gains at the current segment
 * nominal, predicts the linearized perturbation response, and finds the
 * smallest crossing fraction lambda. lambda = 0 flips the blocking row and
 * rebuilds; 0 < lambda < 1 applies that fraction, moves the nominal origin and
 * shrinks the remaining perturbation; lambda = 1 finishes with
 * u* = u_nominal + sum_j du_j and a rollout of u* on the actual system.
 */
AdaptationResult adapt_multi_segment(const OcpProblem& problem, const Trajectory& nominal, const Vec& dx0,
                                     const Vec& dw0, const AdaptOptions& options = {});
AdaptationResult adapt_multi_segment(const OcpProblem& problem, const NominalSolution& nominal, const Vec& dx0,
                                     const Vec& dw0, AdaptOptions options = {});

struct RecedingStep {
    Vec u;
    Trajectory next_plan;  // adapted plan from the next step on
    AdaptationResult adaptation;
};

/**
 * One receding-horizon step: the previous adapted plan is the (non-optimal)
 * nominal, the measured state and preview define the perturbation, and the
 * first control of the adapted sequence is returned.
 */
RecedingStep closed_loop_mene_step(const OcpProblem& problem, const Trajectory& plan, bool plan_optimal,
                                   const Vec& x_measured, const Vec& w_measured, AdaptOptions options = {});

}  // namespace ene

#endif  // ENE_MENE_HPP
