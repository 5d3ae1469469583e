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

#ifndef ENE_SIM_HPP
#define ENE_SIM_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ene/mene.hpp"
#include "ene/ocp.hpp"
#include "ene/systems.hpp"

namespace ene {

enum class ControllerKind { OLNMPC, CLNMPC, NE, ENE, MNE, MENE };

std::string to_string(ControllerKind kind);
/// Case-insensitive; nullopt for unknown names.
std::optional<ControllerKind> parse_controller(const std::string& name);
std::vector<ControllerKind> all_controllers();

struct TimingStats {
    double median_ms = 0.0;
    double mean_ms = 0.0;
    int samples = 0;
};

/// Summarizes per-loop times after discarding the first `warmup` samples.
TimingStats timing_stats(const std::vector<double>& samples_ms, int warmup = 3);

struct SegmentTraceEntry {
    int step = 0;     // closed-loop step at which the adaptation ran
    int segment = 0;
    double lambda = 1.0;
    std::optional<SegmentFlip> flip;
    double cumulative_du_norm = 0.0;
};

struct SimResult {
    std::string scenario;
    ControllerKind kind = ControllerKind::ENE;
    bool completed = true;
    std::string error;

    std::vector<Vec> x;  // N + 1, actual
    std::vector<Vec> u;  // N
    std::vector<Vec> w;  // N + 1, actual preview
    std::vector<Vec> c;  // N, constraint values

    double performance = 0.0;  // Frobenius norm of the stacked y - r over k = 0..N
    TimingStats timing;
    double precompute_ms = 0.0;
    std::vector<ViolationEntry> violations;
    int solve_failures = 0;  // CLNMPC re-solves that returned a non-optimal iterate
    int adaptations = 0;
    int segments = 0;
    int flips = 0;
    std::vector<SegmentTraceEntry> segment_trace;
};

/// Nominal solution and gain schedules shared by every controller of a scenario.
struct ScenarioPlan {
    OcpProblem problem;
    NominalSolution nominal;
    GainSchedule ene_gains;  // Optimal mode
    GainSchedule ne_gains;   // preview-stripped
    double solve_ms = 0.0;
    double gains_ms = 0.0;
};

/// Throws SolveFailed when the nominal does not converge.
ScenarioPlan prepare_scenario(const ScenarioSpec& scenario);

SimResult run_scenario(const ScenarioSpec& scenario, ControllerKind kind);
SimResult run_scenario(const ScenarioSpec& scenario, const ScenarioPlan& plan, ControllerKind kind);

/// ||y - r||_F over k = 0..N with y = [z, theta].
double output_performance(const std::vector<Vec>& x, const PendulumWeights& weights);

struct ComparisonRow {
    ControllerKind kind = ControllerKind::ENE;
    bool completed = true;
    double performance = 0.0;
    double median_ms = 0.0;
    double mean_ms = 0.0;
    double speedup_vs_clnmpc = 0.0;  // 0 when CLNMPC was not run
    int violations = 0;
    int flips = 0;
};

struct Comparison {
    std::string scenario;
    std::vector<ComparisonRow> rows;  // sorted by performance, failed runs last
    std::vector<SimResult> results;   // in the requested controller order
};

/// Runs `kinds` concurrently on `threads` workers (0 = hardware concurrency).
Comparison compare_controllers(const ScenarioSpec& scenario, const std::vector<ControllerKind>& kinds,
                               int threads = 0);
Comparison compare_controllers(const ScenarioSpec& scenario, const ScenarioPlan& plan,
                               const std::vector<ControllerKind>& kinds, int threads = 0);

struct SweepEntry {
    PreviewRecursion model;
    bool completed = true;
    std::string error;
    double ene_performance = 0.0;
    double mene_performance = 0.0;
    int mene_violations = 0;
    int ene_violations = 0;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    int best = -1;  // entry with the lowest MENE performance
};

/// Re-solves the nominal and runs ENE and MENE for each nominal preview model.
SweepReport preview_model_sweep(const ScenarioSpec& scenario, const std::vector<PreviewRecursion>& models,
                                int threads = 0);

/// Calls fn(i) for i in [0, count) on a small worker pool.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace ene

#endif  // ENE_SIM_HPP
