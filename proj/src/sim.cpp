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

#include "ene/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace ene {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Current reference for the adaptive controllers: a nominal plan, its gains and
// costates, and the closed-loop step at which plan index 0 applies.
struct AdaptivePlan {
    Trajectory nominal;
    CostateTrajectory costates;
    GainSchedule gains;
    int offset = 0;
    bool optimal = false;
};

bool crossing_ahead(const AdaptivePlan& plan, int j, const PerturbationState& pert, double activation_tol) {
    const DeltaTrajectory pred = propagate_linear(plan.gains, pert.dx, pert.dw, j,
                                                  plan.gains.mode == GainMode::Optimal ? 0.0 : 1.0);
    const int N = plan.gains.horizon();
    for (int k = j; k < N; ++k) {
        const StepAlpha a = segment_alpha(plan.costates.mu[k], plan.gains.stage[k].lin.c, pred.dmu[k], pred.dc[k],
                                          plan.nominal.active[k], activation_tol);
        if (a.component >= 0 && a.alpha < 1.0) return true;
    }
    return false;
}

}  // namespace

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::OLNMPC: return "OLNMPC";
        case ControllerKind::CLNMPC: return "CLNMPC";
        case ControllerKind::NE: return "NE";
        case ControllerKind::ENE: return "ENE";
        case ControllerKind::MNE: return "MNE";
        case ControllerKind::MENE: return "MENE";
    }
    return "?";
}

std::optional<ControllerKind> parse_controller(const std::string& name) {
    std::string up;
    for (char ch : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    for (ControllerKind k : all_controllers())
        if (to_string(k) == up) return k;
    return std::nullopt;
}

std::vector<ControllerKind> all_controllers() {
    return {ControllerKind::OLNMPC, ControllerKind::CLNMPC, ControllerKind::NE,
            ControllerKind::ENE,    ControllerKind::MNE,    ControllerKind::MENE};
}

TimingStats timing_stats(const std::vector<double>& samples_ms, int warmup) {
    TimingStats t;
    std::vector<double> v;
    if (static_cast<int>(samples_ms.size()) > warmup)
        v.assign(samples_ms.begin() + warmup, samples_ms.end());
    else
        v = samples_ms;
    if (v.empty()) return t;
    t.samples = static_cast<int>(v.size());
    double sum = 0.0;
    for (double s : v) sum += s;
    t.mean_ms = sum / t.samples;
    std::sort(v.begin(), v.end());
    const size_t h = v.size() / 2;
    t.median_ms = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    return t;
}

double output_performance(const std::vector<Vec>& x, const PendulumWeights& weights) {
    double sq = 0.0;
    for (const Vec& s : x) {
        const double ez = s(0) - weights.ref_z, et = s(2) - weights.ref_theta;
        sq += ez * ez + et * et;
    }
    return std::sqrt(sq);
}

ScenarioPlan prepare_scenario(const ScenarioSpec& scenario) {
    ScenarioPlan plan;
    plan.problem = scenario.problem();
    auto t0 = Clock::now();
    plan.nominal = solve_nominal(plan.problem);
    plan.solve_ms = ms_since(t0);
    t0 = Clock::now();
    const SecondVariation sv = second_variation(plan.problem, plan.nominal.trajectory);
    plan.ene_gains = riccati_backward(sv, {GainMode::Optimal, 0.0, {}});
    plan.ne_gains = riccati_backward(strip_preview(sv), {GainMode::Optimal, 0.0, {}});
    plan.gains_ms = ms_since(t0);
    return plan;
}

SimResult run_scenario(const ScenarioSpec& scenario, ControllerKind kind) {
    return run_scenario(scenario, prepare_scenario(scenario), kind);
}

SimResult run_scenario(const ScenarioSpec& scenario, const ScenarioPlan& plan, ControllerKind kind) {
    const OcpProblem& problem = plan.problem;
    const Trajectory& nom = plan.nominal.trajectory;
    const int N = problem.horizon;
    const ConstraintSet& cs = problem.constraints;

    SimResult r;
    r.scenario = scenario.name;
    r.kind = kind;
    r.precompute_ms = plan.solve_ms + plan.gains_ms;
    r.x.resize(N + 1);
    r.w.resize(N + 1);
    r.u.resize(N);
    r.c.resize(N);

    std::vector<Vec> generated;
    if (!scenario.actual_is_nominal) generated = scenario.actual_preview().generate(N + 1);
    r.x[0] = nom.x[0] + scenario.dx0;
    r.w[0] = scenario.actual_is_nominal ? nom.w[0] : generated[0];

    const bool adaptive = kind == ControllerKind::MENE || kind == ControllerKind::MNE;
    const FeedbackVariant variant = kind == ControllerKind::MNE ? FeedbackVariant::StateOnly : FeedbackVariant::Extended;
    AdaptivePlan ap;
    if (adaptive) {
        ap.nominal = nom;
        ap.costates = plan.nominal.costates;
        ap.gains = kind == ControllerKind::MNE ? plan.ne_gains : plan.ene_gains;
        ap.optimal = plan.nominal.is_optimal;
    }
    NominalSolution cl = plan.nominal;  // CLNMPC warm start
    OcpProblem prev_problem = problem;
    std::optional<GainSchedule> cl_gains;
    if (kind == ControllerKind::CLNMPC) cl_gains = plan.ene_gains;

    std::vector<double> times;
    times.reserve(N);
    int k = 0;
    try {
        for (; k < N; ++k) {
            const Vec& x = r.x[k];
            const Vec& w = r.w[k];
            Vec u;
            const auto t0 = Clock::now();
            switch (kind) {
                case ControllerKind::OLNMPC: u = nom.u[k]; break;
                case ControllerKind::NE:
                    u = nom.u[k] + ene_control(plan.ne_gains, k, {x - nom.x[k], w - nom.w[k]},
                                               FeedbackVariant::StateOnly);
                    break;
                case ControllerKind::ENE:
                    u = nom.u[k] + ene_control(plan.ene_gains, k, {x - nom.x[k], w - nom.w[k]});
                    break;
                case ControllerKind::MENE:
                case ControllerKind::MNE: {
                    const int j = k - ap.offset;
                    PerturbationState pert{x - ap.nominal.x[j], w - ap.nominal.w[j]};
                    if (variant == FeedbackVariant::StateOnly) pert.dw.setZero();
                    if (!crossing_ahead(ap, j, pert, cs.activation_tol)) {
                        u = ap.nominal.u[j] + mene_control(ap.gains, j, pert);
                        break;
                    }
                    AdaptOptions opts;
                    opts.variant = variant;
                    opts.nominal_optimal = ap.optimal;
                    const Trajectory tail = ap.nominal.tail(j);
                    OcpProblem tail_problem = problem;
                    tail_problem.horizon = N - k;
                    tail_problem.x0 = tail.x[0];
                    tail_problem.w0 = tail.w[0];
                    const Vec dw = variant == FeedbackVariant::StateOnly ? Vec::Zero(problem.nw()) : Vec(w - tail.w[0]);
                    AdaptationResult ad = adapt_multi_segment(tail_problem, tail, x - tail.x[0], dw, opts);
                    u = ad.u_star[0];
                    ++r.adaptations;
                    r.segments += static_cast<int>(ad.segments.size());
                    r.flips += ad.flips;
                    for (const SegmentRecord& s : ad.segments)
                        r.segment_trace.push_back({k, s.index, s.lambda, s.flip, s.cumulative_du_norm});
                    ap.nominal = std::move(ad.final_nominal);
                    ap.costates = std::move(ad.final_costates);
                    ap.gains = std::move(ad.final_gains);
                    ap.offset = k;
                    ap.optimal = false;
                    break;
                }
                case ControllerKind::CLNMPC: {
                    OcpProblem sub = problem;
                    sub.horizon = N - k;
                    sub.x0 = x;
                    sub.w0 = w;
                    // Warm start: the previous plan tracked from the measured state with its own gains.
                    const int shift = k == 0 ? 0 : 1;
                    if (k > 0) {
                        try {
                            cl_gains = riccati_backward(second_variation(prev_problem, cl.trajectory), {GainMode::Optimal, 0.0, {}});
                        } catch (const Error&) {
                            cl_gains.reset();
                        }
                    }
                    SolveOptions so;
                    const Trajectory warm = cl.trajectory.tail(shift);
                    so.init_controls = warm.u;
                    so.init_active = warm.active;
                    if (cl_gains) {
                        Vec xs = x, ws = w;
                        for (int j = 0; j < sub.horizon; ++j) {
                            const StageGains& g = cl_gains->stage[j + shift];
                            so.init_controls[j] = warm.u[j] + g.K1 * (xs - warm.x[j]) + g.K2 * (ws - warm.w[j]);
                            const Vec xn = problem.model.f(xs, so.init_controls[j], ws);
                            ws = problem.model.g(xs, ws);
                            xs = xn;
                        }
                        if (!all_finite(xs)) so.init_controls = warm.u;
                    }
                    try {
                        cl = solve_nominal(sub, so);
                    } catch (const SolveFailed& e) {
                        cl = e.best;
                        ++r.solve_failures;
                    }
                    prev_problem = sub;
                    u = cl.trajectory.u[0];
                    break;
                }
            }
            times.push_back(ms_since(t0));

            if (!all_finite(u)) throw NonFinite("controller produced a non-finite input at step " + std::to_string(k));
            r.u[k] = u;
            r.c[k] = cs.l > 0 ? cs.c(x, u, w) : Vec::Zero(0);
            for (int i = 0; i < r.c[k].size(); ++i)
                if (r.c[k](i) > 1e-6) r.violations.push_back({k, i, r.c[k](i)});
            Vec applied = u;
            if (scenario.saturate_input)
                applied = u.cwiseMax(-scenario.params.force_bound).cwiseMin(scenario.params.force_bound);
            r.x[k + 1] = problem.model.f(x, applied, w);
            r.w[k + 1] = scenario.actual_is_nominal ? problem.model.g(x, w) : generated[k + 1];
            if (!all_finite(r.x[k + 1])) throw NonFinite("plant diverged at step " + std::to_string(k + 1));
        }
    } catch (const std::exception& e) {
        r.completed = false;
        r.error = to_string(kind) + " failed at step " + std::to_string(k) + ": " + e.what();
        r.x.resize(k + 1);
        r.w.resize(k + 1);
        r.u.resize(k);
        r.c.resize(k);
    }
    r.timing = timing_stats(times);
    r.performance = output_performance(r.x, scenario.weights);
    return r;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Comparison compare_controllers(const ScenarioSpec& scenario, const std::vector<ControllerKind>& kinds, int threads) {
    return compare_controllers(scenario, prepare_scenario(scenario), kinds, threads);
}

Comparison compare_controllers(const ScenarioSpec& scenario, const ScenarioPlan& plan,
                               const std::vector<ControllerKind>& kinds, int threads) {
    Comparison cmp;
    cmp.scenario = scenario.name;
    cmp.results.resize(kinds.size());
    parallel_for(static_cast<int>(kinds.size()), threads,
                 [&](int i) { cmp.results[i] = run_scenario(scenario, plan, kinds[i]); });

    double cl_median = 0.0;
    for (const SimResult& r : cmp.results)
        if (r.kind == ControllerKind::CLNMPC && r.completed) cl_median = r.timing.median_ms;
    for (const SimResult& r : cmp.results) {
        ComparisonRow row;
        row.kind = r.kind;
        row.completed = r.completed;
        row.performance = r.performance;
        row.median_ms = r.timing.median_ms;
        row.mean_ms = r.timing.mean_ms;
        row.speedup_vs_clnmpc = (cl_median > 0.0 && r.timing.median_ms > 0.0) ? cl_median / r.timing.median_ms : 0.0;
        row.violations = static_cast<int>(r.violations.size());
        row.flips = r.flips;
        cmp.rows.push_back(row);
    }
    std::stable_sort(cmp.rows.begin(), cmp.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.completed != b.completed) return a.completed;
        return a.performance < b.performance;
    });
    return cmp;
}

SweepReport preview_model_sweep(const ScenarioSpec& scenario, const std::vector<PreviewRecursion>& models,
                                int threads) {
    SweepReport rep;
    rep.entries.resize(models.size());
    parallel_for(static_cast<int>(models.size()), threads, [&](int i) {
        SweepEntry& e = rep.entries[i];
        e.model = models[i];
        ScenarioSpec s = scenario;
        s.preview = models[i];
        try {
            const ScenarioPlan plan = prepare_scenario(s);
            const SimResult ene = run_scenario(s, plan, ControllerKind::ENE);
            const SimResult mene = run_scenario(s, plan, ControllerKind::MENE);
            e.completed = ene.completed && mene.completed;
            e.error = !ene.completed ? ene.error : mene.error;
            e.ene_performance = ene.performance;
            e.mene_performance = mene.performance;
            e.ene_violations = static_cast<int>(ene.violations.size());
            e.mene_violations = static_cast<int>(mene.violations.size());
        } catch (const std::exception& ex) {
            e.completed = false;
            e.error = ex.what();
        }
    });
    for (int i = 0; i < static_cast<int>(rep.entries.size()); ++i)
        if (rep.entries[i].completed &&
            (rep.best < 0 || rep.entries[i].mene_performance < rep.entries[rep.best].mene_performance))
            rep.best = i;
    return rep;
}

}  // namespace ene
