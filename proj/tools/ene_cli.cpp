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

// Command-line front end: nominal solve, gain export, closed-loop runs and self-checks.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ene/checks.hpp"
#include "ene/costates.hpp"
#include "ene/io.hpp"
#include "ene/sim.hpp"

namespace {

using namespace ene;
using ene::io::IoError;

enum ExitCode { kOk = 0, kConfigError = 1, kSolveFailure = 2, kGainFailure = 3, kCheckFailure = 4 };

struct Flags {
    std::string config_path;
    std::optional<std::string> scenario;
    std::optional<std::string> controllers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> threads;
    bool preview_sweep = false;
    bool print_config = false;
    std::string solution_path;
    double fd_step = tol::fd_step;
};

io::RunConfig build_config(const Flags& f) {
    io::RunConfig cfg = io::preset_config(f.scenario.value_or("small"));
    if (!f.config_path.empty()) {
        // Syntax errors already carry "path:line:col"; schema errors get the path prefixed.
        const io::Json doc = io::parse_json(io::read_file(f.config_path), f.config_path);
        try {
            cfg = io::parse_config(doc, cfg);
        } catch (const IoError& e) {
            throw IoError(f.config_path, e.what());
        }
    }
    if (f.controllers) cfg.controllers = io::parse_controller_list(*f.controllers);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out_dir = *f.out;
    if (f.format) cfg.format = *f.format;
    if (f.threads) cfg.threads = *f.threads;
    if (f.preview_sweep) cfg.preview_sweep = true;
    cfg.finalize();
    return cfg;
}

std::string out_path(const io::RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

int cmd_solve(const io::RunConfig& cfg) {
    const OcpProblem problem = cfg.scenario.problem();
    NominalSolution sol;
    try {
        sol = solve_nominal(problem);
    } catch (const SolveFailed& e) {
        std::cerr << "solve failed: " << e.what() << "\n";
        return kSolveFailure;
    }
    const std::string path = out_path(cfg, "solution.json");
    io::write_file(path, io::solution_to_json(sol).dump(1) + "\n");
    std::printf("nominal solution: optimal=%s kkt_norm=%.3e cost=%.6f iterations=%d -> %s\n",
                sol.is_optimal ? "yes" : "no", sol.kkt_norm, sol.cost, sol.iterations, path.c_str());
    return kOk;
}

int cmd_gains(const io::RunConfig& cfg, const Flags& f) {
    const OcpProblem problem = cfg.scenario.problem();
    const std::string src = f.solution_path.empty() ? out_path(cfg, "solution.json") : f.solution_path;
    NominalSolution sol;
    try {
        sol = io::solution_from_json(io::parse_json(io::read_file(src), src));
    } catch (const IoError& e) {
        throw IoError(src, e.what());
    }
    const Trajectory& t = sol.trajectory;
    if (t.horizon() != problem.horizon || t.x[0].size() != problem.n() || t.u[0].size() != problem.m() ||
        t.w[0].size() != problem.nw())
        throw IoError(src, "solution dimensions do not match the configured scenario");

    GainSchedule gains;
    try {
        const Linearization lin = linearize(problem, t);
        RiccatiOptions opt;
        opt.mode = sol.is_optimal ? GainMode::Optimal : GainMode::NonOptimal;
        gains = riccati_backward(second_variation(problem, t, lin, sol.costates), opt);
    } catch (const ZuuNotPositive& e) {
        std::cerr << "gain recursion failed at step " << e.step << ": " << e.what() << "\n";
        return kGainFailure;
    } catch (const SingularKkt& e) {
        std::cerr << "gain recursion failed at step " << e.step << ": " << e.what() << "\n";
        return kGainFailure;
    } catch (const RankDeficientActiveSet& e) {
        std::cerr << "gain recursion failed at step " << e.step << ": " << e.what() << "\n";
        return kGainFailure;
    }
    const std::string path = out_path(cfg, "gains.json");
    io::write_file(path, io::gains_to_json(gains).dump(1) + "\n");
    std::printf("gain schedule: %d stages, mode=%s -> %s\n", gains.horizon(),
                gains.mode == GainMode::Optimal ? "optimal" : "non-optimal", path.c_str());
    return kOk;
}

int cmd_run(const io::RunConfig& cfg) {
    ScenarioPlan plan;
    try {
        plan = prepare_scenario(cfg.scenario);
    } catch (const SolveFailed& e) {
        std::cerr << "nominal solve failed: " << e.what() << "\n";
        return kSolveFailure;
    } catch (const ZuuNotPositive& e) {
        std::cerr << "gain recursion failed at step " << e.step << ": " << e.what() << "\n";
        return kGainFailure;
    }
    const Comparison cmp = compare_controllers(cfg.scenario, plan, cfg.controllers, cfg.threads);
    bool any = false;
    for (const SimResult& r : cmp.results) {
        any = any || r.completed;
        const std::string base = cfg.scenario.name + "_" + lowercase(to_string(r.kind));
        if (cfg.format == "csv") {
            io::write_file(out_path(cfg, base + ".csv"), io::sim_csv(r));
            io::write_file(out_path(cfg, base + "_summary.json"), io::sim_json(r, false).dump(1) + "\n");
        } else {
            io::write_file(out_path(cfg, base + ".json"), io::sim_json(r, true).dump(1) + "\n");
        }
        if (!r.completed) std::cerr << r.error << "\n";
    }
    const std::string md = io::comparison_markdown(cmp);
    io::write_file(out_path(cfg, "comparison.md"), md);
    io::write_file(out_path(cfg, "comparison.json"), io::comparison_json(cmp).dump(1) + "\n");
    std::cout << md;

    if (cfg.preview_sweep) {
        const SweepReport rep =
            preview_model_sweep(cfg.scenario, {PreviewRecursion::hold_constant(), PreviewRecursion{}}, cfg.threads);
        const std::string smd = io::sweep_markdown(rep);
        io::write_file(out_path(cfg, "sweep.md"), smd);
        io::write_file(out_path(cfg, "sweep.json"), io::sweep_json(rep).dump(1) + "\n");
        std::cout << "\n" << smd;
    }
    return any ? kOk : kSolveFailure;
}

int cmd_check(const io::RunConfig& cfg, const Flags& f) {
    CheckOptions opt;
    opt.fd_step = f.fd_step;
    opt.scenario = cfg.scenario;
    const std::vector<CheckResult> results = run_checks(opt);
    const CheckResult* first_failure = nullptr;
    for (const CheckResult& c : results) {
        std::printf("%s  %-44s %.3e (limit %.1e)%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit,
                    c.detail.empty() ? "" : "  ", c.detail.c_str());
        if (!c.passed && !first_failure) first_failure = &c;
    }
    if (first_failure) {
        std::cerr << "check failed: " << first_failure->name << ": " << first_failure->value << " exceeds "
                  << first_failure->limit << (first_failure->detail.empty() ? "" : " (" + first_failure->detail + ")")
                  << "\n";
        return kCheckFailure;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extended neighboring extremal control: nominal solve, gains, closed-loop runs"};
    app.footer(
        "Exit codes: 0 ok, 1 config or I/O error, 2 solve failure, 3 gain failure, 4 check failure.\n"
        "Precedence: --scenario preset, then --config file, then individual flags.");
    app.fallthrough();

    Flags f;
    std::string scenario, controllers, out, format;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", f.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    auto* o_scenario = app.add_option("--scenario", scenario, "Preset: small, large, sweep or custom");
    auto* o_controllers = app.add_option("--controllers", controllers, "Comma-separated controllers or 'all'");
    auto* o_seed = app.add_option("--seed", seed, "Generator seed of the actual preview");
    auto* o_out = app.add_option("--out", out, "Output directory");
    auto* o_format = app.add_option("--format", format, "Per-run trajectory files: csv or json")
                         ->check(CLI::IsMember({"csv", "json"}));
    auto* o_threads = app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    app.add_flag("--preview-sweep", f.preview_sweep, "Also compare both nominal preview models");
    app.add_flag("--print-config", f.print_config, "Print the effective configuration as JSON and exit");

    auto* solve = app.add_subcommand("solve", "Solve the nominal problem and write solution.json");
    auto* gains = app.add_subcommand("gains", "Compute the gain schedule of a stored solution");
    gains->add_option("--solution", f.solution_path, "Solution file (default OUT/solution.json)");
    auto* run = app.add_subcommand("run", "Run controllers in closed loop and write results");
    auto* check = app.add_subcommand("check", "Derivative, oracle and symmetry self-checks");
    check->add_option("--fd-step", f.fd_step, "Finite-difference step of the pendulum dynamics");
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }
    if (*o_scenario) f.scenario = scenario;
    if (*o_controllers) f.controllers = controllers;
    if (*o_seed) f.seed = seed;
    if (*o_out) f.out = out;
    if (*o_format) f.format = format;
    if (*o_threads) f.threads = threads;

    try {
        const io::RunConfig cfg = build_config(f);
        if (f.print_config) {
            std::cout << io::config_to_json(cfg).dump(2) << "\n";
            return kOk;
        }
        if (solve->parsed()) return cmd_solve(cfg);
        if (gains->parsed()) return cmd_gains(cfg, f);
        if (run->parsed()) return cmd_run(cfg);
        if (check->parsed()) return cmd_check(cfg, f);
        std::cerr << app.help();
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
