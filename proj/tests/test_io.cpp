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

#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "ene/io.hpp"
#include "helpers.hpp"

using namespace ene;
using namespace ene::io;

namespace {

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const IoError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config overlays and round trips") {
    const RunConfig base = preset_config("large");
    CHECK(base.scenario.dx0 == Vec::Constant(4, 0.2));
    RunConfig c = parse_config_text(R"({
        "scenario": {"horizon": 20, "weights": {"q_z": 3.5}, "params": {"force_bound": 250},
                     "method": "rk4", "preview": {"a_x": 0, "a_w": 1}, "saturate_input": false},
        "controllers": ["ene", "MENE"], "seed": 9, "format": "json", "threads": 2})",
                                    base);
    c.finalize();
    CHECK(c.scenario.horizon == 20);
    CHECK(c.scenario.weights.q_z == 3.5);
    CHECK(c.scenario.weights.q_theta == base.scenario.weights.q_theta);
    CHECK(c.scenario.params.force_bound == 250);
    CHECK(c.scenario.method == Discretization::Rk4);
    CHECK(c.scenario.preview == PreviewRecursion::hold_constant());
    CHECK_FALSE(c.scenario.saturate_input);
    CHECK(c.scenario.generator.seed == 9);
    CHECK(c.controllers == std::vector<ControllerKind>{ControllerKind::ENE, ControllerKind::MENE});
    CHECK(c.format == "json");

    const RunConfig back = parse_config(config_to_json(c), RunConfig{});
    CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("config errors name the offending path") {
    const RunConfig base = preset_config("small");
    CHECK(error_of([&] { parse_config_text(R"({"scenario": {"weights": {"q_zz": 1}}})", base); }) ==
          "/scenario/weights/q_zz: unknown key");
    CHECK(error_of([&] { parse_config_text(R"({"scenario": {"dx0": [1, 2]}})", base); }).rfind("/scenario/dx0", 0) == 0);
    CHECK(error_of([&] { parse_config_text(R"({"seed": "x"})", base); }).rfind("/seed", 0) == 0);
    CHECK(error_of([&] { parse_config_text(R"({"controllers": ["ene", "pid"]})", base); }).find("pid") !=
          std::string::npos);
    CHECK(error_of([&] { parse_config_text("{\n  \"seed\": 1,\n  oops\n}", base); }).find(":3:") != std::string::npos);
    RunConfig zero = base;
    zero.scenario.horizon = 0;
    CHECK(error_of([&] { zero.finalize(); }) == "/scenario/horizon: must be at least 1");
    RunConfig fmt = base;
    fmt.format = "xml";
    CHECK(error_of([&] { fmt.finalize(); }).rfind("/format", 0) == 0);
    CHECK(error_of([] { preset_config("medium"); }).find("unknown scenario") != std::string::npos);
}

TEST_CASE("controller lists") {
    CHECK(parse_controller_list("all") == all_controllers());
    CHECK(parse_controller_list(" ene, Mene ,ene") ==
          std::vector<ControllerKind>{ControllerKind::ENE, ControllerKind::MENE});
    CHECK_THROWS_AS(parse_controller_list("ene,foo"), IoError);
    CHECK_THROWS_AS(parse_controller_list(" , "), IoError);
}

TEST_CASE("solution and gain files round trip exactly") {
    const ScenarioSpec s = ScenarioSpec::small();
    const OcpProblem p = s.problem();
    const NominalSolution sol = solve_nominal(p);
    const NominalSolution back = solution_from_json(parse_json(solution_to_json(sol).dump(1), "mem"));
    CHECK(back.trajectory.x == sol.trajectory.x);
    CHECK(back.trajectory.u == sol.trajectory.u);
    CHECK(back.trajectory.w == sol.trajectory.w);
    CHECK(back.trajectory.active == sol.trajectory.active);
    CHECK(back.costates.lambda == sol.costates.lambda);
    CHECK(back.costates.mu.size() == sol.costates.mu.size());
    CHECK(back.kkt_norm == sol.kkt_norm);
    CHECK(back.is_optimal == sol.is_optimal);
    CHECK(back.cost_history == sol.cost_history);

    const GainSchedule g = riccati_backward(second_variation(p, sol.trajectory));
    const GainSchedule gb = gains_from_json(parse_json(gains_to_json(g).dump(), "mem"));
    REQUIRE(gb.horizon() == g.horizon());
    for (int k = 0; k < g.horizon(); ++k) {
        CHECK(test::max_abs(gb.stage[k].K1 - g.stage[k].K1) <= 1e-15);
        CHECK(test::max_abs(gb.stage[k].K2 - g.stage[k].K2) <= 1e-15);
        CHECK(gb.stage[k].active == g.stage[k].active);
    }
    CHECK(gb.S == g.S);
    CHECK(gb.mode == g.mode);
}

TEST_CASE("corrupted solution files are rejected") {
    Json doc = solution_to_json(solve_nominal(ScenarioSpec::small().problem()));
    Json wrong = doc;
    wrong["format"] = "something-else";
    CHECK(error_of([&] { solution_from_json(wrong); }).rfind("/format", 0) == 0);
    Json short_active = doc;
    short_active["active"].erase(0);
    CHECK(error_of([&] { solution_from_json(short_active); }).rfind("/active", 0) == 0);
    CHECK(error_of([&] { parse_json(doc.dump().substr(0, 200), "cut.json"); }).rfind("cut.json:", 0) == 0);
}

TEST_CASE("numbers print with round-trip precision") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 300.0}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("simulation CSV and JSON") {
    const ScenarioSpec s = ScenarioSpec::small();
    const SimResult r = run_scenario(s, ControllerKind::ENE);
    const std::string csv = sim_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,x0,x1,x2,x3,u0,w0,w1,w2,w3,c0,c1");
    int rows = 0;
    std::string last;
    while (std::getline(in, line)) {
        ++rows;
        last = line;
    }
    CHECK(rows == 36);
    CHECK(last.rfind("35,", 0) == 0);
    CHECK(last.find(",,") != std::string::npos);

    const Json j = sim_json(r, true);
    CHECK(j["x"].size() == 36);
    CHECK(j["controller"] == "ENE");
    CHECK_FALSE(sim_json(r, false).contains("x"));
}

TEST_CASE("comparison and sweep reports") {
    const Comparison c = compare_controllers(ScenarioSpec::small(), {ControllerKind::ENE, ControllerKind::NE}, 1);
    const std::string md = comparison_markdown(c);
    CHECK(md.find("| ENE |") != std::string::npos);
    CHECK(comparison_json(c)["rows"].size() == 2);
    SweepReport rep;
    rep.entries.push_back({PreviewRecursion::hold_constant(), true, "", 1.0, 0.5, 0, 0});
    rep.best = 0;
    CHECK(sweep_markdown(rep).find("w(k+1) = w(k)") != std::string::npos);
    CHECK(sweep_json(rep)["entries"].size() == 1);
}

TEST_CASE("file helpers") {
    const auto dir = std::filesystem::temp_directory_path() / "ene_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "a.txt").string();
    write_file(path, "hello");
    CHECK(read_file(path) == "hello");
    CHECK_THROWS_AS(read_file((dir / "missing.txt").string()), IoError);
    std::filesystem::remove_all(dir);
}
