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

#ifndef ENE_IO_HPP
#define ENE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ene/ene.hpp"
#include "ene/errors.hpp"
#include "ene/ocp.hpp"
#include "ene/sim.hpp"
#include "ene/systems.hpp"

namespace ene::io {

using Json = nlohmann::json;

/// Configuration, parse or file error. `where` is a JSON pointer or a file position.
class IoError : public Error {
public:
    IoError(const std::string& where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where(where) {}
    std::string where;
};

struct RunConfig {
    ScenarioSpec scenario = ScenarioSpec::small();
    std::vector<ControllerKind> controllers = all_controllers();
    std::string out_dir = "ene_out";
    std::uint64_t seed = 1;      // generator seed of the actual preview
    std::string format = "csv";  // per-run trajectory format: csv or json
    bool preview_sweep = false;
    int threads = 0;

    /// Copies `seed` into the scenario and validates everything.
    void finalize();
};

/// Defaults for "small", "large", "sweep" or "custom" (zero perturbation).
RunConfig preset_config(const std::string& scenario);

/**
 * Overlays a JSON document on `base`. Every key is optional; unknown keys,
 * wrong types and wrong vector lengths throw IoError naming the offending path.
 */
RunConfig parse_config(const Json& doc, RunConfig base);
RunConfig parse_config_text(const std::string& text, const RunConfig& base);
Json config_to_json(const RunConfig& config);

/// Comma-separated, case-insensitive; "all" selects the six controllers.
std::vector<ControllerKind> parse_controller_list(const std::string& list);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);
/// Parses JSON text; syntax errors carry the byte offset.
Json parse_json(const std::string& text, const std::string& source);

Json solution_to_json(const NominalSolution& solution);
NominalSolution solution_from_json(const Json& doc);

Json gains_to_json(const GainSchedule& gains);
GainSchedule gains_from_json(const Json& doc);

/// 17 significant digits, enough to read back the same double.
std::string format_double(double v);

/**
 * One row per step k = 0..N with columns
 * k, x0..x{n-1}, u0..u{m-1}, w0..w{nw-1}, c0..c{l-1}.
 * Inputs and constraint values are empty on the terminal row.
 */
std::string sim_csv(const SimResult& result);
Json sim_json(const SimResult& result, bool with_trajectories);

std::string comparison_markdown(const Comparison& cmp);
Json comparison_json(const Comparison& cmp);

std::string sweep_markdown(const SweepReport& report);
Json sweep_json(const SweepReport& report);

}  // namespace ene::io

#endif  // ENE_IO_HPP
