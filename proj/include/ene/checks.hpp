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

#ifndef ENE_CHECKS_HPP
#define ENE_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ene/numerics.hpp"
#include "ene/ocp.hpp"
#include "ene/systems.hpp"

namespace ene {

/// Seeded linear-quadratic problem with its optimal nominal and a perturbation.
struct OracleFixture {
    std::uint64_t seed = 0;
    OcpProblem problem;
    NominalSolution nominal;
    Vec dx0, dw0;
    int active_steps = 0;
};

/// n in 2..4, m in 1..2, N in 3..6, all derived from `seed`.
OracleFixture oracle_fixture(std::uint64_t seed, bool coupled = true);

/// Largest componentwise gap between the gain recursion and the stacked QP (dx, du, dw, dmu).
double oracle_mismatch(const OracleFixture& fixture);

/// Random points with x, u, w drawn uniformly from the given half-widths around centers.
std::vector<ProbePoint> probe_points(const Vec& x_center, const Vec& x_span, const Vec& u_center, const Vec& u_span,
                                     const Vec& w_center, const Vec& w_span, int count, std::uint64_t seed);

std::vector<ProbePoint> pendulum_probes(int count, std::uint64_t seed);

/**
 * Worst relative gap between the Hamiltonian Hessian blocks and central
 * differences of the Hamiltonian gradient at `probes` steps of the trajectory.
 */
double hamiltonian_hessian_mismatch(const OcpProblem& problem, const Trajectory& traj,
                                    const CostateTrajectory& costates, const std::vector<int>& steps);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct CheckOptions {
    double fd_step = tol::fd_step;  // finite-difference step of the pendulum dynamics
    int fixtures = 10;
    ScenarioSpec scenario = ScenarioSpec::small();
};

/// Derivative checks, oracle equivalence and gain symmetry.
std::vector<CheckResult> run_checks(const CheckOptions& options = {});

}  // namespace ene

#endif  // ENE_CHECKS_HPP
