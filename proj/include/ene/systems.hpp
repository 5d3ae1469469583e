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

#ifndef ENE_SYSTEMS_HPP
#define ENE_SYSTEMS_HPP

#include <cstdint>
#include <string>

#include "ene/model.hpp"
#include "ene/problem.hpp"

namespace ene {

struct PendulumParams {
    double m = 1.0;   // pendulum mass, kg
    double M = 5.0;   // cart mass, kg
    double L = 2.0;   // length, m
    double g = 9.81;  // gravity, m/s^2
    double Kd = 10.0; // cart damping, N s/m
    double Ts = 0.1;  // sample time, s
    double force_bound = 300.0;

    void validate() const;
};

/// [z_dot, z_ddot, theta_dot, theta_ddot] of the cart-pendulum with friction inputs w_z, w_theta.
Vec pendulum_continuous(const Vec& x, double F, double w_z, double w_theta, const PendulumParams& p);

enum class Discretization { Euler, Rk4 };

/// Nominal preview recursion w' = a_x x + a_w w (elementwise on the 4-vectors).
struct PreviewRecursion {
    double a_x = -0.008;
    double a_w = -0.1;

    static PreviewRecursion hold_constant() { return {0.0, 1.0}; }
    bool operator==(const PreviewRecursion&) const = default;
};

/**
 * Sampled pendulum with state [z, z_dot, theta, theta_dot], control F and
 * preview [0, w_z, 0, w_theta]. Dynamics derivatives come from finite
 * differences; the preview model is linear with exact derivatives.
 */
PlantModel pendulum_discrete(const PendulumParams& params, const PreviewRecursion& preview = {},
                             Discretization method = Discretization::Euler);

/// {F - bound <= 0, -F - bound <= 0}.
ConstraintSet pendulum_constraints(const PendulumParams& params);

/// phi = (y - r)^T diag(q_z, q_theta) (y - r) + r_F F^2, psi = terminal_scale * output term, y = [z, theta].
struct PendulumWeights {
    double q_z = 10.0;
    double q_theta = 100.0;
    double r_force = 1e-4;
    double terminal_scale = 1.0;
    double ref_z = 0.0;
    double ref_theta = 0.0;
};

CostSpec pendulum_cost(const PendulumWeights& weights);

struct ScenarioSpec {
    std::string name = "custom";
    int horizon = 35;
    Vec x0_nominal;  // default [0, 0, -pi, 0]
    Vec w0_nominal;  // default [0, 0.1, 0, 0.1]
    PreviewRecursion preview;
    Vec dx0;         // default zero
    PreviewGenerator generator;  // actual preview profile, broadcast to w_z and w_theta
    /// The actual preview follows the nominal preview model instead of the generator.
    bool actual_is_nominal = false;
    /// The plant clips the applied force to the bound; the violation log still sees the commanded force.
    bool saturate_input = true;
    PendulumWeights weights;
    PendulumParams params;
    Discretization method = Discretization::Euler;

    ScenarioSpec();
    static ScenarioSpec small();   // dx0 = 0.01, generator 0.004 / 0.004 / 0.002
    static ScenarioSpec large();   // dx0 = 0.2, generator 0.015 / 0.015 / 0.01
    static ScenarioSpec sweep();   // generator 0.008 / 0.008 / 0.004

    void validate() const;
    /// Nominal problem at (x0_nominal, w0_nominal).
    OcpProblem problem() const;
    PreviewSignal actual_preview() const;
};

/// Linear plant with linear preview model, quadratic cost and affine constraints.
struct LinearQuadraticData {
    Mat A, B, E;  // x' = A x + B u + E w
    Mat G, H;     // w' = G x + H w
    Mat Q, R, Qw; // phi = 1/2 (x'Qx + u'Ru + w'Qw w)
    Mat Qf, Qfw;  // psi = 1/2 (x'Qf x + w'Qfw w)
    Mat Dx, Du, Dw;  // D_x x + D_u u + D_w w - d <= 0
    Vec d;
    Vec x0, w0;
    int horizon = 4;
};

OcpProblem linear_quadratic_problem(const LinearQuadraticData& data);

/**
 * Random stable fixture (n <= 4, m <= 2) with spectral radii below 0.95, Q >= 0,
 * R > 0 and the input box rows u_0 <= d_0, -u_{1 mod m} <= d_1 (d = 1). With
 * `coupled` false the preview couplings E, G, H are zero.
 */
LinearQuadraticData lqr_preview_system(int n, int m, std::uint64_t seed, bool coupled = true, int horizon = 5);

}  // namespace ene

#endif  // ENE_SYSTEMS_HPP
