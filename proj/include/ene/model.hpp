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

#ifndef ENE_MODEL_HPP
#define ENE_MODEL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ene/numerics.hpp"

namespace ene {

using StageMap = std::function<Vec(const Vec& x, const Vec& u, const Vec& w)>;
using PreviewMap = std::function<Vec(const Vec& x, const Vec& w)>;

struct StageJacobians {
    Mat x, u, w;
};

struct PreviewJacobians {
    Mat x, w;
};

/**
 * @brief Discrete plant x' = f(x, u, w) with nominal preview model w' = g(x, w).
 *
 * Derivative suppliers are optional; an empty supplier is replaced by central
 * differences with `fd_step`. Second derivatives only ever enter through
 * weighted contractions: `f_curvature(x, u, w, weight)` returns the Hessian of
 * weight^T f over the stacked vector [x; u; w], and `g_curvature(x, w, weight)`
 * the Hessian of weight^T g over [x; w].
 */
struct PlantModel {
    int n = 0;
    int m = 0;
    int nw = 0;
    StageMap f;
    PreviewMap g;
    std::function<StageJacobians(const Vec&, const Vec&, const Vec&)> f_jac;
    std::function<PreviewJacobians(const Vec&, const Vec&)> g_jac;
    std::function<Mat(const Vec&, const Vec&, const Vec&, const Vec&)> f_curvature;
    std::function<Mat(const Vec&, const Vec&, const Vec&)> g_curvature;
    bool f_affine = false;  // all second derivatives of f vanish
    bool g_affine = false;
    bool origin_equilibrium = false;  // f(0, 0, 0) = 0
    double fd_step = tol::fd_step;
};

/// Inequality constraints C(x, u, w) <= 0.
struct ConstraintSet {
    int l = 0;
    StageMap c;
    std::function<StageJacobians(const Vec&, const Vec&, const Vec&)> c_jac;
    std::function<Mat(const Vec&, const Vec&, const Vec&, const Vec&)> c_curvature;
    bool affine = false;
    double activation_tol = 1e-8;
    double fd_step = tol::fd_step;
};

struct StageGradient {
    Vec x, u, w;
};

struct TerminalGradient {
    Vec x, w;
};

/// Only the xx and ww blocks of the terminal Hessian enter the second variation.
struct TerminalHessian {
    Mat xx, ww;
};

struct CostSpec {
    std::function<double(const Vec&, const Vec&, const Vec&)> stage;
    std::function<double(const Vec&, const Vec&)> terminal;
    std::function<StageGradient(const Vec&, const Vec&, const Vec&)> stage_grad;
    /// Full Hessian over [x; u; w].
    std::function<Mat(const Vec&, const Vec&, const Vec&)> stage_hess;
    std::function<TerminalGradient(const Vec&, const Vec&)> terminal_grad;
    std::function<TerminalHessian(const Vec&, const Vec&)> terminal_hess;
};

// Derivative evaluation with finite-difference fallback.
StageJacobians dynamics_jacobians(const PlantModel& model, const Vec& x, const Vec& u, const Vec& w);
PreviewJacobians preview_jacobians(const PlantModel& model, const Vec& x, const Vec& w);
Mat dynamics_curvature(const PlantModel& model, const Vec& x, const Vec& u, const Vec& w, const Vec& weight);
Mat preview_curvature(const PlantModel& model, const Vec& x, const Vec& w, const Vec& weight);

StageJacobians constraint_jacobians(const ConstraintSet& cs, const Vec& x, const Vec& u, const Vec& w);
Mat constraint_curvature(const ConstraintSet& cs, const Vec& x, const Vec& u, const Vec& w, const Vec& weight);

StageGradient stage_gradient(const CostSpec& cost, const Vec& x, const Vec& u, const Vec& w);
Mat stage_hessian(const CostSpec& cost, const Vec& x, const Vec& u, const Vec& w);
TerminalGradient terminal_gradient(const CostSpec& cost, const Vec& x, const Vec& w);
TerminalHessian terminal_hessian(const CostSpec& cost, const Vec& x, const Vec& w);

/**
 * Indices i with C_i(x, u, w) >= -activation_tol, ascending.
 * Throws TooManyActive when more than `m` constraints are active.
 */
std::vector<int> active_indices(const ConstraintSet& cs, const Vec& x, const Vec& u, const Vec& w, int m,
                                int step = -1);

struct ProbePoint {
    Vec x, u, w;
};

struct SupplierCheck {
    std::string name;
    double max_rel_error = 0.0;
};

struct DerivativeReport {
    std::vector<SupplierCheck> checks;
    double tolerance = 1e-4;
    bool passed() const;
    double worst() const;
};

/// Compares every derivative supplier with central differences at the probe points.
DerivativeReport verify_derivatives(const PlantModel& model, const ConstraintSet& cs, const CostSpec& cost,
                                    const std::vector<ProbePoint>& probes);

/// 64-bit linear congruential generator with Knuth's MMIX constants.
class Lcg64 {
public:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

    explicit Lcg64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        state_ = state_ * kMultiplier + kIncrement;
        return state_;
    }
    /// Top 53 bits scaled to [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Scalar profile w(k) = a sin(k) + b rand(k) + c, with rand(k) the (k+1)-th Lcg64 draw.
struct PreviewGenerator {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    std::uint64_t seed = 1;

    std::vector<double> samples(int count) const;
};

/**
 * Where the preview sequence comes from during a rollout.
 *
 * NominalModel propagates w(k+1) = g(x(k), w(k)); HoldConstant uses w(k+1) = w(k);
 * Generator writes the scalar profile into `channels` of an nw-vector (other slots zero).
 */
struct PreviewSignal {
    enum class Source { NominalModel, HoldConstant, Generator };

    Source source = Source::NominalModel;
    PreviewGenerator generator;
    std::vector<int> channels;
    int nw = 0;

    static PreviewSignal nominal_model() { return {}; }
    static PreviewSignal hold_constant() {
        PreviewSignal s;
        s.source = Source::HoldConstant;
        return s;
    }
    static PreviewSignal from_generator(const PreviewGenerator& gen, std::vector<int> channels, int nw) {
        PreviewSignal s;
        s.source = Source::Generator;
        s.generator = gen;
        s.channels = std::move(channels);
        s.nw = nw;
        return s;
    }

    /// Generator preview vectors for k = 0 .. count-1.
    std::vector<Vec> generate(int count) const;
};

/// Returns a copy of the model whose nominal preview model is w' = w.
PlantModel with_hold_constant_preview(PlantModel model);

}  // namespace ene

#endif  // ENE_MODEL_HPP
