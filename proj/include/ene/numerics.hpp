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

#ifndef ENE_NUMERICS_HPP
#define ENE_NUMERICS_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ene/errors.hpp"

namespace ene {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Numerical tolerances shared by every module.
namespace tol {
inline constexpr double rtol_solve = 1e-10;
inline constexpr double pivot_floor = 1e-12;
inline constexpr double sym_tol = 1e-9;
inline constexpr double fd_step = 1e-5;
inline constexpr double fd_hess_step = 1e-4;
inline constexpr double pd_pivot = 1e-10;
}  // namespace tol

/**
 * @brief Dense LDL^T factorization with Bunch-Kaufman pivoting.
 *
 * Factors a symmetric (possibly indefinite) matrix as P A P^T = L D L^T where
 * L is unit lower triangular and D is block diagonal with 1x1 and 2x2 blocks.
 * Only the lower triangle of the input is read.
 */
class LdltFactorization {
public:
    /// Throws SingularMatrix when a pivot falls below pivot_floor * ||A||_inf.
    explicit LdltFactorization(const Mat& a);

    Mat solve(const Mat& b) const;
    int dim() const { return static_cast<int>(perm_.size()); }
    /// Number of negative eigenvalues of D (Sylvester inertia).
    int negative_eigenvalues() const;

private:
    Mat l_;
    Mat d_;                   // block diagonal, stored dense
    std::vector<int> perm_;   // (P A P^T)(i, j) = A(perm_[i], perm_[j])
    std::vector<int> block_;  // 1 or 2 at the leading index of each pivot block, 0 otherwise
};

/// Solves A X = B for symmetric indefinite A with one step of iterative refinement.
Mat solve_symmetric_indefinite(const Mat& a, const Mat& b);

/// Central-difference Jacobian of func at the given point.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& func, const Vec& at, double step = tol::fd_step);

/// Central-difference gradient of a scalar function.
Vec fd_gradient(const std::function<double(const Vec&)>& func, const Vec& at, double step = tol::fd_step);

/// Second-difference Hessian of a scalar function (symmetric by construction).
Mat fd_hessian(const std::function<double(const Vec&)>& func, const Vec& at,
               double step = tol::fd_hess_step);

/// True iff every Cholesky pivot exceeds pd_pivot. Throws NotSymmetric.
bool is_positive_definite(const Mat& a);

bool all_finite(const Mat& a);
void require_finite(const Mat& a, const char* what);

inline Mat symmetrized(const Mat& a) { return 0.5 * (a + a.transpose()); }

/// Rows of `a` selected by `rows`, in order.
Mat select_rows(const Mat& a, const std::vector<int>& rows);
Vec select_entries(const Vec& v, const std::vector<int>& rows);

}  // namespace ene

#endif  // ENE_NUMERICS_HPP
