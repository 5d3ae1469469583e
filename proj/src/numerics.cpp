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

#include "ene/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ene {

namespace {

// Smallest eigenvalue magnitude of a symmetric 2x2 block.
double min_abs_eigenvalue(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    return std::min(std::abs(mean + rad), std::abs(mean - rad));
}

}  // namespace

LdltFactorization::LdltFactorization(const Mat& input) {
    if (input.rows() != input.cols()) {
        throw DimensionMismatch("LDL^T requires a square matrix");
    }
    const int n = static_cast<int>(input.rows());
    Mat a = input.triangularView<Eigen::Lower>();
    a.triangularView<Eigen::StrictlyUpper>() = input.triangularView<Eigen::StrictlyLower>().transpose();
    require_finite(a, "LDL^T input");

    const double anorm = n > 0 ? a.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
    const double floor = tol::pivot_floor * anorm;
    const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;

    l_ = Mat::Identity(n, n);
    d_ = Mat::Zero(n, n);
    perm_.resize(n);
    block_.assign(n, 0);
    for (int i = 0; i < n; ++i) perm_[i] = i;

    auto swap_symmetric = [&](int p, int q, int done) {
        if (p == q) return;
        a.row(p).swap(a.row(q));
        a.col(p).swap(a.col(q));
        if (done > 0) {
            Vec tmp = l_.block(p, 0, 1, done).transpose();
            l_.block(p, 0, 1, done) = l_.block(q, 0, 1, done);
            l_.block(q, 0, 1, done) = tmp.transpose();
        }
        std::swap(perm_[p], perm_[q]);
    };

    int k = 0;
    while (k < n) {
        double colmax = 0.0;
        int r = k;
        for (int i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > colmax) {
                colmax = std::abs(a(i, k));
                r = i;
            }
        }
        const double akk = std::abs(a(k, k));
        if (std::max(akk, colmax) <= floor) {
            throw SingularMatrix("LDL^T: pivot below floor at column " + std::to_string(k));
        }

        int size = 1;
        int pivot = k;
        if (akk < alpha * colmax) {
            double rowmax = 0.0;
            for (int j = k; j < n; ++j) {
                if (j != r) rowmax = std::max(rowmax, std::abs(a(r, j)));
            }
            if (akk * rowmax >= alpha * colmax * colmax) {
                pivot = k;
            } else if (std::abs(a(r, r)) >= alpha * rowmax) {
                pivot = r;
            } else {
                pivot = r;
                size = 2;
            }
        }

        const int target = size == 1 ? k : k + 1;
        swap_symmetric(target, pivot, k);

        if (size == 1) {
            const double d = a(k, k);
            if (std::abs(d) <= floor) {
                throw SingularMatrix("LDL^T: pivot below floor at column " + std::to_string(k));
            }
            d_(k, k) = d;
            const int rest = n - k - 1;
            if (rest > 0) {
                l_.block(k + 1, k, rest, 1) = a.block(k + 1, k, rest, 1) / d;
                a.block(k + 1, k + 1, rest, rest).noalias() -=
                    d * l_.block(k + 1, k, rest, 1) * l_.block(k + 1, k, rest, 1).transpose();
            }
            block_[k] = 1;
            k += 1;
        } else {
            const Eigen::Matrix2d e = a.block<2, 2>(k, k);
            if (min_abs_eigenvalue(e(0, 0), e(1, 0), e(1, 1)) <= floor) {
                throw SingularMatrix("LDL^T: 2x2 pivot below floor at column " + std::to_string(k));
            }
            d_.block<2, 2>(k, k) = e;
            const int rest = n - k - 2;
            if (rest > 0) {
                const Eigen::Matrix2d einv = e.inverse();
                l_.block(k + 2, k, rest, 2) = a.block(k + 2, k, rest, 2) * einv;
                a.block(k + 2, k + 2, rest, rest).noalias() -=
                    l_.block(k + 2, k, rest, 2) * e * l_.block(k + 2, k, rest, 2).transpose();
            }
            block_[k] = 2;
            k += 2;
        }
    }
}

Mat LdltFactorization::solve(const Mat& b) const {
    const int n = dim();
    if (b.rows() != n) throw DimensionMismatch("LDL^T solve: right-hand side row count mismatch");
    Mat y(n, b.cols());
    for (int i = 0; i < n; ++i) y.row(i) = b.row(perm_[i]);
    l_.triangularView<Eigen::UnitLower>().solveInPlace(y);
    for (int k = 0; k < n;) {
        if (block_[k] == 1) {
            y.row(k) /= d_(k, k);
            k += 1;
        } else {
            const Eigen::Matrix2d einv = d_.block<2, 2>(k, k).inverse();
            y.middleRows(k, 2) = (einv * y.middleRows(k, 2)).eval();
            k += 2;
        }
    }
    l_.transpose().triangularView<Eigen::UnitUpper>().solveInPlace(y);
    Mat x(n, b.cols());
    for (int i = 0; i < n; ++i) x.row(perm_[i]) = y.row(i);
    return x;
}

int LdltFactorization::negative_eigenvalues() const {
    int count = 0;
    for (int k = 0; k < dim();) {
        if (block_[k] == 1) {
            count += d_(k, k) < 0.0 ? 1 : 0;
            k += 1;
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(d_.block<2, 2>(k, k).eval());
            count += static_cast<int>((eig.eigenvalues().array() < 0.0).count());
            k += 2;
        }
    }
    return count;
}

Mat solve_symmetric_indefinite(const Mat& a, const Mat& b) {
    if (a.rows() != a.cols() || b.rows() != a.rows()) {
        throw DimensionMismatch("solve_symmetric_indefinite: shape mismatch");
    }
    const LdltFactorization ldlt(a);
    Mat x = ldlt.solve(b);
    const Mat residual = b - a.selfadjointView<Eigen::Lower>() * x;
    x += ldlt.solve(residual);
    return x;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& func, const Vec& at, double step) {
    if (!(step > 0.0)) throw Error("fd_jacobian: step must be positive");
    const Vec f0 = func(at);
    require_finite(f0, "fd_jacobian evaluation");
    Mat jac(f0.size(), at.size());
    Vec probe = at;
    for (Eigen::Index j = 0; j < at.size(); ++j) {
        probe(j) = at(j) + step;
        const Vec plus = func(probe);
        probe(j) = at(j) - step;
        const Vec minus = func(probe);
        probe(j) = at(j);
        require_finite(plus, "fd_jacobian evaluation");
        require_finite(minus, "fd_jacobian evaluation");
        jac.col(j) = (plus - minus) / (2.0 * step);
    }
    return jac;
}

Vec fd_gradient(const std::function<double(const Vec&)>& func, const Vec& at, double step) {
    Vec grad(at.size());
    Vec probe = at;
    for (Eigen::Index j = 0; j < at.size(); ++j) {
        probe(j) = at(j) + step;
        const double plus = func(probe);
        probe(j) = at(j) - step;
        const double minus = func(probe);
        probe(j) = at(j);
        grad(j) = (plus - minus) / (2.0 * step);
    }
    require_finite(grad, "fd_gradient evaluation");
    return grad;
}

Mat fd_hessian(const std::function<double(const Vec&)>& func, const Vec& at, double step) {
    const Eigen::Index n = at.size();
    Mat hess(n, n);
    const double f0 = func(at);
    Vec probe = at;
    const double h2 = step * step;
    for (Eigen::Index i = 0; i < n; ++i) {
        probe(i) = at(i) + step;
        const double fp = func(probe);
        probe(i) = at(i) - step;
        const double fm = func(probe);
        probe(i) = at(i);
        hess(i, i) = (fp - 2.0 * f0 + fm) / h2;
        for (Eigen::Index j = 0; j < i; ++j) {
            probe(i) = at(i) + step;
            probe(j) = at(j) + step;
            const double fpp = func(probe);
            probe(j) = at(j) - step;
            const double fpm = func(probe);
            probe(i) = at(i) - step;
            const double fmm = func(probe);
            probe(j) = at(j) + step;
            const double fmp = func(probe);
            probe(i) = at(i);
            probe(j) = at(j);
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h2);
        }
    }
    require_finite(hess, "fd_hessian evaluation");
    return hess;
}

bool is_positive_definite(const Mat& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("is_positive_definite: matrix not square");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol::sym_tol) {
        throw NotSymmetric("is_positive_definite: matrix not symmetric");
    }
    const Eigen::Index n = a.rows();
    Mat l = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > tol::pd_pivot)) return false;
        l(j, j) = std::sqrt(pivot);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
    }
    return true;
}

bool all_finite(const Mat& a) { return a.allFinite(); }

void require_finite(const Mat& a, const char* what) {
    if (!a.allFinite()) throw NonFinite(std::string(what) + " produced a non-finite value");
}

Mat select_rows(const Mat& a, const std::vector<int>& rows) {
    Mat out(static_cast<Eigen::Index>(rows.size()), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = a.row(rows[i]);
    return out;
}

Vec select_entries(const Vec& v, const std::vector<int>& rows) {
    Vec out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

}  // namespace ene
