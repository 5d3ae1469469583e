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

#ifndef ENE_TEST_HELPERS_HPP
#define ENE_TEST_HELPERS_HPP

#include <cmath>
#include <vector>

#include "ene/problem.hpp"
#include "ene/systems.hpp"

namespace ene::test {

inline double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline double max_gap(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    double worst = 0.0;
    for (size_t k = 0; k < a.size() && k < b.size(); ++k) worst = std::max(worst, max_abs(a[k] - b[k]));
    return worst;
}

inline Mat mat(int rows, int cols, std::initializer_list<double> values) {
    Mat a(rows, cols);
    auto it = values.begin();
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = *it++;
    return a;
}

inline Vec vec(std::initializer_list<double> values) {
    Vec v(static_cast<int>(values.size()));
    int i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

/// Unconstrained LQR with a single preview channel that touches nothing.
inline LinearQuadraticData plain_lqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& Qf, int N,
                                     const Vec& x0) {
    const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.cols());
    LinearQuadraticData d;
    d.A = A;
    d.B = B;
    d.E = Mat::Zero(n, 1);
    d.G = Mat::Zero(1, n);
    d.H = Mat::Zero(1, 1);
    d.Q = Q;
    d.R = R;
    d.Qw = Mat::Zero(1, 1);
    d.Qf = Qf;
    d.Qfw = Mat::Zero(1, 1);
    d.Dx = Mat::Zero(0, n);
    d.Du = Mat::Zero(0, m);
    d.Dw = Mat::Zero(0, 1);
    d.d = Vec::Zero(0);
    d.x0 = x0;
    d.w0 = Vec::Zero(1);
    d.horizon = N;
    return d;
}

/// Double integrator with unit weights.
inline LinearQuadraticData double_integrator(int N = 8) {
    return plain_lqr(mat(2, 2, {1, 0.1, 0, 1}), mat(2, 1, {0.005, 0.1}), Mat::Identity(2, 2),
                     Mat::Identity(1, 1) * 0.1, Mat::Identity(2, 2) * 5.0, N, vec({1.0, -0.5}));
}

}  // namespace ene::test

#endif  // ENE_TEST_HELPERS_HPP
