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

#ifndef ENE_ERRORS_HPP
#define ENE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ene {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

class NotSymmetric : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// More active constraints at one step than control inputs.
class TooManyActive : public Error {
public:
    TooManyActive(int step, int count, int m)
        : Error("step " + std::to_string(step) + ": " + std::to_string(count) +
                " active constraints exceed control dimension " + std::to_string(m)),
          step(step) {}
    int step;
};

/// C_u^a C_u^a^T is singular, so the multipliers are not unique.
class RankDeficientActiveSet : public Error {
public:
    explicit RankDeficientActiveSet(int step)
        : Error("step " + std::to_string(step) + ": active constraint Jacobian C_u is rank deficient"),
          step(step) {}
    int step;
};

class ZuuNotPositive : public Error {
public:
    explicit ZuuNotPositive(int step)
        : Error("step " + std::to_string(step) +
                ": Z_uu is not positive definite (consider a Levenberg shift of H_uu)"),
          step(step) {}
    int step;
};

class SingularKkt : public Error {
public:
    explicit SingularKkt(int step)
        : Error("step " + std::to_string(step) + ": control KKT block is singular"), step(step) {}
    int step;
};

}  // namespace ene

#endif  // ENE_ERRORS_HPP
