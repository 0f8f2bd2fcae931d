// zest: antenna impedance estimation for MIMO receivers
// Copyright (C) 2026 the zest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace zest {

using cx = std::complex<double>;
using cmatrix = Eigen::MatrixXcd;
using cvector = Eigen::VectorXcd;
using rmatrix = Eigen::MatrixXd;
using rvector = Eigen::VectorXd;
using index = Eigen::Index;

// Exact by definition since the 2019 SI revision.
inline constexpr double speed_of_light_mps = 299792458.0;

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An argument violates a documented precondition (non-finite entries,
// out-of-range scalar, empty input).
struct invalid_input : error {
    using error::error;
};

// Matrix dimensions are inconsistent with each other or with the call.
struct shape_error : invalid_input {
    using invalid_input::invalid_input;
};

// A matrix that must be positive semidefinite has an eigenvalue more
// negative than the clip tolerance allows.
struct not_psd_error : error {
    using error::error;
};

// A model matrix is singular where the formulas require an inverse.
struct singular_model_error : error {
    using error::error;
};

// An inversion was refused because the condition number exceeds the
// caller's threshold.
struct near_singular_error : error {
    near_singular_error(const std::string& what, double cond)
        : error(what), condition_number(cond) {}
    double condition_number;
};

// The subspace estimator produced a numerically meaningless result.
// Carries the condition number of the eigenvector block it refused to
// invert and the spectral gap at the subspace boundary.
struct degenerate_estimate_error : error {
    degenerate_estimate_error(const std::string& what, double cond, double gap)
        : error(what), condition_number(cond), spectral_gap(gap) {}
    double condition_number;
    double spectral_gap;
};

// A closed-form expression was evaluated outside the parameter regime in
// which it is valid.
struct unsupported_regime_error : error {
    using error::error;
};

// Configuration file or experiment description violates the schema.
struct config_error : error {
    using error::error;
};

}  // namespace zest
