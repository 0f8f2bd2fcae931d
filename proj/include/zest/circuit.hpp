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

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "zest/kernels.hpp"
#include "zest/types.hpp"

namespace zest::circuit {

namespace detail {

inline void check_square_same(const cmatrix& a, const cmatrix& b, const char* who) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw shape_error(std::string(who) + ": matrices must be square and equally sized");
}

// R^{1/2} and R^{-1/2} of the symmetric part of Re{z}.  Loads need strictly
// positive resistance for the square roots to exist.
inline void resistance_roots(const cmatrix& z, rmatrix& half, rmatrix& inv_half,
                             const char* who) {
    rmatrix r = 0.5 * (z.real() + z.real().transpose());
    kernels::eig_result e = kernels::symmetric_eig(r);
    double floor = 1e-12 * std::max(1.0, e.values.cwiseAbs().maxCoeff());
    if (e.values.minCoeff() <= floor)
        throw singular_model_error(std::string(who) +
                                   ": load resistance matrix is not positive definite");
    rmatrix v = e.vectors.real();
    rvector s = e.values.cwiseSqrt();
    half = v * s.asDiagonal() * v.transpose();
    inv_half = v * s.cwiseInverse().asDiagonal() * v.transpose();
    half = 0.5 * (half + half.transpose());
    inv_half = 0.5 * (inv_half + inv_half.transpose());
}

inline Eigen::FullPivLU<cmatrix> checked_lu(const cmatrix& a, const char* who) {
    Eigen::FullPivLU<cmatrix> lu(a);
    if (!lu.isInvertible())
        throw singular_model_error(std::string(who) + ": matrix is singular");
    return lu;
}

}  // namespace detail

// F = R2^{1/2} (Z2 + Z_A)^{-1} (Z1 + Z_A) R1^{-1/2}.
inline cmatrix compute_f(const cmatrix& z_a, const cmatrix& z1, const cmatrix& z2) {
    detail::check_square_same(z_a, z1, "compute_f");
    detail::check_square_same(z_a, z2, "compute_f");
    if (!z_a.allFinite() || !z1.allFinite() || !z2.allFinite())
        throw invalid_input("compute_f: non-finite entries");

    rmatrix r1_half, r1_inv_half, r2_half, r2_inv_half;
    detail::resistance_roots(z1, r1_half, r1_inv_half, "compute_f");
    detail::resistance_roots(z2, r2_half, r2_inv_half, "compute_f");

    auto lu = detail::checked_lu(z2 + z_a, "compute_f: Z2 + Z_A");
    return r2_half * lu.solve(z1 + z_a) * r1_inv_half;
}

// Sigma_h = R1^{1/2} (Z_A + Z1)^{-1} Sigma_g (Z_A + Z1)^{-H} R1^{1/2},
// Hermitian-symmetrized on return.
inline cmatrix compute_sigma_h(const cmatrix& z_a, const cmatrix& z1, const cmatrix& sigma_g) {
    detail::check_square_same(z_a, z1, "compute_sigma_h");
    detail::check_square_same(z_a, sigma_g, "compute_sigma_h");
    if (kernels::max_abs(sigma_g - sigma_g.adjoint()) > 1e-10 * std::max(1.0, kernels::max_abs(sigma_g)))
        throw invalid_input("compute_sigma_h: Sigma_g must be Hermitian");

    rmatrix r1_half, r1_inv_half;
    detail::resistance_roots(z1, r1_half, r1_inv_half, "compute_sigma_h");

    auto lu = detail::checked_lu(z_a + z1, "compute_sigma_h: Z_A + Z1");
    cmatrix b = r1_half * lu.inverse();
    cmatrix s = b * sigma_g * b.adjoint();
    return 0.5 * (s + s.adjoint());
}

// Inverts the F mapping: G = R2^{-1/2} F R1^{1/2},
// Z_A = (Z1 - Z2 G)(G - I)^{-1}.  Refuses when cond(G - I) exceeds the
// threshold; Z_A is unobservable at G = I.
inline cmatrix recover_za(const cmatrix& f_hat, const cmatrix& z1, const cmatrix& z2,
                          double cond_threshold = 1e8) {
    detail::check_square_same(f_hat, z1, "recover_za");
    detail::check_square_same(f_hat, z2, "recover_za");
    if (!f_hat.allFinite())
        throw invalid_input("recover_za: non-finite entries");

    rmatrix r1_half, r1_inv_half, r2_half, r2_inv_half;
    detail::resistance_roots(z1, r1_half, r1_inv_half, "recover_za");
    detail::resistance_roots(z2, r2_half, r2_inv_half, "recover_za");

    cmatrix g = r2_inv_half * f_hat * r1_half;
    cmatrix g_minus_i = g - cmatrix::Identity(g.rows(), g.cols());

    // Conditioning is measured against the unit scale of I, not against
    // sigma_max(G - I): at G = I the difference is pure roundoff whose own
    // singular-value ratio can look healthy.
    Eigen::JacobiSVD<cmatrix> svd(g_minus_i);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double smax = svd.singularValues()(0);
    double cond = smin > 0.0 ? (1.0 + smax) / smin : std::numeric_limits<double>::infinity();
    if (!(cond < cond_threshold))
        throw near_singular_error("recover_za: G - I is too ill conditioned to invert", cond);

    // (Z1 - Z2 G)(G - I)^{-1} solved through the transposed system.
    cmatrix rhs = (z1 - z2 * g).transpose();
    Eigen::FullPivLU<cmatrix> lu(g_minus_i.transpose());
    return lu.solve(rhs).transpose();
}

// Nearest symmetric matrix in Frobenius norm; plain transpose, not
// conjugate transpose.
inline cmatrix symmetrize_za(const cmatrix& z_a_hat) {
    if (z_a_hat.rows() != z_a_hat.cols())
        throw shape_error("symmetrize_za: matrix must be square");
    return 0.5 * (z_a_hat + z_a_hat.transpose());
}

struct excess_power_result {
    double xp_db = 0.0;
    // Samples dropped because (Z_A_est* + Z_A) was singular.
    index excluded = 0;
};

namespace detail {

// Received power under the conjugate-matched load for the estimate s:
// Tr[(s* + Z_A)^{-H} Re{s} (s* + Z_A)^{-1} Sigma_g].  Returns false when
// the matched-load sum is singular.
inline bool matched_power(const cmatrix& s, const cmatrix& z_a, const cmatrix& sigma_g,
                          double& power) {
    cmatrix m = s.conjugate() + z_a;
    Eigen::FullPivLU<cmatrix> lu(m);
    if (!lu.isInvertible())
        return false;
    cmatrix m_inv = lu.inverse();
    cmatrix r_tilde = 0.5 * (s.real() + s.real().transpose()).cast<cx>();
    power = (m_inv.adjoint() * r_tilde * m_inv * sigma_g).trace().real();
    return true;
}

}  // namespace detail

// Excess transmit power in dB of the matched loads built from the estimates
// relative to the true conjugate match.  The numerator Tr[(4 R_A)^{-1}
// Sigma_g] equals the matched power at the true Z_A, and evaluating it
// through the same routine makes the perfect-match case exactly 0 dB.
inline excess_power_result excess_power(const std::vector<cmatrix>& samples, const cmatrix& z_a,
                                        const cmatrix& sigma_g) {
    if (samples.empty())
        throw invalid_input("excess_power: sample list is empty");
    detail::check_square_same(z_a, sigma_g, "excess_power");

    double ideal = 0.0;
    if (!detail::matched_power(z_a, z_a, sigma_g, ideal))
        throw singular_model_error("excess_power: true impedance gives a singular match");

    excess_power_result out;
    double sum = 0.0;
    index used = 0;
    for (const cmatrix& s : samples) {
        if (s.rows() != z_a.rows() || s.cols() != z_a.cols())
            throw shape_error("excess_power: sample shape mismatch");
        double p = 0.0;
        if (detail::matched_power(s, z_a, sigma_g, p)) {
            sum += p;
            ++used;
        } else {
            ++out.excluded;
        }
    }
    if (used == 0)
        throw invalid_input("excess_power: every sample was singular");
    out.xp_db = 10.0 * std::log10(ideal / (sum / double(used)));
    return out;
}

}  // namespace zest::circuit
