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
#include <string>
#include <vector>

#include "zest/kernels.hpp"
#include "zest/rng.hpp"
#include "zest/types.hpp"

namespace zest::metrics {

// Post-training SNR once a fraction N/T of every block is spent on pilots:
// gamma_eff = gamma / (1 + (1 + 1/gamma) N / T).  N = 0 means no training
// overhead at all, including at gamma = 0 where the formula would be 0/0.
inline double effective_snr(double gamma, index n, index t) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw invalid_input("effective_snr: gamma must be finite and >= 0");
    if (n < 0 || t < 1)
        throw invalid_input("effective_snr: need n >= 0 and t >= 1");
    if (n == 0)
        return gamma;
    return gamma / (1.0 + (1.0 + 1.0 / gamma) * double(n) / double(t));
}

// log2 E[det(I + (gamma_eff / N) Sigma_tilde H H^H)] with H an M x N
// standard complex Gaussian.  The expectation is a polynomial in gamma_eff
// whose k-th coefficient is e_k(lambda(Sigma_tilde)) N (N-1) ... (N-k+1),
// so this evaluates exactly.  Jensen makes it an upper bound on ergodic
// capacity; it requires M <= N.
inline double capacity_upper(const cmatrix& sigma_tilde, double gamma_eff, index n) {
    if (sigma_tilde.rows() != sigma_tilde.cols())
        throw shape_error("capacity_upper: Sigma_tilde must be square");
    const index m = sigma_tilde.rows();
    if (m < 1 || n < 1)
        throw invalid_input("capacity_upper: need at least one antenna on each side");
    if (m > n)
        throw unsupported_regime_error("capacity_upper: requires M <= N");
    if (!(gamma_eff >= 0.0) || !std::isfinite(gamma_eff))
        throw invalid_input("capacity_upper: gamma_eff must be finite and >= 0");

    kernels::eig_result e = kernels::hermitian_eig(sigma_tilde);

    // elementary symmetric polynomials of the eigenvalues
    std::vector<double> esp(std::size_t(m) + 1, 0.0);
    esp[0] = 1.0;
    for (index i = 0; i < m; ++i)
        for (index k = std::min(i + 1, m); k >= 1; --k)
            esp[std::size_t(k)] += e.values(i) * esp[std::size_t(k) - 1];

    double sum = 1.0;
    double factor = 1.0;
    for (index k = 1; k <= m; ++k) {
        factor *= gamma_eff / double(n) * double(n - k + 1);
        sum += factor * esp[std::size_t(k)];
    }
    return std::log2(sum);
}

struct mc_estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Monte Carlo ergodic capacity E[log2 det(I + (gamma_eff / N) Sigma_tilde
// H H^H)].  Sigma_tilde is the spatial correlation normalized so that
// Tr(Sigma_tilde) / M = 1; anything off by more than 1e-8 is rejected
// because the result would silently absorb a power rescaling.
inline mc_estimate capacity_lower_mc(const cmatrix& sigma_tilde, double gamma_eff, index n,
                                     index trials, rng::stream& g) {
    if (sigma_tilde.rows() != sigma_tilde.cols())
        throw shape_error("capacity_lower_mc: Sigma_tilde must be square");
    const index m = sigma_tilde.rows();
    if (m < 1 || n < 1)
        throw invalid_input("capacity_lower_mc: need at least one antenna on each side");
    if (trials < 1)
        throw invalid_input("capacity_lower_mc: need at least one trial");
    if (!(gamma_eff >= 0.0) || !std::isfinite(gamma_eff))
        throw invalid_input("capacity_lower_mc: gamma_eff must be finite and >= 0");
    if (std::abs(sigma_tilde.trace().real() / double(m) - 1.0) > 1e-8)
        throw invalid_input("capacity_lower_mc: Sigma_tilde must satisfy Tr/M = 1");

    cmatrix root = kernels::sqrtm_psd(sigma_tilde);
    const double scale = gamma_eff / double(n);
    const double inv_log2 = 1.0 / std::log(2.0);

    double sum = 0.0;
    double sum_sq = 0.0;
    for (index i = 0; i < trials; ++i) {
        cmatrix hw = root * g.cnormal_matrix(m, n);
        cmatrix a = cmatrix::Identity(m, m) + scale * (hw * hw.adjoint());
        Eigen::LLT<cmatrix> llt(a);
        double c = 0.0;
        for (index k = 0; k < m; ++k)
            c += 2.0 * std::log(llt.matrixLLT()(k, k).real()) * inv_log2;
        sum += c;
        sum_sq += c * c;
    }
    mc_estimate out;
    out.mean = sum / double(trials);
    if (trials > 1) {
        double var = (sum_sq - sum * sum / double(trials)) / double(trials - 1);
        out.std_error = std::sqrt(std::max(var, 0.0) / double(trials));
    }
    return out;
}

// sqrt(mean ||F_hat - F||_F^2) / ||F||_F over a batch of estimates.
inline double relative_rmse(const std::vector<cmatrix>& estimates, const cmatrix& truth) {
    if (estimates.empty())
        throw invalid_input("relative_rmse: need at least one estimate");
    double t_norm = truth.norm();
    if (!(t_norm > 0.0))
        throw invalid_input("relative_rmse: reference must be nonzero");
    double sum = 0.0;
    for (const cmatrix& e : estimates) {
        if (e.rows() != truth.rows() || e.cols() != truth.cols())
            throw shape_error("relative_rmse: estimate shape mismatch");
        sum += (e - truth).squaredNorm();
    }
    return std::sqrt(sum / double(estimates.size())) / t_norm;
}

}  // namespace zest::metrics
