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

#include "zest/kernels.hpp"
#include "zest/observe.hpp"
#include "zest/types.hpp"

namespace zest::estimate {

struct sample_cov {
    cmatrix s;       // 2M x 2M Hermitian PSD
    index samples;   // N L
};

// S = (1/NL) [Y1; Y2] [Y1; Y2]^H, exactly Hermitian on return.
inline sample_cov sample_covariance(const observe::statistic& y) {
    const index m = y.y1.rows();
    if (y.y2.rows() != m || y.y1.cols() != y.y2.cols())
        throw shape_error("sample_covariance: Y1 and Y2 shapes differ");
    if (y.y1.cols() < 1)
        throw invalid_input("sample_covariance: no columns");

    cmatrix v(2 * m, y.y1.cols());
    v.topRows(m) = y.y1;
    v.bottomRows(m) = y.y2;
    cmatrix s = (v * v.adjoint()) / double(y.y1.cols());
    sample_cov out;
    out.s = 0.5 * (s + s.adjoint());
    out.samples = y.y1.cols();
    return out;
}

struct estimate_result {
    cmatrix f_hat;
    cmatrix sigma_h_hat;  // Hermitian PSD by construction
    double u11_condition = 0.0;
    // mu_M - mu_{M+1}: a small gap means the signal subspace is poorly
    // separated from the noise floor.
    double spectral_gap = 0.0;
    index clipped_modes = 0;
};

// Block-eigendecomposition estimator: eigendecompose S descending, stack
// the top-M eigenvectors as [U11; U21], then F = U21 U11^{-1} and
// Sigma_h = U11 (diag(mu) - sigma2 I)^+ U11^H.  The estimate is refused
// when U11 is not numerically invertible.
inline estimate_result estimate_f_sigma(const cmatrix& s, double sigma2,
                                        double cond_threshold = 1e8) {
    if (s.rows() != s.cols() || s.rows() < 2 || s.rows() % 2 != 0)
        throw shape_error("estimate_f_sigma: S must be 2M x 2M");
    if (!(sigma2 >= 0.0))
        throw invalid_input("estimate_f_sigma: noise variance must be >= 0");

    const index m = s.rows() / 2;
    kernels::eig_result e = kernels::hermitian_eig(s);
    cmatrix u11 = e.vectors.block(0, 0, m, m);
    cmatrix u21 = e.vectors.block(m, 0, m, m);
    double gap = e.values(m - 1) - e.values(m);
    double cond = kernels::cond_2(u11);
    if (!(cond < cond_threshold))
        throw degenerate_estimate_error(
            "estimate_f_sigma: top eigenvector block is numerically singular", cond, gap);

    estimate_result out;
    out.u11_condition = cond;
    out.spectral_gap = gap;
    out.f_hat = u11.transpose().partialPivLu().solve(u21.transpose()).transpose();

    rvector mu = (e.values.head(m).array() - sigma2).matrix();
    for (index i = 0; i < m; ++i)
        if (mu(i) < 0.0) {
            mu(i) = 0.0;
            ++out.clipped_modes;
        }
    cmatrix sh = u11 * mu.asDiagonal() * u11.adjoint();
    out.sigma_h_hat = 0.5 * (sh + sh.adjoint());
    return out;
}

// Column-wise LMMSE recovery of the packet-blocked channel under the
// i.i.d. within-packet prior, evaluated in information form:
// H = (sigma2 I + Sigma B^H B)^{-1} Sigma B^H [Y1; Y2], B = [I; F].
// Algebraically equal to Sigma B^H (B Sigma B^H + sigma2 I)^{-1} [Y1; Y2]
// but stays well conditioned as sigma2 -> 0 with Sigma PD.
inline cmatrix lmmse_channel(const observe::statistic& y, const cmatrix& f_hat,
                             const cmatrix& sigma_h_hat) {
    const index m = y.y1.rows();
    if (y.y2.rows() != m || y.y1.cols() != y.y2.cols())
        throw shape_error("lmmse_channel: Y1 and Y2 shapes differ");
    if (f_hat.rows() != m || f_hat.cols() != m || sigma_h_hat.rows() != m ||
        sigma_h_hat.cols() != m)
        throw shape_error("lmmse_channel: F and Sigma_h must be M x M");
    if (!(y.sigma2 >= 0.0))
        throw invalid_input("lmmse_channel: noise variance must be >= 0");

    // Sigma B^H [Y1; Y2] = Sigma (Y1 + F^H Y2); B^H B = I + F^H F.
    cmatrix gram = cmatrix::Identity(m, m) + f_hat.adjoint() * f_hat;
    cmatrix a = y.sigma2 * cmatrix::Identity(m, m) + sigma_h_hat * gram;
    Eigen::FullPivLU<cmatrix> lu(a);
    if (!lu.isInvertible())
        throw singular_model_error("lmmse_channel: innovation covariance is singular");
    return lu.solve(sigma_h_hat * (y.y1 + f_hat.adjoint() * y.y2));
}

}  // namespace zest::estimate
