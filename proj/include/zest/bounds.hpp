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

// Parameter ordering everywhere in this module: theta = vec[F Sigma_h],
// column-major, F's M^2 entries first.  theta_{b M + a} = F(a, b) and
// theta_{M^2 + b M + a} = Sigma_h(a, b).

namespace zest::bounds {

namespace detail {

inline void check_pair(const cmatrix& f, const cmatrix& sigma_h, const char* who) {
    if (f.rows() != f.cols() || sigma_h.rows() != sigma_h.cols() || f.rows() != sigma_h.rows())
        throw shape_error(std::string(who) + ": F and Sigma_h must be square and equally sized");
    if (!f.allFinite() || !sigma_h.allFinite())
        throw invalid_input(std::string(who) + ": non-finite entries");
}

inline cmatrix stack_b(const cmatrix& f) {
    cmatrix b(2 * f.rows(), f.cols());
    b.topRows(f.rows()) = cmatrix::Identity(f.rows(), f.cols());
    b.bottomRows(f.rows()) = f;
    return b;
}

}  // namespace detail

// Sigma(d) = d B Sigma_h B^H + sigma2 I, B = [I; F]; exactly Hermitian.
inline cmatrix population_covariance(const cmatrix& f, const cmatrix& sigma_h, double sigma2,
                                     double weight) {
    detail::check_pair(f, sigma_h, "population_covariance");
    if (!(sigma2 >= 0.0) || !(weight >= 0.0))
        throw invalid_input("population_covariance: sigma2 and weight must be >= 0");
    cmatrix b = detail::stack_b(f);
    cmatrix s = weight * (b * sigma_h * b.adjoint());
    s += sigma2 * cmatrix::Identity(s.rows(), s.cols());
    return 0.5 * (s + s.adjoint());
}

// Holomorphic Wirtinger derivatives of Sigma(weight) with respect to each
// theta_j, in the module's parameter ordering:
//   dSigma/dF(a,b)       = weight [0; E_ab] Sigma_h B^H
//   dSigma/dSigma_h(a,b) = weight B E_ab B^H
// The conjugate-parameter derivatives are the adjoints of these, which is
// what the Fisher information assembly uses.
inline std::vector<cmatrix> covariance_derivatives(const cmatrix& f, const cmatrix& sigma_h,
                                                   double weight) {
    detail::check_pair(f, sigma_h, "covariance_derivatives");
    const index m = f.rows();
    cmatrix b = detail::stack_b(f);
    cmatrix sbh = sigma_h * b.adjoint();  // M x 2M

    std::vector<cmatrix> out;
    out.reserve(std::size_t(2 * m * m));
    for (index col = 0; col < m; ++col)
        for (index row = 0; row < m; ++row) {
            cmatrix d = cmatrix::Zero(2 * m, 2 * m);
            d.row(m + row) = weight * sbh.row(col);
            out.push_back(std::move(d));
        }
    for (index col = 0; col < m; ++col)
        for (index row = 0; row < m; ++row)
            out.push_back(weight * (b.col(row) * b.col(col).adjoint()));
    return out;
}

// Multi-packet complex Fisher information on theta:
// [I]_ij = N sum_k Tr[Sigma_k^{-1} D_i^H Sigma_k^{-1} D_j], with per-mode
// covariance Sigma_k = population_covariance(F, Sigma_h, sigma2, d_k) and
// D the mode-k derivatives.  Single packet is mode_weights = {1}.
inline cmatrix fim(const cmatrix& f, const cmatrix& sigma_h, double sigma2, index n,
                   const rvector& mode_weights) {
    detail::check_pair(f, sigma_h, "fim");
    if (n < 1)
        throw invalid_input("fim: packet column count must be >= 1");
    if (mode_weights.size() < 1)
        throw invalid_input("fim: need at least one mode weight");
    if (!(mode_weights.minCoeff() >= 0.0))
        throw invalid_input("fim: mode weights must be >= 0");

    const index m = f.rows();
    const index p = 2 * m * m;
    std::vector<cmatrix> d1 = covariance_derivatives(f, sigma_h, 1.0);

    cmatrix info = cmatrix::Zero(p, p);
    std::vector<cmatrix> t(static_cast<std::size_t>(p));
    for (index k = 0; k < mode_weights.size(); ++k) {
        const double dk = mode_weights(k);
        cmatrix sk = population_covariance(f, sigma_h, sigma2, dk);
        Eigen::FullPivLU<cmatrix> lu(sk);
        if (!lu.isInvertible())
            throw singular_model_error("fim: per-mode covariance is singular");
        cmatrix ski = lu.inverse();
        for (index j = 0; j < p; ++j)
            t[std::size_t(j)] = ski * d1[std::size_t(j)] * ski;
        const double w = double(n) * dk * dk;
        for (index i = 0; i < p; ++i)
            for (index j = 0; j < p; ++j)
                info(i, j) += w * (d1[std::size_t(i)].conjugate().cwiseProduct(t[std::size_t(j)])).sum();
    }
    return 0.5 * (info + info.adjoint());
}

struct crb_result {
    double value = 0.0;
    // The information matrix was numerically rank deficient and the value
    // used its pseudo-inverse.
    bool rank_deficient = false;
};

// Relative-RMSE Cramer-Rao floor for F: sqrt of the trace of the F block
// of I^{-1}, over ||F||_F.
inline crb_result crb_relative_f(const cmatrix& info, const cmatrix& f) {
    if (f.rows() != f.cols())
        throw shape_error("crb_relative_f: F must be square");
    const index m = f.rows();
    if (info.rows() != 2 * m * m || info.cols() != 2 * m * m)
        throw shape_error("crb_relative_f: information matrix must be 2M^2 x 2M^2");
    double f_norm = f.norm();
    if (!(f_norm > 0.0))
        throw invalid_input("crb_relative_f: F must be nonzero for the relative form");

    kernels::eig_result e = kernels::hermitian_eig(info);
    const double tol = 1e-12 * std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
    crb_result out;
    rvector inv = rvector::Zero(e.values.size());
    for (index i = 0; i < e.values.size(); ++i) {
        if (e.values(i) > tol)
            inv(i) = 1.0 / e.values(i);
        else
            out.rank_deficient = true;
    }
    // Trace of the F block of the (pseudo-)inverse, without forming it.
    double tr = 0.0;
    for (index i = 0; i < m * m; ++i)
        tr += e.vectors.row(i).cwiseAbs2().transpose().cwiseProduct(inv).sum();
    out.value = std::sqrt(tr) / f_norm;
    return out;
}

struct mcb_result {
    double value = 0.0;
    // ||F|| = 0 makes the relative form undefined; value is then the raw
    // mean-squared-error bound instead of a relative RMSE.
    bool raw_mse = false;
};

// Miller-Chang bound in the same relative-RMSE form as crb_relative_f.
// +infinity when the Wishart degree n is at most M; multi-packet i.i.d.
// usage passes n = N L.
inline mcb_result mcb_relative_f(const cmatrix& f, const cmatrix& sigma_h, double sigma2,
                                 index n, index m) {
    detail::check_pair(f, sigma_h, "mcb_relative_f");
    if (m != f.rows())
        throw shape_error("mcb_relative_f: M does not match F");
    if (!(sigma2 >= 0.0))
        throw invalid_input("mcb_relative_f: sigma2 must be >= 0");

    mcb_result out;
    if (n <= m) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    kernels::eig_result e = kernels::hermitian_eig(sigma_h);
    const double tol = 1e-12 * std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
    if (e.values.minCoeff() <= tol)
        throw singular_model_error("mcb_relative_f: Sigma_h must be positive definite");
    double tr_inv = e.values.cwiseInverse().sum();
    double raw = sigma2 / double(n - m) * tr_inv * (f.squaredNorm() + double(m));
    double f_norm = f.norm();
    if (f_norm > 0.0) {
        out.value = std::sqrt(raw) / f_norm;
    } else {
        out.value = raw;
        out.raw_mse = true;
    }
    return out;
}

// Eigenvalues of the temporal correlation, descending; these are the mode
// weights d_k of the decorrelated packet model.  Trace is preserved, so
// they sum to L.  Negative eigenvalues within the PSD clip tolerance are
// zeroed.
inline rvector decorrelate_modes(const rmatrix& c_h) {
    kernels::eig_result e = kernels::symmetric_eig(c_h);
    const double tol = 1e-10 * std::max(1.0, e.values.cwiseAbs().maxCoeff());
    rvector d = e.values;
    for (index i = 0; i < d.size(); ++i) {
        if (d(i) < -tol)
            throw not_psd_error("decorrelate_modes: C_h is not PSD within tolerance");
        if (d(i) < 0.0)
            d(i) = 0.0;
    }
    return d;
}

}  // namespace zest::bounds
