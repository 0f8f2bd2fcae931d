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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "zest/types.hpp"

namespace zest::kernels {

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Eigendecomposition of a Hermitian matrix.  values are descending and
// column k of vectors pairs with values(k).
struct eig_result {
    rvector values;
    cmatrix vectors;
};

namespace detail {

// Rotates each column so its largest-magnitude entry (lowest index on
// ties) is real and positive.  Together with the descending value order
// this makes the decomposition a deterministic function of the input.
inline void canonical_phase(cmatrix& v) {
    for (index j = 0; j < v.cols(); ++j) {
        index pivot = 0;
        double best = -1.0;
        for (index i = 0; i < v.rows(); ++i) {
            double m = std::abs(v(i, j));
            if (m > best) {
                best = m;
                pivot = i;
            }
        }
        if (best > 0.0)
            v.col(j) *= std::conj(v(pivot, j) / best);
    }
}

}  // namespace detail

inline eig_result hermitian_eig(const cmatrix& a) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw shape_error("hermitian_eig: input must be square and nonempty");
    if (!a.allFinite())
        throw invalid_input("hermitian_eig: input has non-finite entries");
    if (max_abs(a - a.adjoint()) > 1e-10)
        throw invalid_input("hermitian_eig: input is not Hermitian within 1e-10");

    Eigen::SelfAdjointEigenSolver<cmatrix> solver((a + a.adjoint()) / 2.0);
    if (solver.info() != Eigen::Success)
        throw error("hermitian_eig: eigensolver failed to converge");

    // Stable descending sort: ties keep the solver's relative order, so
    // e.g. the identity matrix maps to the identity eigenbasis.
    const index n = a.rows();
    std::vector<index> order(n);
    for (index i = 0; i < n; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](index i, index j) {
        return solver.eigenvalues()(i) > solver.eigenvalues()(j);
    });

    eig_result out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (index k = 0; k < n; ++k) {
        out.values(k) = solver.eigenvalues()(order[k]);
        out.vectors.col(k) = solver.eigenvectors().col(order[k]);
    }
    detail::canonical_phase(out.vectors);
    return out;
}

inline eig_result symmetric_eig(const rmatrix& a) {
    eig_result e = hermitian_eig(a.cast<cx>());
    return e;
}

// Hermitian PSD square root.  Eigenvalues in [-tol, 0) with
// tol = 1e-10 * max(1, lambda_max) are clipped to zero; anything more
// negative is rejected.
inline cmatrix sqrtm_psd(const cmatrix& a) {
    eig_result e = hermitian_eig(a);
    double lmax = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
    double tol = 1e-10 * std::max(1.0, lmax);
    rvector roots(e.values.size());
    for (index i = 0; i < e.values.size(); ++i) {
        if (e.values(i) < -tol)
            throw not_psd_error("sqrtm_psd: eigenvalue " + std::to_string(e.values(i)) +
                                " below PSD clip tolerance");
        roots(i) = e.values(i) > 0.0 ? std::sqrt(e.values(i)) : 0.0;
    }
    cmatrix b = e.vectors * roots.asDiagonal() * e.vectors.adjoint();
    return (b + b.adjoint()) / 2.0;
}

// Real symmetric PSD square root with the same clip rule.  The clipped
// magnitude (most negative eigenvalue seen, as a positive number) is
// reported through clip_magnitude when provided.
inline rmatrix sqrtm_psd(const rmatrix& a, double* clip_magnitude = nullptr) {
    eig_result e = symmetric_eig(a);
    double lmax = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
    double tol = 1e-10 * std::max(1.0, lmax);
    double clipped = 0.0;
    rvector roots(e.values.size());
    for (index i = 0; i < e.values.size(); ++i) {
        if (e.values(i) < -tol)
            throw not_psd_error("sqrtm_psd: eigenvalue " + std::to_string(e.values(i)) +
                                " below PSD clip tolerance");
        if (e.values(i) < 0.0)
            clipped = std::max(clipped, -e.values(i));
        roots(i) = e.values(i) > 0.0 ? std::sqrt(e.values(i)) : 0.0;
    }
    if (clip_magnitude)
        *clip_magnitude = clipped;
    cmatrix b = e.vectors * roots.asDiagonal() * e.vectors.adjoint();
    rmatrix out = b.real();
    return (out + out.transpose()) / 2.0;
}

template <typename Matrix>
Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (index i = 0; i < a.rows(); ++i)
        for (index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Column-major stacking.
inline cvector vec(const cmatrix& a) {
    return Eigen::Map<const cvector>(a.data(), a.size());
}

inline cmatrix unvec(const cvector& v, index rows, index cols) {
    if (rows < 0 || cols < 0 || rows * cols != v.size())
        throw shape_error("unvec: length " + std::to_string(v.size()) +
                          " does not factor as " + std::to_string(rows) + "x" +
                          std::to_string(cols));
    return Eigen::Map<const cmatrix>(v.data(), rows, cols);
}

// 2-norm condition number; +inf when the smallest singular value is zero.
inline double cond_2(const cmatrix& a) {
    Eigen::JacobiSVD<cmatrix> svd(a);
    const rvector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return std::numeric_limits<double>::infinity();
    double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace zest::kernels
