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
#include "zest/rng.hpp"
#include "zest/types.hpp"

namespace zest::channel {

namespace detail {

// Power series sum_k (-x^2/4)^k / (k!)^2.  The largest term at x = 12 is
// about 4.3e3, so cancellation stays below ~1e-11.
inline double bessel_j0_series(double x) {
    double q = x * x / 4.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 80; ++k) {
        term *= -q / (double(k) * double(k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum))
            break;
    }
    return sum;
}

// Hankel asymptotic expansion J0(x) ~ sqrt(2/(pi x)) (P cos chi - Q sin chi)
// with chi = x - pi/4.  Terms are added while they keep shrinking; at
// x = 12 the series bottoms out near 1e-11 absolute.
inline double bessel_j0_asymptotic(double x) {
    double p = 1.0, q = 0.0;
    double c = 1.0;
    double prev = 1.0;
    for (int m = 1; m <= 30; ++m) {
        double odd = 2.0 * m - 1.0;
        c *= odd * odd / (double(m) * 8.0 * x);
        if (c >= prev)
            break;
        prev = c;
        // c is c_m; odd m feeds Q, even m feeds P, with alternating signs.
        int k = m / 2;
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        if (m % 2 == 1)
            q += -sign * c;
        else
            p += sign * c;
    }
    double chi = x - 0.78539816339744830962;
    return std::sqrt(2.0 / (3.14159265358979323846 * x)) *
           (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

// Zeroth-order Bessel function of the first kind, |error| <= 1e-10 on
// |x| <= 1e4.
inline double bessel_j0(double x) {
    if (!std::isfinite(x))
        throw invalid_input("bessel_j0: non-finite argument");
    x = std::abs(x);
    return x < 12.0 ? detail::bessel_j0_series(x) : detail::bessel_j0_asymptotic(x);
}

// Maximum Doppler shift for a scatterer closing at speed v.
inline double doppler_hz(double speed_mps, double carrier_hz) {
    if (!(speed_mps >= 0.0))
        throw invalid_input("doppler_hz: speed must be >= 0");
    if (!(carrier_hz > 0.0))
        throw invalid_input("doppler_hz: carrier frequency must be > 0");
    return speed_mps * carrier_hz / speed_of_light_mps;
}

// Toeplitz packet-lag correlation R[l] = J0(2 pi f_d T_s |l|); unit
// diagonal, trace L.
inline rmatrix clarke_correlation(double doppler_hz, double packet_period_s, index packets) {
    if (packets < 1)
        throw invalid_input("clarke_correlation: need at least one packet");
    if (!(packet_period_s > 0.0))
        throw invalid_input("clarke_correlation: packet period must be > 0");
    if (!(doppler_hz >= 0.0))
        throw invalid_input("clarke_correlation: Doppler must be >= 0");

    rmatrix c(packets, packets);
    const double w = 2.0 * 3.14159265358979323846 * doppler_hz * packet_period_s;
    for (index lag = 0; lag < packets; ++lag) {
        double r = lag == 0 ? 1.0 : bessel_j0(w * double(lag));
        for (index i = 0; i + lag < packets; ++i) {
            c(i, i + lag) = r;
            c(i + lag, i) = r;
        }
    }
    return c;
}

// One space-time channel draw, packet-blocked as [H_1 ... H_L] with
// vec-covariance C_h (x) I_N (x) Sigma_h.  C_h eigenvalues in
// [-1e-10, 0) are clipped; the clip magnitude is reported when asked.
inline cmatrix sample_channel(const cmatrix& sigma_h, const rmatrix& c_h, index n,
                              rng::stream& g, double* clip_magnitude = nullptr) {
    if (n < 1)
        throw invalid_input("sample_channel: need at least one transmit antenna");
    if (sigma_h.rows() != sigma_h.cols() || c_h.rows() != c_h.cols())
        throw shape_error("sample_channel: covariance matrices must be square");

    cmatrix a;
    rmatrix c_root;
    double clip = 0.0;
    try {
        a = kernels::sqrtm_psd(sigma_h);
        c_root = kernels::sqrtm_psd(c_h, &clip);
    } catch (const not_psd_error& e) {
        throw invalid_input(std::string("sample_channel: covariance not PSD: ") + e.what());
    }
    if (clip_magnitude)
        *clip_magnitude = clip;

    const index m = sigma_h.rows();
    const index l = c_h.rows();
    cmatrix w = g.cnormal_matrix(m, n * l);

    // (C_h^{1/2} (x) I_N) mixes whole packet blocks; applied blockwise to
    // avoid materializing the NL x NL Kronecker factor.
    cmatrix h = cmatrix::Zero(m, n * l);
    cmatrix aw = a * w;
    for (index dst = 0; dst < l; ++dst)
        for (index src = 0; src < l; ++src) {
            double weight = c_root(src, dst);
            if (weight != 0.0)
                h.block(0, dst * n, m, n) += weight * aw.block(0, src * n, m, n);
        }
    return h;
}

}  // namespace zest::channel
