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
#include <complex>

#include "zest/rng.hpp"
#include "zest/types.hpp"

namespace zest::observe {

// Orthogonal training blocks: disjoint row slices of the K x K DFT matrix,
// scaled so that X_i X_i^H = (P K / N) I_N.
struct training_pair {
    cmatrix x1;  // N x K, used while the load is Z1
    cmatrix x2;  // N x (T - K), used while the load is Z2
    double power = 1.0;
    index n = 0;
    index t = 0;
    index k = 0;
};

inline training_pair make_training(index n, index t, double power) {
    if (n < 1)
        throw invalid_input("make_training: need at least one transmit antenna");
    if (t < 2 || t % 2 != 0)
        throw invalid_input("make_training: T must be even so that K = T/2");
    if (!(power > 0.0))
        throw invalid_input("make_training: power must be > 0");
    const index k = t / 2;
    if (2 * n > k)
        throw invalid_input("make_training: 2N > K, the two training blocks would "
                            "reuse DFT rows and lose orthogonality");

    training_pair out;
    out.power = power;
    out.n = n;
    out.t = t;
    out.k = k;
    out.x1.resize(n, k);
    out.x2.resize(n, k);
    const double s = std::sqrt(power / double(n));
    const double w = -2.0 * 3.14159265358979323846 / double(k);
    for (index a = 0; a < n; ++a)
        for (index b = 0; b < k; ++b) {
            out.x1(a, b) = std::polar(s, w * double(a) * double(b));
            out.x2(a, b) = std::polar(s, w * double(a + n) * double(b));
        }
    return out;
}

// Raw load-switched observations, packet-blocked like the channel draw.
struct observation_set {
    cmatrix w1;  // M x (L K)
    cmatrix w2;  // M x (L (T - K))
    double sigma_n2 = 0.0;
    index packets = 0;
};

// Per packet l: W1 block = H_l X1 + noise, W2 block = F H_l X2 + noise,
// with i.i.d. circular complex Gaussian noise of variance sigma_n2 per
// entry.  The noise for W1 is drawn before the noise for W2 within each
// packet; sigma_n2 = 0 adds nothing and consumes no randomness.
inline observation_set simulate_packets(const cmatrix& h, const cmatrix& f,
                                        const training_pair& x, double sigma_n2,
                                        rng::stream& g) {
    const index m = h.rows();
    if (f.rows() != m || f.cols() != m)
        throw shape_error("simulate_packets: F must be M x M");
    if (x.x1.rows() != x.n || h.cols() % x.n != 0)
        throw shape_error("simulate_packets: channel columns are not a whole "
                          "number of N-column packets");
    if (!(sigma_n2 >= 0.0))
        throw invalid_input("simulate_packets: noise variance must be >= 0");

    const index l = h.cols() / x.n;
    const double sd = std::sqrt(sigma_n2);
    observation_set out;
    out.sigma_n2 = sigma_n2;
    out.packets = l;
    out.w1.resize(m, l * x.k);
    out.w2.resize(m, l * x.k);
    for (index p = 0; p < l; ++p) {
        auto h_p = h.block(0, p * x.n, m, x.n);
        out.w1.block(0, p * x.k, m, x.k) = h_p * x.x1;
        out.w2.block(0, p * x.k, m, x.k) = f * h_p * x.x2;
        if (sigma_n2 > 0.0) {
            out.w1.block(0, p * x.k, m, x.k) += sd * g.cnormal_matrix(m, x.k);
            out.w2.block(0, p * x.k, m, x.k) += sd * g.cnormal_matrix(m, x.k);
        }
    }
    return out;
}

// Lossless reduction of the observations.  Y_i = (2N/PT) W_i (I_L (x) X_i^H)
// is an unbiased image of the packet-blocked channel: noiseless data gives
// Y1 = H and Y2 = F H exactly because X_i X_i^H = (PK/N) I and K = T/2.
struct statistic {
    cmatrix y1;  // M x (N L)
    cmatrix y2;  // M x (N L)
    double sigma2 = 0.0;  // effective noise variance 2 N sigma_n2 / (P T)
    index n = 0;
    index packets = 0;
};

inline statistic sufficient_statistic(const observation_set& w, const training_pair& x,
                                      index packets) {
    if (packets < 1)
        throw invalid_input("sufficient_statistic: need at least one packet");
    const index m = w.w1.rows();
    if (w.w2.rows() != m || w.w1.cols() != packets * x.k || w.w2.cols() != packets * x.k)
        throw shape_error("sufficient_statistic: observation shape does not match "
                          "the training and packet count");

    const double scale = 2.0 * double(x.n) / (x.power * double(x.t));
    statistic out;
    out.n = x.n;
    out.packets = packets;
    out.sigma2 = scale * w.sigma_n2;
    out.y1.resize(m, x.n * packets);
    out.y2.resize(m, x.n * packets);
    cmatrix x1h = x.x1.adjoint();
    cmatrix x2h = x.x2.adjoint();
    for (index p = 0; p < packets; ++p) {
        out.y1.block(0, p * x.n, m, x.n) = scale * (w.w1.block(0, p * x.k, m, x.k) * x1h);
        out.y2.block(0, p * x.n, m, x.n) = scale * (w.w2.block(0, p * x.k, m, x.k) * x2h);
    }
    return out;
}

}  // namespace zest::observe
