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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "zest/metrics.hpp"
#include "zest/rng.hpp"
#include "zest/types.hpp"

using namespace zest;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("effective snr", "[metrics]") {
    SECTION("training overhead example") {
        // 10 / (1 + 1.1 * 4 / 64) = 10 / 1.06875
        REQUIRE_THAT(metrics::effective_snr(10.0, 4, 64), WithinAbs(9.356725146198830, 1e-12));
    }

    SECTION("no training columns returns gamma untouched") {
        REQUIRE(metrics::effective_snr(3.7, 0, 64) == 3.7);
        REQUIRE(metrics::effective_snr(0.0, 0, 64) == 0.0);
    }

    SECTION("high-snr limit is gamma / (1 + N/T)") {
        double got = metrics::effective_snr(1e9, 4, 64);
        double want = 1e9 / (1.0 + 4.0 / 64.0);
        REQUIRE_THAT(got, WithinRel(want, 1e-6));
    }

    SECTION("zero snr with training stays zero") {
        REQUIRE(metrics::effective_snr(0.0, 4, 64) == 0.0);
    }

    SECTION("validation") {
        REQUIRE_THROWS_AS(metrics::effective_snr(-1.0, 4, 64), invalid_input);
        REQUIRE_THROWS_AS(metrics::effective_snr(1.0, -1, 64), invalid_input);
        REQUIRE_THROWS_AS(metrics::effective_snr(1.0, 4, 0), invalid_input);
    }
}

TEST_CASE("capacity upper bound closed forms", "[metrics]") {
    SECTION("uncorrelated 2x4 polynomial, log2(1 + 2g + 0.75 g^2)") {
        REQUIRE_THAT(metrics::capacity_upper(cmatrix::Identity(2, 2), 1.0, 4),
                     WithinAbs(1.9068905956085185, 1e-12));
        double g = 0.37;
        REQUIRE_THAT(metrics::capacity_upper(cmatrix::Identity(2, 2), g, 4),
                     WithinRel(std::log2(1.0 + 2.0 * g + 0.75 * g * g), 1e-14));
    }

    SECTION("correlation only changes the quadratic coefficient") {
        cmatrix s(2, 2);
        s << 1.0, 0.6, 0.6, 1.0;
        // eigenvalues 1.6 and 0.4: e_1 = 2, e_2 = 0.64
        double g = 2.3;
        REQUIRE_THAT(metrics::capacity_upper(s, g, 4),
                     WithinRel(std::log2(1.0 + 2.0 * g + 0.48 * g * g), 1e-12));
    }

    SECTION("zero snr carries no information") {
        REQUIRE(metrics::capacity_upper(cmatrix::Identity(2, 2), 0.0, 4) == 0.0);
    }

    SECTION("more receive antennas than transmit streams is unsupported") {
        REQUIRE_THROWS_AS(metrics::capacity_upper(cmatrix::Identity(3, 3), 1.0, 2),
                          unsupported_regime_error);
    }
}

TEST_CASE("capacity lower bound by monte carlo", "[metrics]") {
    SECTION("trace normalization is enforced") {
        rng::stream g(900, {5, 0});
        REQUIRE_THROWS_AS(
            metrics::capacity_lower_mc(1.1 * cmatrix::Identity(2, 2), 1.0, 4, 10, g),
            invalid_input);
    }

    SECTION("zero snr gives exactly zero with zero spread") {
        rng::stream g(901, {5, 1});
        metrics::mc_estimate r = metrics::capacity_lower_mc(cmatrix::Identity(2, 2), 0.0, 4, 50, g);
        REQUIRE(r.mean == 0.0);
        REQUIRE(r.std_error == 0.0);
    }

    SECTION("deterministic replay") {
        rng::stream g1(902, {5, 2});
        rng::stream g2(902, {5, 2});
        metrics::mc_estimate a = metrics::capacity_lower_mc(cmatrix::Identity(2, 2), 3.0, 4, 200, g1);
        metrics::mc_estimate b = metrics::capacity_lower_mc(cmatrix::Identity(2, 2), 3.0, 4, 200, g2);
        REQUIRE(a.mean == b.mean);
        REQUIRE(a.std_error == b.std_error);
    }

    SECTION("scalar channel against an independent reference sampler") {
        const double gamma = 2.0;
        const Eigen::Index n = 3;
        const Eigen::Index trials = 20000;

        rng::stream g(903, {5, 3});
        metrics::mc_estimate r =
            metrics::capacity_lower_mc(cmatrix::Identity(1, 1), gamma, n, trials, g);

        rng::stream ref(7904, {5, 4});
        double sum = 0.0, sum_sq = 0.0;
        for (Eigen::Index i = 0; i < trials; ++i) {
            double power = 0.0;
            for (Eigen::Index k = 0; k < n; ++k)
                power += std::norm(ref.cnormal());
            double c = std::log2(1.0 + gamma / double(n) * power);
            sum += c;
            sum_sq += c * c;
        }
        double mean = sum / double(trials);
        double se = std::sqrt((sum_sq - sum * sum / double(trials)) / double(trials - 1) /
                              double(trials));
        double combined = std::sqrt(se * se + r.std_error * r.std_error);
        REQUIRE_THAT(r.mean, WithinAbs(mean, 3.0 * combined));
    }

    SECTION("monte carlo mean stays below the Jensen upper bound") {
        cmatrix s(2, 2);
        s << 1.0, 0.3, 0.3, 1.0;
        const double gamma = 3.0;
        rng::stream g(905, {5, 5});
        metrics::mc_estimate r = metrics::capacity_lower_mc(s, gamma, 4, 5000, g);
        double cu = metrics::capacity_upper(s, gamma, 4);
        REQUIRE(r.mean > 0.0);
        REQUIRE(r.mean < cu + 3.0 * r.std_error);
    }
}

TEST_CASE("relative rmse", "[metrics]") {
    cmatrix truth(2, 2);
    truth << cx(1.0, 0.5), cx(0.2, -0.1), cx(-0.3, 0.7), cx(0.9, 0.0);

    SECTION("single estimate reduces to an error-norm ratio") {
        cmatrix err(2, 2);
        err << cx(0.01, -0.02), cx(0.0, 0.03), cx(-0.01, 0.0), cx(0.02, 0.01);
        std::vector<cmatrix> batch = {truth + err};
        REQUIRE_THAT(metrics::relative_rmse(batch, truth),
                     WithinRel(err.norm() / truth.norm(), 1e-14));
    }

    SECTION("batch averages squared errors") {
        cmatrix e1 = cmatrix::Zero(2, 2);
        cmatrix e2(2, 2);
        e2 << cx(0.1, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0);
        std::vector<cmatrix> batch = {truth + e1, truth + e2};
        double want = std::sqrt(0.5 * e2.squaredNorm()) / truth.norm();
        REQUIRE_THAT(metrics::relative_rmse(batch, truth), WithinRel(want, 1e-14));
    }

    SECTION("exact estimates give exactly zero") {
        std::vector<cmatrix> batch = {truth, truth};
        REQUIRE(metrics::relative_rmse(batch, truth) == 0.0);
    }

    SECTION("validation") {
        REQUIRE_THROWS_AS(metrics::relative_rmse({}, truth), invalid_input);
        REQUIRE_THROWS_AS(metrics::relative_rmse({cmatrix::Zero(3, 3)}, truth), shape_error);
        REQUIRE_THROWS_AS(metrics::relative_rmse({truth}, cmatrix::Zero(2, 2)), invalid_input);
    }
}
