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

#include "zest/rng.hpp"

using namespace zest;

TEST_CASE("streams replay exactly for identical paths", "[rng]") {
    rng::stream a(123, {4, 5, 6});
    rng::stream b(123, {4, 5, 6});
    for (int i = 0; i < 100; ++i)
        REQUIRE(a.uniform() == b.uniform());
    cmatrix ma = rng::stream(9, {1, 2}).cnormal_matrix(3, 4);
    cmatrix mb = rng::stream(9, {1, 2}).cnormal_matrix(3, 4);
    REQUIRE(ma == mb);
}

TEST_CASE("distinct paths give distinct streams", "[rng]") {
    rng::stream a(123, {1, 0});
    rng::stream b(123, {0, 1});
    rng::stream c(124, {1, 0});
    double va = a.uniform(), vb = b.uniform(), vc = c.uniform();
    REQUIRE(va != vb);
    REQUIRE(va != vc);
}

TEST_CASE("normal moments", "[rng]") {
    rng::stream g(2026, {0});
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        double z = g.normal();
        sum += z;
        sum2 += z * z;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    // 3-sigma bands for the given n.
    REQUIRE(std::abs(mean) < 3.0 / std::sqrt(double(n)));
    REQUIRE(var == Catch::Approx(1.0).margin(3.0 * std::sqrt(2.0 / n)));
}

TEST_CASE("complex normal has unit power split across parts", "[rng]") {
    rng::stream g(7, {1});
    const int n = 100000;
    double p = 0, pre = 0, mix = 0;
    for (int i = 0; i < n; ++i) {
        cx z = g.cnormal();
        p += std::norm(z);
        pre += z.real() * z.real();
        mix += z.real() * z.imag();
    }
    REQUIRE(p / n == Catch::Approx(1.0).margin(0.02));
    REQUIRE(pre / n == Catch::Approx(0.5).margin(0.015));
    REQUIRE(std::abs(mix / n) < 0.01);
}

TEST_CASE("uniform stays inside [0,1)", "[rng]") {
    rng::stream g(55, {2});
    for (int i = 0; i < 10000; ++i) {
        double u = g.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}
