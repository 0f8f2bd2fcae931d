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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

#include "zest/types.hpp"

namespace zest::rng {

// splitmix64 finalizer; full-avalanche 64-bit mix.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic random stream addressed by (seed, id path).  Streams with
// distinct paths are independent regardless of creation or consumption
// order, so multi-threaded Monte Carlo runs replay the single-threaded
// byte stream exactly.  Normal variates use explicit Box-Muller rather
// than std::normal_distribution, whose algorithm is implementation
// defined.
class stream {
  public:
    stream(uint64_t seed, std::initializer_list<uint64_t> path) {
        uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
        for (uint64_t id : path)
            h = mix64(h ^ (id + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
        engine_.seed(h);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto [z0, z1] = normal_pair();
        spare_ = z1;
        have_spare_ = true;
        return z0;
    }

    // Standard circular complex Gaussian: real and imaginary parts are
    // i.i.d. N(0, 1/2), so E|z|^2 = 1.
    cx cnormal() {
        auto [z0, z1] = normal_pair();
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        return cx(z0 * inv_sqrt2, z1 * inv_sqrt2);
    }

    // Column-major fill; consumes exactly rows*cols complex draws.
    cmatrix cnormal_matrix(index rows, index cols) {
        cmatrix m(rows, cols);
        for (index c = 0; c < cols; ++c)
            for (index r = 0; r < rows; ++r)
                m(r, c) = cnormal();
        return m;
    }

  private:
    std::pair<double, double> normal_pair() {
        // u1 bounded away from 0 keeps the log finite.
        double u1;
        do {
            u1 = uniform();
        } while (u1 < 0x1.0p-60);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace zest::rng
