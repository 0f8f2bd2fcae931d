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
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "zest/observe.hpp"
#include "zest/types.hpp"

namespace zest::obs_io {

// Observation container: one JSON header line describing the shapes,
// followed by the raw payload.  The payload is W1 then W2, row-major,
// each complex entry written as two host-endian doubles (re, im).
struct container {
    index m = 0;
    index n = 0;
    index t = 0;
    index k = 0;
    index l = 0;
    double power = 1.0;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    std::string config_digest;
    observe::observation_set obs;
};

namespace detail {

inline void write_matrix(std::ostream& out, const cmatrix& a) {
    for (index r = 0; r < a.rows(); ++r)
        for (index c = 0; c < a.cols(); ++c) {
            const double re = a(r, c).real();
            const double im = a(r, c).imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof re);
            out.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
}

inline void read_matrix(std::istream& in, cmatrix& a) {
    for (index r = 0; r < a.rows(); ++r)
        for (index c = 0; c < a.cols(); ++c) {
            double re = 0.0, im = 0.0;
            in.read(reinterpret_cast<char*>(&re), sizeof re);
            in.read(reinterpret_cast<char*>(&im), sizeof im);
            a(r, c) = cx(re, im);
        }
}

inline index header_index(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw invalid_input(std::string("observations: header field '") + key +
                            "' missing or not an integer");
    auto v = j[key].get<long long>();
    if (v < 1) throw invalid_input(std::string("observations: '") + key + "' must be >= 1");
    return static_cast<index>(v);
}

}  // namespace detail

inline void save(const std::string& path, const observe::observation_set& w,
                 const observe::training_pair& x, double snr_db = 0.0,
                 std::uint64_t seed = 0, const std::string& config_digest = std::string()) {
    const index m = w.w1.rows();
    if (w.w2.rows() != m || w.w1.cols() != w.packets * x.k ||
        w.w2.cols() != w.packets * (x.t - x.k))
        throw shape_error("observations: payload does not match the training shape");

    nlohmann::json h;
    h["format"] = "zest-observations";
    h["version"] = 1;
    h["m"] = m;
    h["n"] = x.n;
    h["t"] = x.t;
    h["k"] = x.k;
    h["l"] = w.packets;
    h["power"] = x.power;
    h["sigma_n2"] = w.sigma_n2;
    h["snr_db"] = snr_db;
    h["seed"] = seed;
    h["config"] = config_digest;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("observations: cannot open '" + path + "' for writing");
    out << h.dump() << "\n";
    detail::write_matrix(out, w.w1);
    detail::write_matrix(out, w.w2);
    if (!out) throw invalid_input("observations: write to '" + path + "' failed");
}

inline container load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("observations: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw invalid_input("observations: missing header line in '" + path + "'");
    nlohmann::json h = nlohmann::json::parse(line, nullptr, false);
    if (h.is_discarded() || !h.is_object())
        throw invalid_input("observations: header is not a JSON object");
    if (!h.contains("format") || h["format"] != "zest-observations")
        throw invalid_input("observations: unrecognized container format");

    container c;
    c.m = detail::header_index(h, "m");
    c.n = detail::header_index(h, "n");
    c.t = detail::header_index(h, "t");
    c.k = detail::header_index(h, "k");
    c.l = detail::header_index(h, "l");
    if (c.t != 2 * c.k)
        throw invalid_input("observations: header shape violates K = T/2");
    c.power = h.value("power", 1.0);
    c.snr_db = h.value("snr_db", 0.0);
    c.seed = h.value("seed", std::uint64_t(0));
    c.config_digest = h.value("config", std::string());
    c.obs.sigma_n2 = h.value("sigma_n2", 0.0);
    if (!(c.power > 0.0))
        throw invalid_input("observations: power must be > 0");
    if (!(c.obs.sigma_n2 >= 0.0))
        throw invalid_input("observations: sigma_n2 must be >= 0");

    c.obs.packets = c.l;
    c.obs.w1.resize(c.m, c.l * c.k);
    c.obs.w2.resize(c.m, c.l * (c.t - c.k));
    detail::read_matrix(in, c.obs.w1);
    detail::read_matrix(in, c.obs.w2);
    if (!in) throw shape_error("observations: payload truncated in '" + path + "'");
    return c;
}

}  // namespace zest::obs_io
