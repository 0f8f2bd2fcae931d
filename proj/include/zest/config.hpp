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
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zest/types.hpp"

namespace zest::config {

// One row of the fig6 antenna-spacing sweep: element separation in
// wavelengths, the mutual impedance that replaces the off-diagonal of
// Z_A, and the spatial correlation of the source covariance.
struct spacing_entry {
    double d_over_lambda = 0.0;
    cx z_mutual;
    double rho = 0.0;
};

enum class sigma_g_kind {
    scaled_identity,  // Sigma_g = scale * I
    full_matrix,      // explicit Hermitian matrix
    spacing_table,    // per-spacing [[1, rho], [rho, 1]] * scale (fig6)
};

struct experiment_config {
    std::string figure = "fig2";

    // dims: M receive ports, N transmit antennas, T training symbols per
    // packet split into two K-symbol halves, L packets
    index m = 2;
    index n = 4;
    index t = 64;
    index k = 32;
    index l = 5;

    double carrier_hz = 2.1e9;
    double symbol_period_s = 1e-3;  // packet period driving the Doppler lag
    std::vector<double> velocities_kmh;
    std::vector<double> snr_grid_db;
    index trials = 2000;
    std::uint64_t seed = 1;

    cmatrix z_a;  // ohm, symmetric
    cmatrix z1;   // ohm, data-reception load
    cmatrix z2;   // ohm, perturbed training load
    sigma_g_kind sigma_g_type = sigma_g_kind::scaled_identity;
    double sigma_g_scale = 1.0;
    cmatrix sigma_g_matrix;
    std::vector<spacing_entry> spacing;

    double mismatch_loss_db = 5.0;
};

namespace detail {

inline cmatrix ula_z_a() {
    cmatrix z(2, 2);
    z(0, 0) = cx(72.8521, 1.6869);
    z(1, 1) = z(0, 0);
    z(0, 1) = cx(-15.7457, -27.8393);
    z(1, 0) = z(0, 1);
    return z;
}

inline std::vector<spacing_entry> dipole_spacing_table() {
    // Side-by-side half-wave dipole mutual impedances with the matching
    // Clarke spatial correlation, one row per 0.05 wavelength step.
    return {
        {0.10, cx(67.2870, 7.5326), 0.903713},   {0.15, cx(60.3928, -7.0916), 0.789962},
        {0.20, cx(51.3611, -19.1586), 0.642512}, {0.25, cx(40.7575, -28.3294), 0.472001},
        {0.30, cx(29.2359, -34.4148), 0.290564}, {0.35, cx(17.4917, -37.3908), 0.110854},
        {0.40, cx(6.2124, -37.4037), -0.054960}, {0.45, cx(-3.9704, -34.7605), -0.196150},
        {0.50, cx(-12.5234, -29.9079), -0.304242},
    };
}

inline std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (double v = lo; v <= hi + 1e-9; v += step)
        g.push_back(v);
    return g;
}

}  // namespace detail

inline const std::set<std::string>& known_figures() {
    static const std::set<std::string> f = {"fig2", "fig3", "fig4", "fig5", "fig6"};
    return f;
}

// Baseline setup shared by every figure, specialized per figure id:
// 2x2 ULA antenna, 50 ohm versus (50+j20)+10*ones loads, 2.1 GHz carrier,
// 1 ms packets, T = 64 training symbols in two K = 32 halves.
inline experiment_config defaults_for(const std::string& figure) {
    if (!known_figures().count(figure))
        throw config_error("figure: must be one of fig2..fig6, got '" + figure + "'");

    experiment_config c;
    c.figure = figure;
    c.z_a = detail::ula_z_a();
    c.z1 = 50.0 * cmatrix::Identity(2, 2);
    c.z2 = cx(50.0, 20.0) * cmatrix::Identity(2, 2) + 10.0 * cmatrix::Ones(2, 2);

    if (figure == "fig2") {
        c.l = 5;
        c.snr_grid_db = detail::grid(5, 30, 5);
    } else if (figure == "fig3") {
        c.l = 10;
        c.velocities_kmh = {300, 50, 5};
        c.snr_grid_db = detail::grid(0, 30, 5);
    } else if (figure == "fig4") {
        c.l = 10;
        c.velocities_kmh = {300, 50, 5};
        c.snr_grid_db = detail::grid(5, 30, 5);
    } else if (figure == "fig5") {
        c.l = 10;
        c.velocities_kmh = {300, 5};
        c.snr_grid_db = detail::grid(5, 25, 5);
    } else {
        c.l = 10;
        c.velocities_kmh = {300, 5};
        c.snr_grid_db = {10};
        c.sigma_g_type = sigma_g_kind::spacing_table;
        c.spacing = detail::dipole_spacing_table();
    }
    return c;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw config_error(where + ": unknown key '" + item.key() + "'");
}

inline double get_number(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number())
        throw config_error(where + ": must be a number");
    return j.get<double>();
}

inline index get_index(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number_integer())
        throw config_error(where + ": must be an integer");
    return j.get<index>();
}

inline cx get_complex(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw config_error(where + ": complex values are [re, im] pairs");
    return cx(j[0].get<double>(), j[1].get<double>());
}

inline cmatrix get_cmatrix(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw config_error(where + ": must be a non-empty array of rows");
    index rows = index(j.size());
    index cols = -1;
    cmatrix m;
    for (index r = 0; r < rows; ++r) {
        const auto& jr = j[std::size_t(r)];
        if (!jr.is_array())
            throw config_error(where + ": rows must be arrays");
        if (cols < 0) {
            cols = index(jr.size());
            if (cols == 0)
                throw config_error(where + ": rows must be non-empty");
            m.resize(rows, cols);
        } else if (index(jr.size()) != cols) {
            throw config_error(where + ": ragged rows");
        }
        for (index c = 0; c < cols; ++c)
            m(r, c) = get_complex(jr[std::size_t(c)], where);
    }
    return m;
}

inline nlohmann::json complex_json(cx v) {
    return nlohmann::json::array({v.real(), v.imag()});
}

inline nlohmann::json cmatrix_json(const cmatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (index c = 0; c < m.cols(); ++c)
            row.push_back(complex_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

inline void validate(const experiment_config& c) {
    if (!known_figures().count(c.figure))
        throw config_error("figure: must be one of fig2..fig6");

    if (c.m < 1)
        throw config_error("dims.m: must be >= 1");
    if (c.n < 1)
        throw config_error("dims.n: must be >= 1");
    if (c.t < 2 || c.t % 2 != 0)
        throw config_error("dims.t: must be even and >= 2");
    if (c.k != c.t / 2)
        throw config_error("dims.k: must equal T/2");
    if (2 * c.n > c.k)
        throw config_error("dims.n: needs 2N <= K to keep the training rows orthogonal");
    if (c.figure == "fig2" && 4 * c.n > c.k)
        throw config_error("dims.n: fig2 runs a second series at 2N, so it needs 4N <= K");
    if (c.l < 1)
        throw config_error("dims.l: must be >= 1");
    if ((c.figure == "fig5" || c.figure == "fig6") && c.m > c.n)
        throw config_error("dims.m: capacity figures require M <= N");

    if (c.trials < 1)
        throw config_error("trials: must be >= 1");
    if (!(c.carrier_hz > 0.0) || !std::isfinite(c.carrier_hz))
        throw config_error("carrier_hz: must be finite and > 0");
    if (!(c.symbol_period_s > 0.0) || !std::isfinite(c.symbol_period_s))
        throw config_error("symbol_period_s: must be finite and > 0");
    if (!(c.mismatch_loss_db >= 0.0) || !std::isfinite(c.mismatch_loss_db))
        throw config_error("mismatch_loss_db: must be finite and >= 0");

    if (c.snr_grid_db.empty())
        throw config_error("snr_grid_db: must not be empty");
    if (c.figure == "fig6" && c.snr_grid_db.size() != 1)
        throw config_error("snr_grid_db: fig6 sweeps spacing at a single fixed SNR");
    for (double v : c.snr_grid_db)
        if (!std::isfinite(v))
            throw config_error("snr_grid_db: entries must be finite");
    for (double v : c.velocities_kmh)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw config_error("velocities_kmh: entries must be finite and >= 0");
    if (c.figure == "fig2" && !c.velocities_kmh.empty())
        throw config_error("velocities_kmh: fig2 models i.i.d. fading; leave the list empty");
    if (c.figure != "fig2" && c.velocities_kmh.empty())
        throw config_error("velocities_kmh: " + c.figure + " needs at least one velocity");

    auto check_square = [&](const cmatrix& z, const std::string& name) {
        if (z.rows() != c.m || z.cols() != c.m)
            throw config_error(name + ": must be " + std::to_string(c.m) + "x" +
                               std::to_string(c.m));
        if (!z.allFinite())
            throw config_error(name + ": entries must be finite");
    };
    check_square(c.z_a, "z_a");
    check_square(c.z1, "z1");
    check_square(c.z2, "z2");
    double za_scale = std::max(1.0, c.z_a.cwiseAbs().maxCoeff());
    if ((c.z_a - c.z_a.transpose()).cwiseAbs().maxCoeff() > 1e-9 * za_scale)
        throw config_error("z_a: must be symmetric (antenna reciprocity)");

    switch (c.sigma_g_type) {
        case sigma_g_kind::scaled_identity:
            if (!(c.sigma_g_scale > 0.0) || !std::isfinite(c.sigma_g_scale))
                throw config_error("sigma_g.scale: must be finite and > 0");
            break;
        case sigma_g_kind::full_matrix: {
            check_square(c.sigma_g_matrix, "sigma_g.matrix");
            double s = std::max(1.0, c.sigma_g_matrix.cwiseAbs().maxCoeff());
            if ((c.sigma_g_matrix - c.sigma_g_matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * s)
                throw config_error("sigma_g.matrix: must be Hermitian");
            break;
        }
        case sigma_g_kind::spacing_table: {
            if (c.figure != "fig6")
                throw config_error("sigma_g.spacing_table: only fig6 sweeps antenna spacing");
            if (c.m != 2)
                throw config_error("sigma_g.spacing_table: the spacing model is 2x2 only");
            if (c.spacing.empty())
                throw config_error("sigma_g.spacing_table: must not be empty");
            double prev = 0.0;
            for (const spacing_entry& e : c.spacing) {
                if (!(e.d_over_lambda > prev) || !std::isfinite(e.d_over_lambda))
                    throw config_error(
                        "sigma_g.spacing_table: d_over_lambda must be positive and strictly "
                        "increasing");
                if (!std::isfinite(e.z_mutual.real()) || !std::isfinite(e.z_mutual.imag()))
                    throw config_error("sigma_g.spacing_table: z_mutual must be finite");
                if (!(e.rho >= -1.0 && e.rho <= 1.0))
                    throw config_error("sigma_g.spacing_table: rho must lie in [-1, 1]");
                prev = e.d_over_lambda;
            }
            break;
        }
    }
    if (c.figure == "fig6" && c.sigma_g_type != sigma_g_kind::spacing_table)
        throw config_error("sigma_g: fig6 requires a spacing_table");
}

// Applies a JSON object on top of defaults_for(figure); unknown keys are
// rejected rather than ignored so typos cannot silently fall back to the
// defaults.
inline experiment_config parse_config_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw config_error("config: top level must be a JSON object");
    detail::reject_unknown_keys(
        j,
        {"figure", "dims", "carrier_hz", "symbol_period_s", "velocities_kmh", "snr_grid_db",
         "trials", "seed", "z_a", "z1", "z2", "sigma_g", "mismatch_loss_db"},
        "config");
    if (!j.contains("figure") || !j.at("figure").is_string())
        throw config_error("figure: required string, one of fig2..fig6");

    experiment_config c = defaults_for(j.at("figure").get<std::string>());

    if (j.contains("dims")) {
        const auto& d = j.at("dims");
        if (!d.is_object())
            throw config_error("dims: must be an object");
        detail::reject_unknown_keys(d, {"m", "n", "t", "k", "l"}, "dims");
        if (d.contains("m"))
            c.m = detail::get_index(d.at("m"), "dims.m");
        if (d.contains("n"))
            c.n = detail::get_index(d.at("n"), "dims.n");
        if (d.contains("t"))
            c.t = detail::get_index(d.at("t"), "dims.t");
        if (d.contains("k"))
            c.k = detail::get_index(d.at("k"), "dims.k");
        if (d.contains("l"))
            c.l = detail::get_index(d.at("l"), "dims.l");
    }
    if (j.contains("carrier_hz"))
        c.carrier_hz = detail::get_number(j.at("carrier_hz"), "carrier_hz");
    if (j.contains("symbol_period_s"))
        c.symbol_period_s = detail::get_number(j.at("symbol_period_s"), "symbol_period_s");
    if (j.contains("velocities_kmh")) {
        if (!j.at("velocities_kmh").is_array())
            throw config_error("velocities_kmh: must be an array");
        c.velocities_kmh.clear();
        for (const auto& v : j.at("velocities_kmh"))
            c.velocities_kmh.push_back(detail::get_number(v, "velocities_kmh"));
    }
    if (j.contains("snr_grid_db")) {
        if (!j.at("snr_grid_db").is_array())
            throw config_error("snr_grid_db: must be an array");
        c.snr_grid_db.clear();
        for (const auto& v : j.at("snr_grid_db"))
            c.snr_grid_db.push_back(detail::get_number(v, "snr_grid_db"));
    }
    if (j.contains("trials"))
        c.trials = detail::get_index(j.at("trials"), "trials");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer())
            throw config_error("seed: must be an integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("z_a"))
        c.z_a = detail::get_cmatrix(j.at("z_a"), "z_a");
    if (j.contains("z1"))
        c.z1 = detail::get_cmatrix(j.at("z1"), "z1");
    if (j.contains("z2"))
        c.z2 = detail::get_cmatrix(j.at("z2"), "z2");
    if (j.contains("mismatch_loss_db"))
        c.mismatch_loss_db = detail::get_number(j.at("mismatch_loss_db"), "mismatch_loss_db");

    if (j.contains("sigma_g")) {
        const auto& s = j.at("sigma_g");
        if (!s.is_object() || s.size() != 1)
            throw config_error(
                "sigma_g: must be an object with exactly one of 'scale', 'matrix', "
                "'spacing_table'");
        detail::reject_unknown_keys(s, {"scale", "matrix", "spacing_table"}, "sigma_g");
        if (s.contains("scale")) {
            c.sigma_g_type = sigma_g_kind::scaled_identity;
            c.sigma_g_scale = detail::get_number(s.at("scale"), "sigma_g.scale");
        } else if (s.contains("matrix")) {
            c.sigma_g_type = sigma_g_kind::full_matrix;
            c.sigma_g_matrix = detail::get_cmatrix(s.at("matrix"), "sigma_g.matrix");
        } else {
            c.sigma_g_type = sigma_g_kind::spacing_table;
            c.spacing.clear();
            const auto& table = s.at("spacing_table");
            if (!table.is_array())
                throw config_error("sigma_g.spacing_table: must be an array");
            for (const auto& row : table) {
                if (!row.is_object())
                    throw config_error("sigma_g.spacing_table: entries must be objects");
                detail::reject_unknown_keys(row, {"d_over_lambda", "z_mutual", "rho"},
                                            "sigma_g.spacing_table");
                spacing_entry e;
                if (!row.contains("d_over_lambda") || !row.contains("z_mutual") ||
                    !row.contains("rho"))
                    throw config_error(
                        "sigma_g.spacing_table: entries need d_over_lambda, z_mutual, rho");
                e.d_over_lambda =
                    detail::get_number(row.at("d_over_lambda"), "spacing_table.d_over_lambda");
                e.z_mutual = detail::get_complex(row.at("z_mutual"), "spacing_table.z_mutual");
                e.rho = detail::get_number(row.at("rho"), "spacing_table.rho");
                c.spacing.push_back(e);
            }
        }
    }

    validate(c);
    return c;
}

inline experiment_config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("config: cannot open '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw config_error("config: '" + path + "' is not valid JSON");
    return parse_config_json(j);
}

// Canonical JSON form; nlohmann orders object keys, so the dump (and the
// digest over it) is deterministic.
inline nlohmann::json serialize(const experiment_config& c) {
    nlohmann::json j;
    j["figure"] = c.figure;
    j["dims"] = {{"m", c.m}, {"n", c.n}, {"t", c.t}, {"k", c.k}, {"l", c.l}};
    j["carrier_hz"] = c.carrier_hz;
    j["symbol_period_s"] = c.symbol_period_s;
    j["velocities_kmh"] = c.velocities_kmh;
    j["snr_grid_db"] = c.snr_grid_db;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["z_a"] = detail::cmatrix_json(c.z_a);
    j["z1"] = detail::cmatrix_json(c.z1);
    j["z2"] = detail::cmatrix_json(c.z2);
    switch (c.sigma_g_type) {
        case sigma_g_kind::scaled_identity:
            j["sigma_g"] = {{"scale", c.sigma_g_scale}};
            break;
        case sigma_g_kind::full_matrix:
            j["sigma_g"] = {{"matrix", detail::cmatrix_json(c.sigma_g_matrix)}};
            break;
        case sigma_g_kind::spacing_table: {
            nlohmann::json table = nlohmann::json::array();
            for (const spacing_entry& e : c.spacing)
                table.push_back({{"d_over_lambda", e.d_over_lambda},
                                 {"z_mutual", detail::complex_json(e.z_mutual)},
                                 {"rho", e.rho}});
            j["sigma_g"] = {{"spacing_table", table}};
            break;
        }
    }
    j["mismatch_loss_db"] = c.mismatch_loss_db;
    return j;
}

// FNV-1a over the canonical dump; embedded in CSV headers so every row is
// traceable to the exact configuration that produced it.
inline std::uint64_t digest(const experiment_config& c) {
    std::string s = serialize(c).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char b : s) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace zest::config
