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
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "zest/config.hpp"
#include "zest/experiment.hpp"
#include "zest/types.hpp"

namespace zest::svg {

namespace detail {

struct chart_spec {
    std::string x_col;
    std::string group_col;
    std::string y_col;
    std::string x_label;
    std::string y_label;
    std::string group_prefix;
    std::string group_suffix;
    bool y_to_db = false;  // plot 20 log10(y)
};

inline chart_spec spec_for(const std::string& figure) {
    chart_spec s;
    s.x_col = "snr_db";
    s.x_label = "SNR (dB)";
    s.group_col = "v_kmh";
    s.group_prefix = "v=";
    s.group_suffix = " km/h";
    if (figure == "fig2") {
        s.group_col = "n";
        s.group_prefix = "N=";
        s.group_suffix = "";
        s.y_col = "rmse";
        s.y_label = "relative RMSE (dB)";
        s.y_to_db = true;
    } else if (figure == "fig3") {
        s.y_col = "rmse";
        s.y_label = "relative RMSE (dB)";
        s.y_to_db = true;
    } else if (figure == "fig4") {
        s.y_col = "excess_db";
        s.y_label = "excess power (dB)";
    } else if (figure == "fig5") {
        s.y_col = "gain_pct";
        s.y_label = "capacity gain (%)";
    } else if (figure == "fig6") {
        s.x_col = "d_over_lambda";
        s.x_label = "antenna spacing (wavelengths)";
        s.y_col = "gain_pct";
        s.y_label = "capacity gain (%)";
    } else {
        throw invalid_input("svg: no chart layout for figure '" + figure + "'");
    }
    return s;
}

inline std::size_t column_index(const experiment::result_table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return i;
    throw shape_error("svg: result table has no column '" + name + "'");
}

struct series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Fixed-precision formatting keeps the output byte-stable.
inline std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

// Renders the table as a standalone line chart. One polyline per series
// (packet budget or fading speed), headline metric against the sweep axis,
// fixed geometry and palette so equal tables give equal bytes.
inline std::string render_chart(const experiment::result_table& table,
                                const config::experiment_config& cfg) {
    const detail::chart_spec spec = detail::spec_for(cfg.figure);
    const std::size_t xc = detail::column_index(table, spec.x_col);
    const std::size_t gc = detail::column_index(table, spec.group_col);
    const std::size_t yc = detail::column_index(table, spec.y_col);
    if (table.rows.empty()) throw invalid_input("svg: empty result table");

    std::vector<detail::series> groups;
    for (const auto& row : table.rows) {
        const double key = row[gc];
        detail::series* s = nullptr;
        for (auto& g : groups)
            if (g.label == spec.group_prefix + detail::tick(key) + spec.group_suffix) s = &g;
        if (s == nullptr) {
            groups.push_back({spec.group_prefix + detail::tick(key) + spec.group_suffix, {}, {}});
            s = &groups.back();
        }
        double y = row[yc];
        if (spec.y_to_db) y = 20.0 * std::log10(std::max(y, 1e-300));
        s->x.push_back(row[xc]);
        s->y.push_back(y);
    }

    double x_min = groups[0].x[0], x_max = x_min;
    double y_min = groups[0].y[0], y_max = y_min;
    for (const auto& g : groups)
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            x_min = std::min(x_min, g.x[i]);
            x_max = std::max(x_max, g.x[i]);
            y_min = std::min(y_min, g.y[i]);
            y_max = std::max(y_max, g.y[i]);
        }
    if (x_max - x_min < 1e-12) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    const double pad = std::max(0.05 * (y_max - y_min), 1e-6);
    y_min -= pad;
    y_max += pad;

    const double width = 640, height = 420;
    const double left = 70, right = 620, top = 40, bottom = 370;
    auto px = [&](double v) { return left + (v - x_min) / (x_max - x_min) * (right - left); };
    auto py = [&](double v) { return bottom - (v - y_min) / (y_max - y_min) * (bottom - top); };

    static const char* palette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + detail::num(width) +
           " " + detail::num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"" + detail::num(width) + "\" height=\"" + detail::num(height) +
           "\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + detail::num((left + right) / 2) +
           "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + cfg.figure + "</text>\n";

    // Axes frame and ticks.
    out += "<rect x=\"" + detail::num(left) + "\" y=\"" + detail::num(top) + "\" width=\"" +
           detail::num(right - left) + "\" height=\"" + detail::num(bottom - top) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 4.0;
        const double yv = y_min + (y_max - y_min) * i / 4.0;
        out += "<line x1=\"" + detail::num(px(xv)) + "\" y1=\"" + detail::num(bottom) +
               "\" x2=\"" + detail::num(px(xv)) + "\" y2=\"" + detail::num(bottom + 5) +
               "\" stroke=\"#333333\"/>\n";
        out += "<text x=\"" + detail::num(px(xv)) + "\" y=\"" + detail::num(bottom + 18) +
               "\" text-anchor=\"middle\">" + detail::tick(xv) + "</text>\n";
        out += "<line x1=\"" + detail::num(left - 5) + "\" y1=\"" + detail::num(py(yv)) +
               "\" x2=\"" + detail::num(left) + "\" y2=\"" + detail::num(py(yv)) +
               "\" stroke=\"#333333\"/>\n";
        out += "<text x=\"" + detail::num(left - 8) + "\" y=\"" + detail::num(py(yv) + 4) +
               "\" text-anchor=\"end\">" + detail::tick(yv) + "</text>\n";
    }
    out += "<text x=\"" + detail::num((left + right) / 2) + "\" y=\"" +
           detail::num(height - 12) + "\" text-anchor=\"middle\">" + spec.x_label + "</text>\n";
    out += "<text x=\"16\" y=\"" + detail::num((top + bottom) / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           detail::num((top + bottom) / 2) + ")\">" + spec.y_label + "</text>\n";

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const char* color = palette[gi % 6];
        std::string points;
        for (std::size_t i = 0; i < groups[gi].x.size(); ++i) {
            if (!points.empty()) points += " ";
            points += detail::num(px(groups[gi].x[i])) + "," + detail::num(py(groups[gi].y[i]));
        }
        out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.6\"/>\n";
        for (std::size_t i = 0; i < groups[gi].x.size(); ++i)
            out += "<circle cx=\"" + detail::num(px(groups[gi].x[i])) + "\" cy=\"" +
                   detail::num(py(groups[gi].y[i])) + "\" r=\"2.6\" fill=\"" + color + "\"/>\n";

        const double ly = top + 16 + 16 * double(gi);
        out += "<line x1=\"" + detail::num(right - 120) + "\" y1=\"" + detail::num(ly - 4) +
               "\" x2=\"" + detail::num(right - 100) + "\" y2=\"" + detail::num(ly - 4) +
               "\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.6\"/>\n";
        out += "<text x=\"" + detail::num(right - 94) + "\" y=\"" + detail::num(ly) + "\">" +
               groups[gi].label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline void write_svg_file(const std::string& path, const experiment::result_table& table,
                           const config::experiment_config& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("svg: cannot open '" + path + "' for writing");
    out << render_chart(table, cfg);
    if (!out) throw config_error("svg: write to '" + path + "' failed");
}

}  // namespace zest::svg
