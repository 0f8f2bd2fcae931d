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

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zest/bounds.hpp"
#include "zest/channel.hpp"
#include "zest/circuit.hpp"
#include "zest/config.hpp"
#include "zest/estimate.hpp"
#include "zest/experiment.hpp"
#include "zest/obs_io.hpp"
#include "zest/observe.hpp"
#include "zest/rng.hpp"
#include "zest/svg.hpp"
#include "zest/types.hpp"

namespace {

using namespace zest;

// Exit codes: 0 success, 2 validation/schema problems, 3 numerical
// degeneracy (singular estimate, or more than 10% degenerate trials).
constexpr int exit_validation = 2;
constexpr int exit_degenerate = 3;

struct common_flags {
    std::string config_path;
    std::uint64_t seed = 0;
    long long trials = 0;
    bool have_seed = false;
    bool have_trials = false;
};

config::experiment_config resolve_config(const std::string& figure, const common_flags& fl) {
    config::experiment_config cfg;
    if (!fl.config_path.empty()) {
        cfg = config::parse_config(fl.config_path);
        if (!figure.empty() && cfg.figure != figure)
            throw config_error("config file is for '" + cfg.figure +
                               "' but the command asked for '" + figure + "'");
    } else {
        cfg = config::defaults_for(figure.empty() ? "fig2" : figure);
    }
    if (fl.have_seed) cfg.seed = fl.seed;
    if (fl.have_trials) {
        if (fl.trials < 1) throw config_error("trials: must be >= 1");
        cfg.trials = zest::index(fl.trials);
    }
    config::validate(cfg);
    return cfg;
}

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    if (dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

int cmd_run(const std::string& figure, const common_flags& fl, const std::string& out_dir,
            zest::index threads, bool svg_too) {
    config::experiment_config cfg = resolve_config(figure, fl);

    auto t0 = std::chrono::steady_clock::now();
    experiment::run_result res = experiment::run_experiment(cfg, threads);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string csv_path = join_path(out_dir, cfg.figure + ".csv");
    experiment::write_csv_file(csv_path, res.table, cfg);
    std::printf("wrote %s: %zu rows in %.2f s\n", csv_path.c_str(), res.table.rows.size(), secs);
    if (svg_too) {
        std::string svg_path = join_path(out_dir, cfg.figure + ".svg");
        svg::write_svg_file(svg_path, res.table, cfg);
        std::printf("wrote %s\n", svg_path.c_str());
    }

    if (res.degeneracy_exceeded) {
        std::fprintf(stderr,
                     "error: degenerate trials exceeded 10%% at one or more sweep points "
                     "(%lld of %lld total)\n",
                     static_cast<long long>(res.degenerate_trials),
                     static_cast<long long>(res.total_trials));
        return exit_degenerate;
    }
    return 0;
}

int cmd_simulate(const common_flags& fl, double snr_db, const std::string& out_path) {
    config::experiment_config cfg = resolve_config("", fl);

    experiment::model md = experiment::calibrate(cfg.z_a, cfg.z1, cfg.z2,
                                                 experiment::detail::sigma_g_shape_of(cfg));
    experiment::noise_terms nt = experiment::noise_for(snr_db, cfg.n, cfg.t);

    // Clarke-correlated packets at the first configured speed; i.i.d.
    // packets when the config carries no fading speeds (the fig2 bench).
    rmatrix c_h = cfg.velocities_kmh.empty()
                      ? rmatrix(rmatrix::Identity(cfg.l, cfg.l))
                      : experiment::detail::correlation_for(cfg.velocities_kmh.front(),
                                                            cfg.carrier_hz,
                                                            cfg.symbol_period_s, cfg.l);

    observe::training_pair x = observe::make_training(cfg.n, cfg.t, double(cfg.n));
    rng::stream g(cfg.seed, {101, 0, 0});
    cmatrix h = channel::sample_channel(md.sigma_h, c_h, cfg.n, g);
    observe::observation_set w = observe::simulate_packets(h, md.f, x, nt.sigma_n2, g);

    char digest_hex[17];
    std::snprintf(digest_hex, sizeof digest_hex, "%016llx",
                  static_cast<unsigned long long>(config::digest(cfg)));
    obs_io::save(out_path, w, x, snr_db, cfg.seed, digest_hex);
    std::printf("wrote %s: M=%lld N=%lld T=%lld L=%lld at %.6g dB\n", out_path.c_str(),
                static_cast<long long>(cfg.m), static_cast<long long>(cfg.n),
                static_cast<long long>(cfg.t), static_cast<long long>(cfg.l), snr_db);
    return 0;
}

int cmd_estimate(const std::string& in_path, const common_flags& fl,
                 const std::string& out_path) {
    obs_io::container c = obs_io::load(in_path);

    config::experiment_config cfg;
    if (!fl.config_path.empty()) {
        cfg = config::parse_config(fl.config_path);
        if (cfg.m != c.m || cfg.n != c.n || cfg.t != c.t || cfg.l != c.l)
            throw shape_error("observations in '" + in_path +
                              "' were generated for different dimensions than the config");
    } else {
        cfg = config::defaults_for("fig2");
        cfg.m = c.m;
        cfg.n = c.n;
        cfg.t = c.t;
        cfg.k = c.k;
        cfg.l = c.l;
    }

    nlohmann::json out;
    int code = 0;
    try {
        observe::training_pair x = observe::make_training(c.n, c.t, c.power);
        observe::statistic y = observe::sufficient_statistic(c.obs, x, c.l);
        estimate::sample_cov s = estimate::sample_covariance(y);
        estimate::estimate_result est = estimate::estimate_f_sigma(s.s, y.sigma2);
        cmatrix za_hat = circuit::recover_za(est.f_hat, cfg.z1, cfg.z2);
        cmatrix za_tilde = circuit::symmetrize_za(za_hat);

        out["f_hat"] = config::detail::cmatrix_json(est.f_hat);
        out["sigma_h_hat"] = config::detail::cmatrix_json(est.sigma_h_hat);
        out["z_a_hat"] = config::detail::cmatrix_json(za_hat);
        out["z_a_tilde"] = config::detail::cmatrix_json(za_tilde);
        out["u11_condition"] = est.u11_condition;
        out["spectral_gap"] = est.spectral_gap;
        out["clipped_modes"] = est.clipped_modes;
        out["sigma2"] = y.sigma2;
        out["samples"] = s.samples;
    } catch (const degenerate_estimate_error& e) {
        out["error"] = "degenerate_estimate";
        out["message"] = e.what();
        out["u11_condition"] = e.condition_number;
        out["spectral_gap"] = e.spectral_gap;
        code = exit_degenerate;
    } catch (const near_singular_error& e) {
        out["error"] = "near_singular";
        out["message"] = e.what();
        out["condition_number"] = e.condition_number;
        code = exit_degenerate;
    }

    std::string text = out.dump(2) + "\n";
    std::fputs(text.c_str(), stdout);
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw config_error("estimate: cannot open '" + out_path + "' for writing");
        f << text;
    }
    return code;
}

int cmd_bounds(const std::string& figure, const common_flags& fl, const std::string& out_path) {
    config::experiment_config cfg = resolve_config(figure, fl);

    experiment::model md = experiment::calibrate(cfg.z_a, cfg.z1, cfg.z2,
                                                 experiment::detail::sigma_g_shape_of(cfg));
    const bool iid = cfg.figure == "fig2";

    experiment::result_table table;
    table.columns = {"snr_db", iid ? "n" : "v_kmh", "crb_rel", "mcb_nl", "mcb_n"};
    std::vector<double> series = iid ? std::vector<double>{double(cfg.n), double(2 * cfg.n)}
                                     : cfg.velocities_kmh;
    for (double sv : series) {
        zest::index n = iid ? zest::index(sv) : cfg.n;
        rmatrix c_h = iid ? rmatrix(rmatrix::Identity(cfg.l, cfg.l))
                          : experiment::detail::correlation_for(sv, cfg.carrier_hz,
                                                                cfg.symbol_period_s, cfg.l);
        rvector d = bounds::decorrelate_modes(c_h);
        for (double snr_db : cfg.snr_grid_db) {
            experiment::noise_terms nt = experiment::noise_for(snr_db, n, cfg.t);
            double crb =
                bounds::crb_relative_f(bounds::fim(md.f, md.sigma_h, nt.sigma2, n, d), md.f)
                    .value;
            double mcb_nl =
                bounds::mcb_relative_f(md.f, md.sigma_h, nt.sigma2, n * cfg.l, cfg.m).value;
            double mcb_n = bounds::mcb_relative_f(md.f, md.sigma_h, nt.sigma2, n, cfg.m).value;
            table.rows.push_back({snr_db, sv, crb, mcb_nl, mcb_n});
        }
    }

    if (out_path.empty()) {
        experiment::write_csv(std::cout, table, cfg);
    } else {
        experiment::write_csv_file(out_path, table, cfg);
        std::printf("wrote %s: %zu rows\n", out_path.c_str(), table.rows.size());
    }
    return 0;
}

int cmd_gen_config(const std::string& figure, const common_flags& fl,
                   const std::string& out_path) {
    config::experiment_config cfg = config::defaults_for(figure);
    if (fl.have_seed) cfg.seed = fl.seed;
    if (fl.have_trials) {
        if (fl.trials < 1) throw config_error("trials: must be >= 1");
        cfg.trials = zest::index(fl.trials);
    }
    config::validate(cfg);

    std::string text = config::serialize(cfg).dump(2) + "\n";
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw config_error("gen-config: cannot open '" + out_path + "' for writing");
        f << text;
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zest: load-switched antenna impedance estimation experiments"};
    app.require_subcommand(1);

    std::set<std::string> figures = config::known_figures();

    common_flags fl;
    std::string figure, out_dir = ".", out_path, in_path;
    long long threads = 1;
    double snr_db = 30.0;
    bool svg_too = false;

    CLI::App* run = app.add_subcommand("run", "run a figure sweep and write CSV");
    run->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember(figures));
    run->add_option("--config", fl.config_path, "JSON config file");
    run->add_option("--seed", fl.seed, "RNG seed override");
    run->add_option("--trials", fl.trials, "Monte Carlo trials per sweep point");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads for the trial loop");
    run->add_flag("--svg", svg_too, "also write an SVG line chart");

    CLI::App* sim = app.add_subcommand("simulate", "draw one observation set and save it");
    sim->add_option("--config", fl.config_path, "JSON config file");
    sim->add_option("--seed", fl.seed, "RNG seed override");
    sim->add_option("--snr", snr_db, "symbol SNR in dB");
    sim->add_option("--out", out_path, "observation file path");

    CLI::App* est = app.add_subcommand("estimate", "estimate F, Sigma_h, Z_A from saved "
                                                   "observations, print JSON");
    est->add_option("observations", in_path, "observation container file")->required();
    est->add_option("--config", fl.config_path, "JSON config file");
    est->add_option("--out", out_path, "also write the JSON to this path");

    CLI::App* bnd = app.add_subcommand("bounds", "emit CRB and MCB reference curves as CSV");
    bnd->add_option("figure", figure, "figure id")->check(CLI::IsMember(figures));
    bnd->add_option("--config", fl.config_path, "JSON config file");
    bnd->add_option("--out", out_path, "CSV path (stdout when omitted)");

    CLI::App* gen = app.add_subcommand("gen-config", "print the default config for a figure");
    gen->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember(figures));
    gen->add_option("--seed", fl.seed, "RNG seed override");
    gen->add_option("--trials", fl.trials, "Monte Carlo trials per sweep point");
    gen->add_option("--out", out_path, "config file path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    fl.have_seed = (run->count("--seed") + sim->count("--seed") + gen->count("--seed")) > 0;
    fl.have_trials = (run->count("--trials") + gen->count("--trials")) > 0;

    try {
        if (run->parsed()) {
            if (threads < 1) throw config_error("threads: must be >= 1");
            return cmd_run(figure, fl, out_dir, zest::index(threads), svg_too);
        }
        if (sim->parsed())
            return cmd_simulate(fl, snr_db, out_path.empty() ? "observations.zobs" : out_path);
        if (est->parsed()) return cmd_estimate(in_path, fl, out_path);
        if (bnd->parsed()) return cmd_bounds(figure, fl, out_path);
        if (gen->parsed()) return cmd_gen_config(figure, fl, out_path);
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const invalid_input& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
