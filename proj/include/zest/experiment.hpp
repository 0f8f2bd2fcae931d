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
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "zest/bounds.hpp"
#include "zest/channel.hpp"
#include "zest/circuit.hpp"
#include "zest/config.hpp"
#include "zest/estimate.hpp"
#include "zest/metrics.hpp"
#include "zest/observe.hpp"
#include "zest/rng.hpp"
#include "zest/types.hpp"

namespace zest::experiment {

// Population model for one circuit, calibrated so the mean channel power
// sigma_H^2 = Tr(Sigma_h)/M is exactly 1; the symbol SNR gamma then fixes
// the port noise as sigma_n2 = P / gamma with training power P = N (which
// also makes X_i X_i^H = K I).
struct model {
    cmatrix z_a;
    cmatrix f;
    cmatrix sigma_h;  // Tr/M = 1
    cmatrix sigma_g;  // rescaled consistently with sigma_h
};

inline model calibrate(const cmatrix& z_a, const cmatrix& z1, const cmatrix& z2,
                       const cmatrix& sigma_g_shape) {
    model md;
    md.z_a = z_a;
    md.f = circuit::compute_f(z_a, z1, z2);
    cmatrix raw = circuit::compute_sigma_h(z_a, z1, sigma_g_shape);
    double tr = raw.trace().real();
    if (!(tr > 0.0))
        throw singular_model_error("calibrate: Sigma_h has nonpositive trace");
    double scale = double(z_a.rows()) / tr;
    md.sigma_g = scale * sigma_g_shape;
    md.sigma_h = scale * raw;
    if (std::abs(md.sigma_h.trace().real() / double(z_a.rows()) - 1.0) > 1e-10)
        throw error("calibrate: sigma_H^2 normalization failed");
    return md;
}

struct noise_terms {
    double sigma_n2 = 0.0;  // per-port noise variance
    double sigma2 = 0.0;    // reduced-statistic noise variance 2N/(gamma T)
};

inline noise_terms noise_for(double gamma_db, index n, index t) {
    double gamma = std::pow(10.0, gamma_db / 10.0);
    noise_terms out;
    out.sigma_n2 = double(n) / gamma;
    out.sigma2 = 2.0 * double(n) * out.sigma_n2 / (double(n) * double(t));
    double want = 2.0 * double(n) / (gamma * double(t));
    if (std::abs(out.sigma2 - want) > 1e-10 * want)
        throw error("noise_for: sigma2 calibration failed");
    return out;
}

struct result_table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct run_result {
    result_table table;
    index total_trials = 0;
    index degenerate_trials = 0;
    // true when any sweep point lost more than 10% of its trials to
    // degenerate estimates; the CLI maps this to exit code 3
    bool degeneracy_exceeded = false;
};

namespace detail {

// One Monte Carlo batch at a fixed sweep point.  Stream keys are
// {series, trial, substream} and never include the sweep point, so the
// same trial reuses the same channel and (scaled) noise draws across the
// sweep; results are slot-indexed by trial, which makes the reduction
// independent of the thread count.
struct trial_batch {
    std::vector<double> sq;   // ||F_hat - F||_F^2, usable trials only, in trial order
    std::vector<cmatrix> za;  // symmetrized impedance estimates, same order
    index degenerate = 0;
};

inline trial_batch run_trials(const model& md, const cmatrix& z1, const cmatrix& z2,
                              const rmatrix& c_h, index n, index t, const noise_terms& nt,
                              std::uint64_t seed, std::uint64_t series_id, index trials,
                              bool want_za, index threads) {
    const index l = c_h.rows();
    const observe::training_pair x = observe::make_training(n, t, double(n));

    std::vector<double> sq_slot(std::size_t(trials),
                                std::numeric_limits<double>::quiet_NaN());
    std::vector<cmatrix> za_slot(want_za ? std::size_t(trials) : 0);
    std::vector<unsigned char> degen_slot(std::size_t(trials), 0);

    auto worker = [&](index begin, index end) {
        for (index tr = begin; tr < end; ++tr) {
            rng::stream g_h(seed, {series_id, std::uint64_t(tr), 0});
            rng::stream g_n(seed, {series_id, std::uint64_t(tr), 1});
            cmatrix h = channel::sample_channel(md.sigma_h, c_h, n, g_h);
            observe::observation_set w = observe::simulate_packets(h, md.f, x, nt.sigma_n2, g_n);
            observe::statistic y = observe::sufficient_statistic(w, x, l);
            estimate::sample_cov s = estimate::sample_covariance(y);
            try {
                estimate::estimate_result est = estimate::estimate_f_sigma(s.s, y.sigma2);
                sq_slot[std::size_t(tr)] = (est.f_hat - md.f).squaredNorm();
                if (want_za)
                    za_slot[std::size_t(tr)] =
                        circuit::symmetrize_za(circuit::recover_za(est.f_hat, z1, z2));
            } catch (const degenerate_estimate_error&) {
                degen_slot[std::size_t(tr)] = 1;
            } catch (const near_singular_error&) {
                degen_slot[std::size_t(tr)] = 1;
            }
        }
    };

    if (threads <= 1 || trials < 2) {
        worker(0, trials);
    } else {
        index workers = std::min<index>(threads, trials);
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        index chunk = (trials + workers - 1) / workers;
        for (index w = 0; w < workers; ++w) {
            index begin = w * chunk;
            index end = std::min(trials, begin + chunk);
            if (begin >= end)
                break;
            pool.emplace_back(worker, begin, end);
        }
        for (std::thread& th : pool)
            th.join();
    }

    trial_batch out;
    out.sq.reserve(std::size_t(trials));
    for (index tr = 0; tr < trials; ++tr) {
        if (degen_slot[std::size_t(tr)]) {
            ++out.degenerate;
            continue;
        }
        out.sq.push_back(sq_slot[std::size_t(tr)]);
        if (want_za)
            out.za.push_back(za_slot[std::size_t(tr)]);
    }
    return out;
}

struct rmse_stat {
    double value = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
};

// Relative RMSE with a delta-method standard error from the per-trial
// squared errors.
inline rmse_stat relative_rmse_of(const std::vector<double>& sq, double f_norm) {
    rmse_stat out;
    if (sq.empty())
        return out;
    double n = double(sq.size());
    double sum = 0.0, sum2 = 0.0;
    for (double v : sq) {
        sum += v;
        sum2 += v * v;
    }
    double mean = sum / n;
    out.value = std::sqrt(mean) / f_norm;
    if (sq.size() > 1 && mean > 0.0) {
        double var = (sum2 - sum * sum / n) / (n - 1.0);
        out.se = std::sqrt(var / n) / (2.0 * std::sqrt(mean) * f_norm);
    } else {
        out.se = 0.0;
    }
    return out;
}

// Horizontal distance, in dB of SNR, from a capacity level to the
// perfect-match curve gamma -> capacity_upper(gamma); bisection on a
// monotone function.
inline double snr_gap_db(const cmatrix& sigma_tilde, index n, double level, double center_db) {
    double lo = center_db - 10.0;
    double hi = center_db + 20.0;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (metrics::capacity_upper(sigma_tilde, std::pow(10.0, mid / 10.0), n) < level)
            lo = mid;
        else
            hi = mid;
    }
    return center_db - 0.5 * (lo + hi);
}

inline rmatrix correlation_for(double v_kmh, double carrier_hz, double period_s, index l) {
    double fd = channel::doppler_hz(v_kmh / 3.6, carrier_hz);
    return channel::clarke_correlation(fd, period_s, l);
}

inline cmatrix sigma_g_shape_of(const config::experiment_config& c) {
    if (c.sigma_g_type == config::sigma_g_kind::full_matrix)
        return c.sigma_g_matrix;
    return c.sigma_g_scale * cmatrix::Identity(c.m, c.m);
}

struct point_outcome {
    index attempted = 0;
    index degenerate = 0;
};

inline void track(run_result& r, const point_outcome& p) {
    r.total_trials += p.attempted;
    r.degenerate_trials += p.degenerate;
    if (p.degenerate * 10 > p.attempted)
        r.degeneracy_exceeded = true;
}

inline run_result run_rmse_figure(const config::experiment_config& cfg, index threads) {
    const bool iid = cfg.figure == "fig2";
    run_result r;
    if (iid)
        r.table.columns = {"snr_db",  "n",          "rmse",   "rmse_se", "trials",
                           "usable",  "degenerate", "crb_rel", "mcb_nl",  "mcb_n"};
    else
        r.table.columns = {"snr_db", "v_kmh",      "rmse",   "rmse_se", "trials",
                           "usable", "degenerate", "crb_rel"};

    model md = calibrate(cfg.z_a, cfg.z1, cfg.z2, sigma_g_shape_of(cfg));
    double f_norm = md.f.norm();

    std::vector<double> series = iid ? std::vector<double>{double(cfg.n), double(2 * cfg.n)}
                                     : cfg.velocities_kmh;
    for (std::size_t s = 0; s < series.size(); ++s) {
        index n = iid ? index(series[s]) : cfg.n;
        rmatrix c_h = iid ? rmatrix(rmatrix::Identity(cfg.l, cfg.l))
                          : correlation_for(series[s], cfg.carrier_hz, cfg.symbol_period_s,
                                            cfg.l);
        rvector d = bounds::decorrelate_modes(c_h);
        for (double snr_db : cfg.snr_grid_db) {
            noise_terms nt = noise_for(snr_db, n, cfg.t);
            trial_batch batch = run_trials(md, cfg.z1, cfg.z2, c_h, n, cfg.t, nt, cfg.seed,
                                           std::uint64_t(s), cfg.trials, false, threads);
            rmse_stat st = relative_rmse_of(batch.sq, f_norm);
            double crb =
                bounds::crb_relative_f(bounds::fim(md.f, md.sigma_h, nt.sigma2, n, d), md.f)
                    .value;

            std::vector<double> row = {snr_db,
                                       series[s],
                                       st.value,
                                       st.se,
                                       double(cfg.trials),
                                       double(index(batch.sq.size())),
                                       double(batch.degenerate)};
            row.push_back(crb);
            if (iid) {
                row.push_back(bounds::mcb_relative_f(md.f, md.sigma_h, nt.sigma2, n * cfg.l,
                                                     cfg.m)
                                  .value);
                row.push_back(
                    bounds::mcb_relative_f(md.f, md.sigma_h, nt.sigma2, n, cfg.m).value);
            }
            r.table.rows.push_back(row);
            track(r, {cfg.trials, batch.degenerate});
        }
    }
    return r;
}

inline run_result run_excess_figure(const config::experiment_config& cfg, index threads) {
    run_result r;
    r.table.columns = {"snr_db", "v_kmh",      "excess_db", "trials",
                       "usable", "degenerate", "excluded"};

    model md = calibrate(cfg.z_a, cfg.z1, cfg.z2, sigma_g_shape_of(cfg));
    for (std::size_t s = 0; s < cfg.velocities_kmh.size(); ++s) {
        rmatrix c_h =
            correlation_for(cfg.velocities_kmh[s], cfg.carrier_hz, cfg.symbol_period_s, cfg.l);
        for (double snr_db : cfg.snr_grid_db) {
            noise_terms nt = noise_for(snr_db, cfg.n, cfg.t);
            trial_batch batch = run_trials(md, cfg.z1, cfg.z2, c_h, cfg.n, cfg.t, nt, cfg.seed,
                                           std::uint64_t(s), cfg.trials, true, threads);
            circuit::excess_power_result xp = circuit::excess_power(batch.za, md.z_a, md.sigma_g);
            r.table.rows.push_back({snr_db, cfg.velocities_kmh[s], xp.xp_db,
                                    double(cfg.trials), double(index(batch.za.size())),
                                    double(batch.degenerate), double(xp.excluded)});
            track(r, {cfg.trials, batch.degenerate});
        }
    }
    return r;
}

// Shared by fig5 (SNR sweep) and fig6 (spacing sweep at fixed SNR): an
// originally mismatched receiver loses mismatch_loss_db; matching to the
// estimated impedance recovers all of it except the excess power, and the
// perfect-match genie additionally pays no training deflation.
inline std::vector<double> capacity_row(const model& md, const config::experiment_config& cfg,
                                        double snr_db, double xp_db, bool with_gap,
                                        std::uint64_t series_id, std::uint64_t point_id) {
    double g_mis = std::pow(10.0, snr_db / 10.0);
    double g_est = std::pow(10.0, (snr_db + cfg.mismatch_loss_db - xp_db) / 10.0);
    double g_pm = std::pow(10.0, (snr_db + cfg.mismatch_loss_db) / 10.0);

    double c_mis = metrics::capacity_upper(md.sigma_h, metrics::effective_snr(g_mis, cfg.n, cfg.t),
                                           cfg.n);
    double eff_est = metrics::effective_snr(g_est, cfg.n, cfg.t);
    double c_est = metrics::capacity_upper(md.sigma_h, eff_est, cfg.n);
    double c_pm = metrics::capacity_upper(md.sigma_h, g_pm, cfg.n);

    rng::stream g_cap(cfg.seed, {series_id, point_id, 9});
    metrics::mc_estimate cl = metrics::capacity_lower_mc(md.sigma_h, eff_est, cfg.n,
                                                         cfg.trials, g_cap);

    std::vector<double> row = {xp_db,
                               c_mis,
                               c_est,
                               c_pm,
                               (c_est - c_mis) / c_mis * 100.0,
                               cl.mean,
                               cl.std_error};
    if (with_gap)
        row.insert(row.begin() + 5,
                   snr_gap_db(md.sigma_h, cfg.n, c_est, snr_db + cfg.mismatch_loss_db));
    return row;
}

inline run_result run_capacity_snr_figure(const config::experiment_config& cfg, index threads) {
    run_result r;
    r.table.columns = {"snr_db",     "v_kmh",    "excess_db",   "c_mismatch",
                       "c_estimate", "c_perfect", "gain_pct",    "snr_gap_db",
                       "c_lower_mean", "c_lower_se", "trials",      "usable",
                       "degenerate"};

    model md = calibrate(cfg.z_a, cfg.z1, cfg.z2, sigma_g_shape_of(cfg));
    for (std::size_t s = 0; s < cfg.velocities_kmh.size(); ++s) {
        rmatrix c_h =
            correlation_for(cfg.velocities_kmh[s], cfg.carrier_hz, cfg.symbol_period_s, cfg.l);
        for (std::size_t p = 0; p < cfg.snr_grid_db.size(); ++p) {
            double snr_db = cfg.snr_grid_db[p];
            noise_terms nt = noise_for(snr_db, cfg.n, cfg.t);
            trial_batch batch = run_trials(md, cfg.z1, cfg.z2, c_h, cfg.n, cfg.t, nt, cfg.seed,
                                           std::uint64_t(s), cfg.trials, true, threads);
            circuit::excess_power_result xp = circuit::excess_power(batch.za, md.z_a, md.sigma_g);

            std::vector<double> row = {snr_db, cfg.velocities_kmh[s]};
            std::vector<double> cap = capacity_row(md, cfg, snr_db, xp.xp_db, true,
                                                   std::uint64_t(s), std::uint64_t(p));
            row.insert(row.end(), cap.begin(), cap.end());
            row.push_back(double(cfg.trials));
            row.push_back(double(index(batch.za.size())));
            row.push_back(double(batch.degenerate));
            r.table.rows.push_back(row);
            track(r, {cfg.trials, batch.degenerate});
        }
    }
    return r;
}

inline run_result run_capacity_spacing_figure(const config::experiment_config& cfg,
                                              index threads) {
    run_result r;
    r.table.columns = {"d_over_lambda", "v_kmh",     "excess_db",    "c_mismatch",
                       "c_estimate",    "c_perfect", "gain_pct",     "c_lower_mean",
                       "c_lower_se",    "trials",    "usable",       "degenerate"};

    const double snr_db = cfg.snr_grid_db.front();
    for (std::size_t s = 0; s < cfg.velocities_kmh.size(); ++s) {
        rmatrix c_h =
            correlation_for(cfg.velocities_kmh[s], cfg.carrier_hz, cfg.symbol_period_s, cfg.l);
        for (std::size_t p = 0; p < cfg.spacing.size(); ++p) {
            const config::spacing_entry& e = cfg.spacing[p];
            cmatrix z_a = cfg.z_a;
            z_a(0, 1) = e.z_mutual;
            z_a(1, 0) = e.z_mutual;
            cmatrix shape(2, 2);
            shape << 1.0, e.rho, e.rho, 1.0;
            model md = calibrate(z_a, cfg.z1, cfg.z2, shape);

            noise_terms nt = noise_for(snr_db, cfg.n, cfg.t);
            trial_batch batch = run_trials(md, cfg.z1, cfg.z2, c_h, cfg.n, cfg.t, nt, cfg.seed,
                                           std::uint64_t(s), cfg.trials, true, threads);
            circuit::excess_power_result xp = circuit::excess_power(batch.za, md.z_a, md.sigma_g);

            std::vector<double> row = {e.d_over_lambda, cfg.velocities_kmh[s]};
            std::vector<double> cap = capacity_row(md, cfg, snr_db, xp.xp_db, false,
                                                   std::uint64_t(s), std::uint64_t(p));
            row.insert(row.end(), cap.begin(), cap.end());
            row.push_back(double(cfg.trials));
            row.push_back(double(index(batch.za.size())));
            row.push_back(double(batch.degenerate));
            r.table.rows.push_back(row);
            track(r, {cfg.trials, batch.degenerate});
        }
    }
    return r;
}

}  // namespace detail

// Regenerates one of the five result tables.  Byte-deterministic for a
// given (config, seed) regardless of the thread count.
inline run_result run_experiment(const config::experiment_config& cfg, index threads = 1) {
    config::validate(cfg);
    if (threads < 1)
        throw invalid_input("run_experiment: threads must be >= 1");
    if (cfg.figure == "fig2" || cfg.figure == "fig3")
        return detail::run_rmse_figure(cfg, threads);
    if (cfg.figure == "fig4")
        return detail::run_excess_figure(cfg, threads);
    if (cfg.figure == "fig5")
        return detail::run_capacity_snr_figure(cfg, threads);
    return detail::run_capacity_spacing_figure(cfg, threads);
}

inline std::string format_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// CSV with a comment line tying the rows to the exact config and seed.
inline void write_csv(std::ostream& out, const result_table& table,
                      const config::experiment_config& cfg) {
    char head[64];
    std::snprintf(head, sizeof(head), "%016llx",
                  static_cast<unsigned long long>(config::digest(cfg)));
    out << "# config=" << head << " seed=" << cfg.seed << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const std::vector<double>& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_cell(row[i]);
        out << "\n";
    }
}

inline void write_csv_file(const std::string& path, const result_table& table,
                           const config::experiment_config& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw invalid_input("write_csv: cannot open '" + path + "'");
    write_csv(out, table, cfg);
    if (!out)
        throw invalid_input("write_csv: failed writing '" + path + "'");
}

}  // namespace zest::experiment
