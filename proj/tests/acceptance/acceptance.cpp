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

// End-to-end acceptance gate.  Each numbered check prints one PASS/FAIL
// line; the process exits nonzero if any check fails.  Checks 5 through 9
// rerun the shipped figure experiments at full trial counts, so this
// binary takes a few minutes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zest/bounds.hpp"
#include "zest/channel.hpp"
#include "zest/circuit.hpp"
#include "zest/config.hpp"
#include "zest/estimate.hpp"
#include "zest/experiment.hpp"
#include "zest/kernels.hpp"
#include "zest/metrics.hpp"
#include "zest/observe.hpp"
#include "zest/rng.hpp"
#include "zest/types.hpp"

namespace {

using namespace zest;

int g_failures = 0;

void report(int num, bool ok, const char* what, const std::string& detail) {
    if (detail.empty())
        std::printf("%s %2d. %s\n", ok ? "PASS" : "FAIL", num, what);
    else
        std::printf("%s %2d. %s  [%s]\n", ok ? "PASS" : "FAIL", num, what, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double max_abs(const cmatrix& a) { return a.cwiseAbs().maxCoeff(); }

std::size_t col(const experiment::result_table& t, const char* name) {
    auto it = std::find(t.columns.begin(), t.columns.end(), std::string(name));
    if (it == t.columns.end()) {
        std::printf("FAIL     missing column '%s'\n", name);
        std::exit(1);
    }
    return std::size_t(it - t.columns.begin());
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Check 1: the two-port coupling map reproduces the reference values.
void check_coupling_map() {
    config::experiment_config cfg = config::defaults_for("fig2");
    cmatrix f = circuit::compute_f(cfg.z_a, cfg.z1, cfg.z2);
    cmatrix ref(2, 2);
    ref << cx(0.9804, -0.1613), cx(0.0261, -0.0334), cx(0.0261, -0.0334),
        cx(0.9804, -0.1613);
    double err = max_abs(f - ref);
    report(1, err <= 5e-4, "coupling map matches the reference two-port values",
           fmt("max entry error %.2e", err));
}

// Check 2: recover_za inverts compute_f for the reference load pair.
void check_bijection() {
    config::experiment_config cfg = config::defaults_for("fig2");
    double worst = 0.0;

    auto round_trip = [&](const cmatrix& z_a) {
        cmatrix f = circuit::compute_f(z_a, cfg.z1, cfg.z2);
        cmatrix back = circuit::recover_za(f, cfg.z1, cfg.z2);
        worst = std::max(worst, (back - z_a).norm() / z_a.norm());
    };

    round_trip(cfg.z_a);
    for (int i = 0; i < 100; ++i) {
        rng::stream g(2026, {2, std::uint64_t(i), 0});
        cmatrix c = g.cnormal_matrix(2, 2);
        rmatrix r = 10.0 * (c.real() + c.real().transpose());
        Eigen::SelfAdjointEigenSolver<rmatrix> e(r);
        r += (std::abs(e.eigenvalues().minCoeff()) + 5.0) * rmatrix::Identity(2, 2);
        rmatrix xim = 10.0 * (c.imag() + c.imag().transpose());
        cmatrix z_a = r.cast<cx>() + cx(0.0, 1.0) * xim.cast<cx>();
        round_trip(z_a);
    }
    report(2, worst <= 1e-9, "impedance map round-trips on symmetric loads",
           fmt("worst relative error %.2e over 101 cases", worst));
}

// Check 3: the full pipeline is exact when the port noise is zero.
void check_noiseless() {
    config::experiment_config cfg = config::defaults_for("fig3");
    experiment::model md = experiment::calibrate(cfg.z_a, cfg.z1, cfg.z2,
                                                 experiment::detail::sigma_g_shape_of(cfg));
    rmatrix c_h = experiment::detail::correlation_for(50.0, cfg.carrier_hz,
                                                      cfg.symbol_period_s, cfg.l);
    rng::stream g(7, {3, 0, 0});
    cmatrix h = channel::sample_channel(md.sigma_h, c_h, cfg.n, g);
    observe::training_pair x = observe::make_training(cfg.n, cfg.t, double(cfg.n));
    observe::observation_set w = observe::simulate_packets(h, md.f, x, 0.0, g);
    observe::statistic y = observe::sufficient_statistic(w, x, cfg.l);
    estimate::sample_cov s = estimate::sample_covariance(y);
    estimate::estimate_result est = estimate::estimate_f_sigma(s.s, 0.0);

    cmatrix realized = (h * h.adjoint()) / double(h.cols());
    cmatrix z_tilde = circuit::symmetrize_za(circuit::recover_za(est.f_hat, cfg.z1, cfg.z2));

    double ef = max_abs(est.f_hat - md.f);
    double es = max_abs(est.sigma_h_hat - realized);
    double ez = max_abs(z_tilde - cfg.z_a);
    report(3, ef <= 1e-8 && es <= 1e-8 && ez <= 1e-6,
           "noiseless pipeline recovers the model exactly",
           fmt("F %.1e, Sigma_h %.1e, Z_A %.1e", ef, es, ez));
}

// Check 4: analytic covariance derivatives match central differences.
void check_fim_derivatives() {
    const double h_step = 1e-6;
    double worst = 0.0;

    for (int pt = 0; pt < 50; ++pt) {
        rng::stream g(2026, {4, std::uint64_t(pt), 0});
        cmatrix f = 0.5 * g.cnormal_matrix(2, 2);
        cmatrix a = g.cnormal_matrix(2, 2);
        cmatrix sh = a * a.adjoint() + 0.3 * cmatrix::Identity(2, 2);
        double weight = 0.3 + std::abs(g.cnormal_matrix(1, 1)(0, 0).real());

        // Longhand covariance without Hermitian symmetrization, so a
        // one-entry perturbation passes through untouched.
        auto cov = [&](const cmatrix& ff, const cmatrix& ss) {
            cmatrix b(4, 2);
            b.topRows(2) = cmatrix::Identity(2, 2);
            b.bottomRows(2) = ff;
            return cmatrix(weight * b * ss * b.adjoint());
        };

        std::vector<cmatrix> d = bounds::covariance_derivatives(f, sh, weight);
        for (int which = 0; which < 8; ++which) {
            Eigen::Index row = which % 2;
            Eigen::Index cc = (which / 2) % 2;
            bool in_f = which < 4;
            auto eval = [&](cx delta) {
                cmatrix ff = f, ss = sh;
                (in_f ? ff : ss)(row, cc) += delta;
                return cov(ff, ss);
            };
            cmatrix dx = (eval(cx(h_step, 0)) - eval(cx(-h_step, 0))) / (2 * h_step);
            cmatrix dy = (eval(cx(0, h_step)) - eval(cx(0, -h_step))) / (2 * h_step);
            cmatrix fd = 0.5 * (dx - cx(0, 1) * dy);
            std::size_t idx = std::size_t(in_f ? cc * 2 + row : 4 + cc * 2 + row);
            double scale = std::max(1.0, max_abs(d[idx]));
            worst = std::max(worst, max_abs(fd - d[idx]) / scale);
        }
    }
    report(4, worst <= 1e-6, "information matrix derivatives match finite differences",
           fmt("worst relative error %.2e over 50 points", worst));
}

// Check 5: i.i.d. sweep error reaches the moment bound at high SNR and the
// bounds are ordered everywhere.
void check_fig2(const experiment::run_result& r2) {
    const experiment::result_table& t = r2.table;
    std::size_t snr_c = col(t, "snr_db"), n_c = col(t, "n"), rmse_c = col(t, "rmse"),
                crb_c = col(t, "crb_rel"), mcb_c = col(t, "mcb_nl");
    bool ordered = true, touches = true;
    double worst_gap = 0.0;
    for (const auto& row : t.rows) {
        if (row[mcb_c] < row[crb_c]) ordered = false;
        if (row[n_c] == 8.0 && row[snr_c] >= 15.0) {
            double gap = 20.0 * std::log10(row[rmse_c] / row[mcb_c]);
            worst_gap = std::max(worst_gap, std::abs(gap));
            if (std::abs(gap) > 1.0) touches = false;
        }
    }
    report(5, ordered && touches,
           "fig2: high-SNR error sits within 1 dB of the moment bound, bounds ordered",
           fmt("worst |gap| %.2f dB at N=8, SNR >= 15", worst_gap));
}

// Check 6: fading sweep bound gaps at the mid-SNR grid point.
void check_fig3(const experiment::run_result& r3) {
    const experiment::result_table& t = r3.table;
    std::size_t snr_c = col(t, "snr_db"), v_c = col(t, "v_kmh"), rmse_c = col(t, "rmse"),
                crb_c = col(t, "crb_rel");
    double gap_fast = -1.0, gap_med = -1.0, gap_slow = -1.0;
    for (const auto& row : t.rows) {
        if (row[snr_c] != 15.0) continue;
        double gap = 20.0 * std::log10(row[rmse_c] / row[crb_c]);
        if (row[v_c] == 300.0) gap_fast = gap;
        if (row[v_c] == 50.0) gap_med = gap;
        if (row[v_c] == 5.0) gap_slow = gap;
    }
    bool ok = gap_fast >= -0.5 && gap_fast <= 1.5 && gap_med >= -0.5 && gap_med <= 1.5 &&
              gap_slow > 1.5 && gap_slow < 4.5;
    report(6, ok, "fig3: bound gap small when fading is fast, moderate when slow",
           fmt("gaps at 15 dB: fast %.2f, medium %.2f, slow %.2f dB", gap_fast, gap_med,
               gap_slow));
}

// Check 7: excess power decays along the SNR sweep and nearly vanishes at
// the top for fast fading.
void check_fig4(const experiment::run_result& r4) {
    const experiment::result_table& t = r4.table;
    std::size_t snr_c = col(t, "snr_db"), v_c = col(t, "v_kmh"), xp_c = col(t, "excess_db");
    bool monotone = true;
    double top_fast = 1e9, worst_rise = 0.0;
    std::vector<double> speeds = {300.0, 50.0, 5.0};
    for (double v : speeds) {
        double prev = 1e300;
        for (const auto& row : t.rows) {
            if (row[v_c] != v) continue;
            if (row[xp_c] > prev + 0.05) {
                monotone = false;
                worst_rise = std::max(worst_rise, row[xp_c] - prev);
            }
            prev = row[xp_c];
            if (v == 300.0 && row[snr_c] == 30.0) top_fast = row[xp_c];
        }
    }
    report(7, monotone && top_fast < 0.2, "fig4: excess power decays with SNR",
           fmt("worst rise %.3f dB, fast-fading value at 30 dB %.3f dB", worst_rise,
               top_fast));
}

// Check 8: matching to the estimate beats the mismatched baseline and gets
// close to the perfect-match curve.
void check_fig5(const experiment::run_result& r5) {
    const experiment::result_table& t = r5.table;
    std::size_t gain_c = col(t, "gain_pct"), gap_c = col(t, "snr_gap_db");
    double min_gain = 1e300, max_gap = -1e300;
    for (const auto& row : t.rows) {
        min_gain = std::min(min_gain, row[gain_c]);
        max_gap = std::max(max_gap, row[gap_c]);
    }
    report(8, min_gain >= 15.0 && max_gap <= 1.5,
           "fig5: matched capacity beats the mismatched baseline",
           fmt("min gain %.1f%%, max SNR gap %.2f dB", min_gain, max_gap));
}

// Check 9: the closed-form upper bound dominates the Monte Carlo lower
// bound on both capacity sweeps.
void check_capacity_order(const experiment::run_result& r5,
                          const experiment::run_result& r6) {
    double worst = 1e300;
    for (const experiment::run_result* r : {&r5, &r6}) {
        const experiment::result_table& t = r->table;
        std::size_t up_c = col(t, "c_estimate"), lo_c = col(t, "c_lower_mean"),
                    se_c = col(t, "c_lower_se");
        for (const auto& row : t.rows)
            worst = std::min(worst, row[up_c] - (row[lo_c] - 3.0 * row[se_c]));
    }
    report(9, worst >= 0.0, "capacity bounds ordered on the fig5 and fig6 sweeps",
           fmt("min upper - (lower - 3 se) margin %.3f bits", worst));
}

// Check 10: whitened residuals carry the advertised variance and the two
// half-frame residuals are uncorrelated.
void check_whiteness() {
    config::experiment_config cfg = config::defaults_for("fig2");
    experiment::model md = experiment::calibrate(cfg.z_a, cfg.z1, cfg.z2,
                                                 experiment::detail::sigma_g_shape_of(cfg));
    experiment::noise_terms nt = experiment::noise_for(10.0, cfg.n, cfg.t);
    observe::training_pair x = observe::make_training(cfg.n, cfg.t, double(cfg.n));

    rng::stream gh(2026, {10, 0, 0});
    cmatrix h = channel::sample_channel(md.sigma_h, rmatrix::Identity(1, 1), cfg.n, gh);
    cmatrix fh = md.f * h;

    const int reps = 12500;  // 12500 x (2 x 4) = 1e5 entry samples
    double n_samp = 0.0, sum_a2 = 0.0, sum_b2 = 0.0;
    cx cross(0.0, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
        rng::stream g(2026, {10, std::uint64_t(rep), 1});
        observe::observation_set w = observe::simulate_packets(h, md.f, x, nt.sigma_n2, g);
        observe::statistic y = observe::sufficient_statistic(w, x, 1);
        cmatrix a = y.y1 - h;
        cmatrix b = y.y2 - fh;
        sum_a2 += a.squaredNorm();
        sum_b2 += b.squaredNorm();
        cross += (a.array().conjugate() * b.array()).sum();
        n_samp += double(a.size());
    }
    double var_a = sum_a2 / n_samp;
    double var_b = sum_b2 / n_samp;
    double corr = std::abs(cross) / n_samp;
    double se = std::sqrt(var_a * var_b / n_samp);
    experiment::noise_terms ref = experiment::noise_for(10.0, cfg.n, cfg.t);

    bool var_ok = std::abs(var_a / ref.sigma2 - 1.0) <= 0.03 &&
                  std::abs(var_b / ref.sigma2 - 1.0) <= 0.03;
    bool corr_ok = corr <= 3.0 * se;
    report(10, var_ok && corr_ok,
           "whitened residuals have the stated variance and no cross-correlation",
           fmt("variance ratios %.4f / %.4f, |corr| / se %.2f", var_a / ref.sigma2,
               var_b / ref.sigma2, corr / se));
}

// Check 11: the coupling estimate depends only on the signal subspace, not
// on the basis the eigensolver happens to return.
void check_subspace_invariance() {
    double worst = 0.0;
    auto solve_f = [](const cmatrix& u11, const cmatrix& u21) {
        return cmatrix(u11.transpose().partialPivLu().solve(u21.transpose()).transpose());
    };
    for (int i = 0; i < 100; ++i) {
        rng::stream g(2026, {11, std::uint64_t(i), 0});
        cmatrix a = g.cnormal_matrix(4, 2);
        Eigen::HouseholderQR<cmatrix> qr(a);
        cmatrix u = qr.householderQ() * cmatrix::Identity(4, 2);
        cmatrix q = g.cnormal_matrix(2, 2);
        while (std::abs(q.determinant()) < 0.1) q = g.cnormal_matrix(2, 2);

        cmatrix f1 = solve_f(u.topRows(2), u.bottomRows(2));
        cmatrix f2 = solve_f(u.topRows(2) * q, u.bottomRows(2) * q);
        worst = std::max(worst, max_abs(f1 - f2) / std::max(1.0, max_abs(f1)));
    }
    report(11, worst <= 1e-10, "estimate invariant to the subspace basis choice",
           fmt("worst relative change %.2e over 100 mixes", worst));
}

// Check 12: the CLI produces byte-identical CSV regardless of threading.
void check_determinism(const std::string& cli) {
    namespace fs = std::filesystem;
    if (cli.empty()) {
        report(12, false, "CSV bytes independent of thread count",
               "no --cli <path> argument given");
        return;
    }
    fs::path base = fs::path("acceptance_tmp");
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base / "a");
    fs::create_directories(base / "b");

    auto run_one = [&](const std::string& dir, int threads) {
        std::ostringstream cmd;
        cmd << cli << " run fig3 --trials 300 --seed 5 --threads " << threads << " --out "
            << dir << " > " << dir << "/log.txt 2>&1";
        return std::system(cmd.str().c_str());
    };
    int rc1 = run_one((base / "a").string(), 1);
    int rc2 = run_one((base / "b").string(), 4);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string csv1 = slurp(base / "a" / "fig3.csv");
    std::string csv2 = slurp(base / "b" / "fig3.csv");
    bool ok = rc1 == 0 && rc2 == 0 && !csv1.empty() && csv1 == csv2;
    report(12, ok, "CSV bytes independent of thread count",
           fmt("exit codes %g/%g, %g bytes", double(rc1), double(rc2), double(csv1.size())));
    fs::remove_all(base, ec);
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

    check_coupling_map();
    check_bijection();
    check_noiseless();
    check_fim_derivatives();

    experiment::run_result r2 = experiment::run_experiment(config::defaults_for("fig2"), 1);
    check_fig2(r2);
    experiment::run_result r3 = experiment::run_experiment(config::defaults_for("fig3"), 1);
    check_fig3(r3);
    experiment::run_result r4 = experiment::run_experiment(config::defaults_for("fig4"), 1);
    check_fig4(r4);
    experiment::run_result r5 = experiment::run_experiment(config::defaults_for("fig5"), 1);
    check_fig5(r5);
    experiment::run_result r6 = experiment::run_experiment(config::defaults_for("fig6"), 1);
    check_capacity_order(r5, r6);

    check_whiteness();
    check_subspace_invariance();
    check_determinism(cli);

    if (g_failures > 0) {
        std::printf("%d of 12 checks failed\n", g_failures);
        return 1;
    }
    std::printf("all 12 checks passed\n");
    return 0;
}
