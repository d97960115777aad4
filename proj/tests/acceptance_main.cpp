// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failing criteria. Tolerances are fixed here and must not be loosened to
// make a run pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sddb/sddb.hpp"

#ifndef SDDB_SOURCE_DIR
#define SDDB_SOURCE_DIR "."
#endif

namespace {

int g_failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", id,
                label.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <typename Fn>
void criterion(int id, const std::string& label, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, label, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------------------

void criterion_1() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    sddb::FrequencyGrid grid(8192);
    auto f = sddb::true_density(sddb::ModelId::I, grid);
    auto w = sddb::factorize(f, 220);
    double c_err = 0.0;
    for (int k = 0; k <= 200; ++k)
        c_err += std::abs(w.ma[std::size_t(k)] - std::pow(0.9, k));
    const double b1_err = std::abs(w.ar[1] - 0.9);
    double b_tail = 0.0;
    for (int k = 2; k <= 200; ++k) b_tail = std::max(b_tail, std::abs(w.ar[std::size_t(k)]));
    const double secs =
        std::chrono::duration<double>(clock::now() - t0).count();
    const bool pass = c_err < 1e-6 && b1_err < 1e-8 && b_tail < 1e-8 && secs < 1.0;
    report(1, "AR(1) factorization exactness", pass,
           "sum|c_k-0.9^k|=" + fmt(c_err) + " |b_1-0.9|=" + fmt(b1_err) +
               " max|b_k|(k>=2)=" + fmt(b_tail) + " time=" + fmt(secs) + "s");
}

void criterion_2() {
    // X_t = e_t + 2 e_{t-1}: spectral density (5 + 4 cos l) / (2 pi)
    sddb::FrequencyGrid grid(4096);
    std::vector<double> vals(4096);
    for (int j = 0; j < 4096; ++j)
        vals[std::size_t(j)] =
            (5.0 + 4.0 * std::cos(grid.lambda(j))) / (2.0 * std::numbers::pi);
    auto f = sddb::make_density(grid, std::move(vals), sddb::EstimatorFamily::synthetic,
                                {}, /*clamp=*/false);
    auto w = sddb::factorize(f, 120);
    const double c1_err = std::abs(w.ma[1] - 0.5);
    const double s2_err = std::abs(w.sigma2 - 4.0);
    const bool pass = c1_err < 1e-6 && s2_err < 1e-6;
    report(2, "noninvertible MA(1) Wold recovery", pass,
           "|c_1-0.5|=" + fmt(c1_err) + " |sigma2-4|=" + fmt(s2_err));
}

void criterion_3() {
    // round trip on both recursive-model densities
    sddb::FrequencyGrid g1(8192);
    auto f1 = sddb::true_density(sddb::ModelId::I, g1);
    auto r1 = sddb::reconstruct_density(sddb::factorize(f1), g1);
    const double e1 = sup_abs_diff(r1, f1.values);

    sddb::FrequencyGrid g2(32768);
    auto f2 = sddb::true_density(sddb::ModelId::II, g2);
    auto w2 = sddb::factorize(f2);
    auto r2 = sddb::reconstruct_density(w2, g2);
    const double e2 = sup_abs_diff(r2, f2.values);

    // convolution inverse: sum_j (-b_j) c_{k-j} = delta_{k0}
    auto wc = sddb::factorize(f2, 600);
    double conv_err = 0.0;
    for (int k = 0; k <= 500; ++k) {
        double s = 0.0;
        for (int j = 0; j <= k; ++j)
            s += (-wc.ar[std::size_t(j)]) * wc.ma[std::size_t(k - j)];
        conv_err = std::max(conv_err, std::abs(s - (k == 0 ? 1.0 : 0.0)));
    }
    const bool pass = e1 < 1e-8 && e2 < 1e-8 && conv_err < 1e-10;
    report(3, "round-trip and convolution identities", pass,
           "sup|recon-f| I=" + fmt(e1) + " II=" + fmt(e2) +
               " max|conv-delta|=" + fmt(conv_err));
}

void criterion_4() {
    // grid refinement on an estimated density: the autoregressive fit of a
    // fixed simulated draw of the mixed model, factorized on a coarse and a
    // fine grid
    sddb::RngStream rng(20260823);
    auto x = sddb::simulate_model(sddb::ModelId::II, 128, rng);
    sddb::EstimatorConfig coarse, fine;
    coarse.family = fine.family = sddb::EstimatorFamily::ar_parametric;
    coarse.grid_size = 1024;
    fine.grid_size = 8192;
    auto wc = sddb::factorize(sddb::estimate_spectral_density(x, coarse).density, 200);
    auto wf = sddb::factorize(sddb::estimate_spectral_density(x, fine).density, 200);
    double sq = 0.0;
    for (int k = 0; k <= 200; ++k) {
        const double d = wc.ma[std::size_t(k)] - wf.ma[std::size_t(k)];
        sq += d * d;
    }
    const bool pass = sq < 1e-5;
    report(4, "grid-refinement stability of the c-sequence", pass,
           "sum (c_k^1024 - c_k^8192)^2 = " + fmt(sq));
}

void criterion_5() {
    sddb::RngStream rng(515151);
    auto x = sddb::simulate_model(sddb::ModelId::I, 256, rng);
    sddb::FrequencyGrid grid(1024);
    sddb::EstimatorConfig cfg;
    cfg.family = sddb::EstimatorFamily::ar_parametric;
    cfg.grid_size = 1024;
    auto est = sddb::estimate_spectral_density(x, cfg);
    auto w = sddb::trim(sddb::factorize(est.density));
    const auto& phi = est.fit->phi;
    const int p = int(phi.size());

    double coeff_err = 0.0;
    for (int k = 1; k <= p && k < int(w.ar.size()); ++k)
        coeff_err = std::max(coeff_err,
                             std::abs(w.ar[std::size_t(k)] - phi[std::size_t(k - 1)]));
    for (int k = p + 1; k < std::min<int>(50, int(w.ar.size())); ++k)
        coeff_err = std::max(coeff_err, std::abs(w.ar[std::size_t(k)]));

    auto sieve = sddb::ar_sieve_model(x, grid);
    double model_err = std::abs(w.sigma2 - sieve.w.sigma2);
    for (std::size_t k = 0; k < std::min(w.ar.size(), sieve.w.ar.size()); ++k)
        model_err = std::max(model_err, std::abs(w.ar[k] - sieve.w.ar[k]));
    for (std::size_t k = 0; k < std::min(w.ma.size(), sieve.w.ma.size()); ++k)
        model_err = std::max(model_err, std::abs(w.ma[k] - sieve.w.ma[k]));

    // identical innovation draws must give identical sample paths
    auto gen = sddb::InnovationGenerator::gaussian(w.sigma2);
    sddb::RngStream ra(424242), rb(424242);
    auto path_a = sddb::sddb_generate_ar(w, 128, gen, sddb::sample_mean(x), ra, 1000);
    auto path_b =
        sddb::sddb_generate_ar(sieve.w, 128, gen, sieve.mean, rb, 1000);
    const double path_err = sup_abs_diff(path_a, path_b);

    const bool pass = coeff_err < 1e-8 && model_err < 1e-8 && path_err < 1e-8;
    report(5, "AR-sieve special case of the spectral generator", pass,
           "order=" + std::to_string(p) + " |b-phi|=" + fmt(coeff_err) +
               " model diff=" + fmt(model_err) + " path diff=" + fmt(path_err));
}

void criterion_6() {
    // sigma2 and kurtosis estimated from a fixed model draw
    sddb::RngStream data_rng(616161);
    auto x = sddb::simulate_model(sddb::ModelId::I, 512, data_rng);
    auto k4 = sddb::estimate_kappa4(x);
    const double s2 = k4.sigma2;
    const double kt = k4.ratio();
    auto gen = sddb::InnovationGenerator::three_point(s2, kt);

    // symbolic moments from the probability table {*p at +spike, p at -spike,
    // 1-2p at 0}
    const double spike = std::sqrt(s2 * kt);
    const double p_spike = 1.0 / (2.0 * kt);
    const double m1_tab = p_spike * spike + p_spike * (-spike);
    const double m2_tab = 2.0 * p_spike * spike * spike;
    const double m4_tab = 2.0 * p_spike * spike * spike * spike * spike;
    const double sym_err = std::abs(m1_tab) + std::abs(m2_tab - s2) +
                           std::abs(m4_tab - kt * s2 * s2) / (kt * s2 * s2);

    const int B = 100000;
    sddb::RngStream mc(626262);
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < B; ++i) {
        const double v = gen.draw(mc);
        m1 += v;
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m1 /= B;
    m2 /= B;
    m4 /= B;
    const double se1 = std::sqrt(s2 / B);
    const double se2 = s2 * std::sqrt((kt - 1.0) / B);
    const double se4 = s2 * s2 * std::sqrt((kt * kt * kt - kt * kt) / B);
    const double z1 = std::abs(m1) / se1;
    const double z2 = std::abs(m2 - s2) / se2;
    const double z4 = std::abs(m4 - kt * s2 * s2) / se4;

    const bool pass = sym_err < 1e-12 && z1 < 5.0 && z2 < 5.0 && z4 < 5.0;
    report(6, "three-point innovation moment exactness", pass,
           "kappa4tilde=" + fmt(kt) + " symbolic err=" + fmt(sym_err) +
               " |z| moments=(" + fmt(z1) + ", " + fmt(z2) + ", " + fmt(z4) + ")");
}

void criterion_7() {
    sddb::RngStream data_rng(717171);
    auto x = sddb::simulate_model(sddb::ModelId::I, 512, data_rng);
    sddb::EstimatorConfig cfg;  // pre-whitened default family
    auto est = sddb::estimate_spectral_density(x, cfg);
    auto w = sddb::trim(sddb::factorize(est.density));

    const int n = 1000000;
    auto gen = sddb::InnovationGenerator::gaussian(w.sigma2);
    sddb::RngStream rng(727272);
    auto y = sddb::sddb_generate_ma(w, n, gen, 0.0, rng);

    const int K = int(w.ma.size()) + 6;
    auto gamma = sddb::implied_autocovariance(w, K);
    auto sample = sddb::sample_autocovariance(y, 5);
    auto gamma_at = [&](int k) {
        k = std::abs(k);
        return k <= K ? gamma[std::size_t(k)] : 0.0;
    };
    double worst_z = 0.0;
    std::string detail;
    for (int h = 0; h <= 5; ++h) {
        // large-sample variance of the lag-h sample autocovariance for a
        // gaussian-innovation linear process
        double v = 0.0;
        for (int k = -K; k <= K; ++k)
            v += gamma_at(k) * gamma_at(k) + gamma_at(k + h) * gamma_at(k - h);
        const double se = std::sqrt(v / double(n));
        const double z = std::abs(sample[std::size_t(h)] - gamma[std::size_t(h)]) / se;
        worst_z = std::max(worst_z, z);
    }
    const bool pass = worst_z < 3.0;
    report(7, "generator reproduces the estimated covariances", pass,
           "MA length=" + std::to_string(w.ma.size() - 1) +
               " max|z| over lags 0..5 = " + fmt(worst_z));
}

struct CoverageCheck {
    sddb::ModelId model;
    std::string statistic;
    double level;  // 1 - alpha, in percent
    double target;
};

void criteria_8_9() {
    sddb::ExperimentConfig cfg;
    cfg.models = {sddb::ModelId::I, sddb::ModelId::III};
    cfg.methods = {sddb::BootMethod::sddb};
    cfg.statistics = {sddb::StatisticSpec::mean(), sddb::StatisticSpec::rho(2)};
    cfg.studentized = true;
    cfg.levels = {0.2, 0.1, 0.05};
    cfg.realizations = 500;
    cfg.replicates = 500;
    cfg.n = 128;
    cfg.seed = 890890;
    cfg.threads = 0;

    const auto t0 = std::chrono::steady_clock::now();
    auto report_data = sddb::coverage_study(cfg);
    const double mins =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
        60.0;

    auto lookup = [&](sddb::ModelId m, const std::string& stat,
                      double alpha) -> const sddb::CoverageCell& {
        for (const auto& c : report_data.cells)
            if (c.model == m && c.statistic == stat &&
                std::abs(c.alpha - alpha) < 1e-12)
                return c;
        throw sddb::ConfigError("cell not found");
    };

    const std::vector<CoverageCheck> table1 = {
        {sddb::ModelId::I, "mean", 80.0, 78.0},
        {sddb::ModelId::I, "mean", 90.0, 87.1},
        {sddb::ModelId::I, "mean", 95.0, 92.2},
        {sddb::ModelId::III, "mean", 80.0, 80.2},
        {sddb::ModelId::III, "mean", 90.0, 90.0},
        {sddb::ModelId::III, "mean", 95.0, 94.8},
    };
    // tolerance: 4 points or 3 binomial standard errors of the published
    // value at this run's realization count, whichever is wider
    auto band = [&](double target) {
        const double p = target / 100.0;
        const double se =
            100.0 * std::sqrt(p * (1.0 - p) / double(cfg.realizations));
        return std::max(4.0, 3.0 * se);
    };
    bool pass8 = mins < 60.0;
    std::ostringstream d8;
    for (const auto& chk : table1) {
        const auto& cell = lookup(chk.model, chk.statistic, 1.0 - chk.level / 100.0);
        const double got = cell.coverage_percent();
        if (std::abs(got - chk.target) > band(chk.target)) pass8 = false;
        d8 << to_string(chk.model) << "@" << chk.level << "%: " << fmt(got) << "/"
           << fmt(chk.target) << " ";
    }
    d8 << "(" << fmt(mins) << " min)";
    report(8, "desk-scale mean coverage vs published table", pass8, d8.str());

    const std::vector<CoverageCheck> table2 = {
        {sddb::ModelId::I, "rho2", 80.0, 82.5},
        {sddb::ModelId::I, "rho2", 90.0, 91.5},
        {sddb::ModelId::I, "rho2", 95.0, 96.0},
    };
    bool pass9 = true;
    std::ostringstream d9;
    for (const auto& chk : table2) {
        const auto& cell = lookup(chk.model, chk.statistic, 1.0 - chk.level / 100.0);
        const double got = cell.coverage_percent();
        if (std::abs(got - chk.target) > band(chk.target)) pass9 = false;
        d9 << chk.level << "%: " << fmt(got) << "/" << fmt(chk.target) << " ";
    }
    report(9, "desk-scale autocorrelation coverage vs published table", pass9,
           d9.str());
}

void criterion_10() {
    const std::string path = std::string(SDDB_SOURCE_DIR) + "/data/lake_like.csv";
    auto x = sddb::io::read_series_csv(path);

    std::vector<sddb::EstimatorConfig> configs(2);
    configs[0].family = sddb::EstimatorFamily::ar_parametric;
    configs[0].grid_size = 1024;
    configs[1].family = sddb::EstimatorFamily::cepstral_threshold;
    configs[1].grid_size = 1024;
    auto table = sddb::coefficient_table(x, configs, 0, 10);

    const double b1 = table.rows[0].b[1];
    const double b2 = table.rows[0].b[2];
    int nonzero = 0;
    for (int k = 1; k <= 10; ++k)
        if (std::abs(table.rows[1].b[std::size_t(k)]) >= 0.005) ++nonzero;

    const bool pass = std::abs(b1 - 1.05) <= 0.15 && std::abs(b2 + 0.27) <= 0.15 &&
                      nonzero <= 5;
    report(10, "annual-series coefficient table pattern", pass,
           "n=" + std::to_string(x.size()) + " b1=" + fmt(b1) + " b2=" + fmt(b2) +
               " cepstrum nonzero b (2dp)=" + std::to_string(nonzero));
}

void criterion_11() {
    bool pass = true;
    std::string detail;

    // location/scale invariance of autocorrelation-type statistics
    sddb::RngStream rng(111111);
    std::vector<double> x(256);
    double prev = 0.0;
    for (auto& v : x) {
        prev = 0.6 * prev + rng.gaussian();
        v = prev;
    }
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 17.0 - 2.5 * x[i];
    const double r_x = sddb::StatisticSpec::rho(2).evaluate(x);
    const double r_y = sddb::StatisticSpec::rho(2).evaluate(y);
    if (std::abs(r_x - r_y) > 1e-12) {
        pass = false;
        detail += "rho invariance broken ";
    }
    const double m_y = sddb::StatisticSpec::mean().evaluate(y);
    if (std::abs(m_y - (17.0 - 2.5 * sddb::sample_mean(x))) > 1e-12) {
        pass = false;
        detail += "mean equivariance broken ";
    }

    // interval nesting in the nominal level
    sddb::BootstrapConfig bc;
    bc.method = sddb::BootMethod::sddb;
    bc.estimator.grid_size = 256;
    bc.B = 200;
    bc.studentized = false;
    sddb::RngStream boot_rng(121212);
    auto reps = sddb::bootstrap_distribution(x, sddb::StatisticSpec::mean(), bc,
                                             boot_rng);
    auto ci05 = sddb::confidence_interval(reps, 0.05, false);
    auto ci10 = sddb::confidence_interval(reps, 0.10, false);
    auto ci20 = sddb::confidence_interval(reps, 0.20, false);
    if (!(ci05.lo <= ci10.lo && ci10.lo <= ci20.lo && ci20.hi <= ci10.hi &&
          ci10.hi <= ci05.hi)) {
        pass = false;
        detail += "interval nesting broken ";
    }

    // determinism under a fixed seed
    sddb::RngStream r2(121212);
    auto reps2 = sddb::bootstrap_distribution(x, sddb::StatisticSpec::mean(), bc, r2);
    if (reps.values != reps2.values) {
        pass = false;
        detail += "seed determinism broken ";
    }

    report(11, "invariance, nesting and determinism properties", pass,
           detail.empty() ? "all properties hold" : detail);
}

}  // namespace

int main() {
    criterion(1, "AR(1) factorization exactness", [] { criterion_1(); });
    criterion(2, "noninvertible MA(1) Wold recovery", [] { criterion_2(); });
    criterion(3, "round-trip and convolution identities", [] { criterion_3(); });
    criterion(4, "grid-refinement stability of the c-sequence", [] { criterion_4(); });
    criterion(5, "AR-sieve special case of the spectral generator",
              [] { criterion_5(); });
    criterion(6, "three-point innovation moment exactness", [] { criterion_6(); });
    criterion(7, "generator reproduces the estimated covariances",
              [] { criterion_7(); });
    try {
        criteria_8_9();
    } catch (const std::exception& e) {
        report(8, "desk-scale mean coverage vs published table", false,
               std::string("exception: ") + e.what());
        report(9, "desk-scale autocorrelation coverage vs published table", false,
               std::string("exception: ") + e.what());
    }
    criterion(10, "annual-series coefficient table pattern", [] { criterion_10(); });
    criterion(11, "invariance, nesting and determinism properties",
              [] { criterion_11(); });
    if (g_failures == 0)
        std::printf("acceptance: all criteria satisfied\n");
    else
        std::printf("acceptance: %d criteria failing\n", g_failures);
    return g_failures;
}
