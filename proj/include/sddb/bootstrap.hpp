#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sddb/errors.hpp"
#include "sddb/factorization.hpp"
#include "sddb/innovations.hpp"
#include "sddb/rng.hpp"
#include "sddb/spectral.hpp"
#include "sddb/statistics.hpp"

namespace sddb {

namespace detail {

inline void check_variance_match(const InnovationGenerator& g, double model_sigma2) {
    if (!g.exact_variance()) return;
    const double tol = 1e-8 * std::max(model_sigma2, 1e-300);
    if (std::abs(g.sigma2() - model_sigma2) > tol)
        throw ConfigError("innovation variance does not match the model variance");
}

inline constexpr double kOverflowGuard = 1e12;

}  // namespace detail

/// Moving-average form: X*_t = mean + sum_{j=0}^{M} c_j eps*_{t-j}. Uses
/// n + M innovation draws so the first retained value already carries a full
/// filter history; the output is exactly stationary under the truncated filter.
inline std::vector<double> sddb_generate_ma(const WoldModel& w, int n,
                                            const InnovationGenerator& g,
                                            double mean, RngStream& rng) {
    if (n < 1) throw ConfigError("series length must be positive");
    detail::check_variance_match(g, w.sigma2);
    const int M = int(w.ma.size()) - 1;
    std::vector<double> eps(static_cast<std::size_t>(n + M));
    g.fill(rng, eps);
    std::vector<double> x(static_cast<std::size_t>(n));
    const double* c = w.ma.data();
    for (int t = 0; t < n; ++t) {
        double s = 0.0;
        // eps index t+M-j is the innovation at time t-j
        const double* e = eps.data() + t;
        for (int j = 0; j <= M; ++j) s += c[j] * e[M - j];
        x[std::size_t(t)] = mean + s;
    }
    return x;
}

inline int default_ar_burnin(int ar_length) { return 1000 + 10 * ar_length; }

/// Autoregressive form: X*_t = mean + sum_{j>=1} b_j (X*_{t-j} - mean) + eps*_t,
/// started from a zero deviation state with the burn-in segment discarded.
inline std::vector<double> sddb_generate_ar(const WoldModel& w, int n,
                                            const InnovationGenerator& g,
                                            double mean, RngStream& rng,
                                            int burnin = -1) {
    if (n < 1) throw ConfigError("series length must be positive");
    detail::check_variance_match(g, w.sigma2);
    const int J = int(w.ar.size()) - 1;
    if (burnin < 0) burnin = default_ar_burnin(J);
    const int total = burnin + n;
    std::vector<double> dev(static_cast<std::size_t>(total));
    const double* b = w.ar.data();
    for (int t = 0; t < total; ++t) {
        double s = g.draw(rng);
        const int jmax = std::min(J, t);
        for (int j = 1; j <= jmax; ++j) s += b[j] * dev[std::size_t(t - j)];
        if (std::abs(s) > detail::kOverflowGuard)
            throw ExplosivePath("autoregressive recursion exceeded the overflow guard");
        dev[std::size_t(t)] = s;
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) x[std::size_t(t)] = mean + dev[std::size_t(burnin + t)];
    return x;
}

/// Mixed form recommended for pre-whitened estimates: the moving-average part
/// comes from the residual spectrum's Wold model, the autoregressive part from
/// the fitted filter coefficients phi.
inline std::vector<double> generate_arma(std::span<const double> phi,
                                         const WoldModel& w_res, int n,
                                         const InnovationGenerator& g,
                                         double mean, RngStream& rng,
                                         int burnin = -1) {
    if (n < 1) throw ConfigError("series length must be positive");
    detail::check_variance_match(g, w_res.sigma2);
    const int p = int(phi.size());
    const int M = int(w_res.ma.size()) - 1;
    if (burnin < 0) burnin = default_ar_burnin(p);
    const int total = burnin + n;
    std::vector<double> eps(static_cast<std::size_t>(total + M));
    g.fill(rng, eps);
    std::vector<double> dev(static_cast<std::size_t>(total));
    const double* c = w_res.ma.data();
    for (int t = 0; t < total; ++t) {
        double s = 0.0;
        const double* e = eps.data() + t;
        for (int j = 0; j <= M; ++j) s += c[j] * e[M - j];
        const int jmax = std::min(p, t);
        for (int j = 1; j <= jmax; ++j) s += phi[std::size_t(j - 1)] * dev[std::size_t(t - j)];
        if (std::abs(s) > detail::kOverflowGuard)
            throw ExplosivePath("autoregressive recursion exceeded the overflow guard");
        dev[std::size_t(t)] = s;
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) x[std::size_t(t)] = mean + dev[std::size_t(burnin + t)];
    return x;
}

/// Autoregressive-sieve generator: AR(AIC) spectral estimate factorized into
/// its Wold model, with innovations resampled from the centered fit residuals.
struct ArSieveModel {
    WoldModel w;
    std::vector<double> phi;
    InnovationGenerator innovations;
    double mean = 0.0;
    int order = 0;
};

inline ArSieveModel ar_sieve_model(std::span<const double> x,
                                   const FrequencyGrid& grid, int order = -1) {
    if (int(x.size()) < 32) throw ConfigError("sieve fit needs at least 32 samples");
    auto est = ar_spectral_estimate(x, grid, order);
    ArSieveModel m{trim(factorize(est.density)),
                   est.fit.phi,
                   InnovationGenerator::empirical(est.fit.residuals),
                   sample_mean(x),
                   est.fit.order};
    return m;
}

inline std::vector<double> ar_sieve_bootstrap(std::span<const double> x,
                                              RngStream& rng,
                                              const FrequencyGrid& grid,
                                              int n_out = -1, int burnin = -1) {
    auto m = ar_sieve_model(x, grid);
    const int n = (n_out > 0) ? n_out : int(x.size());
    return sddb_generate_ar(m.w, n, m.innovations, m.mean, rng, burnin);
}

inline int default_block_length(int n) {
    return std::max(1, int(std::ceil(std::cbrt(double(n)))));
}

/// Concatenates ceil(n/l) uniformly chosen length-l blocks and trims to n.
inline std::vector<double> moving_block_bootstrap(std::span<const double> x, int l,
                                                  RngStream& rng) {
    const int n = int(x.size());
    if (l < 1 || l > n) throw ConfigError("block length must be in [1, n]");
    std::vector<double> out;
    out.reserve(std::size_t(n) + std::size_t(l));
    const std::uint64_t starts = std::uint64_t(n - l + 1);
    while (int(out.size()) < n) {
        const std::size_t s = std::size_t(rng.uniform_int(starts));
        for (int i = 0; i < l; ++i) out.push_back(x[s + std::size_t(i)]);
    }
    out.resize(std::size_t(n));
    return out;
}

/// Statistic whose sampling distribution the bootstrap approximates.
struct StatisticSpec {
    enum class Id { mean, autocorrelation, generalized, window_mean };
    Id id = Id::mean;
    int lag = 2;
    WeightedCovarianceSpec gencov;
    WindowStatisticSpec window;

    double evaluate(std::span<const double> x) const {
        switch (id) {
            case Id::mean:
                return sample_mean(x);
            case Id::autocorrelation:
                return sample_autocorrelation_at(x, lag);
            case Id::generalized:
                return generalized_autocovariance(x, gencov);
            case Id::window_mean:
                return generalized_mean_statistic(x, window);
        }
        throw ConfigError("unknown statistic");
    }

    std::string name() const {
        switch (id) {
            case Id::mean:
                return "mean";
            case Id::autocorrelation:
                return "rho" + std::to_string(lag);
            case Id::generalized:
                return "gencov";
            case Id::window_mean:
                return "window";
        }
        return "?";
    }

    static StatisticSpec mean() { return {}; }
    static StatisticSpec rho(int lag) {
        StatisticSpec s;
        s.id = Id::autocorrelation;
        s.lag = lag;
        return s;
    }
    static StatisticSpec generalized(WeightedCovarianceSpec spec) {
        StatisticSpec s;
        s.id = Id::generalized;
        s.gencov = std::move(spec);
        return s;
    }
};

/// Estimator family plus tuning; negative tuning values select the data-driven
/// default (Politis lag rule, AIC order, cross-validated bandwidth, the
/// cepstral threshold rule).
struct EstimatorConfig {
    EstimatorFamily family = EstimatorFamily::prewhitened;
    LagWindowKernel kernel = LagWindowKernel::bartlett;
    int truncation = -1;
    int order = -1;
    double bandwidth = -1.0;
    double threshold = -1.0;
    int grid_size = FrequencyGrid::kDefaultSize;
};

struct SpectralEstimateResult {
    SpectralDensityEstimate density;
    std::optional<ARFit> fit;
    std::optional<SpectralDensityEstimate> residual_density;
    double bandwidth = -1.0;
};

inline SpectralEstimateResult estimate_spectral_density(std::span<const double> x,
                                                        const EstimatorConfig& cfg) {
    FrequencyGrid grid(cfg.grid_size);
    switch (cfg.family) {
        case EstimatorFamily::periodogram_raw: {
            auto vals = periodogram_values(x, grid.size);
            return {make_density(grid, std::move(vals),
                                 EstimatorFamily::periodogram_raw, Tuning{},
                                 /*clamp=*/true),
                    std::nullopt, std::nullopt, -1.0};
        }
        case EstimatorFamily::lag_window: {
            // negative means "auto"; 0 is passed through so the estimator rejects it
            const int t = (cfg.truncation >= 0) ? cfg.truncation : politis_truncation(x);
            return {lag_window_estimate(x, cfg.kernel, t, grid), std::nullopt,
                    std::nullopt, -1.0};
        }
        case EstimatorFamily::smoothed_periodogram: {
            double b = cfg.bandwidth;
            if (b < 0.0) {
                auto cand = default_bandwidth_candidates(int(x.size()));
                b = crossvalidate_bandwidth(x, cand);
            }
            return {smoothed_periodogram(x, b, grid), std::nullopt, std::nullopt, b};
        }
        case EstimatorFamily::ar_parametric: {
            auto r = ar_spectral_estimate(x, grid, cfg.order);
            return {std::move(r.density), std::move(r.fit), std::nullopt, -1.0};
        }
        case EstimatorFamily::prewhitened: {
            auto r = prewhitened_estimate(x, grid, cfg.order, cfg.bandwidth);
            return {std::move(r.density), std::move(r.fit),
                    std::move(r.residual_density), r.bandwidth};
        }
        case EstimatorFamily::cepstral_threshold: {
            auto r = cepstral_threshold_estimate(x, grid, cfg.threshold);
            return {std::move(r.density), std::nullopt, std::nullopt, -1.0};
        }
        case EstimatorFamily::synthetic:
            throw ConfigError("synthetic densities are not estimated from data");
    }
    throw ConfigError("unknown estimator family");
}

/// Standard error of the statistic under its asymptotic law, computed from a
/// density estimate: sqrt(2 pi f(0) / n) for the mean, Bartlett's formula on
/// the model-implied autocorrelations for sample autocorrelations, and the
/// tau^2 form for single-sequence generalized autocovariances.
inline double studentizer_se(const StatisticSpec& stat,
                             const SpectralEstimateResult& est, int n,
                             const std::optional<Kappa4Estimate>& k4 = std::nullopt) {
    switch (stat.id) {
        case StatisticSpec::Id::mean:
        case StatisticSpec::Id::window_mean:
            return mean_standard_error(est.density, n);
        case StatisticSpec::Id::autocorrelation: {
            auto w = trim(factorize(est.density));
            // the Bartlett sum runs to the ACF support q + lag and its k-th
            // term reads rho[k + lag], so the sequence must reach q + 2 lag
            const int L =
                std::min<int>(10 * n, int(w.ma.size()) - 1 + 2 * stat.lag);
            auto rho = implied_autocorrelation(w, std::max(L, 2 * stat.lag));
            return bartlett_standard_error(rho, stat.lag, n);
        }
        case StatisticSpec::Id::generalized: {
            if (stat.gencov.weights.size() != 1 ||
                stat.gencov.combiner.kind != Combiner::Kind::identity)
                throw ConfigError(
                    "variance studentization covers single-sequence statistics only");
            if (!k4) throw ConfigError("fourth-moment estimate required");
            const double t2 = tau_squared(est.density, stat.gencov.weights[0],
                                          k4->kappa4, k4->sigma2);
            return std::sqrt(t2 / double(n));
        }
    }
    throw ConfigError("unknown statistic");
}

enum class BootMethod { sddb, sddb_ar, ars, bb, nd };

inline std::string to_string(BootMethod m) {
    switch (m) {
        case BootMethod::sddb: return "sddb";
        case BootMethod::sddb_ar: return "sddb-ar";
        case BootMethod::ars: return "ars";
        case BootMethod::bb: return "bb";
        case BootMethod::nd: return "nd";
    }
    return "?";
}

inline BootMethod parse_boot_method(const std::string& s) {
    if (s == "sddb") return BootMethod::sddb;
    if (s == "sddb-ar" || s == "sddb_ar") return BootMethod::sddb_ar;
    if (s == "ars") return BootMethod::ars;
    if (s == "bb") return BootMethod::bb;
    if (s == "nd") return BootMethod::nd;
    throw ConfigError("unknown bootstrap method '" + s + "'");
}

struct BootstrapConfig {
    BootMethod method = BootMethod::sddb;
    EstimatorConfig estimator;
    int studentizer_grid = -1;  // -1: same grid as the estimator
    InnovationGenerator::Kind innovations = InnovationGenerator::Kind::gaussian;
    int B = 1000;
    bool studentized = true;
    int burnin = -1;
    int block_length = -1;  // bb only; -1: ceil(n^{1/3})
};

struct BootstrapReplicateSet {
    std::string method;
    std::string statistic;
    std::vector<double> values;
    std::vector<double> se_values;  // filled when studentized
    double original = 0.0;
    double original_se = -1.0;
    // Value of the statistic under the generator model, the point the
    // replicate roots are centered at; NaN falls back to original.
    double center = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
};

namespace detail {

/// Generator model built once per data set; replicates reuse it.
struct ReplicateModel {
    BootMethod method = BootMethod::sddb;
    // sddb with a pre-whitened estimate uses the mixed form
    bool arma_form = false;
    std::vector<double> phi;
    WoldModel w;  // full model (MA or AR form) or residual model in arma form
    InnovationGenerator innovations = InnovationGenerator::gaussian(1.0);
    double mean = 0.0;
    int burnin = -1;
    // bb
    std::vector<double> data;
    int block_length = 0;

    std::vector<double> generate(int n, RngStream& rng) const {
        switch (method) {
            case BootMethod::sddb:
                if (arma_form)
                    return generate_arma(phi, w, n, innovations, mean, rng, burnin);
                return sddb_generate_ma(w, n, innovations, mean, rng);
            case BootMethod::sddb_ar:
            case BootMethod::ars:
                return sddb_generate_ar(w, n, innovations, mean, rng, burnin);
            case BootMethod::bb:
                return moving_block_bootstrap(data, block_length, rng);
            case BootMethod::nd:
                break;
        }
        throw ConfigError("method has no replicate generator");
    }
};

inline InnovationGenerator make_innovations(InnovationGenerator::Kind kind,
                                            double model_sigma2,
                                            std::span<const double> x,
                                            const std::optional<ARFit>& fit) {
    switch (kind) {
        case InnovationGenerator::Kind::gaussian:
            return InnovationGenerator::gaussian(model_sigma2);
        case InnovationGenerator::Kind::three_point:
            return InnovationGenerator::three_point(model_sigma2,
                                                    estimate_kappa4(x).ratio());
        case InnovationGenerator::Kind::empirical: {
            std::vector<double> pool;
            if (fit)
                pool = fit->residuals;
            else
                pool = yule_walker(x, select_order_aic(x)).residuals;
            // rescaled so the generated spectrum keeps the factorized scale
            return InnovationGenerator::empirical(std::move(pool), model_sigma2);
        }
    }
    throw ConfigError("unknown innovation kind");
}

inline ReplicateModel build_replicate_model(std::span<const double> x,
                                            const BootstrapConfig& cfg,
                                            const SpectralEstimateResult* est) {
    ReplicateModel m;
    m.method = cfg.method;
    m.mean = sample_mean(x);
    m.burnin = cfg.burnin;
    switch (cfg.method) {
        case BootMethod::sddb: {
            if (!est) throw ConfigError("sddb model needs a spectral estimate");
            if (est->fit && est->residual_density) {
                m.arma_form = true;
                m.phi = est->fit->phi;
                m.w = trim(factorize(*est->residual_density));
            } else {
                m.w = trim(factorize(est->density));
            }
            m.innovations = make_innovations(cfg.innovations, m.w.sigma2, x, est->fit);
            break;
        }
        case BootMethod::sddb_ar: {
            if (!est) throw ConfigError("sddb model needs a spectral estimate");
            m.w = trim(factorize(est->density));
            m.innovations = make_innovations(cfg.innovations, m.w.sigma2, x, est->fit);
            break;
        }
        case BootMethod::ars: {
            auto sieve = ar_sieve_model(x, FrequencyGrid(cfg.estimator.grid_size),
                                        cfg.estimator.order);
            m.w = std::move(sieve.w);
            m.phi = std::move(sieve.phi);
            m.innovations = std::move(sieve.innovations);
            break;
        }
        case BootMethod::bb: {
            m.data.assign(x.begin(), x.end());
            m.block_length = (cfg.block_length > 0) ? cfg.block_length
                                                    : default_block_length(int(x.size()));
            break;
        }
        case BootMethod::nd:
            throw ConfigError("the normal-approximation method has no replicates");
    }
    return m;
}

/// Root center for a statistic under a generator model. Replicate roots
/// mirror the real root around their own world's true value: for the mean
/// that is the generator mean, which equals the sample mean; for
/// autocorrelations under a fitted model it is the model's own
/// autocorrelation. Block resampling has no fitted model, so the plug-in
/// value stands in.
inline double root_center(const StatisticSpec& stat, double original,
                          const ReplicateModel& m,
                          const SpectralEstimateResult* est) {
    if (stat.id != StatisticSpec::Id::autocorrelation || stat.lag < 1 ||
        m.method == BootMethod::bb)
        return original;
    const WoldModel* wm = &m.w;
    WoldModel w_full;
    if (m.arma_form) {
        if (!est) return original;
        w_full = trim(factorize(est->density));
        wm = &w_full;
    }
    return implied_autocorrelation(*wm, stat.lag)[std::size_t(stat.lag)];
}

}  // namespace detail

/// B replicate statistic values (and standard errors when studentized), each
/// generated from an independent substream of rng. The generator model is
/// built once from the data; replicate b uses rng.substream(b).
inline BootstrapReplicateSet bootstrap_distribution(std::span<const double> x,
                                                    const StatisticSpec& stat,
                                                    const BootstrapConfig& cfg,
                                                    const RngStream& rng) {
    if (cfg.B < 1) throw ConfigError("replicate count must be positive");
    const int n = int(x.size());
    std::optional<SpectralEstimateResult> est;
    if (cfg.method == BootMethod::sddb || cfg.method == BootMethod::sddb_ar)
        est = estimate_spectral_density(x, cfg.estimator);
    auto model = detail::build_replicate_model(x, cfg, est ? &*est : nullptr);

    EstimatorConfig stud_cfg = cfg.estimator;
    if (cfg.studentizer_grid > 0) stud_cfg.grid_size = cfg.studentizer_grid;

    BootstrapReplicateSet out;
    out.method = to_string(cfg.method);
    out.statistic = stat.name();
    out.seed = rng.seed();
    out.original = stat.evaluate(x);
    out.center = detail::root_center(stat, out.original, model,
                                     est ? &*est : nullptr);
    const bool need_tau = cfg.studentized &&
                          stat.id == StatisticSpec::Id::generalized;
    if (cfg.studentized) {
        auto est_data = estimate_spectral_density(x, stud_cfg);
        std::optional<Kappa4Estimate> k4;
        if (need_tau) k4 = estimate_kappa4(x);
        out.original_se = studentizer_se(stat, est_data, n, k4);
        out.se_values.resize(std::size_t(cfg.B));
    }
    out.values.resize(std::size_t(cfg.B));
    for (int b = 0; b < cfg.B; ++b) {
        RngStream sub = rng.substream(std::uint64_t(b));
        auto series = model.generate(n, sub);
        out.values[std::size_t(b)] = stat.evaluate(series);
        if (cfg.studentized) {
            auto est_b = estimate_spectral_density(series, stud_cfg);
            std::optional<Kappa4Estimate> k4b;
            if (need_tau) k4b = estimate_kappa4(series);
            out.se_values[std::size_t(b)] = studentizer_se(stat, est_b, n, k4b);
        }
    }
    return out;
}

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double alpha = 0.0;
};

/// Linear-interpolation sample quantile of a sorted vector.
inline double sorted_quantile(std::span<const double> sorted, double p) {
    const std::size_t m = sorted.size();
    if (m == 0) throw ConfigError("quantile of empty sample");
    if (m == 1) return sorted[0];
    const double h = double(m - 1) * p;
    const std::size_t i = std::size_t(std::min<double>(std::floor(h), double(m - 2)));
    const double frac = h - double(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

/// Two-sided interval by root inversion. Each replicate root is T*_b minus
/// the root center (the statistic's value under the generator model, falling
/// back to the original statistic), so the replicate bias carries into the
/// interval as a correction; in studentized mode each root is divided by its
/// replicate-level standard error and the interval is rescaled by the
/// original standard error. The interval itself always inverts around the
/// original statistic.
inline ConfidenceInterval confidence_interval(const BootstrapReplicateSet& r,
                                              double alpha, bool studentized) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
    const std::size_t B = r.values.size();
    if (B < 20) throw TooFewReplicates("need at least 20 replicates for quantiles");
    if (studentized && (r.se_values.size() != B || r.original_se < 0.0))
        throw ConfigError("studentized interval needs replicate standard errors");
    const double center = std::isnan(r.center) ? r.original : r.center;
    std::vector<double> roots(B);
    for (std::size_t b = 0; b < B; ++b) {
        double root = r.values[b] - center;
        if (studentized) root /= std::max(r.se_values[b], 1e-300);
        roots[b] = root;
    }
    std::sort(roots.begin(), roots.end());
    const double qlo = sorted_quantile(roots, alpha / 2.0);
    const double qhi = sorted_quantile(roots, 1.0 - alpha / 2.0);
    const double scale = studentized ? r.original_se : 1.0;
    return {r.original - scale * qhi, r.original - scale * qlo, alpha};
}

/// Normal-approximation interval T +- z_{1-alpha/2} se.
inline ConfidenceInterval normal_interval(double point, double se, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
    if (!(se >= 0.0)) throw ConfigError("standard error must be nonnegative");
    const double z = normal_quantile(1.0 - alpha / 2.0);
    return {point - z * se, point + z * se, alpha};
}

}  // namespace sddb
