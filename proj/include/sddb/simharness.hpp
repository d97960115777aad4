#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sddb/bootstrap.hpp"
#include "sddb/errors.hpp"
#include "sddb/factorization.hpp"
#include "sddb/rng.hpp"
#include "sddb/spectral_density.hpp"

namespace sddb {

/// Data-generating processes of the simulation study. All three are driven by
/// i.i.d. t(3)/sqrt(3) innovations (unit variance, heavy tails).
enum class ModelId { I, II, III };

inline std::string to_string(ModelId m) {
    switch (m) {
        case ModelId::I: return "I";
        case ModelId::II: return "II";
        case ModelId::III: return "III";
    }
    return "?";
}

inline ModelId parse_model_id(const std::string& s) {
    if (s == "I" || s == "1" || s == "i") return ModelId::I;
    if (s == "II" || s == "2" || s == "ii") return ModelId::II;
    if (s == "III" || s == "3" || s == "iii") return ModelId::III;
    throw ConfigError("unknown model '" + s + "'");
}

namespace detail {

inline constexpr std::array<double, 1> kModelIAr = {0.9};
inline constexpr std::array<double, 4> kModelIIAr = {1.34, -1.88, 1.32, -0.8};
inline constexpr std::array<double, 2> kModelIIMa = {0.71, 0.25};
// (1 - z)^10 expanded: alternating binomial weights
inline constexpr std::array<double, 11> kModelIIIMa = {
    1.0, -10.0, 45.0, -120.0, 210.0, -252.0, 210.0, -120.0, 45.0, -10.0, 1.0};

inline double unit_t3(RngStream& rng) {
    return rng.student_t3() / std::numbers::sqrt3;
}

}  // namespace detail

/// Simulate one realization. Models I and II run the ARMA recursion from a
/// zero state and discard a burn-in segment; Model III is an exact finite
/// moving-average filter fed with 10 pre-sample innovations.
inline std::vector<double> simulate_model(ModelId id, int n, RngStream& rng,
                                          int burnin = 1000) {
    if (n < 1) throw ConfigError("series length must be positive");
    if (id == ModelId::III) {
        const auto& c = detail::kModelIIIMa;
        const int q = int(c.size()) - 1;
        std::vector<double> eps(static_cast<std::size_t>(n + q));
        for (double& e : eps) e = detail::unit_t3(rng);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) {
            double s = 0.0;
            for (int k = 0; k <= q; ++k) s += c[std::size_t(k)] * eps[std::size_t(t + q - k)];
            x[std::size_t(t)] = s;
        }
        return x;
    }
    std::span<const double> phi = (id == ModelId::I)
                                      ? std::span<const double>(detail::kModelIAr)
                                      : std::span<const double>(detail::kModelIIAr);
    std::span<const double> theta = (id == ModelId::I)
                                        ? std::span<const double>()
                                        : std::span<const double>(detail::kModelIIMa);
    const int p = int(phi.size());
    const int q = int(theta.size());
    const int total = burnin + n;
    std::vector<double> eps(static_cast<std::size_t>(total));
    std::vector<double> x(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        const double e = detail::unit_t3(rng);
        eps[std::size_t(t)] = e;
        double s = e;
        for (int j = 1; j <= p && j <= t; ++j)
            s += phi[std::size_t(j - 1)] * x[std::size_t(t - j)];
        for (int k = 1; k <= q && k <= t; ++k)
            s += theta[std::size_t(k - 1)] * eps[std::size_t(t - k)];
        x[std::size_t(t)] = s;
    }
    return {x.begin() + burnin, x.end()};
}

/// Exact spectral density values of a model on a grid (sigma^2 = 1). Model III
/// has a true zero at frequency zero.
inline std::vector<double> true_density_values(ModelId id,
                                               const FrequencyGrid& grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.size));
    const double scale = 1.0 / (2.0 * std::numbers::pi);
    for (int j = 0; j < grid.size; ++j) {
        const double l = grid.lambda(j);
        const cdouble z = std::exp(cdouble(0.0, -l));
        cdouble num(1.0, 0.0), den(1.0, 0.0);
        switch (id) {
            case ModelId::I: {
                cdouble zk = z;
                den -= 0.9 * zk;
                break;
            }
            case ModelId::II: {
                cdouble zk = z;
                for (double t : detail::kModelIIMa) {
                    num += t * zk;
                    zk *= z;
                }
                zk = z;
                for (double p : detail::kModelIIAr) {
                    den -= p * zk;
                    zk *= z;
                }
                break;
            }
            case ModelId::III: {
                num = 0.0;
                cdouble zk(1.0, 0.0);
                for (double c : detail::kModelIIIMa) {
                    num += c * zk;
                    zk *= z;
                }
                break;
            }
        }
        out[std::size_t(j)] = scale * std::norm(num) / std::norm(den);
    }
    return out;
}

/// Exact density as an estimate object. Throws NonPositiveDensity for Model
/// III, whose spectrum vanishes at frequency zero.
inline SpectralDensityEstimate true_density(ModelId id, const FrequencyGrid& grid) {
    return make_density(grid, true_density_values(id, grid),
                        EstimatorFamily::synthetic, Tuning{}, /*clamp=*/false);
}

namespace detail {

inline const WoldModel& model_ii_wold() {
    static const WoldModel w = [] {
        FrequencyGrid grid(32768);
        return factorize(true_density(ModelId::II, grid));
    }();
    return w;
}

}  // namespace detail

/// Exact lag-h autocorrelation of a model.
inline double true_autocorrelation(ModelId id, int h) {
    if (h < 0) throw ConfigError("lag must be nonnegative");
    switch (id) {
        case ModelId::I:
            return std::pow(0.9, h);
        case ModelId::II: {
            auto rho = implied_autocorrelation(detail::model_ii_wold(), h);
            return rho[std::size_t(h)];
        }
        case ModelId::III: {
            const auto& c = detail::kModelIIIMa;
            const int q = int(c.size()) - 1;
            if (h > q) return 0.0;
            double g0 = 0.0, gh = 0.0;
            for (int k = 0; k <= q; ++k) g0 += c[std::size_t(k)] * c[std::size_t(k)];
            for (int k = 0; k + h <= q; ++k) gh += c[std::size_t(k)] * c[std::size_t(k + h)];
            return gh / g0;
        }
    }
    throw ConfigError("unknown model");
}

inline double true_rho2(ModelId id) { return true_autocorrelation(id, 2); }

/// Population value the confidence interval is supposed to cover.
inline double true_statistic(ModelId id, const StatisticSpec& s) {
    switch (s.id) {
        case StatisticSpec::Id::mean:
            return 0.0;
        case StatisticSpec::Id::autocorrelation:
            return true_autocorrelation(id, s.lag);
        default:
            throw ConfigError("coverage targets exist only for mean and autocorrelation");
    }
}

struct ExperimentConfig {
    std::vector<ModelId> models = {ModelId::I};
    std::vector<BootMethod> methods = {BootMethod::sddb};
    std::vector<StatisticSpec> statistics = {StatisticSpec::mean()};
    bool studentized = true;
    std::vector<double> levels = {0.2, 0.1, 0.05};
    int realizations = 500;
    int replicates = 500;
    int n = 128;
    std::uint64_t seed = 0;
    EstimatorConfig estimator;
    int studentizer_grid = 256;
    InnovationGenerator::Kind innovations = InnovationGenerator::Kind::gaussian;
    int burnin = -1;
    int block_length = -1;
    int threads = 0;  // 0: hardware concurrency

    ExperimentConfig() { estimator.grid_size = 1024; }
};

struct CoverageCell {
    ModelId model = ModelId::I;
    BootMethod method = BootMethod::sddb;
    std::string statistic;
    double alpha = 0.0;
    int hits = 0;
    int realizations = 0;
    double runtime_ms = 0.0;

    double coverage_percent() const {
        return realizations > 0 ? 100.0 * double(hits) / double(realizations) : 0.0;
    }
    double se_percent() const {
        if (realizations <= 0) return 0.0;
        const double p = double(hits) / double(realizations);
        return 100.0 * std::sqrt(p * (1.0 - p) / double(realizations));
    }
};

struct CoverageReport {
    std::vector<CoverageCell> cells;  // model-major, then method, statistic, level
    ExperimentConfig config;
};

namespace detail {

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.models.empty()) throw ConfigError("models: empty");
    if (cfg.methods.empty()) throw ConfigError("methods: empty");
    if (cfg.statistics.empty()) throw ConfigError("statistics: empty");
    if (cfg.levels.empty()) throw ConfigError("levels: empty");
    for (double a : cfg.levels)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("levels: must lie in (0, 1)");
    if (cfg.realizations < 1) throw ConfigError("realizations: must be positive");
    if (cfg.replicates < 1) throw ConfigError("replicates: must be positive");
    if (cfg.n < 32) throw ConfigError("n: must be at least 32");
}

struct CellAccumulator {
    std::vector<long long> hits;
    std::vector<double> elapsed_ms;

    explicit CellAccumulator(std::size_t cells) : hits(cells, 0), elapsed_ms(cells, 0.0) {}

    void merge(const CellAccumulator& o) {
        for (std::size_t i = 0; i < hits.size(); ++i) {
            hits[i] += o.hits[i];
            elapsed_ms[i] += o.elapsed_ms[i];
        }
    }
};

}  // namespace detail

/// Monte Carlo coverage study. Realizations are distributed over worker
/// threads; every random stream is derived from (seed, model, realization),
/// so results do not depend on the schedule. Within one realization all
/// methods see the same simulated series.
inline CoverageReport coverage_study(
    const ExperimentConfig& cfg,
    const std::function<void(int, int)>& progress = {}) {
    detail::validate(cfg);
    const std::size_t nm = cfg.models.size();
    const std::size_t nme = cfg.methods.size();
    const std::size_t ns = cfg.statistics.size();
    const std::size_t nl = cfg.levels.size();
    const std::size_t ncells = nm * nme * ns * nl;
    auto cell_index = [&](std::size_t mi, std::size_t ji, std::size_t si,
                          std::size_t li) {
        return ((mi * nme + ji) * ns + si) * nl + li;
    };

    // per-model targets per statistic
    std::vector<std::vector<double>> targets(nm, std::vector<double>(ns));
    for (std::size_t mi = 0; mi < nm; ++mi)
        for (std::size_t si = 0; si < ns; ++si)
            targets[mi][si] = true_statistic(cfg.models[mi], cfg.statistics[si]);

    EstimatorConfig stud_cfg = cfg.estimator;
    if (cfg.studentizer_grid > 0) stud_cfg.grid_size = cfg.studentizer_grid;

    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : int(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    nthreads = std::min(nthreads, cfg.realizations);

    std::mutex progress_mu;
    int done = 0;
    const int total_work = int(nm) * cfg.realizations;

    auto worker = [&](int r_lo, int r_hi, detail::CellAccumulator& acc) {
        using clock = std::chrono::steady_clock;
        for (std::size_t mi = 0; mi < nm; ++mi) {
            const ModelId model = cfg.models[mi];
            RngStream model_stream = RngStream(cfg.seed).substream(mi);
            for (int r = r_lo; r < r_hi; ++r) {
                RngStream real_stream = model_stream.substream(std::uint64_t(r));
                RngStream data_rng = real_stream.substream(0);
                auto x = simulate_model(model, cfg.n, data_rng);

                std::vector<double> that(ns);
                for (std::size_t si = 0; si < ns; ++si)
                    that[si] = cfg.statistics[si].evaluate(x);

                std::optional<SpectralEstimateResult> est_stud;
                std::vector<double> se_hat(ns, -1.0);
                std::vector<std::optional<Kappa4Estimate>> k4_data(ns);
                if (cfg.studentized) {
                    est_stud = estimate_spectral_density(x, stud_cfg);
                    for (std::size_t si = 0; si < ns; ++si) {
                        if (cfg.statistics[si].id == StatisticSpec::Id::generalized)
                            k4_data[si] = estimate_kappa4(x);
                        se_hat[si] = studentizer_se(cfg.statistics[si], *est_stud,
                                                    cfg.n, k4_data[si]);
                    }
                }

                std::optional<SpectralEstimateResult> est_gen;
                auto gen_estimate = [&]() -> const SpectralEstimateResult& {
                    if (!est_gen) est_gen = estimate_spectral_density(x, cfg.estimator);
                    return *est_gen;
                };

                for (std::size_t ji = 0; ji < nme; ++ji) {
                    const BootMethod method = cfg.methods[ji];
                    RngStream boot_rng = real_stream.substream(1 + std::uint64_t(ji));
                    const auto t0 = clock::now();

                    // replicate statistic values and standard errors per statistic
                    std::vector<std::vector<double>> vals(ns);
                    std::vector<std::vector<double>> ses(ns);
                    std::vector<double> centers = that;
                    const bool needs_replicates =
                        method != BootMethod::nd || !cfg.studentized;
                    if (needs_replicates) {
                        BootstrapConfig bc;
                        bc.method = (method == BootMethod::nd) ? BootMethod::sddb
                                                               : method;
                        bc.estimator = cfg.estimator;
                        bc.innovations = cfg.innovations;
                        bc.burnin = cfg.burnin;
                        bc.block_length = cfg.block_length;
                        const SpectralEstimateResult* est_ptr =
                            (bc.method == BootMethod::sddb ||
                             bc.method == BootMethod::sddb_ar)
                                ? &gen_estimate()
                                : nullptr;
                        detail::ReplicateModel rmodel =
                            detail::build_replicate_model(x, bc, est_ptr);
                        for (std::size_t si = 0; si < ns; ++si)
                            centers[si] = detail::root_center(
                                cfg.statistics[si], that[si], rmodel, est_ptr);
                        const bool stud_reps =
                            cfg.studentized && method != BootMethod::nd;
                        for (std::size_t si = 0; si < ns; ++si) {
                            vals[si].resize(std::size_t(cfg.replicates));
                            if (stud_reps) ses[si].resize(std::size_t(cfg.replicates));
                        }
                        for (int b = 0; b < cfg.replicates; ++b) {
                            RngStream sub = boot_rng.substream(std::uint64_t(b));
                            auto series = rmodel.generate(cfg.n, sub);
                            std::optional<SpectralEstimateResult> est_b;
                            if (stud_reps)
                                est_b = estimate_spectral_density(series, stud_cfg);
                            for (std::size_t si = 0; si < ns; ++si) {
                                vals[si][std::size_t(b)] =
                                    cfg.statistics[si].evaluate(series);
                                if (stud_reps) {
                                    std::optional<Kappa4Estimate> k4b;
                                    if (cfg.statistics[si].id ==
                                        StatisticSpec::Id::generalized)
                                        k4b = estimate_kappa4(series);
                                    ses[si][std::size_t(b)] = studentizer_se(
                                        cfg.statistics[si], *est_b, cfg.n, k4b);
                                }
                            }
                        }
                    }

                    for (std::size_t si = 0; si < ns; ++si) {
                        for (std::size_t li = 0; li < nl; ++li) {
                            const double alpha = cfg.levels[li];
                            ConfidenceInterval ci;
                            if (method == BootMethod::nd) {
                                double se;
                                if (cfg.studentized) {
                                    se = se_hat[si];
                                } else {
                                    // normal approximation with the bootstrap
                                    // standard deviation of the statistic
                                    double m = 0.0;
                                    for (double v : vals[si]) m += v;
                                    m /= double(vals[si].size());
                                    double v2 = 0.0;
                                    for (double v : vals[si]) v2 += (v - m) * (v - m);
                                    se = std::sqrt(v2 / double(vals[si].size()));
                                }
                                ci = normal_interval(that[si], se, alpha);
                            } else {
                                BootstrapReplicateSet set;
                                set.values = vals[si];
                                set.se_values = cfg.studentized ? ses[si]
                                                                : std::vector<double>{};
                                set.original = that[si];
                                set.original_se = se_hat[si];
                                set.center = centers[si];
                                ci = confidence_interval(set, alpha, cfg.studentized);
                            }
                            const double target = targets[mi][si];
                            const bool hit = target >= ci.lo && target <= ci.hi;
                            const std::size_t idx = cell_index(mi, ji, si, li);
                            if (hit) ++acc.hits[idx];
                        }
                    }

                    const double ms =
                        std::chrono::duration<double, std::milli>(clock::now() - t0)
                            .count();
                    for (std::size_t si = 0; si < ns; ++si)
                        for (std::size_t li = 0; li < nl; ++li)
                            acc.elapsed_ms[cell_index(mi, ji, si, li)] +=
                                ms / double(ns * nl);
                }

                if (progress) {
                    std::lock_guard<std::mutex> lock(progress_mu);
                    progress(++done, total_work);
                }
            }
        }
    };

    std::vector<detail::CellAccumulator> accs(static_cast<std::size_t>(nthreads),
                                              detail::CellAccumulator(ncells));
    if (nthreads == 1) {
        worker(0, cfg.realizations, accs[0]);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (cfg.realizations + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(cfg.realizations, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi, t] { worker(lo, hi, accs[std::size_t(t)]); });
        }
        for (auto& th : pool) th.join();
    }
    for (int t = 1; t < nthreads; ++t) accs[0].merge(accs[std::size_t(t)]);

    CoverageReport report;
    report.config = cfg;
    report.cells.reserve(ncells);
    for (std::size_t mi = 0; mi < nm; ++mi)
        for (std::size_t ji = 0; ji < nme; ++ji)
            for (std::size_t si = 0; si < ns; ++si)
                for (std::size_t li = 0; li < nl; ++li) {
                    CoverageCell cell;
                    cell.model = cfg.models[mi];
                    cell.method = cfg.methods[ji];
                    cell.statistic = cfg.statistics[si].name();
                    cell.alpha = cfg.levels[li];
                    cell.hits = int(accs[0].hits[cell_index(mi, ji, si, li)]);
                    cell.realizations = cfg.realizations;
                    cell.runtime_ms = accs[0].elapsed_ms[cell_index(mi, ji, si, li)];
                    report.cells.push_back(std::move(cell));
                }
    return report;
}

/// Wold coefficient tables for several estimator configurations of the same
/// series, reported for k in [k_min, k_max].
struct CoefficientTable {
    struct Row {
        EstimatorFamily family = EstimatorFamily::ar_parametric;
        std::vector<double> c;
        std::vector<double> b;
    };
    int k_min = 0;
    int k_max = 0;
    std::vector<Row> rows;
};

inline CoefficientTable coefficient_table(std::span<const double> x,
                                          std::span<const EstimatorConfig> configs,
                                          int k_min, int k_max) {
    if (k_min < 0 || k_max < k_min) throw ConfigError("invalid coefficient range");
    CoefficientTable table;
    table.k_min = k_min;
    table.k_max = k_max;
    for (const auto& cfg : configs) {
        auto est = estimate_spectral_density(x, cfg);
        const int M = std::max(k_max, 1);
        if (M >= cfg.grid_size / 2)
            throw GridTooCoarse("coefficient range too large for the grid");
        auto w = factorize(est.density, M);
        CoefficientTable::Row row;
        row.family = cfg.family;
        for (int k = k_min; k <= k_max; ++k) {
            row.c.push_back(w.ma[std::size_t(k)]);
            row.b.push_back(w.ar[std::size_t(k)]);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace sddb
