// Command-line front end: spectrum estimation, Wold factorization, bootstrap
// confidence intervals, model simulation and Monte Carlo coverage studies.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sddb/sddb.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

struct EstimatorFlags {
    std::string family = "prewhiten";
    std::string kernel = "bartlett";
    std::string trunc = "politis";
    std::string bandwidth = "cv";
    std::string order = "aic";
    std::string threshold = "default";
    int grid = sddb::FrequencyGrid::kDefaultSize;
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& f) {
    cmd->add_option("--estimator", f.family,
                    "estimator: ar, lag-window, smoothed, prewhiten, cepstrum, periodogram")
        ->capture_default_str();
    cmd->add_option("--kernel", f.kernel,
                    "lag-window kernel: bartlett, trapezoid, gaussian")
        ->capture_default_str();
    cmd->add_option("--trunc", f.trunc,
                    "lag-window truncation: positive integer or 'politis'")
        ->capture_default_str();
    cmd->add_option("--bandwidth", f.bandwidth,
                    "smoothing bandwidth: positive number or 'cv'")
        ->capture_default_str();
    cmd->add_option("--order", f.order, "autoregressive order: integer or 'aic'")
        ->capture_default_str();
    cmd->add_option("--threshold", f.threshold,
                    "cepstral threshold: nonnegative number or 'default'")
        ->capture_default_str();
    cmd->add_option("--grid", f.grid, "frequency grid size (even)")
        ->capture_default_str();
}

int parse_int_flag(const std::string& s, const char* name) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw sddb::ConfigError(std::string(name) + ": expected an integer, got '" + s + "'");
    return v;
}

double parse_double_flag(const std::string& s, const char* name) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw sddb::ConfigError(std::string(name) + ": expected a number, got '" + s + "'");
    return v;
}

sddb::EstimatorConfig make_estimator_config(const EstimatorFlags& f) {
    sddb::EstimatorConfig cfg;
    cfg.family = sddb::io::parse_family_flag(f.family);
    cfg.kernel = sddb::io::parse_kernel_flag(f.kernel);
    if (f.trunc != "politis") {
        cfg.truncation = parse_int_flag(f.trunc, "trunc");
        if (cfg.truncation < 0) throw sddb::ConfigError("trunc: must be nonnegative");
    }
    if (f.bandwidth != "cv") {
        cfg.bandwidth = parse_double_flag(f.bandwidth, "bandwidth");
        if (cfg.bandwidth < 0.0)
            throw sddb::ConfigError("bandwidth: must be nonnegative");
    }
    if (f.order != "aic") {
        cfg.order = parse_int_flag(f.order, "order");
        if (cfg.order < 0) throw sddb::ConfigError("order: must be nonnegative");
    }
    if (f.threshold != "default") {
        cfg.threshold = parse_double_flag(f.threshold, "threshold");
        if (cfg.threshold < 0.0)
            throw sddb::ConfigError("threshold: must be nonnegative");
    }
    cfg.grid_size = f.grid;
    return cfg;
}

std::vector<double> read_series(const std::string& path) {
    if (path == "-") return sddb::io::read_series_csv(std::cin);
    return sddb::io::read_series_csv(path);
}

void with_output(const std::string& out,
                 const std::function<void(std::ostream&)>& fn) {
    if (out.empty() || out == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream f(out);
    if (!f) throw sddb::ConfigError("cannot open output file '" + out + "'");
    fn(f);
}

void require_format(const std::string& format,
                    std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (format == a) return;
    throw sddb::ConfigError("format: '" + format + "' not supported here");
}

// --- subcommand option bags ----------------------------------------------

struct SpectrumOpts {
    std::string input;
    std::string out;
    std::string format = "csv";
    EstimatorFlags est;
};

struct FactorizeOpts {
    std::string input;
    std::string out;
    std::string format = "csv";
    int kmin = 0;
    int kmax = 10;
    EstimatorFlags est;
};

struct BootstrapOpts {
    std::string input;
    std::string out;
    std::string format = "json";
    std::string statistic = "mean";
    std::string method = "sddb";
    std::string innovations = "gaussian";
    bool studentized_on = false;
    bool studentized_off = false;
    int B = 1000;
    std::vector<double> alphas;
    std::uint64_t seed = kDefaultSeed;
    int studentizer_grid = -1;
    int burnin = -1;
    int block_length = -1;
    EstimatorFlags est;
};

struct SimulateOpts {
    std::string config;  // coverage-style run
    std::string model;   // direct series generation
    int n = 128;
    int burnin = 1000;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
};

struct CoverageOpts {
    std::string config;
    std::string out;
    std::string format = "text";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    bool threads_given = false;
    bool quiet = false;
};

int run_spectrum(const SpectrumOpts& o) {
    require_format(o.format, {"csv"});
    auto x = read_series(o.input);
    auto est = sddb::estimate_spectral_density(x, make_estimator_config(o.est));
    with_output(o.out, [&](std::ostream& os) {
        sddb::io::write_spectrum_csv(os, est.density);
    });
    return 0;
}

int run_factorize(const FactorizeOpts& o) {
    require_format(o.format, {"csv", "text"});
    if (o.kmin < 0 || o.kmax < o.kmin)
        throw sddb::ConfigError("kmin/kmax: invalid coefficient range");
    std::stringstream buf;
    if (o.input == "-") {
        buf << std::cin.rdbuf();
    } else {
        std::ifstream f(o.input);
        if (!f) throw sddb::ConfigError("cannot open input file '" + o.input + "'");
        buf << f.rdbuf();
    }
    sddb::WoldModel w;
    sddb::EstimatorFamily family;
    if (sddb::io::sniff_spectrum_header(buf)) {
        auto density = sddb::io::read_spectrum_csv(buf);
        w = sddb::factorize(density);
        family = sddb::EstimatorFamily::synthetic;
    } else {
        auto x = sddb::io::read_series_csv(buf);
        auto cfg = make_estimator_config(o.est);
        auto est = sddb::estimate_spectral_density(x, cfg);
        w = sddb::factorize(est.density);
        family = cfg.family;
    }
    with_output(o.out, [&](std::ostream& os) {
        if (o.format == "csv") {
            sddb::io::write_coefficients_csv(os, w, o.kmin, o.kmax);
        } else {
            sddb::CoefficientTable table;
            table.k_min = o.kmin;
            table.k_max = o.kmax;
            sddb::CoefficientTable::Row row;
            row.family = family;
            for (int k = o.kmin; k <= o.kmax; ++k) {
                if (k >= int(w.ma.size()))
                    throw sddb::ConfigError("kmax exceeds factorization length");
                row.c.push_back(w.ma[std::size_t(k)]);
                row.b.push_back(w.ar[std::size_t(k)]);
            }
            table.rows.push_back(std::move(row));
            os << sddb::io::coefficient_text_table(table);
        }
    });
    return 0;
}

int run_bootstrap(const BootstrapOpts& o) {
    require_format(o.format, {"json", "csv", "text"});
    if (o.studentized_on && o.studentized_off)
        throw sddb::ConfigError("studentized: both --studentized and --no-studentized given");
    auto x = read_series(o.input);
    const int n = int(x.size());
    auto stat = sddb::io::parse_statistic_flag(o.statistic);

    sddb::BootstrapConfig bc;
    bc.method = sddb::parse_boot_method(o.method);
    bc.estimator = make_estimator_config(o.est);
    bc.studentizer_grid = o.studentizer_grid;
    bc.innovations = sddb::io::parse_innovation_flag(o.innovations);
    bc.B = o.B;
    bc.burnin = o.burnin;
    bc.block_length = o.block_length;
    const bool default_stud = stat.id == sddb::StatisticSpec::Id::mean ||
                              stat.id == sddb::StatisticSpec::Id::autocorrelation;
    bc.studentized = o.studentized_on ? true
                     : o.studentized_off ? false
                                         : default_stud;

    std::vector<double> alphas = o.alphas;
    if (alphas.empty()) alphas = {0.05};
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw sddb::ConfigError("alpha: must lie in (0, 1)");

    sddb::RngStream rng(o.seed);
    sddb::BootstrapReplicateSet reps;
    std::vector<sddb::ConfidenceInterval> cis;
    if (bc.method == sddb::BootMethod::nd) {
        reps.method = "nd";
        reps.statistic = stat.name();
        reps.seed = o.seed;
        reps.original = stat.evaluate(x);
        double se;
        if (bc.studentized) {
            sddb::EstimatorConfig stud_cfg = bc.estimator;
            if (bc.studentizer_grid > 0) stud_cfg.grid_size = bc.studentizer_grid;
            auto est = sddb::estimate_spectral_density(x, stud_cfg);
            std::optional<sddb::Kappa4Estimate> k4;
            if (stat.id == sddb::StatisticSpec::Id::generalized)
                k4 = sddb::estimate_kappa4(x);
            se = sddb::studentizer_se(stat, est, n, k4);
            reps.original_se = se;
        } else {
            // normal approximation scaled by the bootstrap standard deviation
            sddb::BootstrapConfig sub = bc;
            sub.method = sddb::BootMethod::sddb;
            sub.studentized = false;
            auto r = sddb::bootstrap_distribution(x, stat, sub, rng);
            reps.values = r.values;
            double m = 0.0;
            for (double v : r.values) m += v;
            m /= double(r.values.size());
            double v2 = 0.0;
            for (double v : r.values) v2 += (v - m) * (v - m);
            se = std::sqrt(v2 / double(r.values.size()));
        }
        for (double a : alphas) cis.push_back(sddb::normal_interval(reps.original, se, a));
    } else {
        reps = sddb::bootstrap_distribution(x, stat, bc, rng);
        for (double a : alphas)
            cis.push_back(sddb::confidence_interval(reps, a, bc.studentized));
    }

    with_output(o.out, [&](std::ostream& os) {
        if (o.format == "json") {
            os << sddb::io::ci_report_json(reps, cis, bc.studentized, n).dump(2) << "\n";
        } else if (o.format == "csv") {
            sddb::io::write_replicates_csv(os, reps);
        } else {
            os << "statistic: " << reps.statistic << "\n";
            os << "method: " << reps.method
               << (bc.studentized ? " (studentized)" : " (basic)") << "\n";
            os << "point: " << sddb::io::format_compact(reps.original);
            if (reps.original_se > 0.0)
                os << "  se: " << sddb::io::format_compact(reps.original_se);
            os << "\n";
            for (const auto& ci : cis) {
                char head[32];
                std::snprintf(head, sizeof(head), "%.0f%%", 100.0 * (1.0 - ci.alpha));
                os << head << " interval: [" << sddb::io::format_compact(ci.lo)
                   << ", " << sddb::io::format_compact(ci.hi) << "]\n";
            }
        }
    });
    return 0;
}

int run_coverage_config(const std::string& config_path, const CoverageOpts& o) {
    auto parsed = sddb::io::read_experiment_config(config_path);
    if (o.seed_given) {
        parsed.config.seed = o.seed;
        parsed.seed_set = true;
    }
    if (!parsed.seed_set)
        throw sddb::ConfigError("seed: required (pass --seed or set it in the config)");
    if (o.threads_given) parsed.config.threads = o.threads;

    std::function<void(int, int)> progress;
    if (!o.quiet) {
        progress = [](int done, int total) {
            const int step = std::max(1, total / 20);
            if (done % step == 0 || done == total)
                std::cerr << "progress: " << done << "/" << total << "\n";
        };
    }
    auto report = sddb::coverage_study(parsed.config, progress);
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw sddb::ConfigError("cannot open output file '" + o.out + "'");
        sddb::io::write_coverage_csv(f, report);
    }
    require_format(o.format, {"csv", "text"});
    if (o.format == "csv")
        sddb::io::write_coverage_csv(std::cout, report);
    else
        std::cout << sddb::io::coverage_text_table(report);
    return 0;
}

int run_simulate(const SimulateOpts& o, const CoverageOpts& cov) {
    if (!o.config.empty() && !o.model.empty())
        throw sddb::ConfigError("simulate: give either --model or a config file, not both");
    if (!o.config.empty()) return run_coverage_config(o.config, cov);
    if (o.model.empty())
        throw sddb::ConfigError("simulate: need --model or a config file");
    auto id = sddb::parse_model_id(o.model);
    sddb::RngStream rng(o.seed);
    auto x = sddb::simulate_model(id, o.n, rng, o.burnin);
    with_output(o.out, [&](std::ostream& os) { sddb::io::write_series_csv(os, x); });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-density-driven bootstrap for stationary time series"};
    app.require_subcommand(1);

    SpectrumOpts sp;
    auto* spectrum = app.add_subcommand("spectrum", "Estimate a spectral density");
    spectrum->add_option("input", sp.input, "series CSV ('-' for stdin)")->required();
    spectrum->add_option("--out", sp.out, "output path (default stdout)");
    spectrum->add_option("--format", sp.format, "output format: csv")
        ->capture_default_str();
    add_estimator_flags(spectrum, sp.est);

    FactorizeOpts fa;
    auto* factorize = app.add_subcommand(
        "factorize", "Wold coefficients of an estimated or supplied spectrum");
    factorize->add_option("input", fa.input,
                          "series CSV or spectrum CSV ('-' for stdin)")
        ->required();
    factorize->add_option("--out", fa.out, "output path (default stdout)");
    factorize->add_option("--format", fa.format, "output format: csv, text")
        ->capture_default_str();
    factorize->add_option("--kmin", fa.kmin, "first coefficient index")
        ->capture_default_str();
    factorize->add_option("--kmax", fa.kmax, "last coefficient index")
        ->capture_default_str();
    add_estimator_flags(factorize, fa.est);

    BootstrapOpts bo;
    auto* bootstrap =
        app.add_subcommand("bootstrap", "Bootstrap confidence intervals");
    bootstrap->add_option("input", bo.input, "series CSV ('-' for stdin)")->required();
    bootstrap->add_option("--statistic", bo.statistic,
                          "statistic: mean, rho<k>, gencov:<spec.json>")
        ->capture_default_str();
    bootstrap->add_option("--method", bo.method,
                          "method: sddb, sddb-ar, ars, bb, nd")
        ->capture_default_str();
    bootstrap->add_option("--innovations", bo.innovations,
                          "innovation law: gaussian, threepoint, empirical")
        ->capture_default_str();
    bootstrap->add_flag("--studentized", bo.studentized_on,
                        "studentize the bootstrap roots");
    bootstrap->add_flag("--no-studentized", bo.studentized_off,
                        "use basic (non-studentized) roots");
    bootstrap->add_option("--B", bo.B, "number of replicates")->capture_default_str();
    bootstrap->add_option("--alpha", bo.alphas,
                          "nominal level alpha (repeatable; default 0.05)");
    bootstrap->add_option("--seed", bo.seed, "random seed")->capture_default_str();
    bootstrap->add_option("--studentizer-grid", bo.studentizer_grid,
                          "grid size for replicate-level density estimates");
    bootstrap->add_option("--burnin", bo.burnin,
                          "burn-in length for autoregressive generation");
    bootstrap->add_option("--block-length", bo.block_length,
                          "block length for the moving-block method");
    bootstrap->add_option("--out", bo.out, "output path (default stdout)");
    bootstrap->add_option("--format", bo.format, "output format: json, csv, text")
        ->capture_default_str();
    add_estimator_flags(bootstrap, bo.est);

    SimulateOpts si;
    CoverageOpts si_cov;
    auto* simulate = app.add_subcommand(
        "simulate", "Generate model series, or run a study config");
    simulate->add_option("config", si.config, "experiment config JSON (optional)");
    simulate->add_option("--model", si.model, "model id: I, II, III");
    simulate->add_option("--n", si.n, "series length")->capture_default_str();
    simulate->add_option("--burnin", si.burnin, "burn-in length")
        ->capture_default_str();
    auto* si_seed = simulate->add_option("--seed", si.seed, "random seed")
                        ->capture_default_str();
    simulate->add_option("--out", si.out, "output path (default stdout)");
    simulate->add_option("--format", si_cov.format,
                         "config-run output format: csv, text");
    simulate->add_flag("--quiet", si_cov.quiet, "suppress progress output");

    CoverageOpts co;
    auto* coverage =
        app.add_subcommand("coverage", "Monte Carlo coverage study from a config");
    coverage->add_option("config", co.config, "experiment config JSON")->required();
    auto* co_seed = coverage->add_option("--seed", co.seed, "random seed (required here or in the config)");
    coverage->add_option("--threads", co.threads, "worker threads (0 = auto)");
    coverage->add_option("--out", co.out, "coverage CSV output path");
    coverage->add_option("--format", co.format, "stdout format: text, csv")
        ->capture_default_str();
    coverage->add_flag("--quiet", co.quiet, "suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (spectrum->parsed()) return run_spectrum(sp);
        if (factorize->parsed()) return run_factorize(fa);
        if (bootstrap->parsed()) return run_bootstrap(bo);
        if (simulate->parsed()) {
            si_cov.seed = si.seed;
            si_cov.seed_given = si_seed->count() > 0;
            si_cov.out = si.out;
            if (si_cov.format.empty()) si_cov.format = "text";
            return run_simulate(si, si_cov);
        }
        if (coverage->parsed()) {
            co.seed_given = co_seed->count() > 0;
            co.threads_given = coverage->count("--threads") > 0;
            return run_coverage_config(co.config, co);
        }
    } catch (const sddb::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";  // what() carries the line number
        return 2;
    } catch (const sddb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const sddb::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
