#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sddb/bootstrap.hpp"
#include "sddb/errors.hpp"
#include "sddb/factorization.hpp"
#include "sddb/simharness.hpp"
#include "sddb/spectral_density.hpp"

namespace sddb {
namespace io {

/// Full-precision rendering: values survive a write/read round trip exactly.
inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Compact rendering for summary files (6 significant digits).
inline std::string format_compact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline bool try_parse_double(const std::string& token, double& out) {
    std::string t = trim(token);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (*begin == '+') ++begin;
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline double parse_double(const std::string& token, int line) {
    double v;
    if (!try_parse_double(token, v))
        throw ParseError(line, "cannot parse number '" + trim(token) + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline bool is_blank_or_comment(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t[0] == '#';
}

}  // namespace detail

/// Read a series file: one value per line, or two columns `t,value` where the
/// first column must be strictly increasing and is otherwise ignored. A
/// non-numeric first row is treated as a header. Blank lines and lines
/// starting with '#' are skipped.
inline std::vector<double> read_series_csv(std::istream& in) {
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    int ncols = 0;  // 0 until first data row
    bool have_prev_t = false;
    double prev_t = 0.0;
    bool saw_any = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank_or_comment(line)) continue;
        auto fields = detail::split_csv_line(line);
        if (!saw_any) {
            double probe;
            if (!detail::try_parse_double(fields[0], probe)) {
                saw_any = true;  // header row
                continue;
            }
            saw_any = true;
        }
        if (int(fields.size()) > 2)
            throw ParseError(lineno, "expected 1 or 2 columns, got " +
                                         std::to_string(fields.size()));
        if (ncols == 0) {
            ncols = int(fields.size());
        } else if (int(fields.size()) != ncols) {
            throw ParseError(lineno, "inconsistent column count");
        }
        if (ncols == 1) {
            values.push_back(detail::parse_double(fields[0], lineno));
        } else {
            const double t = detail::parse_double(fields[0], lineno);
            const double v = detail::parse_double(fields[1], lineno);
            if (have_prev_t && !(t > prev_t))
                throw ParseError(lineno, "time column is not strictly increasing");
            prev_t = t;
            have_prev_t = true;
            values.push_back(v);
        }
    }
    if (values.empty()) throw ParseError(lineno == 0 ? 1 : lineno, "no data rows");
    return values;
}

inline std::vector<double> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    return read_series_csv(in);
}

inline void write_series_csv(std::ostream& out, std::span<const double> x) {
    out << "value\n";
    for (double v : x) out << format_full(v) << "\n";
}

inline void write_spectrum_csv(std::ostream& out,
                               const SpectralDensityEstimate& est) {
    out << "lambda,value\n";
    for (int j = 0; j < est.grid.size; ++j)
        out << format_full(est.grid.lambda(j)) << ','
            << format_full(est.values[std::size_t(j)]) << "\n";
}

/// Detect whether a stream holds a spectrum file written by
/// write_spectrum_csv (header `lambda,value`). Leaves the stream untouched.
inline bool sniff_spectrum_header(std::istream& in) {
    const auto pos = in.tellg();
    std::string first;
    std::getline(in, first);
    in.clear();
    in.seekg(pos);
    auto fields = detail::split_csv_line(first);
    return fields.size() == 2 && detail::trim(fields[0]) == "lambda" &&
           detail::trim(fields[1]) == "value";
}

/// Read a spectrum file back into a density estimate (family `synthetic`, no
/// clamping). Frequencies must form the canonical grid 2*pi*j/N.
inline SpectralDensityEstimate read_spectrum_csv(std::istream& in) {
    std::string line;
    int lineno = 0;
    std::vector<double> lambdas, values;
    bool saw_any = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank_or_comment(line)) continue;
        auto fields = detail::split_csv_line(line);
        if (!saw_any) {
            saw_any = true;
            double probe;
            if (!detail::try_parse_double(fields[0], probe)) continue;  // header
        }
        if (fields.size() != 2)
            throw ParseError(lineno, "expected 2 columns `lambda,value`");
        lambdas.push_back(detail::parse_double(fields[0], lineno));
        values.push_back(detail::parse_double(fields[1], lineno));
    }
    const int n = int(values.size());
    if (n == 0) throw ParseError(lineno == 0 ? 1 : lineno, "no data rows");
    if (n % 2 != 0 || n < 4)
        throw ParseError(lineno, "spectrum grid must have even size >= 4");
    FrequencyGrid grid(n);
    for (int j = 0; j < n; ++j) {
        const double expect = grid.lambda(j);
        if (std::abs(lambdas[std::size_t(j)] - expect) > 1e-9 * 2.0 * std::numbers::pi)
            throw ParseError(j + 2, "frequency column is not the canonical grid");
    }
    return make_density(grid, values, EstimatorFamily::synthetic, Tuning{},
                        /*clamp=*/false);
}

inline void write_coefficients_csv(std::ostream& out, const WoldModel& w,
                                   int k_min, int k_max) {
    if (k_min < 0 || k_max < k_min) throw ConfigError("invalid coefficient range");
    if (k_max >= int(w.ma.size()) || k_max >= int(w.ar.size()))
        throw ConfigError("coefficient range exceeds factorization length");
    out << "k,c_k,b_k\n";
    for (int k = k_min; k <= k_max; ++k)
        out << k << ',' << format_full(w.ma[std::size_t(k)]) << ','
            << format_full(w.ar[std::size_t(k)]) << "\n";
}

inline void write_replicates_csv(std::ostream& out,
                                 const BootstrapReplicateSet& reps) {
    out << "replicate,value\n";
    for (std::size_t b = 0; b < reps.values.size(); ++b)
        out << b << ',' << format_full(reps.values[b]) << "\n";
}

inline void write_coverage_csv(std::ostream& out, const CoverageReport& report) {
    out << "model,method,statistic,level,coverage,se,runtime_ms\n";
    for (const auto& cell : report.cells)
        out << to_string(cell.model) << ',' << to_string(cell.method) << ','
            << cell.statistic << ',' << format_compact(cell.alpha) << ','
            << format_compact(cell.coverage_percent()) << ','
            << format_compact(cell.se_percent()) << ','
            << format_compact(cell.runtime_ms) << "\n";
}

namespace detail {

inline std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string pad_left(const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t w) {
    return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace detail

/// Human-readable coverage table: one block per statistic, rows are
/// model/method pairs, columns are nominal confidence levels in percent.
inline std::string coverage_text_table(const CoverageReport& report) {
    std::ostringstream out;
    std::vector<std::string> stats;
    for (const auto& c : report.cells)
        if (std::find(stats.begin(), stats.end(), c.statistic) == stats.end())
            stats.push_back(c.statistic);
    for (const auto& stat : stats) {
        out << "statistic: " << stat
            << (report.config.studentized ? " (studentized)" : " (basic)") << "\n";
        out << detail::pad_right("model", 7) << detail::pad_right("method", 9);
        for (double a : report.config.levels)
            out << detail::pad_left(detail::fixed2(100.0 * (1.0 - a)) + "%", 10);
        out << "\n";
        for (ModelId m : report.config.models) {
            for (BootMethod meth : report.config.methods) {
                out << detail::pad_right(to_string(m), 7)
                    << detail::pad_right(to_string(meth), 9);
                for (double a : report.config.levels) {
                    for (const auto& c : report.cells) {
                        if (c.model == m && c.method == meth && c.statistic == stat &&
                            c.alpha == a) {
                            out << detail::pad_left(
                                detail::fixed2(c.coverage_percent()), 10);
                            break;
                        }
                    }
                }
                out << "\n";
            }
        }
        out << "\n";
    }
    return out.str();
}

/// Two-decimal coefficient table, one c-row and one b-row per estimator.
inline std::string coefficient_text_table(const CoefficientTable& table) {
    std::ostringstream out;
    constexpr std::size_t label_w = 22;
    out << detail::pad_right("estimator", label_w) << detail::pad_right("coeff", 7);
    for (int k = table.k_min; k <= table.k_max; ++k)
        out << detail::pad_left("k=" + std::to_string(k), 8);
    out << "\n";
    for (const auto& row : table.rows) {
        out << detail::pad_right(to_string(row.family), label_w)
            << detail::pad_right("c_k", 7);
        for (double v : row.c) out << detail::pad_left(detail::fixed2(v), 8);
        out << "\n";
        out << detail::pad_right("", label_w) << detail::pad_right("b_k", 7);
        for (double v : row.b) out << detail::pad_left(detail::fixed2(v), 8);
        out << "\n";
    }
    return out.str();
}

/// JSON confidence-interval report for one bootstrap run.
inline nlohmann::json ci_report_json(const BootstrapReplicateSet& reps,
                                     const std::vector<ConfidenceInterval>& cis,
                                     bool studentized, int n) {
    nlohmann::json j;
    j["statistic"] = reps.statistic;
    j["method"] = reps.method;
    j["n"] = n;
    j["B"] = reps.values.size();
    j["seed"] = reps.seed;
    j["studentized"] = studentized;
    j["point"] = reps.original;
    if (reps.original_se > 0.0) j["se"] = reps.original_se;
    if (!std::isnan(reps.center)) j["root_center"] = reps.center;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ci : cis) {
        nlohmann::json e;
        e["alpha"] = ci.alpha;
        e["level"] = 1.0 - ci.alpha;
        e["lower"] = ci.lo;
        e["upper"] = ci.hi;
        arr.push_back(std::move(e));
    }
    j["intervals"] = std::move(arr);
    return j;
}

// --- configuration parsing ------------------------------------------------

/// Estimator family names used by the command line and config files.
inline EstimatorFamily parse_family_flag(const std::string& s) {
    if (s == "ar") return EstimatorFamily::ar_parametric;
    if (s == "lag-window") return EstimatorFamily::lag_window;
    if (s == "smoothed") return EstimatorFamily::smoothed_periodogram;
    if (s == "prewhiten") return EstimatorFamily::prewhitened;
    if (s == "cepstrum") return EstimatorFamily::cepstral_threshold;
    if (s == "periodogram") return EstimatorFamily::periodogram_raw;
    throw ConfigError("estimator: unknown family '" + s + "'");
}

inline std::string family_flag_name(EstimatorFamily f) {
    switch (f) {
        case EstimatorFamily::ar_parametric: return "ar";
        case EstimatorFamily::lag_window: return "lag-window";
        case EstimatorFamily::smoothed_periodogram: return "smoothed";
        case EstimatorFamily::prewhitened: return "prewhiten";
        case EstimatorFamily::cepstral_threshold: return "cepstrum";
        case EstimatorFamily::periodogram_raw: return "periodogram";
        default: return to_string(f);
    }
}

inline LagWindowKernel parse_kernel_flag(const std::string& s) {
    if (s == "bartlett") return LagWindowKernel::bartlett;
    if (s == "trapezoid") return LagWindowKernel::trapezoid;
    if (s == "gaussian") return LagWindowKernel::gaussian;
    throw ConfigError("kernel: unknown kernel '" + s + "'");
}

inline InnovationGenerator::Kind parse_innovation_flag(const std::string& s) {
    if (s == "gaussian") return InnovationGenerator::Kind::gaussian;
    if (s == "threepoint") return InnovationGenerator::Kind::three_point;
    if (s == "empirical") return InnovationGenerator::Kind::empirical;
    throw ConfigError("innovations: unknown kind '" + s + "'");
}

inline std::string innovation_flag_name(InnovationGenerator::Kind k) {
    switch (k) {
        case InnovationGenerator::Kind::gaussian: return "gaussian";
        case InnovationGenerator::Kind::three_point: return "threepoint";
        case InnovationGenerator::Kind::empirical: return "empirical";
    }
    return "?";
}

/// Parse a weighted-covariance statistic description:
/// { "min_lag": h0, "weights": [...] or [[...],...],
///   "combiner": "identity" | "ratio" | {"kind":"linear","coefficients":[...]} }
inline StatisticSpec parse_gencov_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("gencov: expected a JSON object");
    WeightedCovarianceSpec spec;
    int min_lag = 0;
    if (j.contains("min_lag")) {
        if (!j["min_lag"].is_number_integer())
            throw ConfigError("gencov.min_lag: expected an integer");
        min_lag = j["min_lag"].get<int>();
    }
    if (!j.contains("weights") || !j["weights"].is_array() || j["weights"].empty())
        throw ConfigError("gencov.weights: expected a nonempty array");
    const auto& wj = j["weights"];
    auto read_seq = [&](const nlohmann::json& a) {
        LagWeights lw;
        lw.min_lag = min_lag;
        for (const auto& v : a) {
            if (!v.is_number()) throw ConfigError("gencov.weights: expected numbers");
            lw.w.push_back(v.get<double>());
        }
        return lw;
    };
    if (wj[0].is_array()) {
        for (const auto& a : wj) {
            if (!a.is_array()) throw ConfigError("gencov.weights: mixed nesting");
            spec.weights.push_back(read_seq(a));
        }
    } else {
        spec.weights.push_back(read_seq(wj));
    }
    if (j.contains("combiner")) {
        const auto& cj = j["combiner"];
        if (cj.is_string()) {
            const std::string s = cj.get<std::string>();
            if (s == "identity") spec.combiner = Combiner::identity();
            else if (s == "ratio") spec.combiner = Combiner::ratio();
            else throw ConfigError("gencov.combiner: unknown combiner '" + s + "'");
        } else if (cj.is_object()) {
            if (!cj.contains("kind") || cj["kind"] != "linear")
                throw ConfigError("gencov.combiner: expected kind 'linear'");
            if (!cj.contains("coefficients") || !cj["coefficients"].is_array())
                throw ConfigError("gencov.combiner.coefficients: expected an array");
            std::vector<double> coeff;
            for (const auto& v : cj["coefficients"]) coeff.push_back(v.get<double>());
            spec.combiner = Combiner::linear(coeff);
        } else {
            throw ConfigError("gencov.combiner: expected string or object");
        }
    } else {
        spec.combiner = Combiner::identity();
    }
    if (spec.combiner.kind == Combiner::Kind::ratio && spec.weights.size() != 2)
        throw ConfigError("gencov: ratio combiner needs exactly 2 weight sequences");
    if (spec.combiner.kind == Combiner::Kind::linear &&
        spec.combiner.linear_coeff.size() != spec.weights.size())
        throw ConfigError("gencov: linear combiner length must match weight count");
    return StatisticSpec::generalized(std::move(spec));
}

/// Parse `mean`, `rho<k>` or `gencov:<file.json>`.
inline StatisticSpec parse_statistic_flag(const std::string& s) {
    if (s == "mean") return StatisticSpec::mean();
    if (s.rfind("rho", 0) == 0) {
        const std::string tail = s.substr(3);
        int lag = 0;
        auto res = std::from_chars(tail.data(), tail.data() + tail.size(), lag);
        if (res.ec != std::errc() || res.ptr != tail.data() + tail.size() || lag < 1)
            throw ConfigError("statistic: cannot parse lag in '" + s + "'");
        return StatisticSpec::rho(lag);
    }
    if (s.rfind("gencov:", 0) == 0) {
        const std::string path = s.substr(7);
        std::ifstream in(path);
        if (!in) throw ConfigError("statistic: cannot open gencov spec '" + path + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(int(e.byte), "gencov spec: " + std::string(e.what()));
        }
        return parse_gencov_json(j);
    }
    throw ConfigError("statistic: unknown statistic '" + s + "'");
}

namespace detail {

inline void require_kind(bool ok, const std::string& path, const char* what) {
    if (!ok) throw ConfigError(path + ": expected " + what);
}

}  // namespace detail

/// Parse an estimator block. Accepts `"order"`/`"bandwidth"` as the string
/// "aic"/"cv" (automatic selection) or an explicit number.
inline EstimatorConfig parse_estimator_json(const nlohmann::json& j,
                                            const std::string& path) {
    EstimatorConfig cfg;
    detail::require_kind(j.is_object(), path, "an object");
    for (const auto& [key, value] : j.items()) {
        const std::string p = path + "." + key;
        if (key == "family") {
            detail::require_kind(value.is_string(), p, "a string");
            try {
                cfg.family = parse_family_flag(value.get<std::string>());
            } catch (const ConfigError& e) {
                throw ConfigError(p + ": " + e.what());
            }
        } else if (key == "kernel") {
            detail::require_kind(value.is_string(), p, "a string");
            cfg.kernel = parse_kernel_flag(value.get<std::string>());
        } else if (key == "truncation" || key == "trunc") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.truncation = value.get<int>();
        } else if (key == "order") {
            if (value.is_string() && value.get<std::string>() == "aic")
                cfg.order = -1;
            else if (value.is_number_integer())
                cfg.order = value.get<int>();
            else
                throw ConfigError(p + ": expected \"aic\" or an integer");
        } else if (key == "bandwidth") {
            if (value.is_string() && value.get<std::string>() == "cv")
                cfg.bandwidth = -1.0;
            else if (value.is_number())
                cfg.bandwidth = value.get<double>();
            else
                throw ConfigError(p + ": expected \"cv\" or a number");
        } else if (key == "threshold") {
            if (value.is_string() && value.get<std::string>() == "default")
                cfg.threshold = -1.0;
            else if (value.is_number())
                cfg.threshold = value.get<double>();
            else
                throw ConfigError(p + ": expected \"default\" or a number");
        } else if (key == "grid") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.grid_size = value.get<int>();
        } else {
            throw ConfigError(p + ": unknown key");
        }
    }
    return cfg;
}

struct ParsedExperiment {
    ExperimentConfig config;
    bool seed_set = false;
};

/// Parse an experiment configuration document. Unknown keys are an error so
/// misspelled fields are caught; messages name the offending field path.
inline ParsedExperiment parse_experiment_json(const nlohmann::json& j) {
    detail::require_kind(j.is_object(), "config", "an object");
    ParsedExperiment parsed;
    ExperimentConfig& cfg = parsed.config;
    for (const auto& [key, value] : j.items()) {
        const std::string p = key;
        if (key == "models") {
            detail::require_kind(value.is_array() && !value.empty(), p,
                                 "a nonempty array");
            cfg.models.clear();
            for (const auto& v : value) {
                detail::require_kind(v.is_string(), p, "strings");
                cfg.models.push_back(parse_model_id(v.get<std::string>()));
            }
        } else if (key == "methods") {
            detail::require_kind(value.is_array() && !value.empty(), p,
                                 "a nonempty array");
            cfg.methods.clear();
            for (const auto& v : value) {
                detail::require_kind(v.is_string(), p, "strings");
                try {
                    cfg.methods.push_back(parse_boot_method(v.get<std::string>()));
                } catch (const ConfigError& e) {
                    throw ConfigError(p + ": " + e.what());
                }
            }
        } else if (key == "statistics") {
            detail::require_kind(value.is_array() && !value.empty(), p,
                                 "a nonempty array");
            cfg.statistics.clear();
            for (const auto& v : value) {
                detail::require_kind(v.is_string(), p, "strings");
                try {
                    cfg.statistics.push_back(parse_statistic_flag(v.get<std::string>()));
                } catch (const ConfigError& e) {
                    throw ConfigError(p + ": " + e.what());
                }
            }
        } else if (key == "studentized") {
            detail::require_kind(value.is_boolean(), p, "a boolean");
            cfg.studentized = value.get<bool>();
        } else if (key == "levels") {
            detail::require_kind(value.is_array() && !value.empty(), p,
                                 "a nonempty array");
            cfg.levels.clear();
            for (const auto& v : value) {
                detail::require_kind(v.is_number(), p, "numbers");
                cfg.levels.push_back(v.get<double>());
            }
        } else if (key == "realizations") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.realizations = value.get<int>();
        } else if (key == "replicates") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.replicates = value.get<int>();
        } else if (key == "n") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.n = value.get<int>();
        } else if (key == "seed") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.seed = value.get<std::uint64_t>();
            parsed.seed_set = true;
        } else if (key == "estimator") {
            cfg.estimator = parse_estimator_json(value, "estimator");
        } else if (key == "studentizer_grid") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.studentizer_grid = value.get<int>();
        } else if (key == "innovations") {
            detail::require_kind(value.is_string(), p, "a string");
            cfg.innovations = parse_innovation_flag(value.get<std::string>());
        } else if (key == "burnin") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.burnin = value.get<int>();
        } else if (key == "block_length") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.block_length = value.get<int>();
        } else if (key == "threads") {
            detail::require_kind(value.is_number_integer(), p, "an integer");
            cfg.threads = value.get<int>();
        } else {
            throw ConfigError(p + ": unknown key");
        }
    }
    return parsed;
}

inline ParsedExperiment read_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(int(e.byte), "config JSON: " + std::string(e.what()));
    }
    return parse_experiment_json(j);
}

}  // namespace io
}  // namespace sddb
