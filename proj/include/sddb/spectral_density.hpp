#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sddb/errors.hpp"

namespace sddb {

/// Equispaced frequencies lambda_j = 2*pi*j/size, j = 0..size-1, covering [0, 2*pi).
/// Size must be even so that pi itself is on the grid.
struct FrequencyGrid {
    static constexpr int kDefaultSize = 8192;

    int size;

    explicit FrequencyGrid(int n = kDefaultSize) : size(n) {
        if (n < 4 || n % 2 != 0)
            throw ConfigError("frequency grid size must be even and at least 4");
    }

    double lambda(int j) const { return 2.0 * std::numbers::pi * double(j) / double(size); }

    bool operator==(const FrequencyGrid& o) const { return size == o.size; }
};

enum class EstimatorFamily {
    periodogram_raw,
    lag_window,
    smoothed_periodogram,
    ar_parametric,
    prewhitened,
    cepstral_threshold,
    synthetic,
};

inline const char* to_string(EstimatorFamily f) {
    switch (f) {
        case EstimatorFamily::periodogram_raw: return "periodogram-raw";
        case EstimatorFamily::lag_window: return "lag-window";
        case EstimatorFamily::smoothed_periodogram: return "smoothed-periodogram";
        case EstimatorFamily::ar_parametric: return "ar-parametric";
        case EstimatorFamily::prewhitened: return "pre-whitened";
        case EstimatorFamily::cepstral_threshold: return "cepstral-threshold";
        case EstimatorFamily::synthetic: return "synthetic";
    }
    return "unknown";
}

enum class LagWindowKernel { bartlett, trapezoid, gaussian };

inline const char* to_string(LagWindowKernel k) {
    switch (k) {
        case LagWindowKernel::bartlett: return "bartlett";
        case LagWindowKernel::trapezoid: return "trapezoid";
        case LagWindowKernel::gaussian: return "gaussian";
    }
    return "unknown";
}

/// Tuning parameters actually used by an estimator (for provenance/reporting).
struct Tuning {
    std::optional<LagWindowKernel> kernel;
    std::optional<int> truncation;
    std::optional<int> order;
    std::optional<double> bandwidth;
    std::optional<double> threshold;

    std::string describe() const {
        std::string s;
        auto add = [&s](const std::string& part) {
            if (!s.empty()) s += ", ";
            s += part;
        };
        if (kernel) add(std::string("kernel=") + to_string(*kernel));
        if (truncation) add("truncation=" + std::to_string(*truncation));
        if (order) add("order=" + std::to_string(*order));
        if (bandwidth) add("bandwidth=" + std::to_string(*bandwidth));
        if (threshold) add("threshold=" + std::to_string(*threshold));
        return s;
    }
};

/// Positivity floor: proportional to the largest value, with an absolute backstop.
inline double density_floor_value(const std::vector<double>& values) {
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, v);
    return std::max(1e-6 * mx, 1e-12);
}

/// Spectral density values on a full frequency grid.
/// Invariants: values.size() == grid.size, values[j] == values[size-j],
/// and min(values) >= floor > 0.
struct SpectralDensityEstimate {
    FrequencyGrid grid;
    std::vector<double> values;
    EstimatorFamily family = EstimatorFamily::synthetic;
    Tuning tuning;
    double floor = 0.0;

    double at_zero() const { return values.at(0); }
    double min_value() const { return *std::min_element(values.begin(), values.end()); }
    double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

/// Assemble an estimate: enforce exact symmetry, then either clamp to the
/// standard floor or (for families positive by construction) record the
/// attained minimum as the floor without altering values.
inline SpectralDensityEstimate make_density(FrequencyGrid grid, std::vector<double> values,
                                            EstimatorFamily family, Tuning tuning,
                                            bool clamp) {
    if (int(values.size()) != grid.size)
        throw ConfigError("density values must match grid size");
    const int n = grid.size;
    for (int j = 1; j < n / 2; ++j) {
        const double v = 0.5 * (values[j] + values[n - j]);
        values[j] = values[n - j] = v;
    }
    SpectralDensityEstimate est{grid, std::move(values), family, std::move(tuning), 0.0};
    const double rule = density_floor_value(est.values);
    if (clamp) {
        for (double& v : est.values) v = std::max(v, rule);
        est.floor = rule;
    } else {
        const double mn = est.min_value();
        if (!(mn > 0.0))
            throw NonPositiveDensity("density is not strictly positive");
        est.floor = std::min(rule, mn);
    }
    return est;
}

}  // namespace sddb
