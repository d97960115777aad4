#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "sddb/errors.hpp"
#include "sddb/fft.hpp"
#include "sddb/spectral_density.hpp"

namespace sddb {

/// Fourier coefficients a_0..a_K of the log spectral density.
struct CepstralSequence {
    std::vector<double> a;

    int max_index() const { return int(a.size()) - 1; }
    double operator[](int k) const { return a.at(std::size_t(k)); }
};

/// a_k = (1/N) sum_j log f(lambda_j) exp(-i k lambda_j), real by symmetry of f.
/// Indices above N/2 alias, so K must stay below N/2.
inline CepstralSequence cepstral_coefficients(const SpectralDensityEstimate& f,
                                              int max_index) {
    const int n = f.grid.size;
    if (max_index < 0) throw ConfigError("cepstral index range must be nonnegative");
    if (max_index >= n / 2)
        throw GridTooCoarse("cepstral index " + std::to_string(max_index) +
                            " needs a grid larger than " + std::to_string(2 * max_index));
    std::vector<double> logf(n);
    for (int j = 0; j < n; ++j) {
        const double v = f.values[j];
        if (!(v > 0.0)) throw NonPositiveDensity("log of nonpositive density value");
        logf[j] = std::log(v);
    }
    auto spec = fft_real(logf);
    CepstralSequence out;
    out.a.resize(max_index + 1);
    const double inv = 1.0 / double(n);
    for (int k = 0; k <= max_index; ++k) out.a[k] = spec[k].real() * inv;
    return out;
}

/// One-step-ahead innovation variance implied by the mean log density.
inline double innovation_variance(double a0) {
    return 2.0 * std::numbers::pi * std::exp(a0);
}

/// Moving-average coefficients c_0..c_M of the canonical one-sided expansion,
/// c_0 = 1, via c_{k+1} = sum_{j=0}^{k} (1 - j/(k+1)) a_{k+1-j} c_j.
inline std::vector<double> ma_coefficients(const CepstralSequence& a, int M) {
    if (M < 1) throw ConfigError("MA truncation must be at least 1");
    if (a.max_index() < M)
        throw ConfigError("cepstral sequence too short for requested MA order");
    std::vector<double> c(M + 1);
    c[0] = 1.0;
    const double* ap = a.a.data();
    for (int k = 0; k < M; ++k) {
        const double inv = 1.0 / double(k + 1);
        double s = 0.0;
        for (int j = 0; j <= k; ++j)
            s += (1.0 - double(j) * inv) * ap[k + 1 - j] * c[j];
        c[k + 1] = s;
    }
    return c;
}

/// Autoregressive coefficients b_0..b_M of the inverted expansion, b_0 = -1,
/// via b_{k+1} = -sum_{j=0}^{k} (1 - j/(k+1)) a_{k+1-j} b_j. With this sign
/// convention X_t = sum_{k>=1} b_k X_{t-k} + eps_t.
inline std::vector<double> ar_coefficients(const CepstralSequence& a, int M) {
    if (M < 1) throw ConfigError("AR truncation must be at least 1");
    if (a.max_index() < M)
        throw ConfigError("cepstral sequence too short for requested AR order");
    std::vector<double> b(M + 1);
    b[0] = -1.0;
    const double* ap = a.a.data();
    for (int k = 0; k < M; ++k) {
        const double inv = 1.0 / double(k + 1);
        double s = 0.0;
        for (int j = 0; j <= k; ++j)
            s += (1.0 - double(j) * inv) * ap[k + 1 - j] * b[j];
        b[k + 1] = -s;
    }
    return b;
}

/// Truncated Wold representation: X_t = sum c_k eps_{t-k}, Var(eps) = sigma2,
/// together with the matching autoregressive side.
struct WoldModel {
    std::vector<double> ma;  // c_0..c_M, c_0 = 1
    std::vector<double> ar;  // b_0..b_M, b_0 = -1
    double sigma2 = 0.0;

    int order() const { return int(ma.size()) - 1; }
};

/// Factorize a strictly positive density into its Wold representation.
/// M defaults to N/2 - 1, the largest alias-free cepstral range.
inline WoldModel factorize(const SpectralDensityEstimate& f, int M = -1) {
    const int n = f.grid.size;
    if (M < 0) M = n / 2 - 1;
    auto a = cepstral_coefficients(f, M);
    WoldModel w;
    w.sigma2 = innovation_variance(a.a[0]);
    w.ma = ma_coefficients(a, M);
    w.ar = ar_coefficients(a, M);
    return w;
}

/// Smallest length L such that the absolute tail sum beyond L is below tol.
/// Always keeps at least the leading coefficient.
inline std::size_t trimmed_length(std::span<const double> v, double tol) {
    double tail = 0.0;
    std::size_t keep = v.size();
    while (keep > 1) {
        tail += std::abs(v[keep - 1]);
        if (tail >= tol) break;
        --keep;
    }
    return keep;
}

/// Drop trailing coefficients whose cumulative absolute sum is below tol.
/// Both sides keep a common length so the model stays self-consistent.
inline WoldModel trim(const WoldModel& w, double tol = 1e-10) {
    const std::size_t len =
        std::max(trimmed_length(w.ma, tol), trimmed_length(w.ar, tol));
    WoldModel out;
    out.ma.assign(w.ma.begin(), w.ma.begin() + len);
    out.ar.assign(w.ar.begin(), w.ar.begin() + len);
    out.sigma2 = w.sigma2;
    return out;
}

/// Density synthesized from the model: sigma2/(2*pi) |sum_k c_k e^{-ik l}|^2.
/// Exact on any grid; coefficients beyond the grid size fold (e^{-ik l_j} is
/// periodic in k with period N on grid frequencies).
inline std::vector<double> reconstruct_density(const WoldModel& w,
                                               const FrequencyGrid& grid) {
    const int n = grid.size;
    std::vector<cdouble> c(n, cdouble(0.0, 0.0));
    for (std::size_t k = 0; k < w.ma.size(); ++k)
        c[k % std::size_t(n)] += w.ma[k];
    fft_inplace(c, false);
    std::vector<double> out(n);
    const double scale = w.sigma2 / (2.0 * std::numbers::pi);
    for (int j = 0; j < n; ++j) out[j] = scale * std::norm(c[j]);
    return out;
}

/// gamma(h) = sigma2 * sum_j c_j c_{j+h}, h = 0..max_lag.
inline std::vector<double> implied_autocovariance(const WoldModel& w, int max_lag) {
    if (max_lag < 0) throw ConfigError("lag range must be nonnegative");
    std::vector<double> g(max_lag + 1, 0.0);
    const auto& c = w.ma;
    const int M = int(c.size());
    for (int h = 0; h <= max_lag; ++h) {
        double s = 0.0;
        for (int j = 0; j + h < M; ++j) s += c[j] * c[j + h];
        g[h] = w.sigma2 * s;
    }
    return g;
}

/// rho(h) = gamma(h)/gamma(0), h = 0..max_lag.
inline std::vector<double> implied_autocorrelation(const WoldModel& w, int max_lag) {
    auto g = implied_autocovariance(w, max_lag);
    if (!(g[0] > 0.0)) throw ZeroVariance("model has zero variance");
    std::vector<double> r(g.size());
    for (std::size_t h = 0; h < g.size(); ++h) r[h] = g[h] / g[0];
    return r;
}

}  // namespace sddb
