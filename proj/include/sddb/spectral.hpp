#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "sddb/errors.hpp"
#include "sddb/fft.hpp"
#include "sddb/spectral_density.hpp"
#include "sddb/statistics.hpp"

namespace sddb {

/// Lag window weight w(u), supported on |u| <= 1.
inline double lag_window_weight(LagWindowKernel k, double u) {
    const double au = std::abs(u);
    if (au > 1.0) return 0.0;
    switch (k) {
        case LagWindowKernel::bartlett:
            return 1.0 - au;
        case LagWindowKernel::trapezoid:
            return au <= 0.5 ? 1.0 : 2.0 * (1.0 - au);
        case LagWindowKernel::gaussian:
            return std::exp(-0.5 * u * u);
    }
    return 0.0;
}

/// Raw periodogram ordinates I(2 pi j / N), j = 0..N-1:
/// I(l) = |sum_t (x_t - xbar) e^{-itl}|^2 / (2 pi n).
/// The centered series is folded at t mod N, which is exact for every n
/// (e^{-itl_j} is N-periodic in t on grid frequencies).
inline std::vector<double> periodogram_values(std::span<const double> x,
                                              int grid_size) {
    const int n = int(x.size());
    if (n < 8) throw ConfigError("periodogram needs at least 8 samples");
    FrequencyGrid grid(grid_size);
    const double xbar = sample_mean(x);
    std::vector<cdouble> buf(static_cast<std::size_t>(grid_size), cdouble(0.0, 0.0));
    for (int t = 0; t < n; ++t)
        buf[std::size_t(t % grid_size)] += x[std::size_t(t)] - xbar;
    fft_inplace(buf, false);
    std::vector<double> out(static_cast<std::size_t>(grid_size));
    const double scale = 1.0 / (2.0 * std::numbers::pi * double(n));
    for (int j = 0; j < grid_size; ++j) out[std::size_t(j)] = scale * std::norm(buf[std::size_t(j)]);
    return out;
}

/// f_hat(l) = (2 pi)^{-1} sum_{|h| <= T} w(h/T) gamma_hat(h) e^{-ihl},
/// clamped at the positivity floor.
inline SpectralDensityEstimate lag_window_estimate(std::span<const double> x,
                                                   LagWindowKernel kernel,
                                                   int truncation,
                                                   const FrequencyGrid& grid) {
    const int n = int(x.size());
    if (truncation < 1 || truncation >= n)
        throw ConfigError("lag window truncation must be in [1, n)");
    if (truncation >= grid.size / 2)
        throw GridTooCoarse("lag window truncation too large for the grid");
    auto g = sample_autocovariance(x, truncation);
    const int N = grid.size;
    std::vector<cdouble> buf(static_cast<std::size_t>(N), cdouble(0.0, 0.0));
    buf[0] = g[0];
    for (int h = 1; h <= truncation; ++h) {
        const double wg = lag_window_weight(kernel, double(h) / double(truncation)) *
                          g[std::size_t(h)];
        buf[std::size_t(h)] += wg;
        buf[std::size_t(N - h)] += wg;
    }
    fft_inplace(buf, false);
    std::vector<double> vals(static_cast<std::size_t>(N));
    const double scale = 1.0 / (2.0 * std::numbers::pi);
    for (int j = 0; j < N; ++j) vals[std::size_t(j)] = scale * buf[std::size_t(j)].real();
    Tuning t;
    t.kernel = kernel;
    t.truncation = truncation;
    return make_density(grid, std::move(vals), EstimatorFamily::lag_window, t,
                        /*clamp=*/true);
}

/// Yule-Walker autoregressive fit of fixed order via the Levinson-Durbin
/// recursion on divisor-n autocovariances (positive semidefinite, so the
/// fitted polynomial is stable).
struct ARFit {
    int order = 0;
    std::vector<double> phi;        // phi_1..phi_p
    double sigma2 = 0.0;            // innovation variance estimate
    double aic = 0.0;               // n log sigma2 + 2p
    std::vector<double> residuals;  // e_t, t = p+1..n, from the centered series
    double mean = 0.0;              // sample mean removed before fitting
};

namespace detail {

/// Levinson-Durbin: prediction error variances sigma2[0..pmax] and the
/// coefficient vector at order pmax.
inline void levinson(std::span<const double> gamma, int pmax,
                     std::vector<double>& sigma2_by_order,
                     std::vector<std::vector<double>>& phi_by_order) {
    sigma2_by_order.assign(std::size_t(pmax) + 1, 0.0);
    phi_by_order.assign(std::size_t(pmax) + 1, {});
    double sigma = gamma[0];
    sigma2_by_order[0] = sigma;
    std::vector<double> phi;
    for (int k = 1; k <= pmax; ++k) {
        double num = gamma[std::size_t(k)];
        for (int j = 1; j < k; ++j)
            num -= phi[std::size_t(j - 1)] * gamma[std::size_t(k - j)];
        double kappa = (sigma > 0.0) ? num / sigma : 0.0;
        if (kappa > 1.0) kappa = 1.0;
        if (kappa < -1.0) kappa = -1.0;
        std::vector<double> next(static_cast<std::size_t>(k));
        for (int j = 1; j < k; ++j)
            next[std::size_t(j - 1)] =
                phi[std::size_t(j - 1)] - kappa * phi[std::size_t(k - 1 - j)];
        next[std::size_t(k - 1)] = kappa;
        phi = std::move(next);
        sigma *= (1.0 - kappa * kappa);
        if (sigma < 0.0) sigma = 0.0;
        sigma2_by_order[std::size_t(k)] = sigma;
        phi_by_order[std::size_t(k)] = phi;
    }
}

inline int default_pmax(int n) {
    const int cap = int(std::ceil(10.0 * std::log10(double(n))));
    return std::min(20, cap);
}

}  // namespace detail

inline ARFit yule_walker(std::span<const double> x, int p) {
    const int n = int(x.size());
    if (p < 0 || p >= n / 2) throw ConfigError("AR order must be in [0, n/2)");
    auto gamma = sample_autocovariance(x, p);
    if (!(gamma[0] > 0.0)) throw DegenerateSeries("zero sample variance");
    std::vector<double> s2;
    std::vector<std::vector<double>> phis;
    detail::levinson(gamma, p, s2, phis);
    ARFit fit;
    fit.order = p;
    fit.phi = phis[std::size_t(p)];
    fit.sigma2 = std::max(s2[std::size_t(p)], 1e-300);
    fit.aic = double(n) * std::log(fit.sigma2) + 2.0 * double(p);
    fit.mean = sample_mean(x);
    fit.residuals.resize(std::size_t(n - p));
    for (int t = p; t < n; ++t) {
        double e = x[std::size_t(t)] - fit.mean;
        for (int j = 1; j <= p; ++j)
            e -= fit.phi[std::size_t(j - 1)] * (x[std::size_t(t - j)] - fit.mean);
        fit.residuals[std::size_t(t - p)] = e;
    }
    return fit;
}

/// argmin over p in 0..pmax of n log sigma2_p + 2p; ties go to the smaller
/// order. pmax defaults to min(20, ceil(10 log10 n)).
inline int select_order_aic(std::span<const double> x, int pmax = -1) {
    const int n = int(x.size());
    if (n < 8) throw ConfigError("order selection needs at least 8 samples");
    if (pmax < 0) pmax = detail::default_pmax(n);
    pmax = std::min(pmax, n / 2 - 1);
    if (pmax < 0) pmax = 0;
    auto gamma = sample_autocovariance(x, pmax);
    if (!(gamma[0] > 0.0)) throw DegenerateSeries("zero sample variance");
    std::vector<double> s2;
    std::vector<std::vector<double>> phis;
    detail::levinson(gamma, pmax, s2, phis);
    int best = 0;
    double best_aic = double(n) * std::log(std::max(s2[0], 1e-300));
    for (int p = 1; p <= pmax; ++p) {
        const double aic =
            double(n) * std::log(std::max(s2[std::size_t(p)], 1e-300)) + 2.0 * double(p);
        if (aic < best_aic) {
            best_aic = aic;
            best = p;
        }
    }
    return best;
}

/// |1 - sum_j phi_j e^{-ijl}|^2 on the grid, via one FFT of the coefficients.
inline std::vector<double> ar_transfer_magnitude2(std::span<const double> phi,
                                                  const FrequencyGrid& grid) {
    const int N = grid.size;
    if (int(phi.size()) >= N)
        throw GridTooCoarse("AR order too large for the grid");
    std::vector<cdouble> buf(static_cast<std::size_t>(N), cdouble(0.0, 0.0));
    buf[0] = 1.0;
    for (std::size_t j = 0; j < phi.size(); ++j) buf[j + 1] = -phi[j];
    fft_inplace(buf, false);
    std::vector<double> out(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) out[std::size_t(j)] = std::norm(buf[std::size_t(j)]);
    return out;
}

struct ArSpectralResult {
    SpectralDensityEstimate density;
    ARFit fit;
};

/// Parametric estimate sigma2 (2 pi)^{-1} |1 - sum phi_j e^{-ijl}|^{-2}.
/// order < 0 selects the order by AIC.
inline ArSpectralResult ar_spectral_estimate(std::span<const double> x,
                                             const FrequencyGrid& grid,
                                             int order = -1) {
    const int p = (order < 0) ? select_order_aic(x) : order;
    ARFit fit = yule_walker(x, p);
    auto mag2 = ar_transfer_magnitude2(fit.phi, grid);
    std::vector<double> vals(static_cast<std::size_t>(grid.size));
    const double scale = fit.sigma2 / (2.0 * std::numbers::pi);
    for (int j = 0; j < grid.size; ++j) {
        const double m = std::max(mag2[std::size_t(j)], 1e-300);
        vals[std::size_t(j)] = scale / m;
    }
    Tuning t;
    t.order = p;
    auto dens = make_density(grid, std::move(vals), EstimatorFamily::ar_parametric,
                             t, /*clamp=*/false);
    return {std::move(dens), std::move(fit)};
}

namespace detail {

/// Cached circular Gaussian smoothing kernel on an N-point grid with standard
/// deviation b (radians): values, their sum, and their FFT for convolution.
struct SmoothingPlan {
    std::vector<double> kernel;
    std::vector<cdouble> kernel_fft;
    double kernel_sum = 0.0;

    SmoothingPlan(int n, double b) {
        kernel.resize(std::size_t(n));
        std::vector<cdouble> tmp(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const double l = 2.0 * std::numbers::pi * double(j) / double(n);
            const double d = std::min(l, 2.0 * std::numbers::pi - l);
            const double v = std::exp(-0.5 * (d / b) * (d / b));
            kernel[std::size_t(j)] = v;
            kernel_sum += v;
            tmp[std::size_t(j)] = v;
        }
        fft_inplace(tmp, false);
        kernel_fft = std::move(tmp);
    }
};

inline std::shared_ptr<const SmoothingPlan> smoothing_plan(int n, double b) {
    struct Key {
        int n;
        double b;
        bool operator<(const Key& o) const {
            if (n != o.n) return n < o.n;
            return b < o.b;
        }
    };
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const SmoothingPlan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[Key{n, b}];
    if (!slot) slot = std::make_shared<const SmoothingPlan>(n, b);
    return slot;
}

/// Kernel-weighted circular average of the ordinates with index 0 masked out:
/// out_j = sum_{l != 0} k_{j-l} I_l / sum_{l != 0} k_{j-l}.
inline std::vector<double> masked_kernel_smooth(std::span<const double> ordinates,
                                                const SmoothingPlan& plan) {
    const int n = int(ordinates.size());
    std::vector<cdouble> buf(static_cast<std::size_t>(n));
    buf[0] = 0.0;  // mask the centered-out zero frequency
    for (int j = 1; j < n; ++j) buf[std::size_t(j)] = ordinates[std::size_t(j)];
    fft_inplace(buf, false);
    for (int j = 0; j < n; ++j) buf[std::size_t(j)] *= plan.kernel_fft[std::size_t(j)];
    fft_inplace(buf, true);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double denom =
            (j == 0) ? (plan.kernel_sum - 1.0) : (plan.kernel_sum - plan.kernel[std::size_t(j)]);
        out[std::size_t(j)] = buf[std::size_t(j)].real() / std::max(denom, 1e-300);
    }
    return out;
}

}  // namespace detail

/// Gaussian-kernel smoothed periodogram with bandwidth b (kernel standard
/// deviation in radians); the zero-frequency ordinate, emptied by centering,
/// is excluded from every local average.
inline SpectralDensityEstimate smoothed_periodogram(std::span<const double> x,
                                                    double bandwidth,
                                                    const FrequencyGrid& grid) {
    if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
    auto I = periodogram_values(x, grid.size);
    auto plan = detail::smoothing_plan(grid.size, bandwidth);
    auto vals = detail::masked_kernel_smooth(I, *plan);
    Tuning t;
    t.bandwidth = bandwidth;
    return make_density(grid, std::move(vals), EstimatorFamily::smoothed_periodogram,
                        t, /*clamp=*/true);
}

/// Geometric ladder of 10 candidate bandwidths between 4 pi / n and pi / 2.
inline std::vector<double> default_bandwidth_candidates(int n) {
    const double lo = 4.0 * std::numbers::pi / double(n);
    const double hi = std::numbers::pi / 2.0;
    if (!(lo < hi)) return {hi};
    const int count = 10;
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[std::size_t(i)] = lo * std::pow(hi / lo, double(i) / double(count - 1));
    return out;
}

/// Leave-one-out Whittle score on the series' own Fourier frequencies:
/// sum_j [ I_j / f_{-j}(l_j) + log f_{-j}(l_j) ], f_{-j} the masked kernel
/// average excluding ordinate j itself. Ties pick the larger bandwidth.
/// Odd-length input (e.g. autoregressive residuals) is scored on the grid of
/// the next-lower even size; the folded periodogram stays exact there.
inline double crossvalidate_bandwidth(std::span<const double> x,
                                      std::span<const double> candidates) {
    if (candidates.empty()) throw ConfigError("empty bandwidth candidate set");
    const int n = int(x.size());
    const int m = n - (n % 2);
    auto I = periodogram_values(x, m);
    std::vector<double> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    double best_b = sorted.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double b : sorted) {
        if (!(b > 0.0)) throw ConfigError("bandwidth candidates must be positive");
        auto plan = detail::smoothing_plan(m, b);
        std::vector<cdouble> buf(static_cast<std::size_t>(m));
        buf[0] = 0.0;
        for (int j = 1; j < m; ++j) buf[std::size_t(j)] = I[std::size_t(j)];
        fft_inplace(buf, false);
        for (int j = 0; j < m; ++j) buf[std::size_t(j)] *= plan->kernel_fft[std::size_t(j)];
        fft_inplace(buf, true);
        double score = 0.0;
        for (int j = 1; j < m; ++j) {
            const double num = buf[std::size_t(j)].real() - I[std::size_t(j)];
            const double den = plan->kernel_sum - plan->kernel[std::size_t(j)] - 1.0;
            const double f = std::max(num / std::max(den, 1e-300), 1e-300);
            score += I[std::size_t(j)] / f + std::log(f);
        }
        if (score <= best_score) {
            best_score = score;
            best_b = b;
        }
    }
    return best_b;
}

struct PrewhitenedResult {
    SpectralDensityEstimate density;
    ARFit fit;
    SpectralDensityEstimate residual_density;
    double bandwidth = 0.0;
};

/// AR(AIC) filter, then a Gaussian smoothed periodogram of the residuals with
/// cross-validated bandwidth, recolored through the AR transfer function:
/// f_hat = f_res |1 - sum phi_j e^{-ijl}|^{-2} away from the origin, with the
/// zero-frequency value taken from the fitted filter alone.
inline PrewhitenedResult prewhitened_estimate(std::span<const double> x,
                                              const FrequencyGrid& grid,
                                              int order = -1,
                                              double bandwidth = -1.0) {
    const int n = int(x.size());
    if (n < 32) throw ConfigError("pre-whitened estimate needs at least 32 samples");
    const int p = (order < 0) ? select_order_aic(x) : order;
    ARFit fit = yule_walker(x, p);
    std::span<const double> resid(fit.residuals);
    double b = bandwidth;
    if (!(b > 0.0)) {
        auto cand = default_bandwidth_candidates(int(resid.size()));
        b = crossvalidate_bandwidth(resid, cand);
    }
    auto fres = smoothed_periodogram(resid, b, grid);
    auto mag2 = ar_transfer_magnitude2(fit.phi, grid);
    std::vector<double> vals(static_cast<std::size_t>(grid.size));
    for (int j = 0; j < grid.size; ++j)
        vals[std::size_t(j)] =
            fres.values[std::size_t(j)] / std::max(mag2[std::size_t(j)], 1e-300);
    // At the origin the nonparametric ratio rests entirely on the handful of
    // ordinates beside a zero ordinate that centering emptied, so the estimate
    // keeps the parametric stage's value sigma^2 / (2 pi |Phi(1)|^2) there.
    vals[0] = fit.sigma2 / (2.0 * std::numbers::pi * std::max(mag2[0], 1e-300));
    Tuning t;
    t.order = p;
    t.bandwidth = b;
    // The recolored density can collapse toward zero when the filter nearly
    // cancels (near-unit roots), so it takes the standard positivity clamp.
    auto dens = make_density(grid, std::move(vals), EstimatorFamily::prewhitened,
                             t, /*clamp=*/true);
    return {std::move(dens), std::move(fit), std::move(fres), b};
}

struct CepstralThresholdResult {
    SpectralDensityEstimate density;
    std::vector<double> kept;  // cepstral coefficients after thresholding
    int kept_count = 0;        // surviving indices k >= 1
};

/// Exponential-model estimate: cepstrum of the log floored periodogram on the
/// series' own Fourier frequencies, hard-thresholded, then exponentiated on
/// the target grid. threshold < 0 selects the default 2 sqrt(2/n).
inline CepstralThresholdResult cepstral_threshold_estimate(
    std::span<const double> x, const FrequencyGrid& grid, double threshold = -1.0) {
    const int n = int(x.size());
    if (n < 32) throw ConfigError("cepstral estimate needs at least 32 samples");
    auto I = periodogram_values(x, n);
    const double fl = density_floor_value(I);
    std::vector<double> logI(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        logI[std::size_t(j)] = std::log(std::max(I[std::size_t(j)], fl));
    auto spec = fft_real(logI);
    const int kmax = n / 2;
    std::vector<double> a(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k)
        a[std::size_t(k)] = spec[std::size_t(k)].real() / double(n);
    const double thr = (threshold < 0.0) ? 2.0 * std::sqrt(2.0 / double(n)) : threshold;
    int kept_count = 0;
    for (int k = 1; k <= kmax; ++k) {
        if (std::abs(a[std::size_t(k)]) < thr)
            a[std::size_t(k)] = 0.0;
        else
            ++kept_count;
    }
    const int N = grid.size;
    std::vector<double> vals(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        const double l = grid.lambda(j);
        double logf = a[0];
        for (int k = 1; k <= kmax; ++k) {
            if (a[std::size_t(k)] == 0.0) continue;
            const double m = (2 * k == n) ? 1.0 : 2.0;  // Nyquist term appears once
            logf += m * a[std::size_t(k)] * std::cos(double(k) * l);
        }
        vals[std::size_t(j)] = std::exp(logf);
    }
    Tuning t;
    t.threshold = thr;
    auto dens = make_density(grid, std::move(vals), EstimatorFamily::cepstral_threshold,
                             t, /*clamp=*/false);
    return {std::move(dens), std::move(a), kept_count};
}

/// Adaptive truncation lag: smallest m whose next K_n = max(5, ceil(sqrt(log10 n)))
/// sample autocorrelations all fall below 2 sqrt(log10 n / n); capped at n/4.
inline int politis_truncation(std::span<const double> x) {
    const int n = int(x.size());
    if (n < 32) throw ConfigError("truncation rule needs at least 32 samples");
    const double log10n = std::log10(double(n));
    const double thr = 2.0 * std::sqrt(log10n / double(n));
    const int Kn = std::max(5, int(std::ceil(std::sqrt(log10n))));
    const int cap = std::max(1, n / 4);
    const int need = std::min(cap + Kn, n - 1);
    auto rho = sample_autocorrelation(x, need);
    for (int m = 1; m <= cap; ++m) {
        bool quiet = true;
        for (int k = 1; k <= Kn && m + k <= need; ++k) {
            if (std::abs(rho[std::size_t(m + k)]) >= thr) {
                quiet = false;
                break;
            }
        }
        if (quiet) return m;
    }
    return cap;
}

}  // namespace sddb
