#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sddb/errors.hpp"
#include "sddb/spectral_density.hpp"

namespace sddb {

inline double sample_mean(std::span<const double> x) {
    if (x.empty()) throw ConfigError("mean of empty series");
    double s = 0.0;
    for (double v : x) s += v;
    return s / double(x.size());
}

/// gamma_hat(h) = n^{-1} sum_{t=1}^{n-h} (x_t - xbar)(x_{t+h} - xbar).
/// Divisor n for every lag, so the sequence is positive semidefinite.
inline std::vector<double> sample_autocovariance(std::span<const double> x,
                                                 int max_lag) {
    const int n = int(x.size());
    if (n < 1) throw ConfigError("autocovariance of empty series");
    if (max_lag < 0 || max_lag >= n)
        throw ConfigError("autocovariance lag out of range");
    const double xbar = sample_mean(x);
    std::vector<double> g(max_lag + 1, 0.0);
    for (int h = 0; h <= max_lag; ++h) {
        double s = 0.0;
        for (int t = 0; t + h < n; ++t) s += (x[t] - xbar) * (x[t + h] - xbar);
        g[h] = s / double(n);
    }
    return g;
}

inline double sample_autocovariance_at(std::span<const double> x, int h) {
    return sample_autocovariance(x, h).back();
}

/// rho_hat(h) = gamma_hat(h)/gamma_hat(0).
inline std::vector<double> sample_autocorrelation(std::span<const double> x,
                                                  int max_lag) {
    auto g = sample_autocovariance(x, max_lag);
    if (!(g[0] > 0.0)) throw ZeroVariance("zero sample variance");
    std::vector<double> r(g.size());
    for (std::size_t h = 0; h < g.size(); ++h) r[h] = g[h] / g[0];
    return r;
}

inline double sample_autocorrelation_at(std::span<const double> x, int h) {
    return sample_autocorrelation(x, h).back();
}

/// One weight sequence d(h) with finite support starting at min_lag.
struct LagWeights {
    int min_lag = 0;
    std::vector<double> w;  // weight at lag min_lag + i

    double at(int h) const {
        const int i = h - min_lag;
        if (i < 0 || i >= int(w.size())) return 0.0;
        return w[std::size_t(i)];
    }
    int max_lag() const { return min_lag + int(w.size()) - 1; }

    static LagWeights delta(int h) { return LagWeights{h, {1.0}}; }
};

/// Smooth map combining the P weighted quadratic forms into one number.
struct Combiner {
    enum class Kind { identity, ratio, linear };
    Kind kind = Kind::identity;
    std::vector<double> linear_coeff;  // used by Kind::linear

    double apply(std::span<const double> t) const {
        switch (kind) {
            case Kind::identity:
                if (t.size() != 1)
                    throw CombinerDomain("identity combiner expects one input");
                return t[0];
            case Kind::ratio:
                if (t.size() != 2)
                    throw CombinerDomain("ratio combiner expects two inputs");
                if (t[1] == 0.0)
                    throw CombinerDomain("ratio combiner: zero denominator");
                return t[0] / t[1];
            case Kind::linear: {
                if (t.size() != linear_coeff.size())
                    throw CombinerDomain("linear combiner arity mismatch");
                double s = 0.0;
                for (std::size_t i = 0; i < t.size(); ++i)
                    s += linear_coeff[i] * t[i];
                return s;
            }
        }
        throw CombinerDomain("unknown combiner");
    }

    static Combiner identity() { return {Kind::identity, {}}; }
    static Combiner ratio() { return {Kind::ratio, {}}; }
    static Combiner linear(std::vector<double> coeff) {
        return {Kind::linear, std::move(coeff)};
    }
};

/// Statistic g(T_1,...,T_P) with T_p = n^{-1} sum_t sum_h d_p(h)(x_t-xbar)(x_{t+h}-xbar).
struct WeightedCovarianceSpec {
    std::vector<LagWeights> weights;
    Combiner combiner;

    static WeightedCovarianceSpec autocorrelation(int h) {
        return {{LagWeights::delta(h), LagWeights::delta(0)}, Combiner::ratio()};
    }
    static WeightedCovarianceSpec autocovariance(int h) {
        return {{LagWeights::delta(h)}, Combiner::identity()};
    }
};

/// The raw quadratic forms T_1..T_P before the combiner is applied.
inline std::vector<double> weighted_covariance_forms(
    std::span<const double> x, const WeightedCovarianceSpec& spec) {
    const int n = int(x.size());
    if (n < 1) throw ConfigError("empty series");
    const double xbar = sample_mean(x);
    std::vector<double> t(spec.weights.size(), 0.0);
    for (std::size_t p = 0; p < spec.weights.size(); ++p) {
        const auto& d = spec.weights[p];
        double s = 0.0;
        for (std::size_t i = 0; i < d.w.size(); ++i) {
            const int h = d.min_lag + int(i);
            if (d.w[i] == 0.0) continue;
            double inner = 0.0;
            // t and t+h both inside 1..n
            const int lo = std::max(0, -h);
            const int hi = std::min(n, n - h);
            for (int tt = lo; tt < hi; ++tt)
                inner += (x[tt] - xbar) * (x[tt + h] - xbar);
            s += d.w[i] * inner;
        }
        t[p] = s / double(n);
    }
    return t;
}

inline double generalized_autocovariance(std::span<const double> x,
                                         const WeightedCovarianceSpec& spec) {
    auto t = weighted_covariance_forms(x, spec);
    return spec.combiner.apply(t);
}

/// Statistic h(mean of Y_t) where Y_t = gmap(x_t..x_{t+m-1}) maps a length-m
/// window to k coordinates.
struct WindowStatisticSpec {
    int window = 1;      // m
    int out_dim = 1;     // k
    std::function<void(std::span<const double>, std::span<double>)> map;
    Combiner combiner;

    static WindowStatisticSpec mean() {
        WindowStatisticSpec s;
        s.window = 1;
        s.out_dim = 1;
        s.map = [](std::span<const double> in, std::span<double> out) {
            out[0] = in[0];
        };
        s.combiner = Combiner::identity();
        return s;
    }
    static WindowStatisticSpec lag_product(int lag) {
        WindowStatisticSpec s;
        s.window = lag + 1;
        s.out_dim = 1;
        s.map = [lag](std::span<const double> in, std::span<double> out) {
            out[0] = in[0] * in[std::size_t(lag)];
        };
        s.combiner = Combiner::identity();
        return s;
    }
};

inline double generalized_mean_statistic(std::span<const double> x,
                                         const WindowStatisticSpec& spec) {
    const int n = int(x.size());
    const int m = spec.window;
    if (m < 1 || m >= n) throw ConfigError("window length out of range");
    std::vector<double> acc(spec.out_dim, 0.0);
    std::vector<double> y(spec.out_dim);
    const int count = n - m + 1;
    for (int t = 0; t < count; ++t) {
        spec.map(x.subspan(std::size_t(t), std::size_t(m)), y);
        for (int i = 0; i < spec.out_dim; ++i) acc[std::size_t(i)] += y[std::size_t(i)];
    }
    for (double& v : acc) v /= double(count);
    return spec.combiner.apply(acc);
}

/// Derived window series Y_1..Y_{n-m+1} for resampling schemes that bootstrap
/// the mean of Y instead of x itself. Only defined for scalar maps.
inline std::vector<double> window_series(std::span<const double> x,
                                         const WindowStatisticSpec& spec) {
    if (spec.out_dim != 1)
        throw ConfigError("window series requires a scalar window map");
    const int n = int(x.size());
    const int m = spec.window;
    if (m < 1 || m >= n) throw ConfigError("window length out of range");
    std::vector<double> y(n - m + 1);
    double out[1];
    for (int t = 0; t + m <= n; ++t) {
        spec.map(x.subspan(std::size_t(t), std::size_t(m)), std::span<double>(out, 1));
        y[std::size_t(t)] = out[0];
    }
    return y;
}

/// sqrt(n) (xbar - center) / sqrt(2 pi f(0)). On data the center is the
/// hypothesized mean; on a bootstrap replicate it is the original sample mean.
inline double studentize_mean(std::span<const double> x,
                              const SpectralDensityEstimate& f,
                              double center = 0.0, double delta = 1e-12) {
    const double f0 = f.at_zero();
    if (!(f0 >= delta))
        throw FloorViolation("spectral estimate at zero below studentization floor");
    const double n = double(x.size());
    return std::sqrt(n) * (sample_mean(x) - center) /
           std::sqrt(2.0 * std::numbers::pi * f0);
}

/// Long-run standard error of the sample mean implied by f: sqrt(2 pi f(0)/n).
inline double mean_standard_error(const SpectralDensityEstimate& f, int n,
                                  double delta = 1e-12) {
    const double f0 = f.at_zero();
    if (!(f0 >= delta))
        throw FloorViolation("spectral estimate at zero below studentization floor");
    return std::sqrt(2.0 * std::numbers::pi * f0 / double(n));
}

/// Bartlett large-sample variance weight for rho_hat(h):
/// w_hh = sum_{k>=1} [rho(k+h) + rho(k-h) - 2 rho(h) rho(k)]^2.
/// rho holds lags 0..L; the sum stops once k+h runs past L or k hits 10n.
inline double bartlett_weight(std::span<const double> rho, int h, int n) {
    if (h == 0) return 0.0;
    const int L = int(rho.size()) - 1;
    if (h > L) throw ConfigError("autocorrelation sequence too short for lag");
    double w = 0.0;
    const int kmax = std::min(L - h, 10 * n);
    for (int k = 1; k <= kmax; ++k) {
        const double term =
            rho[std::size_t(k + h)] + rho[std::size_t(std::abs(k - h))] -
            2.0 * rho[std::size_t(h)] * rho[std::size_t(k)];
        w += term * term;
    }
    return w;
}

inline double bartlett_standard_error(std::span<const double> rho, int h, int n) {
    if (n < 1) throw ConfigError("series length must be positive");
    return std::sqrt(bartlett_weight(rho, h, n) / double(n));
}

/// Asymptotic variance of sqrt(n) T_n for a single weighted covariance form:
/// tau^2 = (kappa4/sigma^4 - 3) (int f D)^2 + 4 pi int (f D)^2, with
/// D(l) = sum_h d(h) e^{ihl}. Clamped below at eps.
inline double tau_squared(const SpectralDensityEstimate& f, const LagWeights& d,
                          double kappa4, double sigma2, double eps = 1e-8) {
    if (!(sigma2 > 0.0)) throw ZeroVariance("tau^2 needs positive variance");
    const int n = f.grid.size;
    const double dl = 2.0 * std::numbers::pi / double(n);
    double i1 = 0.0, i2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double l = f.grid.lambda(j);
        double dre = 0.0, dim = 0.0;
        for (std::size_t i = 0; i < d.w.size(); ++i) {
            const int h = d.min_lag + int(i);
            dre += d.w[i] * std::cos(h * l);
            dim += d.w[i] * std::sin(h * l);
        }
        const double fj = f.values[std::size_t(j)];
        i1 += fj * dre;
        i2 += fj * fj * (dre * dre + dim * dim);
    }
    i1 *= dl;
    i2 *= dl;
    const double ratio = kappa4 / (sigma2 * sigma2);
    const double tau2 = (ratio - 3.0) * i1 * i1 + 4.0 * std::numbers::pi * i2;
    return std::max(tau2, eps);
}

/// Inverse standard normal CDF. Acklam's rational approximation polished with
/// one Halley step against erfc, giving near machine precision on (0, 1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw ConfigError("normal quantile requires p in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement: e = Phi(x) - p, u = e / phi(x)
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

}  // namespace sddb
