#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "sddb/errors.hpp"
#include "sddb/rng.hpp"
#include "sddb/spectral.hpp"

namespace sddb {

/// I.i.d. pseudo-innovation source with exact mean zero and target variance.
/// The three-point law on {+s, -s, 0} with s = sigma sqrt(kappa4tilde) also
/// matches the fourth moment kappa4tilde sigma^4 exactly.
class InnovationGenerator {
  public:
    enum class Kind { gaussian, three_point, empirical };

    static InnovationGenerator gaussian(double sigma2) {
        if (!(sigma2 > 0.0)) throw ZeroVariance("innovation variance must be positive");
        InnovationGenerator g;
        g.kind_ = Kind::gaussian;
        g.sigma2_ = sigma2;
        return g;
    }

    static InnovationGenerator three_point(double sigma2, double kappa4tilde) {
        if (!(sigma2 > 0.0)) throw ZeroVariance("innovation variance must be positive");
        if (!(kappa4tilde >= 1.0))
            throw InvalidKurtosis("three-point law needs kappa4tilde >= 1");
        InnovationGenerator g;
        g.kind_ = Kind::three_point;
        g.sigma2_ = sigma2;
        g.kappa4tilde_ = kappa4tilde;
        g.spike_ = std::sqrt(sigma2) * std::sqrt(kappa4tilde);
        g.p_spike_ = 1.0 / (2.0 * kappa4tilde);
        return g;
    }

    /// Draws uniformly from the pool after centering it. If target_sigma2 > 0
    /// the pool is also rescaled to that variance; otherwise the observed pool
    /// variance is kept (the classical residual-resampling convention).
    static InnovationGenerator empirical(std::vector<double> pool,
                                         double target_sigma2 = -1.0) {
        if (pool.empty()) throw ConfigError("empty residual pool");
        double m = 0.0;
        for (double v : pool) m += v;
        m /= double(pool.size());
        double var = 0.0;
        for (double& v : pool) {
            v -= m;
            var += v * v;
        }
        var /= double(pool.size());
        if (target_sigma2 > 0.0) {
            if (!(var > 0.0)) throw ZeroVariance("residual pool has zero variance");
            const double s = std::sqrt(target_sigma2 / var);
            for (double& v : pool) v *= s;
            var = target_sigma2;
        }
        InnovationGenerator g;
        g.kind_ = Kind::empirical;
        g.sigma2_ = var;
        g.pool_ = std::move(pool);
        return g;
    }

    Kind kind() const { return kind_; }
    double sigma2() const { return sigma2_; }
    double kappa4tilde() const { return kappa4tilde_; }
    const std::vector<double>& pool() const { return pool_; }

    /// Whether sigma2() is an exact population moment rather than a pool
    /// sample moment; generators check the variance-match precondition only
    /// in the exact case.
    bool exact_variance() const { return kind_ != Kind::empirical; }

    double draw(RngStream& rng) const {
        switch (kind_) {
            case Kind::gaussian:
                return std::sqrt(sigma2_) * rng.gaussian();
            case Kind::three_point: {
                const double u = rng.uniform01();
                if (u < p_spike_) return spike_;
                if (u < 2.0 * p_spike_) return -spike_;
                return 0.0;
            }
            case Kind::empirical:
                return pool_[rng.uniform_int(pool_.size())];
        }
        throw ConfigError("unknown innovation kind");
    }

    void fill(RngStream& rng, std::span<double> out) const {
        for (double& v : out) v = draw(rng);
    }

  private:
    Kind kind_ = Kind::gaussian;
    double sigma2_ = 1.0;
    double kappa4tilde_ = 3.0;
    double spike_ = 0.0;
    double p_spike_ = 0.0;
    std::vector<double> pool_;
};

/// Fourth-moment estimate of the innovations behind a series, from the
/// residuals of an AR fit with AIC-selected order. kappa4 is clamped below at
/// sigma2^2 so the ratio stays a valid kurtosis (>= 1).
struct Kappa4Estimate {
    double kappa4 = 0.0;  // estimate of E eps^4
    double sigma2 = 0.0;  // residual variance

    double ratio() const { return kappa4 / (sigma2 * sigma2); }
};

inline Kappa4Estimate estimate_kappa4(std::span<const double> x) {
    const int n = int(x.size());
    if (n < 32) throw ConfigError("fourth-moment estimate needs at least 32 samples");
    const int p = select_order_aic(x);
    ARFit fit = yule_walker(x, p);
    double m = 0.0;
    for (double e : fit.residuals) m += e;
    m /= double(fit.residuals.size());
    double m2 = 0.0, m4 = 0.0;
    for (double e : fit.residuals) {
        const double c = e - m;
        const double c2 = c * c;
        m2 += c2;
        m4 += c2 * c2;
    }
    m2 /= double(fit.residuals.size());
    m4 /= double(fit.residuals.size());
    if (!(m2 > 0.0)) throw DegenerateSeries("zero residual variance");
    return {std::max(m4, m2 * m2), m2};
}

}  // namespace sddb
