#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "sddb/errors.hpp"

namespace sddb {

using cdouble = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

/// Twiddle factors w[k] = exp(-2*pi*i*k/n), k < n/2, shared across calls.
struct FftTable {
    std::size_t n;
    std::vector<cdouble> w;
};

inline std::shared_ptr<const FftTable> fft_table(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const FftTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<FftTable>();
    t->n = n;
    t->w.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
        t->w[k] = std::polar(1.0, -2.0 * std::numbers::pi * double(k) / double(n));
    cache[n] = t;
    return t;
}

inline void fft_pow2_inplace(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    auto table = fft_table(n);
    const auto& w = table->w;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < half; ++j) {
                cdouble tw = w[j * step];
                if (inverse) tw = std::conj(tw);
                const cdouble u = a[i + j];
                const cdouble v = a[i + j + half] * tw;
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / double(n);
        for (auto& z : a) z *= inv;
    }
}

/// Bluestein chirp-z plan for a non-power-of-two size; cached per size.
struct BluesteinPlan {
    std::size_t n, m;
    std::vector<cdouble> chirp;      // exp(-i*pi*j^2/n), j < n
    std::vector<cdouble> kernel_fft; // FFT of the symmetric inverse chirp, length m
};

inline std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto p = std::make_shared<BluesteinPlan>();
    p->n = n;
    p->m = next_pow2(2 * n - 1);
    p->chirp.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the phase argument small and exact
        const std::uint64_t q = (std::uint64_t(j) * j) % (2 * n);
        p->chirp[j] = std::polar(1.0, -std::numbers::pi * double(q) / double(n));
    }
    std::vector<cdouble> b(p->m, cdouble(0.0, 0.0));
    b[0] = std::conj(p->chirp[0]);
    for (std::size_t j = 1; j < n; ++j) b[j] = b[p->m - j] = std::conj(p->chirp[j]);
    fft_pow2_inplace(b, false);
    p->kernel_fft = std::move(b);
    cache[n] = p;
    return p;
}

inline void fft_bluestein_inplace(std::vector<cdouble>& a) {
    const std::size_t n = a.size();
    auto plan = bluestein_plan(n);
    std::vector<cdouble> t(plan->m, cdouble(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) t[j] = a[j] * plan->chirp[j];
    fft_pow2_inplace(t, false);
    for (std::size_t j = 0; j < plan->m; ++j) t[j] *= plan->kernel_fft[j];
    fft_pow2_inplace(t, true);
    for (std::size_t k = 0; k < n; ++k) a[k] = t[k] * plan->chirp[k];
}

}  // namespace detail

/// In-place DFT, any size n >= 1.
/// Forward: A_k = sum_j a_j exp(-2*pi*i*j*k/n). Inverse divides by n.
inline void fft_inplace(std::vector<cdouble>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (detail::is_pow2(n)) {
        detail::fft_pow2_inplace(a, inverse);
        return;
    }
    if (!inverse) {
        detail::fft_bluestein_inplace(a);
        return;
    }
    for (auto& z : a) z = std::conj(z);
    detail::fft_bluestein_inplace(a);
    const double inv = 1.0 / double(n);
    for (auto& z : a) z = std::conj(z) * inv;
}

inline std::vector<cdouble> fft(std::vector<cdouble> a, bool inverse = false) {
    fft_inplace(a, inverse);
    return a;
}

/// Forward DFT of a real vector.
inline std::vector<cdouble> fft_real(const std::vector<double>& x) {
    std::vector<cdouble> a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = cdouble(x[i], 0.0);
    fft_inplace(a, false);
    return a;
}

/// Circular convolution of two real vectors of equal length.
inline std::vector<double> circular_convolution(const std::vector<double>& x,
                                                const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("circular convolution needs equal lengths");
    const std::size_t n = x.size();
    std::vector<cdouble> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = cdouble(x[i], 0.0);
        b[i] = cdouble(y[i], 0.0);
    }
    fft_inplace(a, false);
    fft_inplace(b, false);
    for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
    fft_inplace(a, true);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real();
    return out;
}

}  // namespace sddb
