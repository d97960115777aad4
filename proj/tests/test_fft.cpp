#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>
#include <vector>

#include "sddb/fft.hpp"

namespace {

using sddb::cdouble;

// O(n^2) reference transform, written independently of the library path
std::vector<cdouble> naive_dft(const std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    std::vector<cdouble> out(n, cdouble(0.0, 0.0));
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cdouble s(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * std::numbers::pi * double(j * k % n) / double(n);
            s += a[j] * cdouble(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? s / double(n) : s;
    }
    return out;
}

std::vector<cdouble> random_signal(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cdouble> a(n);
    for (auto& z : a) z = cdouble(u(gen), u(gen));
    return a;
}

double max_err(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("forward transform matches direct summation", "[fft]") {
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 37u, 100u, 128u, 255u}) {
        auto a = random_signal(n, 17u + unsigned(n));
        auto expect = naive_dft(a, false);
        auto got = sddb::fft(a, false);
        INFO("n = " << n);
        CHECK(max_err(got, expect) < 1e-10 * double(n));
    }
}

TEST_CASE("inverse transform matches direct summation", "[fft]") {
    for (std::size_t n : {4u, 12u, 37u, 64u}) {
        auto a = random_signal(n, 91u + unsigned(n));
        auto expect = naive_dft(a, true);
        auto got = sddb::fft(a, true);
        INFO("n = " << n);
        CHECK(max_err(got, expect) < 1e-12 * double(n));
    }
}

TEST_CASE("inverse undoes forward at any size", "[fft]") {
    for (std::size_t n : {2u, 6u, 32u, 97u, 256u, 1000u}) {
        auto a = random_signal(n, 3u + unsigned(n));
        auto back = sddb::fft(sddb::fft(a, false), true);
        INFO("n = " << n);
        CHECK(max_err(back, a) < 1e-11);
    }
}

TEST_CASE("real-input helper equals the complex transform", "[fft]") {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> x(48);
    for (auto& v : x) v = u(gen);
    std::vector<cdouble> xc(x.begin(), x.end());
    CHECK(max_err(sddb::fft_real(x), sddb::fft(xc, false)) < 1e-12);
}

TEST_CASE("real transform has conjugate symmetry", "[fft]") {
    std::mt19937 gen(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(40);
    for (auto& v : x) v = u(gen);
    auto X = sddb::fft_real(x);
    for (std::size_t k = 1; k < x.size(); ++k)
        CHECK(std::abs(X[k] - std::conj(X[x.size() - k])) < 1e-12);
}

TEST_CASE("circular convolution matches direct summation", "[fft]") {
    for (std::size_t n : {4u, 9u, 32u}) {
        std::mt19937 gen(11u + unsigned(n));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = u(gen);
        for (auto& v : y) v = u(gen);
        std::vector<double> expect(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                expect[k] += x[j] * y[(k + n - j) % n];
        auto got = sddb::circular_convolution(x, y);
        for (std::size_t k = 0; k < n; ++k)
            CHECK(std::abs(got[k] - expect[k]) < 1e-12 * double(n));
    }
}

TEST_CASE("Parseval energy identity", "[fft]") {
    auto a = random_signal(200, 23);
    auto A = sddb::fft(a, false);
    double ex = 0.0, ef = 0.0;
    for (const auto& z : a) ex += std::norm(z);
    for (const auto& z : A) ef += std::norm(z);
    CHECK(std::abs(ex - ef / double(a.size())) < 1e-10 * ex);
}

TEST_CASE("convolution length mismatch is rejected", "[fft]") {
    std::vector<double> x(4, 1.0), y(5, 1.0);
    CHECK_THROWS_AS(sddb::circular_convolution(x, y), sddb::ConfigError);
}
