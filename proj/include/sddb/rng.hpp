#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace sddb {

/// Reproducible random stream addressed by (master seed, stream index).
///
/// The same (seed, index) pair always reproduces the same draw sequence,
/// independent of platform and of any other stream; distinct indices give
/// statistically independent streams. Substreams derive a fresh master seed
/// by hashing (seed, index), so nested replicate/realization hierarchies can
/// be addressed without coordination, and consuming one stream never affects
/// another. Distributions are implemented here rather than taken from
/// <random> because std distribution output is not pinned down by the
/// standard, which would break bit-identical replay across toolchains.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t index = 0)
        : seed_(seed), index_(index) {
        std::seed_seq seq{
            std::uint32_t(seed), std::uint32_t(seed >> 32),
            std::uint32_t(index), std::uint32_t(index >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t index() const noexcept { return index_; }

    /// Independent child stream; deterministic in (seed, index, i).
    RngStream substream(std::uint64_t i) const {
        return RngStream(mix(seed_, index_), i);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform01() {
        return double(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform01_pos() {
        return double((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (fixed two-uniform cost per draw).
    double gaussian() {
        const double u = uniform01_pos();
        const double v = uniform01();
        return std::sqrt(-2.0 * std::log(u)) *
               std::cos(2.0 * std::numbers::pi * v);
    }

    /// Student t with 3 degrees of freedom, unit scale (variance 3).
    double student_t3() {
        const double z = gaussian();
        const double a = gaussian(), b = gaussian(), c = gaussian();
        return z / std::sqrt((a * a + b * b + c * c) / 3.0);
    }

    /// Uniform integer in [0, n); n >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        return std::uint64_t((static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    void fill_gaussian(std::span<double> out) {
        for (auto& x : out) x = gaussian();
    }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over a combination of both words
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
};

}  // namespace sddb
