#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sddb/innovations.hpp"
#include "sddb/rng.hpp"

namespace {

struct MomentSummary {
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
};

MomentSummary sample_moments(const sddb::InnovationGenerator& gen, int n,
                             std::uint64_t seed) {
    sddb::RngStream rng(seed);
    MomentSummary s;
    for (int i = 0; i < n; ++i) {
        const double v = gen.draw(rng);
        s.m1 += v;
        s.m2 += v * v;
        s.m4 += v * v * v * v;
    }
    s.m1 /= n;
    s.m2 /= n;
    s.m4 /= n;
    return s;
}

}  // namespace

TEST_CASE("three point law matches its first four moments", "[innovations]") {
    const double sigma2 = 1.7;
    const double kt = 2.4;
    auto gen = sddb::InnovationGenerator::three_point(sigma2, kt);
    CHECK(gen.sigma2() == sigma2);
    CHECK(gen.kappa4tilde() == kt);
    CHECK(gen.exact_variance());

    const int B = 100000;
    auto s = sample_moments(gen, B, 2026);

    // the law puts mass 1/(2 kt) on each spike +-sigma sqrt(kt) and the rest
    // at zero, so all population moments are available in closed form
    const double spike = std::sqrt(sigma2 * kt);
    const double se1 = std::sqrt(sigma2 / B);
    const double se2 = sigma2 * std::sqrt((kt - 1.0) / B);
    const double se4 =
        sigma2 * sigma2 * std::sqrt((kt * kt * kt - kt * kt) / B);
    CHECK(std::abs(s.m1 - 0.0) < 5.0 * se1);
    CHECK(std::abs(s.m2 - sigma2) < 5.0 * se2);
    CHECK(std::abs(s.m4 - kt * sigma2 * sigma2) < 5.0 * se4);

    // support check: every draw is one of the three atoms
    sddb::RngStream rng(2027);
    int zeros = 0;
    for (int i = 0; i < B; ++i) {
        const double v = gen.draw(rng);
        const bool atom = v == 0.0 || std::abs(std::abs(v) - spike) < 1e-12;
        REQUIRE(atom);
        if (v == 0.0) ++zeros;
    }
    const double p0 = 1.0 - 1.0 / kt;
    const double se0 = std::sqrt(p0 * (1.0 - p0) / B);
    CHECK(std::abs(double(zeros) / B - p0) < 5.0 * se0);
}

TEST_CASE("three point law degenerates to a two point law at unit kurtosis",
          "[innovations]") {
    auto gen = sddb::InnovationGenerator::three_point(4.0, 1.0);
    sddb::RngStream rng(31);
    for (int i = 0; i < 1000; ++i) {
        const double v = gen.draw(rng);
        CHECK(std::abs(std::abs(v) - 2.0) < 1e-12);  // never zero
    }
}

TEST_CASE("gaussian innovations have the requested variance", "[innovations]") {
    auto gen = sddb::InnovationGenerator::gaussian(9.0);
    CHECK(gen.exact_variance());
    const int B = 100000;
    auto s = sample_moments(gen, B, 2028);
    CHECK(std::abs(s.m1) < 5.0 * std::sqrt(9.0 / B));
    CHECK(std::abs(s.m2 - 9.0) < 5.0 * 9.0 * std::sqrt(2.0 / B));
    CHECK(std::abs(s.m4 - 3.0 * 81.0) < 5.0 * 81.0 * std::sqrt(96.0 / B));

    std::vector<double> buf(64);
    sddb::RngStream a(7), b(7);
    gen.fill(a, buf);
    for (double v : buf) CHECK(v == gen.draw(b));
}

TEST_CASE("empirical innovations resample the centered pool", "[innovations]") {
    auto gen = sddb::InnovationGenerator::empirical({1.0, 2.0, 3.0, 4.0});
    CHECK_FALSE(gen.exact_variance());
    CHECK(std::abs(gen.sigma2() - 1.25) < 1e-15);
    sddb::RngStream rng(41);
    for (int i = 0; i < 200; ++i) {
        const double v = gen.draw(rng);
        const bool member = std::abs(std::abs(v) - 1.5) < 1e-12 ||
                            std::abs(std::abs(v) - 0.5) < 1e-12;
        CHECK(member);
    }
}

TEST_CASE("empirical innovations can be rescaled to a target variance",
          "[innovations]") {
    auto gen = sddb::InnovationGenerator::empirical({1.0, 2.0, 3.0, 4.0}, 5.0);
    CHECK(std::abs(gen.sigma2() - 5.0) < 1e-15);
    // centered pool {-1.5,-0.5,0.5,1.5} scaled by 2
    sddb::RngStream rng(43);
    for (int i = 0; i < 200; ++i) {
        const double v = gen.draw(rng);
        const bool member = std::abs(std::abs(v) - 3.0) < 1e-12 ||
                            std::abs(std::abs(v) - 1.0) < 1e-12;
        CHECK(member);
    }
}

TEST_CASE("innovation factories reject invalid parameters", "[innovations]") {
    CHECK_THROWS_AS(sddb::InnovationGenerator::gaussian(0.0), sddb::ZeroVariance);
    CHECK_THROWS_AS(sddb::InnovationGenerator::gaussian(-1.0), sddb::ZeroVariance);
    CHECK_THROWS_AS(sddb::InnovationGenerator::three_point(1.0, 0.5),
                    sddb::InvalidKurtosis);
    CHECK_THROWS_AS(sddb::InnovationGenerator::three_point(0.0, 3.0),
                    sddb::ZeroVariance);
    CHECK_THROWS_AS(sddb::InnovationGenerator::empirical({}), sddb::ConfigError);
    CHECK_THROWS_AS(sddb::InnovationGenerator::empirical({2.0, 2.0, 2.0}, 1.0),
                    sddb::ZeroVariance);
}

TEST_CASE("fourth moment estimation tracks the innovation law", "[innovations]") {
    sddb::RngStream rng(47);
    std::vector<double> gauss(4096);
    rng.fill_gaussian(gauss);
    auto kg = sddb::estimate_kappa4(gauss);
    CHECK(kg.sigma2 > 0.5);
    CHECK(kg.sigma2 < 1.5);
    CHECK(std::abs(kg.ratio() - 3.0) < 0.5);

    // two-point innovations have the minimal kurtosis of one
    std::vector<double> rade(4096);
    sddb::RngStream r2(53);
    for (double& v : rade) v = r2.uniform01() < 0.5 ? -1.0 : 1.0;
    auto kr = sddb::estimate_kappa4(rade);
    CHECK(kr.ratio() >= 1.0);
    CHECK(kr.ratio() < 1.4);

    // heavy tails push the ratio well above the gaussian value
    std::vector<double> heavy(4096);
    sddb::RngStream r3(59);
    for (double& v : heavy) v = r3.student_t3();
    auto kh = sddb::estimate_kappa4(heavy);
    CHECK(kh.ratio() > 4.0);

    std::vector<double> tiny(16, 1.0);
    CHECK_THROWS_AS(sddb::estimate_kappa4(tiny), sddb::ConfigError);
}
