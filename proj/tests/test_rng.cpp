#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bfmcmc/rng.hpp"
#include "support/oracles.hpp"

using bfmcmc::RngStream;

TEST_CASE("philox known-answer vectors") {
    // Reference outputs for philox4x32-10.
    auto out = RngStream::philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = RngStream::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = RngStream::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and distinct") {
    RngStream a(1, 0), b(1, 0), c(1, 1), d(2, 0);
    bool all_equal = true, c_differs = false, d_differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double va = a.uniform();
        all_equal = all_equal && va == b.uniform();
        c_differs = c_differs || va != c.uniform();
        d_differs = d_differs || va != d.uniform();
    }
    CHECK(all_equal);
    CHECK(c_differs);
    CHECK(d_differs);
}

TEST_CASE("uniform range and mean") {
    RngStream rng(1, 0);
    const std::size_t n = 1'000'000;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = bfmcmc::draw_uniform(rng);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.002);  // 3 sigma = 3/(sqrt(12) * 1e3)
}

TEST_CASE("bernoulli edge cases and frequency at nested sizes") {
    RngStream rng(7, 0);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(bfmcmc::draw_bernoulli(rng, 0.0));
        CHECK(bfmcmc::draw_bernoulli(rng, 1.0));
    }
    CHECK_THROWS_AS(bfmcmc::draw_bernoulli(rng, -0.1), std::domain_error);
    CHECK_THROWS_AS(bfmcmc::draw_bernoulli(rng, 1.1), std::domain_error);

    // frequency converges at the binomial rate through 1e4, 1e5, 1e6
    for (const std::size_t n : {10'000u, 100'000u, 1'000'000u}) {
        std::size_t ones = 0;
        for (std::size_t i = 0; i < n; ++i) ones += bfmcmc::draw_bernoulli(rng, 0.3);
        const double err = std::abs(static_cast<double>(ones) / n - 0.3);
        CHECK(err < 3.0 * std::sqrt(0.3 * 0.7 / n) + 1e-12);
    }
}

TEST_CASE("normal sampler: moments") {
    RngStream rng(11, 0);
    const std::size_t n = 1'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.003);       // 3/sqrt(n)
    CHECK(std::abs(var - 1.0) < 0.01);   // ~7 sigma of the variance estimate
}

TEST_CASE("normal sampler: KS against the erf oracle") {
    RngStream rng(13, 0);
    const std::size_t n = 100'000;
    std::vector<double> sample(n);
    for (auto& v : sample) v = rng.normal();
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = oracles::normal_cdf(sample[i]);
        d = std::max({d, (i + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    // Kolmogorov quantile at significance 1e-3
    CHECK(d < 1.95 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("normal tail mass beyond the ziggurat edge") {
    // the tail path starts at 3.4426; check P(|Z| > 3.5) against the oracle
    RngStream rng(17, 0);
    const std::size_t n = 4'000'000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += std::abs(rng.normal()) > 3.5;
    const double p = 2.0 * (1.0 - oracles::normal_cdf(3.5));
    const double err = std::abs(static_cast<double>(hits) / n - p);
    CHECK(err < 4.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST_CASE("substream independence smoke") {
    RngStream rng(21, 5);
    RngStream s1 = rng.substream(1);
    RngStream s2 = rng.substream(2);
    bool differ = false;
    for (int i = 0; i < 100; ++i) differ = differ || s1.uniform() != s2.uniform();
    CHECK(differ);
}
