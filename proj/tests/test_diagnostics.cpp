#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bfmcmc/diagnostics.hpp"
#include "bfmcmc/errors.hpp"
#include "support/oracles.hpp"

using namespace bfmcmc;

TEST_CASE("ess of iid series is close to n") {
    RngStream rng(501, 0);
    std::vector<double> series(100'000);
    for (auto& v : series) v = rng.normal();
    const EssEstimate est = ess_batch_means(series);
    CHECK(est.ess / static_cast<double>(est.n) > 0.9);
    CHECK(est.ess / static_cast<double>(est.n) < 1.1);
    CHECK(est.batch_size == 316);
}

TEST_CASE("ess of AR(1) matches the analytic factor") {
    RngStream rng(502, 0);
    const std::size_t n = 1'000'000;
    SUBCASE("rho 0.5") {
        const auto series = oracles::ar1_series(0.5, n, rng);
        const double ratio = ess_batch_means(series).ess / static_cast<double>(n);
        CHECK(std::abs(ratio - 1.0 / 3.0) / (1.0 / 3.0) < 0.15);
    }
    SUBCASE("consistency across the rho grid") {
        for (const double rho : {0.0, 0.3, 0.6, 0.9}) {
            const auto series = oracles::ar1_series(rho, n, rng);
            const double expect = (1.0 - rho) / (1.0 + rho);
            const double ratio = ess_batch_means(series).ess / static_cast<double>(n);
            CHECK(std::abs(ratio - expect) / expect < 0.2);
        }
    }
}

TEST_CASE("ess rejects degenerate input") {
    std::vector<double> flat(1000, 3.14);
    CHECK_THROWS_AS(ess_batch_means(flat), DegenerateSeries);
    std::vector<double> tiny(50, 0.0);
    CHECK_THROWS_AS(ess_batch_means(tiny), std::invalid_argument);
}

TEST_CASE("acceptance rate") {
    ChainTrace t;
    t.states = Eigen::MatrixXd::Zero(5, 1);
    t.accepted = {1, 1, 1, 1};
    CHECK(acceptance_rate(t) == doctest::Approx(1.0));
    t.accepted = {1, 0, 1, 0};
    CHECK(acceptance_rate(t) == doctest::Approx(0.5));
    t.accepted = {};
    CHECK_THROWS_AS(acceptance_rate(t), std::invalid_argument);
}

TEST_CASE("ks distance") {
    SUBCASE("self-sample stays under the 99.9% Kolmogorov quantile") {
        RngStream rng(503, 0);
        const std::size_t n = 100'000;
        std::vector<double> sample(n);
        for (auto& v : sample) v = rng.uniform();
        std::sort(sample.begin(), sample.end());
        const double d = ks_distance(sample, [](double x) { return std::clamp(x, 0.0, 1.0); });
        CHECK(d < 1.95 / std::sqrt(static_cast<double>(n)));
    }
    SUBCASE("single point at the median") {
        const double d =
            ks_distance({0.0}, [](double x) { return oracles::normal_cdf(x); });
        CHECK(d == doctest::Approx(0.5));
    }
    SUBCASE("shifted distribution is far") {
        RngStream rng(504, 0);
        std::vector<double> sample(20'000);
        for (auto& v : sample) v = 0.5 + rng.normal();
        std::sort(sample.begin(), sample.end());
        const double d = ks_distance(sample, [](double x) { return oracles::normal_cdf(x); });
        CHECK(d > 0.1);
    }
}

TEST_CASE("loop summary pooling") {
    LoopSummary a;
    for (int i = 0; i < 10; ++i) a.add(1);
    LoopSummary b;
    b.add(5);
    b.add(1);

    SUBCASE("all ones") {
        const LoopReport rep = loop_summary(std::vector<LoopSummary>{a, a});
        CHECK(rep.mean_loops == doctest::Approx(1.0));
        CHECK(rep.mean_of_max_loops == doctest::Approx(1.0));
    }
    SUBCASE("order invariance") {
        const LoopReport r1 = loop_summary(std::vector<LoopSummary>{a, b});
        const LoopReport r2 = loop_summary(std::vector<LoopSummary>{b, a});
        CHECK(r1.mean_loops == doctest::Approx(r2.mean_loops));
        CHECK(r1.mean_of_max_loops == doctest::Approx(r2.mean_of_max_loops));
        CHECK(r1.mean_loops == doctest::Approx((10.0 + 6.0) / 12.0));
        CHECK(r1.mean_of_max_loops == doctest::Approx(3.0));
    }
    SUBCASE("traces without loop data are skipped") {
        ChainTrace empty;
        ChainTrace with;
        with.loops = b;
        const LoopReport rep = loop_summary(std::vector<ChainTrace>{empty, with});
        CHECK(rep.mean_loops == doctest::Approx(3.0));
    }
}

TEST_CASE("autocorrelation basics") {
    RngStream rng(505, 0);
    const auto series = oracles::ar1_series(0.6, 200'000, rng);
    const auto acf = autocorrelation(series, 3);
    CHECK(acf[0] == doctest::Approx(1.0));
    CHECK(acf[1] == doctest::Approx(0.6).epsilon(0.02));
    CHECK(acf[2] == doctest::Approx(0.36).epsilon(0.04));
}

TEST_CASE("histogram normalizes to unit mass") {
    RngStream rng(506, 0);
    std::vector<double> values(50'000);
    for (auto& v : values) v = rng.normal();
    const HistogramData h = histogram(values, 40);
    double mass = 0.0;
    for (double d : h.density) mass += d * h.bin_width;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("summary table aggregate and csv split") {
    SummaryTable table;
    for (int r = 0; r < 3; ++r) {
        SummaryRow row;
        row.replication = r;
        row.kernel = "barker-bf";
        row.ess = 100.0 + r;
        row.wall_time_sec = 2.0;
        row.ess_per_sec = row.ess / 2.0;
        row.acceptance_rate = 0.25;
        row.mean_loops = 1.3;
        row.max_loops = 10 + r;
        table.rows.push_back(row);
    }
    CHECK(table.aggregate().ess == doctest::Approx(101.0));
    table.write_csv("/tmp/summary_test.csv");
    table.write_timing_csv("/tmp/timing_test.csv");
    std::ifstream in("/tmp/summary_test.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "replication,kernel,ess,acceptance_rate,mean_loops,max_loops,tuning");
    // timing lives in its own file
    CHECK(header.find("wall_time") == std::string::npos);
}
