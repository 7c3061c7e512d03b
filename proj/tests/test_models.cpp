#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bfmcmc/models.hpp"
#include "support/oracles.hpp"

using namespace bfmcmc;

TEST_CASE("gamma target basics") {
    const TargetDensity t = gamma_target(2.0, 1.0);
    CHECK(t.log_unnorm(Eigen::VectorXd::Constant(1, 1.0)) == doctest::Approx(-1.0));
    CHECK_FALSE(t.support(Eigen::VectorXd::Constant(1, -0.5)));

    // mode at (alpha-1)/beta = 1 via a grid argmax
    double best = -1e300, arg = 0.0;
    for (double x = 0.01; x < 8.0; x += 0.005) {
        const double v = t.log_unnorm(Eigen::VectorXd::Constant(1, x));
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    CHECK(arg == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("discrete system closed forms") {
    // hand-computed pair on the shipped 3-state system:
    // r(0) = 1.5, r(1) = 0.8; q(1|0) = 0.6/1.5 = 0.4; q(0|1) = 0.3/0.8 = 0.375
    // alpha_B(0,1) = (0.3 * 0.375) / (0.3 * 0.375 + 0.2 * 0.4) = 0.1125/0.1925
    const DiscreteSystem sys = discrete_three_state();
    CHECK(sys.normalizer(0) == doctest::Approx(1.5));
    CHECK(sys.normalizer(1) == doctest::Approx(0.8));
    CHECK(sys.alpha_barker(0, 1) == doctest::Approx(0.1125 / 0.1925));

    // symmetric certain system: alpha = 1/2, expected loops with b = k*max
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(2, 1.0);
    Eigen::MatrixXd q = Eigen::MatrixXd::Constant(2, 2, 1.0);
    const DiscreteSystem flat(pi, q);
    CHECK(flat.alpha_barker(0, 1) == doctest::Approx(0.5));
    // b = 2, p = r/b = 1, c_x = c_y = 1*1*2: loops = (2+2)/(2+2) = 1... with
    // p_x = 2/2 = 1: mean loops 1
    CHECK(flat.expected_factory_loops(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("discrete sampler and coin match the enumerated row") {
    const DiscreteSystem sys = discrete_three_state();
    const IntractableProposal ip = sys.as_intractable();
    RngStream rng(301, 0);
    const std::size_t n = 200'000;
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
    for (std::size_t i = 0; i < n; ++i)
        counts[static_cast<int>(ip.sample(x0, rng)[0])] += 1.0;
    for (int y = 0; y < 3; ++y) {
        const double p = sys.qtilde(0, y) / sys.normalizer(0);
        CHECK(std::abs(counts[y] / n - p) < 3.5 * std::sqrt(p * (1 - p) / n));
    }

    CoinOracle coin = ip.normalizer_coin(x0);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) ok += coin(rng);
    const double p = sys.normalizer(0) / sys.bound(0);
    CHECK(std::abs(static_cast<double>(ok) / n - p) < 3.5 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("sensor observation model") {
    CHECK(sensor_obs_prob(0.0) == doctest::Approx(1.0));
    CHECK(sensor_obs_prob(0.3 * std::sqrt(2.0)) == doctest::Approx(std::exp(-1.0)));

    RngStream rng(302, 0);
    // coincident sensors: always observed
    std::vector<Eigen::Vector2d> tight(6, Eigen::Vector2d(0.5, 0.5));
    const SensorData d1 = simulate_sensor_data(tight, rng);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) CHECK(d1.w(i, j) == 1);

    // zero noise: observed distances are exact
    const auto truth = default_sensor_truth();
    const SensorData d2 = simulate_sensor_data(truth, rng, 0.3, 0.0);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            if (d2.w(i, j))
                CHECK(d2.y_dist(i, j) == doctest::Approx((truth[static_cast<std::size_t>(i)] -
                                                          truth[static_cast<std::size_t>(j)])
                                                             .norm()));
}

TEST_CASE("sensor log posterior properties and naive cross-check") {
    RngStream rng(303, 0);
    const SensorData data = simulate_sensor_data(default_sensor_truth(), rng);

    Eigen::VectorXd truth_vec(8);
    for (int k = 0; k < 4; ++k) truth_vec.segment<2>(2 * k) = default_sensor_truth()[static_cast<std::size_t>(k)];

    // no scale invariance
    CHECK(sensor_log_posterior(data, truth_vec) != sensor_log_posterior(data, 2.0 * truth_vec));
    // gross shift is much worse
    CHECK(sensor_log_posterior(data, truth_vec) >
          sensor_log_posterior(data, truth_vec.array() + 50.0));

    // agrees with the straight-loop reimplementation
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd loc(8);
        for (int i = 0; i < 8; ++i) loc[i] = 2.0 * rng.normal();
        const double a = sensor_log_posterior(data, loc);
        const double b = oracles::naive_sensor_log_posterior(data, loc);
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
}

TEST_CASE("sensor relabeling symmetry with identical data rows") {
    SensorData data;
    data.known_locations = {Eigen::Vector2d(0.5, 0.3), Eigen::Vector2d(0.3, 0.7)};
    data.w = Eigen::MatrixXi::Zero(6, 6);
    data.y_dist = Eigen::MatrixXd::Zero(6, 6);
    // sensors 0 and 1 share the same observation pattern: one link each to
    // anchor 4 with the same recorded distance
    data.w(0, 4) = data.w(4, 0) = 1;
    data.w(1, 4) = data.w(4, 1) = 1;
    data.y_dist(0, 4) = data.y_dist(4, 0) = 0.25;
    data.y_dist(1, 4) = data.y_dist(4, 1) = 0.25;

    Eigen::VectorXd loc(8);
    loc << 0.41, 0.33, 0.58, 0.21, 0.11, 0.92, 0.77, 0.05;
    Eigen::VectorXd swapped = loc;
    swapped.segment<2>(0) = loc.segment<2>(2);
    swapped.segment<2>(2) = loc.segment<2>(0);
    CHECK(sensor_log_posterior(data, loc) ==
          doctest::Approx(sensor_log_posterior(data, swapped)).epsilon(1e-12));
}

TEST_CASE("sensor csv round trip") {
    RngStream rng(304, 0);
    const SensorData data = simulate_sensor_data(default_sensor_truth(), rng);
    const std::string path = (std::filesystem::temp_directory_path() / "sensors_test.csv").string();
    write_sensor_csv(data, path);
    const SensorData back = read_sensor_csv(path);
    CHECK(back.w == data.w);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (data.w(i, j)) CHECK(back.y_dist(i, j) == data.y_dist(i, j));
    std::filesystem::remove(path);
}

TEST_CASE("mixture target is symmetric and bimodal") {
    const TargetDensity mix = gaussian_mixture_1d({-5.0, 5.0}, {1.0, 1.0});
    const auto at = [&](double x) { return mix.log_unnorm(Eigen::VectorXd::Constant(1, x)); };
    CHECK(at(-5.0) == doctest::Approx(at(5.0)));
    CHECK(at(-5.0) > at(0.0));
    CHECK(at(1.3) == doctest::Approx(at(-1.3)));
}
