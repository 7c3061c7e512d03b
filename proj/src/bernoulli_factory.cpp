#include "bfmcmc/bernoulli_factory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bfmcmc/errors.hpp"

namespace bfmcmc {

LoopStats two_coin(const TwoCoinInputs& inputs, RngStream& rng, std::uint64_t max_loops) {
    if (!std::isfinite(inputs.log_reject_weight) || !std::isfinite(inputs.log_accept_weight))
        throw std::invalid_argument("two_coin: weights must be finite and positive");
    if (!inputs.reject_coin || !inputs.accept_coin)
        throw std::invalid_argument("two_coin: both coins required");

    // c_y / (c_x + c_y), formed as a logistic so the weights never leave
    // log space.
    const double outer_p =
        1.0 / (1.0 + std::exp(inputs.log_reject_weight - inputs.log_accept_weight));

    LoopStats stats;
    for (;;) {
        if (stats.loops >= max_loops) throw FactoryTimeout(stats.loops, max_loops);
        ++stats.loops;
        const bool heads = rng.uniform() < outer_p;
        ++stats.inner_flips;
        if (heads) {
            if (inputs.accept_coin(rng)) {
                stats.outcome = true;
                return stats;
            }
        } else {
            if (inputs.reject_coin(rng)) {
                stats.outcome = false;
                return stats;
            }
        }
    }
}

double expected_loops(double cx, double cy, double denom_sum) {
    if (!(cx > 0.0) || !(cy > 0.0))
        throw std::domain_error("expected_loops: weights must be positive");
    if (!(denom_sum > 0.0))
        throw std::domain_error("expected_loops: denominator must be positive");
    return (cx + cy) / denom_sum;
}

CoinOracle make_normalizer_coin(std::function<double(const Eigen::VectorXd&)> qtilde_log,
                                double bound_b,
                                std::function<Eigen::VectorXd(RngStream&)> envelope_sampler,
                                std::function<double(const Eigen::VectorXd&)> envelope_logdensity) {
    if (!(bound_b > 0.0))
        throw std::domain_error("make_normalizer_coin: bound must be positive");
    const double log_b = std::log(bound_b);
    return [qtilde_log = std::move(qtilde_log), envelope_sampler = std::move(envelope_sampler),
            envelope_logdensity = std::move(envelope_logdensity), log_b](RngStream& rng) -> bool {
        const Eigen::VectorXd m = envelope_sampler(rng);
        const double log_p = qtilde_log(m) - envelope_logdensity(m) - log_b;
        const double p = std::exp(log_p);
        if (p > 1.0 + 1e-12) {
            std::ostringstream repr;
            repr << "[" << m.transpose() << "]";
            throw BoundViolation(repr.str(), p);
        }
        return rng.uniform() < std::min(p, 1.0);
    };
}

}  // namespace bfmcmc
