#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "bfmcmc/rng.hpp"

namespace bfmcmc {

// A coin with unknown success probability. Implementations may only sample
// and evaluate densities; the probability itself is never exposed, so the
// factory below cannot cheat.
using CoinOracle = std::function<bool(RngStream&)>;

// Weights and coins of the two-coin factory. The weights are carried in log
// space; log_accept_weight is log c_y (a success of accept_coin ends with
// output 1) and log_reject_weight is log c_x. Both must be finite: a zero
// weight is the caller's short-circuit case, not a factory input.
struct TwoCoinInputs {
    double log_reject_weight;  // log c_x
    double log_accept_weight;  // log c_y
    CoinOracle reject_coin;    // success probability p_x
    CoinOracle accept_coin;    // success probability p_y
};

// Accounting for one factory invocation. loops counts passes through the
// outer coin; every pass flips exactly one inner coin.
struct LoopStats {
    std::uint64_t loops = 0;
    std::uint64_t inner_flips = 0;
    bool outcome = false;
};

inline constexpr std::uint64_t kDefaultMaxLoops = 1'000'000;

// Emits 1 with probability c_y p_y / (c_x p_x + c_y p_y) using only flips of
// the two coins. Throws FactoryTimeout past max_loops; the result is never
// silently coerced to accept or reject.
LoopStats two_coin(const TwoCoinInputs& inputs, RngStream& rng,
                   std::uint64_t max_loops = kDefaultMaxLoops);

// Mean loop count of the factory: (c_x + c_y) / (c_x p_x + c_y p_y), with
// the denominator supplied as one number. Pure helper for diagnostics and
// tests; throws std::domain_error on a nonpositive denominator.
double expected_loops(double cx, double cy, double denom_sum);

// Builds a coin with marginal success probability r/b where r is the
// integral of exp(qtilde_log) over the envelope's support: draw M from the
// envelope, then accept with exp(qtilde_log(M) - envelope_logdensity(M))/b.
// The caller guarantees qtilde <= envelope density * b everywhere; a
// conditional probability above 1 + 1e-12 throws BoundViolation naming the
// offending draw.
CoinOracle make_normalizer_coin(std::function<double(const Eigen::VectorXd&)> qtilde_log,
                                double bound_b,
                                std::function<Eigen::VectorXd(RngStream&)> envelope_sampler,
                                std::function<double(const Eigen::VectorXd&)> envelope_logdensity);

}  // namespace bfmcmc
