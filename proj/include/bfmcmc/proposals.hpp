#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>

#include "bfmcmc/bernoulli_factory.hpp"
#include "bfmcmc/distributions.hpp"
#include "bfmcmc/target.hpp"

namespace bfmcmc {

// Proposal with a fully evaluable density; what the exact MH / Barker
// kernels consume.
struct EvaluableProposal {
    int dimension = 1;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, RngStream&)> sample;
    // log q(to | from)
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> log_density;
};

// Proposal whose density q(y|x) = qtilde(y|x) / r(x) has an unknown
// normalizing function r. Sampling is possible, qtilde is evaluable, r is
// only reachable through the coin with success probability r(x)/bound(x).
struct IntractableProposal {
    int dimension = 1;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, RngStream&)> sample;
    // log qtilde(y | x); -inf off the proposal support. May be any evaluable
    // surrogate equal to the true qtilde up to a factor symmetric in (x, y).
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> log_qtilde;
    std::function<double(const Eigen::VectorXd&)> bound;
    std::function<CoinOracle(const Eigen::VectorXd&)> normalizer_coin;
};

// Down-up proposal: a forced move to lower density followed by a forced
// move to higher density, built over an inner proposal s. epsilon (stored
// in log space) keeps the filter ratios finite.
struct RamProposal {
    int dimension = 1;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, RngStream&)> inner_sample;
    // log s(to | from); required only for the asymmetric experimental path.
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> inner_logdensity;
    bool symmetric = true;
    double log_epsilon = -60.0;
    TargetDensity target;
    std::uint64_t inner_loop_cap = 1'000'000;
};

inline constexpr std::uint64_t kRejectionAttemptCap = 100'000;

// 1-d interval or half-line, open ends; +/-inf for unbounded sides.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double x) const { return x > lo && x < hi; }
};

// Gaussian with mean x and variance h truncated to A. Sampling by rejection
// from N(x, h); the normalizer coin is the membership indicator of a plain
// N(x, h) draw, so the bound is identically 1.
IntractableProposal trunc_gauss_1d(Interval support, double h);

// Gaussian N(x, Sigma) truncated to the positive orthant. Rejection
// sampling with an attempt cap; bound identically 1; coin is the
// all-coordinates-positive indicator.
IntractableProposal trunc_gauss_orthant(int m, const Eigen::MatrixXd& sigma);

// Symmetric Gaussian random walk with covariance h * I (or a full Sigma);
// evaluable, for the exact kernels.
EvaluableProposal gaussian_random_walk(int dimension, double h);
EvaluableProposal gaussian_random_walk(const Eigen::MatrixXd& sigma);

// One down-up draw. Returns the proposed point and the two inner rejection
// loop counts.
struct DownUpDraw {
    Eigen::VectorXd y;
    std::uint64_t down_loops = 0;
    std::uint64_t up_loops = 0;
};
DownUpDraw ram_downup_sample(const RamProposal& prop, const Eigen::VectorXd& x, RngStream& rng);

// The two forced phases separately (the auxiliary kernel needs a third,
// standalone down draw). Loop counts written through when requested.
Eigen::VectorXd ram_forced_down(const RamProposal& prop, const Eigen::VectorXd& from,
                                RngStream& rng, std::uint64_t* loops = nullptr);
Eigen::VectorXd ram_forced_up(const RamProposal& prop, const Eigen::VectorXd& from,
                              RngStream& rng, std::uint64_t* loops = nullptr);

// Coin with success probability A_D(x) = E_{M ~ s(.|x)} min{1, (pi(x)+eps)/(pi(M)+eps)},
// the down-move normalizer. Serves as the factory's normalizer coin since
// r(x) = A_D(x) <= 1 once the symmetric inner kernel cancels.
CoinOracle ram_normalizer_coin(const RamProposal& prop, const Eigen::VectorXd& x);

// Packages the down-up proposal for the two-coin Barker kernel. For
// symmetric s the evaluable surrogate for qtilde is constant; asymmetric s
// requires a rederived weight pair and is refused unless
// allow_asymmetric_experimental is set.
IntractableProposal ram_to_intractable(const RamProposal& prop,
                                       bool allow_asymmetric_experimental = false);

// min{1, (pi_x + eps)/(pi_y + eps)} evaluated from log densities without
// leaving log space; _log returns its logarithm.
double ram_filter_prob(double log_pi_num, double log_pi_den, double log_epsilon);
double ram_filter_logprob(double log_pi_num, double log_pi_den, double log_epsilon);

}  // namespace bfmcmc
