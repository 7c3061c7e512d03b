#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "bfmcmc/bernoulli_factory.hpp"
#include "bfmcmc/proposals.hpp"
#include "bfmcmc/target.hpp"

namespace bfmcmc {

enum class KernelKind {
    MhExact,       // evaluable q, min-ratio acceptance
    BarkerExact,   // evaluable q, logistic acceptance
    BarkerTwoCoin, // intractable q, two-coin factory
    RamAuxiliary,  // down-up proposal, auxiliary-variable acceptance
};

// min{1, pi(y)q(x|y) / (pi(x)q(y|x))} from log pieces. log_q_xy is
// log q(x|y), log_q_yx is log q(y|x). Throws InvalidState when the current
// state has zero density.
double mh_acceptance(double log_pi_x, double log_pi_y, double log_q_xy, double log_q_yx);

// num / (num + den) through the stable logistic; log_num = log pi(y)q(x|y),
// log_den = log pi(x)q(y|x). Throws InvalidState when both are -inf.
double barker_acceptance(double log_num, double log_den);

// Streaming per-chain loop accounting: grand mean and max, no per-step
// storage unless asked for.
struct LoopSummary {
    std::uint64_t count = 0;
    double total = 0.0;
    std::uint64_t max = 0;

    void add(std::uint64_t loops) {
        ++count;
        total += static_cast<double>(loops);
        if (loops > max) max = loops;
    }
    void merge(const LoopSummary& other) {
        count += other.count;
        total += other.total;
        if (other.max > max) max = other.max;
    }
    double mean() const { return count ? total / static_cast<double>(count) : 0.0; }
};

struct ChainTrace {
    Eigen::MatrixXd states;          // (n+1) x d, post burn-in
    std::vector<std::uint8_t> accepted;  // n
    LoopSummary loops;               // factory (or auxiliary) loop accounting
    std::vector<std::uint32_t> loop_trace;  // filled only when requested
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    double tuning = 0.0;             // h or eta used for the run
    double kernel_seconds = 0.0;     // wall time around the kernel loop only
};

struct ChainOptions {
    std::optional<Eigen::VectorXd> initial;
    std::uint64_t burn_in = 10'000;  // extra steps before the recorded n
    std::uint64_t max_loops = kDefaultMaxLoops;
    bool record_loop_trace = false;
    double tuning_label = 0.0;       // echoed into the trace
};

using AnyProposal = std::variant<EvaluableProposal, IntractableProposal, RamProposal>;

// Runs an n-step chain of the requested kind. Kernel/proposal compatibility
// is checked up front: exact kernels need an EvaluableProposal, the
// two-coin kernel an IntractableProposal or RamProposal, the auxiliary
// kernel a symmetric RamProposal.
ChainTrace run_chain(const TargetDensity& target, const AnyProposal& proposal, KernelKind kind,
                     std::uint64_t n, RngStream& rng, const ChainOptions& opts);

// One accept-reject decision through the factory: propose from the
// intractable proposal, build the weights and coins, run the two coins.
struct TwoCoinStepOutcome {
    Eigen::VectorXd state;
    double log_pi = 0.0;
    bool accepted = false;
    std::uint64_t loops = 0;
    bool ran_factory = false;  // false when the proposal fell off the support
};
TwoCoinStepOutcome barker_two_coin_step(const TargetDensity& target,
                                        const IntractableProposal& proposal,
                                        const Eigen::VectorXd& x, double log_pi_x, RngStream& rng,
                                        std::uint64_t max_loops = kDefaultMaxLoops);

struct AuxiliaryState {
    Eigen::VectorXd x;
    Eigen::VectorXd z;
};

// One full auxiliary-variable update of the down-up kernel: forced-down x',
// forced-up y, auxiliary z* forced-down from y, then the joint accept test.
// loops reports the z* rejection-loop count (the extra work this scheme
// does per step); accepted says whether (y, z*) replaced (x, z).
struct AuxStepResult {
    AuxiliaryState state;
    bool accepted = false;
    std::uint64_t loops = 0;
};
AuxStepResult ram_auxiliary_step(const AuxiliaryState& state, const RamProposal& prop,
                                 RngStream& rng);

struct TuneOptions {
    std::uint64_t pilot_n = 2'000;
    int max_rounds = 60;
    double tolerance = 0.02;
    double initial_scale = 1.0;
    std::uint64_t confirm_n = 20'000;
    Eigen::VectorXd initial_state;
};

// Robbins-Monro search on log(scale) for the proposal scale that attains
// goal_rate, using pilot chains of the given kind. Returns the tuned scale;
// throws TuningFailure if the confirmation run stays outside the tolerance.
double tune_scale(const TargetDensity& target,
                  const std::function<AnyProposal(double)>& proposal_family, KernelKind kind,
                  double goal_rate, RngStream& rng, const TuneOptions& opts);

// Draw an initial state: proposal sampler applied at `center`, retried
// until the target support holds.
Eigen::VectorXd draw_initial(const TargetDensity& target, const AnyProposal& proposal,
                             const Eigen::VectorXd& center, RngStream& rng);

}  // namespace bfmcmc
