#include "bfmcmc/kernels.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bfmcmc/errors.hpp"

namespace bfmcmc {

double mh_acceptance(double log_pi_x, double log_pi_y, double log_q_xy, double log_q_yx) {
    if (log_pi_x == kNegInf) throw InvalidState("mh_acceptance: current state has zero density");
    if (log_pi_y == kNegInf) return 0.0;
    return std::exp(std::min(0.0, log_pi_y + log_q_xy - log_pi_x - log_q_yx));
}

double barker_acceptance(double log_num, double log_den) {
    if (log_num == kNegInf && log_den == kNegInf)
        throw InvalidState("barker_acceptance: both sides have zero density");
    if (log_num == kNegInf) return 0.0;
    if (log_den == kNegInf) return 1.0;
    return 1.0 / (1.0 + std::exp(log_den - log_num));
}

namespace {

struct StepResult {
    bool accepted = false;
    std::uint64_t loops = 0;
    bool has_loops = false;
};

using StepFn = std::function<StepResult(Eigen::VectorXd&, double&, RngStream&, std::uint64_t)>;

StepFn make_exact_step(const TargetDensity& target, const EvaluableProposal& prop,
                       KernelKind kind) {
    return [&target, &prop, kind](Eigen::VectorXd& x, double& log_pi_x, RngStream& rng,
                                  std::uint64_t) -> StepResult {
        Eigen::VectorXd y = prop.sample(x, rng);
        const double log_pi_y = target.log_unnorm(y);
        double alpha;
        if (kind == KernelKind::MhExact) {
            alpha = mh_acceptance(log_pi_x, log_pi_y, prop.log_density(x, y),
                                  prop.log_density(y, x));
        } else {
            if (log_pi_x == kNegInf)
                throw InvalidState("run_chain: current state has zero density");
            if (log_pi_y == kNegInf) {
                alpha = 0.0;
            } else {
                alpha = barker_acceptance(log_pi_y + prop.log_density(x, y),
                                          log_pi_x + prop.log_density(y, x));
            }
        }
        StepResult res;
        if (rng.uniform() < alpha) {
            x = std::move(y);
            log_pi_x = log_pi_y;
            res.accepted = true;
        }
        return res;
    };
}

StepFn make_two_coin_step(const TargetDensity& target, const IntractableProposal& prop,
                          std::uint64_t max_loops) {
    return [&target, &prop, max_loops](Eigen::VectorXd& x, double& log_pi_x, RngStream& rng,
                                       std::uint64_t step) -> StepResult {
        StepResult res;
        try {
            TwoCoinStepOutcome out = barker_two_coin_step(target, prop, x, log_pi_x, rng, max_loops);
            res.accepted = out.accepted;
            res.loops = out.loops;
            res.has_loops = out.ran_factory;
            if (out.accepted) {
                x = std::move(out.state);
                log_pi_x = out.log_pi;
            }
        } catch (const FactoryTimeout& e) {
            throw FactoryTimeout(e.loops, e.max_loops, static_cast<std::int64_t>(step));
        }
        return res;
    };
}

}  // namespace

TwoCoinStepOutcome barker_two_coin_step(const TargetDensity& target,
                                        const IntractableProposal& prop, const Eigen::VectorXd& x,
                                        double log_pi_x, RngStream& rng, std::uint64_t max_loops) {
    if (log_pi_x == kNegInf)
        throw InvalidState("barker_two_coin_step: current state has zero density");
    Eigen::VectorXd y = prop.sample(x, rng);
    const double log_pi_y = target.log_unnorm(y);
    TwoCoinStepOutcome out;
    if (log_pi_y == kNegInf) {  // Bern(0): reject without running the factory
        out.state = x;
        out.log_pi = log_pi_x;
        return out;
    }

    TwoCoinInputs inputs;
    // c_x = pi(x) qtilde(y|x) b_y with reject coin Bern(r(y)/b_y);
    // c_y = pi(y) qtilde(x|y) b_x with accept coin Bern(r(x)/b_x).
    inputs.log_reject_weight = log_pi_x + prop.log_qtilde(y, x) + std::log(prop.bound(y));
    inputs.log_accept_weight = log_pi_y + prop.log_qtilde(x, y) + std::log(prop.bound(x));
    inputs.reject_coin = prop.normalizer_coin(y);
    inputs.accept_coin = prop.normalizer_coin(x);

    const LoopStats stats = two_coin(inputs, rng, max_loops);
    out.loops = stats.loops;
    out.ran_factory = true;
    if (stats.outcome) {
        out.state = std::move(y);
        out.log_pi = log_pi_y;
        out.accepted = true;
    } else {
        out.state = x;
        out.log_pi = log_pi_x;
    }
    return out;
}

AuxStepResult ram_auxiliary_step(const AuxiliaryState& state, const RamProposal& prop,
                                 RngStream& rng) {
    if (!prop.symmetric)
        throw std::invalid_argument("ram_auxiliary_step: inner proposal must be symmetric");
    const double log_pi_x = prop.target.log_unnorm(state.x);
    if (log_pi_x == kNegInf && prop.target.log_unnorm(state.z) == kNegInf)
        throw InvalidState("ram_auxiliary_step: state has zero density");

    Eigen::VectorXd mid = ram_forced_down(prop, state.x, rng);
    Eigen::VectorXd y = ram_forced_up(prop, mid, rng);
    AuxStepResult res;
    Eigen::VectorXd zstar = ram_forced_down(prop, y, rng, &res.loops);

    const double log_pi_y = prop.target.log_unnorm(y);
    const double log_num =
        log_pi_y + ram_filter_logprob(log_pi_x, prop.target.log_unnorm(state.z), prop.log_epsilon);
    const double log_den =
        log_pi_x + ram_filter_logprob(log_pi_y, prop.target.log_unnorm(zstar), prop.log_epsilon);
    const double alpha = std::exp(std::min(0.0, log_num - log_den));

    if (rng.uniform() < alpha) {
        res.state = AuxiliaryState{std::move(y), std::move(zstar)};
        res.accepted = true;
    } else {
        res.state = state;
    }
    return res;
}

ChainTrace run_chain(const TargetDensity& target, const AnyProposal& proposal, KernelKind kind,
                     std::uint64_t n, RngStream& rng, const ChainOptions& opts) {
    if (!opts.initial.has_value())
        throw std::invalid_argument("run_chain: options must carry an initial state");
    Eigen::VectorXd x = *opts.initial;
    if (!target.support(x))
        throw std::invalid_argument("run_chain: initial state outside target support");

    // Kernel/proposal compatibility, resolved once.
    StepFn step_fn;
    IntractableProposal ram_view;  // keeps the converted RAM proposal alive
    const bool is_aux = kind == KernelKind::RamAuxiliary;
    const RamProposal* ram = std::get_if<RamProposal>(&proposal);
    if (kind == KernelKind::MhExact || kind == KernelKind::BarkerExact) {
        const auto* ev = std::get_if<EvaluableProposal>(&proposal);
        if (!ev)
            throw std::invalid_argument("run_chain: exact kernels need an evaluable proposal");
        step_fn = make_exact_step(target, *ev, kind);
    } else if (kind == KernelKind::BarkerTwoCoin) {
        if (const auto* ip = std::get_if<IntractableProposal>(&proposal)) {
            step_fn = make_two_coin_step(target, *ip, opts.max_loops);
        } else if (ram) {
            ram_view = ram_to_intractable(*ram);
            step_fn = make_two_coin_step(target, ram_view, opts.max_loops);
        } else {
            throw std::invalid_argument("run_chain: two-coin kernel needs an intractable proposal");
        }
    } else if (is_aux) {
        if (!ram)
            throw std::invalid_argument("run_chain: auxiliary kernel needs a down-up proposal");
        if (!ram->symmetric)
            throw std::invalid_argument("run_chain: auxiliary kernel needs a symmetric inner proposal");
    }

    ChainTrace trace;
    trace.seed = rng.seed();
    trace.stream_id = rng.stream_id();
    trace.tuning = opts.tuning_label;
    const int d = static_cast<int>(x.size());
    trace.states.resize(static_cast<Eigen::Index>(n) + 1, d);
    trace.accepted.resize(n);
    if (opts.record_loop_trace) trace.loop_trace.reserve(n);

    double log_pi_x = target.log_unnorm(x);
    AuxiliaryState aux;
    if (is_aux) {
        // The augmented target is pi(x) s(z|x), so a plain inner draw puts
        // (x, z) on the right joint from the start.
        aux.x = x;
        aux.z = ram->inner_sample(x, rng);
    }

    const auto run_steps = [&](std::uint64_t count, bool record) {
        for (std::uint64_t k = 0; k < count; ++k) {
            bool accepted;
            std::uint64_t loops = 0;
            bool has_loops = false;
            if (is_aux) {
                AuxStepResult res = ram_auxiliary_step(aux, *ram, rng);
                aux = std::move(res.state);
                x = aux.x;
                accepted = res.accepted;
                loops = res.loops;
                has_loops = true;
            } else {
                StepResult res = step_fn(x, log_pi_x, rng, k);
                accepted = res.accepted;
                loops = res.loops;
                has_loops = res.has_loops;
            }
            if (record) {
                trace.states.row(static_cast<Eigen::Index>(k) + 1) = x.transpose();
                trace.accepted[k] = accepted ? 1 : 0;
                if (has_loops) {
                    trace.loops.add(loops);
                    if (opts.record_loop_trace)
                        trace.loop_trace.push_back(static_cast<std::uint32_t>(loops));
                }
            }
        }
    };

    run_steps(opts.burn_in, false);
    trace.states.row(0) = x.transpose();
    const auto t0 = std::chrono::steady_clock::now();
    run_steps(n, true);
    const auto t1 = std::chrono::steady_clock::now();
    trace.kernel_seconds = std::chrono::duration<double>(t1 - t0).count();
    return trace;
}

Eigen::VectorXd draw_initial(const TargetDensity& target, const AnyProposal& proposal,
                             const Eigen::VectorXd& center, RngStream& rng) {
    const auto sample = [&](RngStream& r) -> Eigen::VectorXd {
        if (const auto* ev = std::get_if<EvaluableProposal>(&proposal))
            return ev->sample(center, r);
        if (const auto* ip = std::get_if<IntractableProposal>(&proposal))
            return ip->sample(center, r);
        return std::get<RamProposal>(proposal).inner_sample(center, r);
    };
    for (std::uint64_t attempt = 0; attempt < kRejectionAttemptCap; ++attempt) {
        Eigen::VectorXd x = sample(rng);
        if (target.support(x)) return x;
    }
    throw ProposalSamplingError("draw_initial: could not land in the target support");
}

double tune_scale(const TargetDensity& target,
                  const std::function<AnyProposal(double)>& proposal_family, KernelKind kind,
                  double goal_rate, RngStream& rng, const TuneOptions& opts) {
    if (!(goal_rate > 0.0 && goal_rate < 1.0))
        throw std::domain_error("tune_scale: goal rate must be in (0,1)");
    if (opts.initial_state.size() == 0)
        throw std::invalid_argument("tune_scale: options must carry an initial state");

    const auto pilot_rate = [&](double scale, std::uint64_t steps) {
        AnyProposal prop = proposal_family(scale);
        ChainOptions copts;
        copts.initial = opts.initial_state;
        copts.burn_in = steps / 5;
        try {
            ChainTrace t = run_chain(target, prop, kind, steps, rng, copts);
            double acc = 0.0;
            for (auto b : t.accepted) acc += b;
            return acc / static_cast<double>(t.accepted.size());
        } catch (const FactoryTimeout&) {
            return 0.0;  // scale far too large: treat as zero acceptance
        } catch (const ProposalSamplingError&) {
            return 0.0;
        }
    };

    // Robbins-Monro on log(scale), step c/k; acceptance falls as the scale
    // grows, so the sign of (rate - goal) points the move.
    double log_scale = std::log(opts.initial_scale);
    const double gain = 1.5 / (goal_rate * (1.0 - goal_rate));
    double last_rate = -1.0;
    for (int k = 1; k <= opts.max_rounds; ++k) {
        double rate = pilot_rate(std::exp(log_scale), opts.pilot_n);
        if (std::abs(rate - goal_rate) < 0.6 * opts.tolerance) {
            const double confirmed = pilot_rate(std::exp(log_scale), opts.confirm_n);
            if (std::abs(confirmed - goal_rate) <= opts.tolerance) return std::exp(log_scale);
            rate = confirmed;
        }
        last_rate = rate;
        log_scale += (gain / static_cast<double>(k)) * (rate - goal_rate);
    }
    throw TuningFailure(last_rate, goal_rate);
}

}  // namespace bfmcmc
