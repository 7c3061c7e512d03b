#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bfmcmc {

// Base class for all library-specific failures. Domain violations on plain
// arguments (p outside [0,1], nonpositive variance, ...) throw
// std::domain_error / std::invalid_argument directly.
struct SamplerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two-coin factory exceeded its loop cap. Carries the partial loop
// accounting so callers can report how far it got.
struct FactoryTimeout : SamplerError {
    FactoryTimeout(std::uint64_t loops_done, std::uint64_t cap, std::int64_t at_step = -1)
        : SamplerError("factory-timeout: two-coin loop cap " + std::to_string(cap) +
                       " exceeded after " + std::to_string(loops_done) + " loops" +
                       (at_step >= 0 ? " at chain step " + std::to_string(at_step) : "")),
          loops(loops_done),
          max_loops(cap),
          step(at_step) {}
    std::uint64_t loops;
    std::uint64_t max_loops;
    std::int64_t step;
};

// A normalizer coin computed a conditional probability above 1: the envelope
// density or the bound b is invalid for the point it reports.
struct BoundViolation : SamplerError {
    BoundViolation(const std::string& point_repr, double prob)
        : SamplerError("bound-violation: conditional coin probability " +
                       std::to_string(prob) + " > 1 at M = " + point_repr),
          probability(prob) {}
    double probability;
};

// Rejection/inner sampling loop exceeded its attempt cap.
struct ProposalSamplingError : SamplerError {
    using SamplerError::SamplerError;
};

// Chain found itself at a state with zero target density.
struct InvalidState : SamplerError {
    using SamplerError::SamplerError;
};

// Scale search did not reach the goal rate. Carries the last observed rate.
struct TuningFailure : SamplerError {
    TuningFailure(double rate, double goal)
        : SamplerError("tuning-failure: last acceptance rate " + std::to_string(rate) +
                       " vs goal " + std::to_string(goal)),
          last_rate(rate) {}
    double last_rate;
};

// A series with no variance was handed to a long-run variance estimator.
struct DegenerateSeries : SamplerError {
    using SamplerError::SamplerError;
};

// A Monte Carlo normalizer estimate came out exactly zero.
struct DegenerateEstimate : SamplerError {
    using SamplerError::SamplerError;
};

}  // namespace bfmcmc
