#pragma once

#include <Eigen/Dense>
#include <functional>

#include "bfmcmc/distributions.hpp"

namespace bfmcmc {

// Unnormalized log target with a support predicate. log_unnorm returns -inf
// exactly where support is false.
struct TargetDensity {
    std::function<double(const Eigen::VectorXd&)> log_unnorm;
    std::function<bool(const Eigen::VectorXd&)> support;
    int dimension = 1;
};

}  // namespace bfmcmc
