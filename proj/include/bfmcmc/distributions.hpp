#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "bfmcmc/rng.hpp"

namespace bfmcmc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Mean and covariance of a (possibly 1-d) Gaussian. The Cholesky factor is
// taken at construction; a non-SPD covariance is a constructor error.
class GaussianParams {
public:
    GaussianParams(VectorXd mean, MatrixXd covariance) : mean_(std::move(mean)) {
        if (covariance.rows() != covariance.cols() || covariance.rows() != mean_.size())
            throw std::invalid_argument("GaussianParams: dimension mismatch");
        Eigen::LLT<MatrixXd> llt(covariance);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("GaussianParams: covariance is not positive definite");
        chol_ = llt.matrixL();
        log_det_chol_ = chol_.diagonal().array().log().sum();
    }

    // 1-d convenience: mean x, variance h.
    GaussianParams(double mean, double variance)
        : GaussianParams(VectorXd::Constant(1, mean), MatrixXd::Constant(1, 1, variance)) {
        if (!(variance > 0.0)) throw std::invalid_argument("GaussianParams: variance must be > 0");
    }

    Eigen::Index dim() const { return mean_.size(); }
    const VectorXd& mean() const { return mean_; }
    const MatrixXd& chol() const { return chol_; }

    // log N(x; mean, LL'), full normalization included.
    double log_density(const VectorXd& x) const {
        const VectorXd z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
        return -0.5 * z.squaredNorm() - log_det_chol_ -
               0.5 * static_cast<double>(dim()) * std::log(2.0 * M_PI);
    }

private:
    VectorXd mean_;
    MatrixXd chol_;
    double log_det_chol_;
};

// Exact multivariate normal draw: mean + L z with z iid standard normal.
inline VectorXd draw_gaussian(RngStream& rng, const GaussianParams& params) {
    VectorXd z(params.dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return params.mean() + params.chol().triangularView<Eigen::Lower>() * z;
}

// Unnormalized Gamma(alpha, beta) log density: (alpha-1) log x - beta x on
// x > 0, -inf elsewhere.
inline double log_gamma_density(double x, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::domain_error("log_gamma_density: alpha, beta must be > 0");
    if (x <= 0.0) return kNegInf;
    return (alpha - 1.0) * std::log(x) - beta * x;
}

// Poisson(mean) by Knuth's product-of-uniforms; adequate for mean up to a
// few hundred (exp(-mean) stays normal).
inline std::uint64_t draw_poisson(RngStream& rng, double mean) {
    if (!(mean >= 0.0)) throw std::domain_error("draw_poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform_pos();
    } while (p > limit);
    return k - 1;
}

// log(exp(a) + exp(b)) without overflow; handles -inf operands.
inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace bfmcmc
