#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bfmcmc/rng.hpp"
#include "bfmcmc/target.hpp"

namespace bfmcmc {

// Finite-basis Cox process on S = [0, domain_length]: the intensity is
// Lambda(x) = sum_j phi_j(x) xi_j over hat functions at m equispaced knots,
// with a squared-exponential Gaussian prior on xi truncated to the positive
// orthant.
struct CoxModel {
    double domain_length = 50.0;
    int m = 10;
    double sigma2 = 1.0;
    double ell = 5.0;

    Eigen::VectorXd knots;      // t_j = (j-1) * domain_length / (m-1)
    double delta = 0.0;         // knot spacing
    Eigen::VectorXd c_weights;  // trapezoid weights: delta/2 at the ends
    Eigen::MatrixXd gamma;      // sigma2 * exp(-(t_i-t_j)^2 / (2 l^2)) + jitter
    Eigen::MatrixXd gamma_chol;

    std::vector<std::vector<double>> observations;  // N0 replicate point patterns
};

CoxModel make_cox_model(int m, double sigma2 = 1.0, double ell = 5.0,
                        double domain_length = 50.0);

// Hat basis phi_j; 1 at its knot, 0 beyond the neighbouring knots.
double cox_basis(double x, int j, const CoxModel& model);

// Lambda_m(x) = sum_j phi_j(x) xi_j.
double cox_intensity(const CoxModel& model, const Eigen::VectorXd& xi, double x);

// Log likelihood over all replicates; -inf off the positive orthant.
double cox_log_likelihood(const CoxModel& model, const Eigen::VectorXd& xi);
// Gaussian prior exponent -xi' Gamma^{-1} xi / 2 (the truncation normalizer
// is constant and dropped); -inf off the orthant.
double cox_log_prior(const CoxModel& model, const Eigen::VectorXd& xi);
double cox_log_posterior(const CoxModel& model, const Eigen::VectorXd& xi);

TargetDensity cox_target(const CoxModel& model);

// The synthetic truth used by the experiments: 2 exp(-x/15) + exp(-((x-25)/10)^2).
double default_cox_intensity(double x);

// N0 independent point patterns from an inhomogeneous Poisson process by
// thinning; lambda_max is taken from a fine grid scan with headroom.
std::vector<std::vector<double>> simulate_cox_data(const CoxModel& model,
                                                   const std::function<double(double)>& lambda,
                                                   int n0, RngStream& rng);

// Plain Monte Carlo estimate of P(N(mean, LL') lands in the positive
// orthant), the baseline's normalizer plug-in. Deterministic given the
// stream regardless of threading.
struct BaselineNormalizerEstimate {
    double point_estimate = 0.0;
    std::uint64_t mc_samples = 200;
};
BaselineNormalizerEstimate estimate_orthant_mass(const Eigen::VectorXd& mean,
                                                 const Eigen::MatrixXd& chol,
                                                 std::uint64_t mc_samples, RngStream& rng);

// One step of the comparison baseline: MH with plug-in normalizer estimates,
// fresh each call. Throws DegenerateEstimate when an estimate comes out 0.
struct InexactCoxStep {
    Eigen::VectorXd state;
    bool accepted = false;
    double r_hat_current = 0.0;
    double r_hat_proposed = 0.0;
};
InexactCoxStep inexact_mh_cox_step(const CoxModel& model, const Eigen::VectorXd& state,
                                   const Eigen::MatrixXd& proposal_chol,
                                   std::uint64_t mc_samples, RngStream& rng);

// Point-pattern persistence; schema: replicate_id,location (one event per row).
void write_point_patterns(const std::vector<std::vector<double>>& patterns,
                          const std::string& path);
std::vector<std::vector<double>> read_point_patterns(const std::string& path);

}  // namespace bfmcmc
