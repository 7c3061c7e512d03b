#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bfmcmc/distributions.hpp"
#include "bfmcmc/proposals.hpp"
#include "bfmcmc/target.hpp"

namespace bfmcmc {

// Gamma(alpha, beta) target on (0, inf), unnormalized.
TargetDensity gamma_target(double alpha = 2.0, double beta = 1.0);

// Equal-or-weighted mixture of 1-d Gaussians; the stock multimodal example
// is gaussian_mixture_1d({-5, 5}, {1, 1}).
TargetDensity gaussian_mixture_1d(std::vector<double> means, std::vector<double> sds,
                                  std::vector<double> weights = {});

// Fully enumerable toy system: k states, target pmf pi, explicit positive
// qtilde matrix with rows indexed by the current state. Everything the
// factory treats as unknowable is available here in closed form, which is
// what makes it the exactness oracle.
class DiscreteSystem {
public:
    DiscreteSystem(Eigen::VectorXd pi, Eigen::MatrixXd qtilde);

    int size() const { return static_cast<int>(pi_.size()); }
    const Eigen::VectorXd& pi() const { return pi_; }
    double qtilde(int from, int to) const { return qtilde_(from, to); }

    // r(x) = sum_y qtilde(y|x), the normalizer the factory never sees.
    double normalizer(int x) const { return row_sums_[x]; }
    // Envelope bound used by the coin: k * max_y qtilde(y|x) >= r(x).
    double bound(int x) const { return bounds_[x]; }

    // Brute-force Barker acceptance pi(y)q(x|y) / (pi(y)q(x|y) + pi(x)q(y|x))
    // by direct enumeration; independent of the factory path.
    double alpha_barker(int x, int y) const;
    // (c_x + c_y) / (c_x p_x + c_y p_y) for the exact weights and coins the
    // two-coin kernel would build for the pair (x, y).
    double expected_factory_loops(int x, int y) const;

    TargetDensity as_target() const;
    IntractableProposal as_intractable() const;
    EvaluableProposal as_evaluable() const;

private:
    Eigen::VectorXd pi_;
    Eigen::MatrixXd qtilde_;
    std::vector<double> row_sums_;
    std::vector<double> bounds_;
};

// Shipped 3-state configuration: pi = (0.2, 0.3, 0.5) with an asymmetric
// qtilde; and a 4-state companion so grid tests exceed ten (x,y) pairs.
DiscreteSystem discrete_three_state();
DiscreteSystem discrete_four_state();

// ---------------------------------------------------------------------------
// Sensor network localization: 6 sensors on the plane, 4 with unknown
// position, pairwise distances observed through a Bernoulli detection model
// and Gaussian noise.

struct SensorData {
    std::vector<Eigen::Vector2d> known_locations;  // anchors, indices 4 and 5
    int unknown_count = 4;
    Eigen::MatrixXi w;       // 6x6 symmetric indicator, zero diagonal
    Eigen::MatrixXd y_dist;  // observed distances where w == 1
    double obs_scale = 0.3;
    double noise_sd = 0.02;
    double prior_sd = 10.0;
};

// Detection probability exp(-d^2 / (2 obs_scale^2)).
double sensor_obs_prob(double distance, double obs_scale = 0.3);

// Draws w and y for the given true layout (6 locations; last two become the
// anchors). noise_sd = 0 degenerates to exact distances.
SensorData simulate_sensor_data(const std::vector<Eigen::Vector2d>& true_locations,
                                RngStream& rng, double obs_scale = 0.3, double noise_sd = 0.02);

// Log posterior of the 4 unknown locations (flattened 8-vector), including
// the non-detection terms and the diffuse Gaussian prior.
double sensor_log_posterior(const SensorData& data, const Eigen::VectorXd& locations);

// Joint posterior as a TargetDensity over the 8-dim state, plus the 2-d
// conditional for one sensor given the rest.
TargetDensity sensor_target(const SensorData& data);
TargetDensity sensor_conditional(const SensorData& data, const Eigen::VectorXd& full_state,
                                 int sensor_index);

// The seeded layout shipped with the experiments.
std::vector<Eigen::Vector2d> default_sensor_truth();

// CSV persistence; schema: i,j,w,y with y empty where w == 0.
void write_sensor_csv(const SensorData& data, const std::string& path);
SensorData read_sensor_csv(const std::string& path);

}  // namespace bfmcmc
