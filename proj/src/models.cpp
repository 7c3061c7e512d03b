#include "bfmcmc/models.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace bfmcmc {

TargetDensity gamma_target(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::domain_error("gamma_target: alpha, beta must be > 0");
    TargetDensity t;
    t.dimension = 1;
    t.log_unnorm = [alpha, beta](const Eigen::VectorXd& x) {
        return log_gamma_density(x[0], alpha, beta);
    };
    t.support = [](const Eigen::VectorXd& x) { return x[0] > 0.0; };
    return t;
}

TargetDensity gaussian_mixture_1d(std::vector<double> means, std::vector<double> sds,
                                  std::vector<double> weights) {
    if (means.empty() || means.size() != sds.size())
        throw std::invalid_argument("gaussian_mixture_1d: means/sds size mismatch");
    if (weights.empty()) weights.assign(means.size(), 1.0 / static_cast<double>(means.size()));
    if (weights.size() != means.size())
        throw std::invalid_argument("gaussian_mixture_1d: weights size mismatch");

    TargetDensity t;
    t.dimension = 1;
    t.log_unnorm = [means, sds, weights](const Eigen::VectorXd& x) {
        double acc = kNegInf;
        for (std::size_t i = 0; i < means.size(); ++i) {
            const double z = (x[0] - means[i]) / sds[i];
            acc = log_add_exp(acc, std::log(weights[i]) - std::log(sds[i]) - 0.5 * z * z);
        }
        return acc;
    };
    t.support = [](const Eigen::VectorXd&) { return true; };
    return t;
}

// --------------------------------------------------------------------------

DiscreteSystem::DiscreteSystem(Eigen::VectorXd pi, Eigen::MatrixXd qtilde)
    : pi_(std::move(pi)), qtilde_(std::move(qtilde)) {
    const int k = static_cast<int>(pi_.size());
    if (qtilde_.rows() != k || qtilde_.cols() != k)
        throw std::invalid_argument("DiscreteSystem: qtilde must be k x k");
    if ((pi_.array() <= 0.0).any() || (qtilde_.array() <= 0.0).any())
        throw std::invalid_argument("DiscreteSystem: pi and qtilde must be positive");
    for (int x = 0; x < k; ++x) {
        row_sums_.push_back(qtilde_.row(x).sum());
        bounds_.push_back(static_cast<double>(k) * qtilde_.row(x).maxCoeff());
    }
}

double DiscreteSystem::alpha_barker(int x, int y) const {
    const double num = pi_[y] * qtilde_(y, x) / normalizer(y);
    const double den = pi_[x] * qtilde_(x, y) / normalizer(x);
    return num / (num + den);
}

double DiscreteSystem::expected_factory_loops(int x, int y) const {
    // Weights the two-coin kernel forms for the pair, with the true coin
    // probabilities p_x = r(y)/b_y and p_y = r(x)/b_x.
    const double cx = pi_[x] * qtilde_(x, y) * bound(y);
    const double cy = pi_[y] * qtilde_(y, x) * bound(x);
    const double denom = cx * normalizer(y) / bound(y) + cy * normalizer(x) / bound(x);
    return (cx + cy) / denom;
}

namespace {
int state_index(const Eigen::VectorXd& v, int k) {
    const int i = static_cast<int>(std::llround(v[0]));
    if (i < 0 || i >= k) return -1;
    return i;
}
}  // namespace

TargetDensity DiscreteSystem::as_target() const {
    const auto pi = pi_;
    const int k = size();
    TargetDensity t;
    t.dimension = 1;
    t.log_unnorm = [pi, k](const Eigen::VectorXd& v) {
        const int i = state_index(v, k);
        return i < 0 ? kNegInf : std::log(pi[i]);
    };
    t.support = [k](const Eigen::VectorXd& v) { return state_index(v, k) >= 0; };
    return t;
}

IntractableProposal DiscreteSystem::as_intractable() const {
    auto self = std::make_shared<DiscreteSystem>(*this);
    const int k = size();
    IntractableProposal p;
    p.dimension = 1;
    // Inverse-cdf draw from the normalized row; sampling from Q is always
    // assumed possible, only the factory is denied the normalizer.
    p.sample = [self, k](const Eigen::VectorXd& from, RngStream& rng) {
        const int x = state_index(from, k);
        if (x < 0) throw std::invalid_argument("discrete sample: state off the lattice");
        const double u = rng.uniform() * self->normalizer(x);
        double acc = 0.0;
        int y = k - 1;
        for (int j = 0; j < k; ++j) {
            acc += self->qtilde(x, j);
            if (u < acc) {
                y = j;
                break;
            }
        }
        return Eigen::VectorXd::Constant(1, static_cast<double>(y)).eval();
    };
    p.log_qtilde = [self, k](const Eigen::VectorXd& to, const Eigen::VectorXd& from) {
        const int x = state_index(from, k);
        const int y = state_index(to, k);
        if (x < 0 || y < 0) return kNegInf;
        return std::log(self->qtilde(x, y));
    };
    p.bound = [self, k](const Eigen::VectorXd& from) {
        return self->bound(state_index(from, k));
    };
    // Importance coin with a uniform envelope over the k states:
    // M ~ U{0..k-1}, accept with qtilde(M|x) / ((1/k) b_x).
    p.normalizer_coin = [self, k](const Eigen::VectorXd& from) -> CoinOracle {
        const int x = state_index(from, k);
        const double b = self->bound(x);
        return [self, k, x, b](RngStream& rng) {
            const int m = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
            const double p_cond = self->qtilde(x, m) * static_cast<double>(k) / b;
            return rng.uniform() < p_cond;
        };
    };
    return p;
}

EvaluableProposal DiscreteSystem::as_evaluable() const {
    auto self = std::make_shared<DiscreteSystem>(*this);
    const int k = size();
    EvaluableProposal p;
    p.dimension = 1;
    p.sample = as_intractable().sample;
    p.log_density = [self, k](const Eigen::VectorXd& to, const Eigen::VectorXd& from) {
        const int x = state_index(from, k);
        const int y = state_index(to, k);
        if (x < 0 || y < 0) return kNegInf;
        return std::log(self->qtilde(x, y) / self->normalizer(x));
    };
    return p;
}

DiscreteSystem discrete_three_state() {
    Eigen::VectorXd pi(3);
    pi << 0.2, 0.3, 0.5;
    Eigen::MatrixXd q(3, 3);
    q << 0.20, 0.60, 0.70,
         0.30, 0.10, 0.40,
         0.50, 0.25, 0.10;
    return DiscreteSystem(pi, q);
}

DiscreteSystem discrete_four_state() {
    Eigen::VectorXd pi(4);
    pi << 0.1, 0.2, 0.3, 0.4;
    Eigen::MatrixXd q(4, 4);
    q << 0.15, 0.45, 0.30, 0.80,
         0.55, 0.20, 0.35, 0.10,
         0.25, 0.70, 0.05, 0.45,
         0.40, 0.15, 0.60, 0.25;
    return DiscreteSystem(pi, q);
}

// --------------------------------------------------------------------------

double sensor_obs_prob(double distance, double obs_scale) {
    return std::exp(-distance * distance / (2.0 * obs_scale * obs_scale));
}

SensorData simulate_sensor_data(const std::vector<Eigen::Vector2d>& true_locations,
                                RngStream& rng, double obs_scale, double noise_sd) {
    if (true_locations.size() != 6)
        throw std::invalid_argument("simulate_sensor_data: six true locations expected");
    SensorData data;
    data.obs_scale = obs_scale;
    data.noise_sd = noise_sd;
    data.known_locations = {true_locations[4], true_locations[5]};
    const int n = 6;
    data.w = Eigen::MatrixXi::Zero(n, n);
    data.y_dist = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = (true_locations[i] - true_locations[j]).norm();
            const bool observed = rng.uniform() < sensor_obs_prob(d, data.obs_scale);
            if (observed) {
                data.w(i, j) = data.w(j, i) = 1;
                const double y = d + data.noise_sd * rng.normal();
                data.y_dist(i, j) = data.y_dist(j, i) = y;
            }
        }
    }
    return data;
}

namespace {

Eigen::Vector2d sensor_position(const SensorData& data, const Eigen::VectorXd& locations, int i) {
    if (i < data.unknown_count) return locations.segment<2>(2 * i);
    return data.known_locations[static_cast<std::size_t>(i - data.unknown_count)];
}

}  // namespace

double sensor_log_posterior(const SensorData& data, const Eigen::VectorXd& locations) {
    if (locations.size() != 2 * data.unknown_count)
        throw std::invalid_argument("sensor_log_posterior: wrong state dimension");
    const int n = data.unknown_count + static_cast<int>(data.known_locations.size());
    double lp = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d =
                (sensor_position(data, locations, i) - sensor_position(data, locations, j)).norm();
            const double rate = sensor_obs_prob(d, data.obs_scale);
            if (data.w(i, j)) {
                lp += std::log(rate);
                const double resid = (data.y_dist(i, j) - d) / data.noise_sd;
                lp += -0.5 * resid * resid - std::log(data.noise_sd) -
                      0.5 * std::log(2.0 * M_PI);
            } else {
                // rate == 1 only at coincident points; log1p(-1) = -inf is the
                // correct degenerate value there.
                lp += std::log1p(-rate);
            }
        }
    }
    for (int k = 0; k < data.unknown_count; ++k) {
        lp += -0.5 * locations.segment<2>(2 * k).squaredNorm() / (data.prior_sd * data.prior_sd) -
              std::log(data.prior_sd * data.prior_sd * 2.0 * M_PI);
    }
    return lp;
}

TargetDensity sensor_target(const SensorData& data) {
    auto shared = std::make_shared<SensorData>(data);
    TargetDensity t;
    t.dimension = 2 * data.unknown_count;
    t.log_unnorm = [shared](const Eigen::VectorXd& x) { return sensor_log_posterior(*shared, x); };
    t.support = [](const Eigen::VectorXd&) { return true; };
    return t;
}

TargetDensity sensor_conditional(const SensorData& data, const Eigen::VectorXd& full_state,
                                 int sensor_index) {
    auto shared = std::make_shared<SensorData>(data);
    auto base = std::make_shared<Eigen::VectorXd>(full_state);
    TargetDensity t;
    t.dimension = 2;
    t.log_unnorm = [shared, base, sensor_index](const Eigen::VectorXd& u) {
        Eigen::VectorXd full = *base;
        full.segment<2>(2 * sensor_index) = u;
        return sensor_log_posterior(*shared, full);
    };
    t.support = [](const Eigen::VectorXd&) { return true; };
    return t;
}

std::vector<Eigen::Vector2d> default_sensor_truth() {
    // Fixed layout on the unit square; the last two are the anchors.
    return {{0.57, 0.91}, {0.10, 0.37}, {0.26, 0.14}, {0.85, 0.04},
            {0.50, 0.30}, {0.30, 0.70}};
}

void write_sensor_csv(const SensorData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sensor_csv: cannot open " + path);
    out << "i,j,w,y\n";
    const int n = data.unknown_count + static_cast<int>(data.known_locations.size());
    char buf[64];
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            out << i << "," << j << "," << data.w(i, j) << ",";
            if (data.w(i, j)) {
                std::snprintf(buf, sizeof buf, "%.17g", data.y_dist(i, j));
                out << buf;
            }
            out << "\n";
        }
    }
}

SensorData read_sensor_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_sensor_csv: cannot open " + path);
    SensorData data;
    // The file holds only (i,j,w,y); anchors come from the shipped layout.
    const auto truth = default_sensor_truth();
    data.known_locations = {truth[4], truth[5]};
    const int n = 6;
    data.w = Eigen::MatrixXi::Zero(n, n);
    data.y_dist = Eigen::MatrixXd::Zero(n, n);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        const int i = std::stoi(tok);
        std::getline(ss, tok, ',');
        const int j = std::stoi(tok);
        std::getline(ss, tok, ',');
        const int w = std::stoi(tok);
        data.w(i, j) = data.w(j, i) = w;
        if (std::getline(ss, tok, ',') && !tok.empty()) {
            data.y_dist(i, j) = data.y_dist(j, i) = std::stod(tok);
        }
    }
    return data;
}

}  // namespace bfmcmc
