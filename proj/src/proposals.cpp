#include "bfmcmc/proposals.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "bfmcmc/errors.hpp"

namespace bfmcmc {

namespace {

double log_normal_1d(double y, double mean, double h) {
    const double d = y - mean;
    return -0.5 * d * d / h - 0.5 * std::log(2.0 * M_PI * h);
}

}  // namespace

double ram_filter_logprob(double log_pi_num, double log_pi_den, double log_epsilon) {
    const double log_ratio =
        log_add_exp(log_pi_num, log_epsilon) - log_add_exp(log_pi_den, log_epsilon);
    return std::min(0.0, log_ratio);
}

double ram_filter_prob(double log_pi_num, double log_pi_den, double log_epsilon) {
    return std::exp(ram_filter_logprob(log_pi_num, log_pi_den, log_epsilon));
}

IntractableProposal trunc_gauss_1d(Interval support, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("trunc_gauss_1d: h must be > 0");
    if (!(support.lo < support.hi)) throw std::invalid_argument("trunc_gauss_1d: empty support");
    const double sd = std::sqrt(h);

    IntractableProposal prop;
    prop.dimension = 1;
    prop.sample = [support, sd](const Eigen::VectorXd& x, RngStream& rng) {
        for (std::uint64_t attempt = 0; attempt < kRejectionAttemptCap; ++attempt) {
            const double y = x[0] + sd * rng.normal();
            if (support.contains(y)) return Eigen::VectorXd::Constant(1, y).eval();
        }
        throw ProposalSamplingError(
            "trunc_gauss_1d: rejection cap hit; support has negligible mass under N(x,h)");
    };
    prop.log_qtilde = [support, h](const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
        if (!support.contains(y[0])) return kNegInf;
        return log_normal_1d(y[0], x[0], h);
    };
    prop.bound = [](const Eigen::VectorXd&) { return 1.0; };
    // Indicator coin: M ~ N(x,h), success iff M lands in A. Marginal success
    // probability is exactly the truncation mass r(x).
    prop.normalizer_coin = [support, sd](const Eigen::VectorXd& x) -> CoinOracle {
        const double mean = x[0];
        return [mean, sd, support](RngStream& rng) {
            return support.contains(mean + sd * rng.normal());
        };
    };
    return prop;
}

IntractableProposal trunc_gauss_orthant(int m, const Eigen::MatrixXd& sigma) {
    if (m < 1) throw std::invalid_argument("trunc_gauss_orthant: m must be >= 1");
    auto chol = std::make_shared<GaussianParams>(Eigen::VectorXd::Zero(m), sigma);

    IntractableProposal prop;
    prop.dimension = m;
    prop.sample = [chol, m](const Eigen::VectorXd& x, RngStream& rng) {
        Eigen::VectorXd z(m);
        for (std::uint64_t attempt = 0; attempt < kRejectionAttemptCap; ++attempt) {
            for (int i = 0; i < m; ++i) z[i] = rng.normal();
            Eigen::VectorXd y = x + chol->chol().triangularView<Eigen::Lower>() * z;
            if ((y.array() > 0.0).all()) return y;
        }
        throw ProposalSamplingError(
            "trunc_gauss_orthant: rejection cap hit; orthant mass under N(x,Sigma) is below ~" +
            std::to_string(1.0 / static_cast<double>(kRejectionAttemptCap)) +
            "; reduce the proposal scale or the dimension");
    };
    prop.log_qtilde = [chol](const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
        if (!(y.array() > 0.0).all()) return kNegInf;
        return chol->log_density(y - x);
    };
    prop.bound = [](const Eigen::VectorXd&) { return 1.0; };
    prop.normalizer_coin = [chol, m](const Eigen::VectorXd& x) -> CoinOracle {
        return [chol, m, x](RngStream& rng) {
            Eigen::VectorXd z(m);
            for (int i = 0; i < m; ++i) z[i] = rng.normal();
            const Eigen::VectorXd y = x + chol->chol().triangularView<Eigen::Lower>() * z;
            return (y.array() > 0.0).all();
        };
    };
    return prop;
}

EvaluableProposal gaussian_random_walk(int dimension, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("gaussian_random_walk: h must be > 0");
    const double sd = std::sqrt(h);
    EvaluableProposal prop;
    prop.dimension = dimension;
    prop.sample = [sd, dimension](const Eigen::VectorXd& x, RngStream& rng) {
        Eigen::VectorXd y(dimension);
        for (int i = 0; i < dimension; ++i) y[i] = x[i] + sd * rng.normal();
        return y;
    };
    prop.log_density = [h, dimension](const Eigen::VectorXd& to, const Eigen::VectorXd& from) {
        return -0.5 * (to - from).squaredNorm() / h -
               0.5 * dimension * std::log(2.0 * M_PI * h);
    };
    return prop;
}

EvaluableProposal gaussian_random_walk(const Eigen::MatrixXd& sigma) {
    auto chol = std::make_shared<GaussianParams>(Eigen::VectorXd::Zero(sigma.rows()), sigma);
    const int m = static_cast<int>(sigma.rows());
    EvaluableProposal prop;
    prop.dimension = m;
    prop.sample = [chol, m](const Eigen::VectorXd& x, RngStream& rng) {
        Eigen::VectorXd z(m);
        for (int i = 0; i < m; ++i) z[i] = rng.normal();
        return (x + chol->chol().triangularView<Eigen::Lower>() * z).eval();
    };
    prop.log_density = [chol](const Eigen::VectorXd& to, const Eigen::VectorXd& from) {
        return chol->log_density(to - from);
    };
    return prop;
}

namespace {

// Repeated s-draws until the filter min{1, (pi(anchor)+eps)/(pi(draw)+eps)}
// accepts; direction == +1 filters upward (anchor in the denominator).
Eigen::VectorXd forced_move(const RamProposal& prop, const Eigen::VectorXd& from,
                            double log_pi_anchor, bool downward, RngStream& rng,
                            std::uint64_t* loops) {
    for (std::uint64_t attempt = 1; attempt <= prop.inner_loop_cap; ++attempt) {
        Eigen::VectorXd cand = prop.inner_sample(from, rng);
        const double log_pi_cand = prop.target.log_unnorm(cand);
        const double p = downward
                             ? ram_filter_prob(log_pi_anchor, log_pi_cand, prop.log_epsilon)
                             : ram_filter_prob(log_pi_cand, log_pi_anchor, prop.log_epsilon);
        if (rng.uniform() < p) {
            if (loops) *loops = attempt;
            return cand;
        }
    }
    throw ProposalSamplingError("ram: forced move loop cap exceeded");
}

}  // namespace

Eigen::VectorXd ram_forced_down(const RamProposal& prop, const Eigen::VectorXd& from,
                                RngStream& rng, std::uint64_t* loops) {
    return forced_move(prop, from, prop.target.log_unnorm(from), /*downward=*/true, rng, loops);
}

Eigen::VectorXd ram_forced_up(const RamProposal& prop, const Eigen::VectorXd& from,
                              RngStream& rng, std::uint64_t* loops) {
    return forced_move(prop, from, prop.target.log_unnorm(from), /*downward=*/false, rng, loops);
}

DownUpDraw ram_downup_sample(const RamProposal& prop, const Eigen::VectorXd& x, RngStream& rng) {
    DownUpDraw draw;
    // Down: accept x' with min{1, (pi(x)+eps)/(pi(x')+eps)}.
    Eigen::VectorXd mid = ram_forced_down(prop, x, rng, &draw.down_loops);
    // Up: accept y with min{1, (pi(y)+eps)/(pi(x')+eps)}.
    draw.y = ram_forced_up(prop, mid, rng, &draw.up_loops);
    return draw;
}

CoinOracle ram_normalizer_coin(const RamProposal& prop, const Eigen::VectorXd& x) {
    const double log_pi_x = prop.target.log_unnorm(x);
    return [sample = prop.inner_sample, log_pi = prop.target.log_unnorm,
            log_eps = prop.log_epsilon, x, log_pi_x](RngStream& rng) {
        const Eigen::VectorXd m = sample(x, rng);
        const double p = ram_filter_prob(log_pi_x, log_pi(m), log_eps);
        return rng.uniform() < p;
    };
}

IntractableProposal ram_to_intractable(const RamProposal& prop,
                                       bool allow_asymmetric_experimental) {
    if (!prop.symmetric && !allow_asymmetric_experimental)
        throw std::invalid_argument(
            "ram_to_intractable: asymmetric inner proposal needs rederived factory weights; "
            "pass allow_asymmetric_experimental to proceed anyway");

    auto shared = std::make_shared<RamProposal>(prop);
    IntractableProposal out;
    out.dimension = prop.dimension;
    out.sample = [shared](const Eigen::VectorXd& x, RngStream& rng) {
        return ram_downup_sample(*shared, x, rng).y;
    };
    // With symmetric s, q_downup(y|x) * A_D(x) is symmetric in (x, y), so a
    // constant surrogate is exact up to a factor common to both factory
    // weights.
    out.log_qtilde = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
    out.bound = [](const Eigen::VectorXd&) { return 1.0; };
    out.normalizer_coin = [shared](const Eigen::VectorXd& x) -> CoinOracle {
        const double log_pi_x = shared->target.log_unnorm(x);
        return [shared, x, log_pi_x](RngStream& rng) {
            const Eigen::VectorXd m = shared->inner_sample(x, rng);
            const double p =
                ram_filter_prob(log_pi_x, shared->target.log_unnorm(m), shared->log_epsilon);
            return rng.uniform() < p;
        };
    };
    return out;
}

}  // namespace bfmcmc
