#include "bfmcmc/cox.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "bfmcmc/distributions.hpp"
#include "bfmcmc/errors.hpp"
#include "bfmcmc/proposals.hpp"

namespace bfmcmc {

CoxModel make_cox_model(int m, double sigma2, double ell, double domain_length) {
    if (m < 2) throw std::invalid_argument("make_cox_model: need at least two knots");
    if (!(sigma2 > 0.0) || !(ell > 0.0))
        throw std::invalid_argument("make_cox_model: sigma2 and ell must be > 0");
    CoxModel model;
    model.domain_length = domain_length;
    model.m = m;
    model.sigma2 = sigma2;
    model.ell = ell;
    model.delta = domain_length / static_cast<double>(m - 1);
    model.knots = Eigen::VectorXd::LinSpaced(m, 0.0, domain_length);
    model.c_weights = Eigen::VectorXd::Constant(m, model.delta);
    model.c_weights[0] = model.c_weights[m - 1] = model.delta / 2.0;

    model.gamma.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double d = model.knots[i] - model.knots[j];
            model.gamma(i, j) = sigma2 * std::exp(-d * d / (2.0 * ell * ell));
        }
    model.gamma.diagonal().array() += 1e-8 * sigma2;  // jitter
    Eigen::LLT<Eigen::MatrixXd> llt(model.gamma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("make_cox_model: kernel matrix not SPD even after jitter");
    model.gamma_chol = llt.matrixL();
    return model;
}

double cox_basis(double x, int j, const CoxModel& model) {
    const double u = std::abs((x - model.knots[j]) / model.delta);
    return u <= 1.0 ? 1.0 - u : 0.0;
}

double cox_intensity(const CoxModel& model, const Eigen::VectorXd& xi, double x) {
    // Only the two bracketing hats are nonzero.
    const double pos = x / model.delta;
    const int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, model.m - 1);
    double value = cox_basis(x, lo, model) * xi[lo];
    if (lo + 1 < model.m) value += cox_basis(x, lo + 1, model) * xi[lo + 1];
    return value;
}

double cox_log_likelihood(const CoxModel& model, const Eigen::VectorXd& xi) {
    if (xi.size() != model.m) throw std::invalid_argument("cox_log_likelihood: wrong dimension");
    if (!(xi.array() > 0.0).all()) return kNegInf;
    const double exposure = model.c_weights.dot(xi);
    double lp = -exposure * static_cast<double>(model.observations.size());
    for (const auto& pattern : model.observations) {
        for (double x : pattern) {
            const double lam = cox_intensity(model, xi, x);
            if (!(lam > 0.0)) return kNegInf;  // unreachable on the open orthant
            lp += std::log(lam);
        }
    }
    return lp;
}

double cox_log_prior(const CoxModel& model, const Eigen::VectorXd& xi) {
    if (!(xi.array() > 0.0).all()) return kNegInf;
    const Eigen::VectorXd z =
        model.gamma_chol.triangularView<Eigen::Lower>().solve(xi);
    return -0.5 * z.squaredNorm();
}

double cox_log_posterior(const CoxModel& model, const Eigen::VectorXd& xi) {
    if (!(xi.array() > 0.0).all()) return kNegInf;
    return cox_log_likelihood(model, xi) + cox_log_prior(model, xi);
}

TargetDensity cox_target(const CoxModel& model) {
    auto shared = std::make_shared<CoxModel>(model);
    TargetDensity t;
    t.dimension = model.m;
    t.log_unnorm = [shared](const Eigen::VectorXd& xi) { return cox_log_posterior(*shared, xi); };
    t.support = [](const Eigen::VectorXd& xi) { return (xi.array() > 0.0).all(); };
    return t;
}

double default_cox_intensity(double x) {
    const double b = (x - 25.0) / 10.0;
    return 2.0 * std::exp(-x / 15.0) + std::exp(-b * b);
}

std::vector<std::vector<double>> simulate_cox_data(const CoxModel& model,
                                                   const std::function<double(double)>& lambda,
                                                   int n0, RngStream& rng) {
    if (n0 < 0) throw std::invalid_argument("simulate_cox_data: n0 must be >= 0");
    // Dominating constant from a fine scan with headroom; thinning stays
    // exact under any valid upper bound.
    double lambda_max = 0.0;
    const int grid = 4096;
    for (int g = 0; g <= grid; ++g) {
        const double x = model.domain_length * static_cast<double>(g) / grid;
        lambda_max = std::max(lambda_max, lambda(x));
    }
    lambda_max *= 1.05;

    std::vector<std::vector<double>> patterns;
    patterns.reserve(static_cast<std::size_t>(n0));
    for (int v = 0; v < n0; ++v) {
        std::vector<double> events;
        if (lambda_max > 0.0) {
            const std::uint64_t candidates =
                draw_poisson(rng, lambda_max * model.domain_length);
            events.reserve(candidates);
            for (std::uint64_t i = 0; i < candidates; ++i) {
                const double x = rng.uniform() * model.domain_length;
                if (rng.uniform() < lambda(x) / lambda_max) events.push_back(x);
            }
            std::sort(events.begin(), events.end());
        }
        patterns.push_back(std::move(events));
    }
    return patterns;
}

namespace {

// One fixed-size slice of the orthant-mass sum; blocked so the triangular
// product runs as a matrix product.
std::uint64_t orthant_chunk(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol,
                            std::uint64_t count, RngStream rng) {
    const int m = static_cast<int>(mean.size());
    constexpr std::uint64_t kBlock = 2048;
    Eigen::MatrixXd z(m, kBlock);
    Eigen::MatrixXd a(m, kBlock);
    std::uint64_t hits = 0;
    std::uint64_t left = count;
    while (left > 0) {
        const int b = static_cast<int>(std::min(kBlock, left));
        for (int c = 0; c < b; ++c)
            for (int i = 0; i < m; ++i) z(i, c) = rng.normal();
        a.leftCols(b).noalias() = chol * z.leftCols(b);
        for (int c = 0; c < b; ++c) {
            bool inside = true;
            for (int i = 0; i < m; ++i) {
                if (a(i, c) + mean[i] <= 0.0) {
                    inside = false;
                    break;
                }
            }
            hits += inside;
        }
        left -= b;
    }
    return hits;
}

}  // namespace

BaselineNormalizerEstimate estimate_orthant_mass(const Eigen::VectorXd& mean,
                                                 const Eigen::MatrixXd& chol,
                                                 std::uint64_t mc_samples, RngStream& rng) {
    if (mc_samples == 0)
        throw std::invalid_argument("estimate_orthant_mass: need at least one sample");
    // Fixed 8-way split keyed off a fresh nonce: the estimate is a pure
    // function of the stream state whether or not the chunks run in
    // parallel.
    constexpr std::uint64_t kChunks = 8;
    const std::uint64_t nonce = rng.next_u64();
    std::uint64_t sizes[kChunks];
    const std::uint64_t base = mc_samples / kChunks;
    for (std::uint64_t c = 0; c < kChunks; ++c)
        sizes[c] = base + (c < mc_samples % kChunks ? 1 : 0);

    std::uint64_t hits = 0;
    if (mc_samples >= 16384) {
        std::vector<std::future<std::uint64_t>> futures;
        for (std::uint64_t c = 0; c < kChunks; ++c) {
            if (sizes[c] == 0) continue;
            futures.push_back(std::async(std::launch::async, orthant_chunk, mean, chol, sizes[c],
                                         rng.substream(nonce + c)));
        }
        for (auto& f : futures) hits += f.get();
    } else {
        for (std::uint64_t c = 0; c < kChunks; ++c) {
            if (sizes[c] == 0) continue;
            hits += orthant_chunk(mean, chol, sizes[c], rng.substream(nonce + c));
        }
    }
    BaselineNormalizerEstimate est;
    est.mc_samples = mc_samples;
    est.point_estimate = static_cast<double>(hits) / static_cast<double>(mc_samples);
    return est;
}

InexactCoxStep inexact_mh_cox_step(const CoxModel& model, const Eigen::VectorXd& state,
                                   const Eigen::MatrixXd& proposal_chol,
                                   std::uint64_t mc_samples, RngStream& rng) {
    if (!(state.array() > 0.0).all())
        throw InvalidState("inexact_mh_cox_step: state must lie in the positive orthant");
    const int m = model.m;

    // Proposal: N(state, Sigma) by rejection into the orthant.
    Eigen::VectorXd z(m);
    Eigen::VectorXd proposed;
    bool got = false;
    for (std::uint64_t attempt = 0; attempt < kRejectionAttemptCap; ++attempt) {
        for (int i = 0; i < m; ++i) z[i] = rng.normal();
        Eigen::VectorXd y = state + proposal_chol.triangularView<Eigen::Lower>() * z;
        if ((y.array() > 0.0).all()) {
            proposed = std::move(y);
            got = true;
            break;
        }
    }
    if (!got)
        throw ProposalSamplingError("inexact_mh_cox_step: proposal rejection cap exceeded");

    InexactCoxStep out;
    out.r_hat_current = estimate_orthant_mass(state, proposal_chol, mc_samples, rng).point_estimate;
    out.r_hat_proposed =
        estimate_orthant_mass(proposed, proposal_chol, mc_samples, rng).point_estimate;
    if (out.r_hat_current == 0.0 || out.r_hat_proposed == 0.0)
        throw DegenerateEstimate(
            "inexact_mh_cox_step: normalizer estimate is zero; increase mc_samples");

    const double log_alpha = cox_log_posterior(model, proposed) - cox_log_posterior(model, state) +
                             std::log(out.r_hat_current) - std::log(out.r_hat_proposed);
    if (rng.uniform() < std::exp(std::min(0.0, log_alpha))) {
        out.state = std::move(proposed);
        out.accepted = true;
    } else {
        out.state = state;
    }
    return out;
}

void write_point_patterns(const std::vector<std::vector<double>>& patterns,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_point_patterns: cannot open " + path);
    out << "replicate_id,location\n";
    char buf[64];
    for (std::size_t v = 0; v < patterns.size(); ++v) {
        for (double x : patterns[v]) {
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out << v << "," << buf << "\n";
        }
    }
}

std::vector<std::vector<double>> read_point_patterns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_point_patterns: cannot open " + path);
    std::vector<std::vector<double>> patterns;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        const std::size_t v = static_cast<std::size_t>(std::stoul(tok));
        std::getline(ss, tok, ',');
        if (patterns.size() <= v) patterns.resize(v + 1);
        patterns[v].push_back(std::stod(tok));
    }
    return patterns;
}

}  // namespace bfmcmc
