#include "support/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracles {

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

namespace {

double gammainc_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int k = 0; k < 10'000; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gammainc_q_contfrac(double a, double x) {
    // Lentz's algorithm for the continued fraction of Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10'000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gammainc_p(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("gammainc_p: a must be > 0");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gammainc_p_series(a, x);
    return 1.0 - gammainc_q_contfrac(a, x);
}

double gammainc_q(double a, double x) { return 1.0 - gammainc_p(a, x); }

double gamma_cdf(double x, double alpha, double beta) {
    if (x <= 0.0) return 0.0;
    return gammainc_p(alpha, beta * x);
}

double chi2_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return gammainc_q(df / 2.0, x / 2.0);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return adaptive(f, a, fa, b, fb, m, fm, simpson(f, a, fa, b, fb, m, fm), tol, 48);
}

std::vector<double> ar1_series(double rho, std::size_t n, bfmcmc::RngStream& rng) {
    std::vector<double> out(n);
    double x = rng.normal() / std::sqrt(1.0 - rho * rho);  // stationary start
    for (std::size_t i = 0; i < n; ++i) {
        x = rho * x + rng.normal();
        out[i] = x;
    }
    return out;
}

double naive_sensor_log_posterior(const bfmcmc::SensorData& data, const Eigen::VectorXd& loc) {
    // All six positions as plain arrays; quadratic loops, no shortcuts.
    std::vector<std::array<double, 2>> pos;
    for (int k = 0; k < data.unknown_count; ++k)
        pos.push_back({loc[2 * k], loc[2 * k + 1]});
    for (const auto& a : data.known_locations) pos.push_back({a[0], a[1]});

    double lp = 0.0;
    const int n = static_cast<int>(pos.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = pos[i][0] - pos[j][0];
            const double dy = pos[i][1] - pos[j][1];
            const double d = std::sqrt(dx * dx + dy * dy);
            const double rate = std::exp(-d * d / (2.0 * data.obs_scale * data.obs_scale));
            if (data.w(i, j) == 1) {
                lp += std::log(rate);
                const double r = (data.y_dist(i, j) - d) / data.noise_sd;
                lp += -0.5 * r * r - std::log(data.noise_sd) - 0.5 * std::log(2.0 * M_PI);
            } else {
                lp += std::log(1.0 - rate);
            }
        }
    }
    for (int k = 0; k < data.unknown_count; ++k) {
        const double sx = loc[2 * k], sy = loc[2 * k + 1];
        lp += -0.5 * (sx * sx + sy * sy) / (data.prior_sd * data.prior_sd) -
              std::log(2.0 * M_PI * data.prior_sd * data.prior_sd);
    }
    return lp;
}

double naive_cox_log_posterior(const bfmcmc::CoxModel& model, const Eigen::VectorXd& xi) {
    for (int j = 0; j < model.m; ++j)
        if (!(xi[j] > 0.0)) return -std::numeric_limits<double>::infinity();

    double lp = 0.0;
    for (const auto& pattern : model.observations) {
        double exposure = 0.0;
        for (int j = 0; j < model.m; ++j) exposure += model.c_weights[j] * xi[j];
        lp -= exposure;
        for (double x : pattern) {
            double lam = 0.0;
            for (int j = 0; j < model.m; ++j) lam += bfmcmc::cox_basis(x, j, model) * xi[j];
            lp += std::log(lam);
        }
    }
    // prior through an explicit inverse
    const Eigen::MatrixXd inv = model.gamma.inverse();
    lp += -0.5 * xi.dot(inv * xi);
    return lp;
}

double chi2_two_sample_pvalue(const std::vector<double>& a, const std::vector<double>& b,
                              double lo, double hi, int bins) {
    std::vector<double> ca(static_cast<std::size_t>(bins), 0.0),
        cb(static_cast<std::size_t>(bins), 0.0);
    const double width = (hi - lo) / bins;
    const auto fill = [&](const std::vector<double>& v, std::vector<double>& c) {
        for (double x : v) {
            if (x < lo || x >= hi) continue;
            c[static_cast<std::size_t>(std::min<int>(bins - 1, static_cast<int>((x - lo) / width)))] += 1.0;
        }
    };
    fill(a, ca);
    fill(b, cb);

    // merge adjacent bins until every combined count is at least 10
    std::vector<double> ma, mb;
    double accA = 0.0, accB = 0.0;
    for (int i = 0; i < bins; ++i) {
        accA += ca[static_cast<std::size_t>(i)];
        accB += cb[static_cast<std::size_t>(i)];
        if (accA + accB >= 10.0) {
            ma.push_back(accA);
            mb.push_back(accB);
            accA = accB = 0.0;
        }
    }
    if (accA + accB > 0.0 && !ma.empty()) {
        ma.back() += accA;
        mb.back() += accB;
    }
    if (ma.size() < 2) throw std::runtime_error("chi2_two_sample: not enough filled bins");

    double na = 0.0, nb = 0.0;
    for (double v : ma) na += v;
    for (double v : mb) nb += v;
    const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
    double stat = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
        const double num = ka * ma[i] - kb * mb[i];
        stat += num * num / (ma[i] + mb[i]);
    }
    return chi2_sf(stat, static_cast<double>(ma.size() - 1));
}

}  // namespace oracles
