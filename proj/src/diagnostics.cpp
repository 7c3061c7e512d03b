#include "bfmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bfmcmc/errors.hpp"

namespace bfmcmc {

EssEstimate ess_batch_means(const Eigen::Ref<const Eigen::VectorXd>& series) {
    const std::size_t n = static_cast<std::size_t>(series.size());
    if (n < 100) throw std::invalid_argument("ess_batch_means: need n >= 100");
    const std::size_t b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const std::size_t a = n / b;  // number of full batches
    const std::size_t used = a * b;

    const double mean = series.head(used).mean();
    const double var =
        (series.head(used).array() - mean).square().sum() / static_cast<double>(used - 1);
    // guard against rounding residue on constant input
    if (!(var > 1e-20 * (1.0 + mean * mean)))
        throw DegenerateSeries("ess_batch_means: series has zero variance");

    double bm = 0.0;
    for (std::size_t k = 0; k < a; ++k) {
        const double batch_mean =
            series.segment(static_cast<Eigen::Index>(k * b), static_cast<Eigen::Index>(b)).mean();
        bm += (batch_mean - mean) * (batch_mean - mean);
    }
    const double sigma2 = static_cast<double>(b) * bm / static_cast<double>(a - 1);
    EssEstimate est;
    est.n = n;
    est.batch_size = b;
    est.ess = static_cast<double>(used) * var / sigma2;
    return est;
}

EssEstimate ess_batch_means(const std::vector<double>& series) {
    return ess_batch_means(
        Eigen::Map<const Eigen::VectorXd>(series.data(), static_cast<Eigen::Index>(series.size())));
}

EssEstimate ess_min_coordinate(const Eigen::MatrixXd& states) {
    if (states.cols() < 1) throw std::invalid_argument("ess_min_coordinate: empty trace");
    EssEstimate best;
    for (Eigen::Index j = 0; j < states.cols(); ++j) {
        EssEstimate e = ess_batch_means(states.col(j));
        if (j == 0 || e.ess < best.ess) best = e;
    }
    return best;
}

double acceptance_rate(const ChainTrace& trace) {
    if (trace.accepted.empty()) throw std::invalid_argument("acceptance_rate: empty trace");
    double acc = 0.0;
    for (auto b : trace.accepted) acc += b;
    return acc / static_cast<double>(trace.accepted.size());
}

double ks_distance(const std::vector<double>& sorted_sample,
                   const std::function<double(double)>& cdf) {
    const std::size_t n = sorted_sample.size();
    if (n == 0) throw std::invalid_argument("ks_distance: empty sample");
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(sorted_sample[i]);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - f;
        const double lo = f - static_cast<double>(i) / static_cast<double>(n);
        d = std::max({d, hi, lo});
    }
    return d;
}

LoopReport loop_summary(const std::vector<LoopSummary>& summaries) {
    LoopReport rep;
    double total = 0.0;
    std::uint64_t count = 0;
    double max_sum = 0.0;
    std::size_t with_loops = 0;
    for (const auto& s : summaries) {
        if (s.count == 0) continue;
        total += s.total;
        count += s.count;
        max_sum += static_cast<double>(s.max);
        ++with_loops;
    }
    if (count == 0) return rep;
    rep.mean_loops = total / static_cast<double>(count);
    rep.mean_of_max_loops = max_sum / static_cast<double>(with_loops);
    return rep;
}

LoopReport loop_summary(const std::vector<ChainTrace>& traces) {
    std::vector<LoopSummary> s;
    s.reserve(traces.size());
    for (const auto& t : traces) s.push_back(t.loops);
    return loop_summary(s);
}

std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag) {
    const std::size_t n = series.size();
    if (n < 2 || max_lag < 0) throw std::invalid_argument("autocorrelation: bad input");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
    double c0 = 0.0;
    for (double v : series) c0 += (v - mean) * (v - mean);
    if (!(c0 > 0.0)) throw DegenerateSeries("autocorrelation: zero variance");
    std::vector<double> acf(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int lag = 0; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            c += (series[i] - mean) * (series[i + lag] - mean);
        acf[static_cast<std::size_t>(lag)] = c / c0;
    }
    return acf;
}

SummaryRow SummaryTable::aggregate() const {
    SummaryRow agg;
    if (rows.empty()) return agg;
    agg.replication = -1;
    agg.kernel = rows.front().kernel;
    for (const auto& r : rows) {
        agg.ess += r.ess;
        agg.ess_per_sec += r.ess_per_sec;
        agg.wall_time_sec += r.wall_time_sec;
        agg.acceptance_rate += r.acceptance_rate;
        agg.mean_loops += r.mean_loops;
        agg.max_loops += r.max_loops;
        agg.tuning += r.tuning;
    }
    const double k = static_cast<double>(rows.size());
    agg.ess /= k;
    agg.ess_per_sec /= k;
    agg.wall_time_sec /= k;
    agg.acceptance_rate /= k;
    agg.mean_loops /= k;
    agg.max_loops /= k;
    agg.tuning /= k;
    return agg;
}

namespace {
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void SummaryTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("SummaryTable: cannot open " + path);
    out << "replication,kernel,ess,acceptance_rate,mean_loops,max_loops,tuning\n";
    const auto emit = [&](const SummaryRow& r, const std::string& label) {
        out << label << "," << r.kernel << "," << fmt(r.ess) << "," << fmt(r.acceptance_rate)
            << "," << fmt(r.mean_loops) << "," << fmt(r.max_loops) << "," << fmt(r.tuning)
            << "\n";
    };
    for (const auto& r : rows) emit(r, std::to_string(r.replication));
    if (!rows.empty()) emit(aggregate(), "mean");
}

void SummaryTable::write_timing_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("SummaryTable: cannot open " + path);
    out << "replication,kernel,wall_time_sec,ess_per_sec\n";
    for (const auto& r : rows)
        out << r.replication << "," << r.kernel << "," << fmt(r.wall_time_sec) << ","
            << fmt(r.ess_per_sec) << "\n";
}

std::string SummaryTable::pretty() const {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-14s %12s %10s %8s %12s %12s\n", "rep", "kernel",
                  "ESS", "ESS/s", "acc", "mean loops", "max loops");
    out << line;
    const auto emit = [&](const SummaryRow& r, const std::string& label) {
        std::snprintf(line, sizeof line, "%-6s %-14s %12.1f %10.2f %8.4f %12.3f %12.1f\n",
                      label.c_str(), r.kernel.c_str(), r.ess, r.ess_per_sec, r.acceptance_rate,
                      r.mean_loops, r.max_loops);
        out << line;
    };
    for (const auto& r : rows) emit(r, std::to_string(r.replication));
    if (!rows.empty()) emit(aggregate(), "mean");
    return out.str();
}

HistogramData histogram(const std::vector<double>& values, int bins, double lo, double hi) {
    if (values.empty()) throw std::invalid_argument("histogram: empty input");
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram: bad bins/range");
    HistogramData h;
    h.bin_width = (hi - lo) / bins;
    h.centers.resize(static_cast<std::size_t>(bins));
    h.density.assign(static_cast<std::size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b) h.centers[static_cast<std::size_t>(b)] = lo + (b + 0.5) * h.bin_width;
    std::size_t inside = 0;
    for (double v : values) {
        if (v < lo || v >= hi) continue;
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / h.bin_width));
        h.density[static_cast<std::size_t>(b)] += 1.0;
        ++inside;
    }
    if (inside == 0) throw std::invalid_argument("histogram: no values in range");
    for (auto& d : h.density) d /= static_cast<double>(inside) * h.bin_width;
    return h;
}

HistogramData histogram(const std::vector<double>& values, int bins) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn, hi = *mx;
    if (!(hi > lo)) hi = lo + 1.0;
    // nudge the top edge so the maximum lands inside
    hi += (hi - lo) * 1e-9;
    return histogram(values, bins, lo, hi);
}

}  // namespace bfmcmc
