#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bfmcmc/kernels.hpp"

namespace bfmcmc {

struct EssEstimate {
    double ess = 0.0;
    std::size_t batch_size = 0;  // floor(sqrt(n)) unless overridden
    std::size_t n = 0;
};

// Batch-means effective sample size: n * s^2 / sigma2_bm. Throws
// DegenerateSeries on constant input; needs n >= 100.
EssEstimate ess_batch_means(const std::vector<double>& series);
EssEstimate ess_batch_means(const Eigen::Ref<const Eigen::VectorXd>& series);

// Smallest per-coordinate ESS of a multivariate trace; the conservative
// stand-in for a joint estimate.
EssEstimate ess_min_coordinate(const Eigen::MatrixXd& states);

double acceptance_rate(const ChainTrace& trace);

// Sup distance between the empirical CDF of a sorted sample and cdf.
double ks_distance(const std::vector<double>& sorted_sample,
                   const std::function<double(double)>& cdf);

// Mean per-step loops pooled over traces, and the mean over traces of each
// trace's maximum.
struct LoopReport {
    double mean_loops = 0.0;
    double mean_of_max_loops = 0.0;
};
LoopReport loop_summary(const std::vector<ChainTrace>& traces);
LoopReport loop_summary(const std::vector<LoopSummary>& summaries);

// Autocorrelation of a scalar series at lags 0..max_lag.
std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag);

// One summary row per replication; the table the experiment runner emits.
struct SummaryRow {
    int replication = 0;
    std::string kernel;
    double ess = 0.0;
    double ess_per_sec = 0.0;
    double wall_time_sec = 0.0;
    double acceptance_rate = 0.0;
    double mean_loops = 0.0;
    double max_loops = 0.0;
    double tuning = 0.0;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;

    SummaryRow aggregate() const;  // means over rows (max_loops averaged too)
    // Deterministic columns only (no timing): safe to byte-compare across
    // reruns with the same seed.
    void write_csv(const std::string& path) const;
    // Timing columns (wall time, ess/sec); separated so the deterministic
    // file stays reproducible.
    void write_timing_csv(const std::string& path) const;
    std::string pretty() const;
};

struct HistogramData {
    std::vector<double> centers;
    std::vector<double> density;  // normalized: sum(density) * width = 1
    double bin_width = 0.0;
};

HistogramData histogram(const std::vector<double>& values, int bins);
HistogramData histogram(const std::vector<double>& values, int bins, double lo, double hi);

}  // namespace bfmcmc
