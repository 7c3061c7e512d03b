#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bfmcmc/cox.hpp"
#include "bfmcmc/diagnostics.hpp"
#include "bfmcmc/kernels.hpp"
#include "bfmcmc/models.hpp"

namespace bfmcmc {

inline constexpr const char* kVersion = "0.1.0";

// Experiments: gamma-trunc | ram-sensor | cox-gp | discrete-oracle.
// Kernels:     mh-exact | barker-exact | barker-bf | ram-aux | mh-inexact-cox.
struct ExperimentConfig {
    std::string experiment = "gamma-trunc";
    std::string kernel = "barker-bf";
    std::uint64_t n_iter = 100'000;
    int n_replications = 10;
    double tuning = 0.0;  // 0 => auto-tune
    std::uint64_t seed = 20240601;
    std::string output_dir = "out";
    std::string preset;  // "", "paper", "desk"
    std::uint64_t burn_in = 10'000;
    int thin = 10;
    int workers = 0;  // 0 => hardware concurrency

    // model overrides
    int cox_m = 10;
    int cox_n0 = 10;
    double epsilon_rel = 1e-6;  // RAM epsilon relative to pi-tilde at the start
    double sigma2 = 1.0;
    double ell = 5.0;
    std::uint64_t mc_samples = 200;
    double sensor_s_var = 1.08;  // inner random-walk variance per component
};

// Fills the paper/desk sizes; no-op for an empty preset.
void apply_preset(ExperimentConfig& config);
// Experiment/kernel compatibility and ranges; throws std::invalid_argument.
void validate_config(const ExperimentConfig& config);

struct FileRecord {
    std::string path;  // relative to the output dir
    std::uint64_t bytes = 0;
    std::string fnv1a64;
};

struct ReplicationRecord {
    int replication = 0;
    std::uint64_t stream_id = 0;
    double wall_time_sec = 0.0;
    std::string status;  // "ok" | "error"
    std::string error;
};

struct RunManifest {
    ExperimentConfig config;
    std::string version = kVersion;
    double tuned_scale = 0.0;
    std::vector<ReplicationRecord> replications;
    std::vector<FileRecord> files;
    std::string dir;  // where the run lives; set on write/read

    void write(const std::string& path) const;
    static RunManifest read(const std::string& path);
};

// Runs the configured experiment: tunes (or takes) the scale, executes the
// replications concurrently (one stream each), writes traces, the summary
// tables and the manifest. A failed replication is recorded and skipped.
RunManifest run_experiment(const ExperimentConfig& config);

// Histogram plus autocorrelation (lags 0..100) of the first coordinate.
struct DensityData {
    HistogramData hist;
    std::vector<double> acf;
};
DensityData emit_density_data(const ChainTrace& trace, int bins);
void write_density_csv(const DensityData& data, const std::string& hist_path,
                       const std::string& acf_path);

// Rebuilds the summary table from the traces a manifest points at; returns
// the pretty-printed table and writes report_summary.csv next to the
// manifest.
std::string rebuild_report(const std::string& manifest_path);

// Trace persistence. Rows are the recorded steps k = thin, 2*thin, ...
// with that step's state, acceptance bit and factory loop count.
void write_trace_csv(const ChainTrace& trace, const std::string& path, int thin);
struct StoredTrace {
    Eigen::MatrixXd states;
    std::vector<std::uint8_t> accepted;
    std::vector<std::uint32_t> loops;
};
StoredTrace read_trace_csv(const std::string& path);

std::uint64_t fnv1a64_file(const std::string& path);

// Metropolis-within-Gibbs over the four unknown sensors, one down-up
// accept-reject per sensor per sweep (factory or auxiliary flavour).
struct SensorRunResult {
    ChainTrace trace;  // 8-dim sweep states
    std::vector<LoopSummary> per_sensor_loops;
    std::vector<double> per_sensor_acceptance;
};
SensorRunResult run_sensor_chain(const SensorData& data, bool use_aux, std::uint64_t n,
                                 std::uint64_t burn_in, double s_variance, double epsilon_rel,
                                 RngStream& rng);

// The comparison baseline: MH with plug-in normalizer estimates.
ChainTrace run_inexact_cox_chain(const CoxModel& model, const Eigen::MatrixXd& proposal_chol,
                                 std::uint64_t mc_samples, std::uint64_t n, std::uint64_t burn_in,
                                 const Eigen::VectorXd& init, RngStream& rng);

// Scale search for the inexact baseline (same Robbins-Monro scheme as
// tune_scale, driving inexact steps).
double tune_inexact_cox(const CoxModel& model, double goal_rate, std::uint64_t mc_samples,
                        const Eigen::VectorXd& init, RngStream& rng, double initial_scale = 1.0);

}  // namespace bfmcmc
