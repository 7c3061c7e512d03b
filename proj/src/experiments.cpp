#include "bfmcmc/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bfmcmc/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bfmcmc {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr std::uint64_t kTuningStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kReplicationStreamBase = 1000;

}  // namespace

void apply_preset(ExperimentConfig& config) {
    if (config.preset.empty()) return;
    if (config.preset != "paper" && config.preset != "desk")
        throw std::invalid_argument("unknown preset: " + config.preset);
    const bool paper = config.preset == "paper";
    if (config.experiment == "gamma-trunc") {
        config.n_iter = paper ? 1'000'000 : 100'000;
        config.n_replications = paper ? 100 : 10;
        config.burn_in = 10'000;
    } else if (config.experiment == "ram-sensor") {
        config.n_iter = paper ? 200'000 : 20'000;
        config.n_replications = paper ? 100 : 4;
        config.burn_in = paper ? 10'000 : 2'000;
    } else if (config.experiment == "cox-gp") {
        config.n_iter = paper ? 200'000 : 20'000;
        config.n_replications = paper ? 100 : 4;
        config.cox_m = paper ? 100 : 10;
        config.burn_in = paper ? 10'000 : 2'000;
    } else if (config.experiment == "discrete-oracle") {
        config.n_iter = paper ? 1'000'000 : 100'000;
        config.n_replications = 1;
        config.burn_in = 0;
    }
}

void validate_config(const ExperimentConfig& config) {
    static const std::set<std::string> experiments = {"gamma-trunc", "ram-sensor", "cox-gp",
                                                      "discrete-oracle"};
    if (!experiments.count(config.experiment))
        throw std::invalid_argument("unknown experiment: " + config.experiment);
    static const std::set<std::string> kernels = {"mh-exact", "barker-exact", "barker-bf",
                                                  "ram-aux", "mh-inexact-cox"};
    if (!kernels.count(config.kernel))
        throw std::invalid_argument("unknown kernel: " + config.kernel);

    const auto allowed = [&]() -> std::set<std::string> {
        if (config.experiment == "gamma-trunc") return {"mh-exact", "barker-exact", "barker-bf"};
        if (config.experiment == "ram-sensor") return {"barker-bf", "ram-aux"};
        if (config.experiment == "cox-gp") return {"barker-bf", "mh-inexact-cox"};
        return {"barker-bf"};
    }();
    if (!allowed.count(config.kernel))
        throw std::invalid_argument("kernel " + config.kernel + " is not compatible with " +
                                    config.experiment);

    if (config.n_iter < 1 || config.n_replications < 1)
        throw std::invalid_argument("n_iter and n_replications must be positive");
    if (config.thin < 1) throw std::invalid_argument("thin must be >= 1");
    if (config.cox_m < 2) throw std::invalid_argument("m must be >= 2");
    if (config.cox_n0 < 1) throw std::invalid_argument("n0 must be >= 1");
    if (config.mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
    if (!(config.sigma2 > 0.0) || !(config.ell > 0.0))
        throw std::invalid_argument("sigma2 and ell must be > 0");
    if (!(config.epsilon_rel > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (config.tuning < 0.0) throw std::invalid_argument("tuning must be >= 0");
}

// --------------------------------------------------------------------------
// persistence helpers

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("fnv1a64_file: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void write_trace_csv(const ChainTrace& trace, const std::string& path, int thin) {
    if (thin < 1) throw std::invalid_argument("write_trace_csv: thin must be >= 1");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    const Eigen::Index d = trace.states.cols();
    out << "iteration";
    for (Eigen::Index j = 0; j < d; ++j) out << ",x" << j;
    out << ",accepted,loops\n";
    const std::size_t n = trace.accepted.size();
    for (std::size_t k = thin; k <= n; k += static_cast<std::size_t>(thin)) {
        out << k;
        for (Eigen::Index j = 0; j < d; ++j)
            out << "," << fmt17(trace.states(static_cast<Eigen::Index>(k), j));
        out << "," << static_cast<int>(trace.accepted[k - 1]) << ",";
        if (!trace.loop_trace.empty()) out << trace.loop_trace[k - 1];
        out << "\n";
    }
}

StoredTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_trace_csv: empty file " + path);
    // header: iteration,x0,...,accepted,loops
    std::size_t d = 0;
    {
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty() && tok[0] == 'x') ++d;
    }
    std::vector<std::vector<double>> states;
    StoredTrace stored;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');  // iteration
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) {
            std::getline(ss, tok, ',');
            row[j] = std::stod(tok);
        }
        states.push_back(std::move(row));
        std::getline(ss, tok, ',');
        stored.accepted.push_back(static_cast<std::uint8_t>(std::stoi(tok)));
        if (std::getline(ss, tok, ',') && !tok.empty())
            stored.loops.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    }
    stored.states.resize(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            stored.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                states[i][j];
    return stored;
}

namespace {

json config_to_json(const ExperimentConfig& c) {
    return json{{"experiment", c.experiment},
                {"kernel", c.kernel},
                {"n_iter", c.n_iter},
                {"n_replications", c.n_replications},
                {"tuning", c.tuning},
                {"seed", c.seed},
                {"output_dir", c.output_dir},
                {"preset", c.preset},
                {"burn_in", c.burn_in},
                {"thin", c.thin},
                {"workers", c.workers},
                {"model",
                 {{"m", c.cox_m},
                  {"n0", c.cox_n0},
                  {"epsilon_rel", c.epsilon_rel},
                  {"sigma2", c.sigma2},
                  {"ell", c.ell},
                  {"mc_samples", c.mc_samples},
                  {"sensor_s_var", c.sensor_s_var}}}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.experiment = j.at("experiment");
    c.kernel = j.at("kernel");
    c.n_iter = j.at("n_iter");
    c.n_replications = j.at("n_replications");
    c.tuning = j.at("tuning");
    c.seed = j.at("seed");
    c.output_dir = j.at("output_dir");
    c.preset = j.value("preset", "");
    c.burn_in = j.at("burn_in");
    c.thin = j.at("thin");
    c.workers = j.at("workers");
    const auto& m = j.at("model");
    c.cox_m = m.at("m");
    c.cox_n0 = m.at("n0");
    c.epsilon_rel = m.at("epsilon_rel");
    c.sigma2 = m.at("sigma2");
    c.ell = m.at("ell");
    c.mc_samples = m.at("mc_samples");
    c.sensor_s_var = m.at("sensor_s_var");
    return c;
}

}  // namespace

void RunManifest::write(const std::string& path) const {
    json j;
    j["version"] = version;
    j["config"] = config_to_json(config);
    j["tuned_scale"] = tuned_scale;
    j["replications"] = json::array();
    for (const auto& r : replications)
        j["replications"].push_back({{"replication", r.replication},
                                     {"stream_id", r.stream_id},
                                     {"wall_time_sec", r.wall_time_sec},
                                     {"status", r.status},
                                     {"error", r.error}});
    j["files"] = json::array();
    for (const auto& f : files)
        j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("RunManifest: cannot open " + path);
    out << j.dump(2) << "\n";
}

RunManifest RunManifest::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("RunManifest: cannot open " + path);
    json j;
    in >> j;
    RunManifest man;
    man.version = j.at("version");
    man.config = config_from_json(j.at("config"));
    man.tuned_scale = j.at("tuned_scale");
    for (const auto& r : j.at("replications")) {
        ReplicationRecord rec;
        rec.replication = r.at("replication");
        rec.stream_id = r.at("stream_id");
        rec.wall_time_sec = r.at("wall_time_sec");
        rec.status = r.at("status");
        rec.error = r.value("error", "");
        man.replications.push_back(rec);
    }
    for (const auto& f : j.at("files")) {
        FileRecord rec;
        rec.path = f.at("path");
        rec.bytes = f.at("bytes");
        rec.fnv1a64 = f.at("fnv1a64");
        man.files.push_back(rec);
    }
    man.dir = fs::path(path).parent_path().string();
    return man;
}

// --------------------------------------------------------------------------
// density / acf emission

DensityData emit_density_data(const ChainTrace& trace, int bins) {
    if (trace.states.rows() < 2 || trace.accepted.empty())
        throw std::invalid_argument("emit_density_data: empty trace");
    std::vector<double> values(static_cast<std::size_t>(trace.states.rows()));
    for (Eigen::Index i = 0; i < trace.states.rows(); ++i)
        values[static_cast<std::size_t>(i)] = trace.states(i, 0);
    DensityData out;
    out.hist = histogram(values, bins);
    const int max_lag = static_cast<int>(std::min<std::size_t>(100, values.size() - 1));
    out.acf = autocorrelation(values, max_lag);
    return out;
}

void write_density_csv(const DensityData& data, const std::string& hist_path,
                       const std::string& acf_path) {
    {
        std::ofstream out(hist_path);
        if (!out) throw std::runtime_error("write_density_csv: cannot open " + hist_path);
        out << "bin_center,density\n";
        for (std::size_t i = 0; i < data.hist.centers.size(); ++i)
            out << fmt17(data.hist.centers[i]) << "," << fmt17(data.hist.density[i]) << "\n";
    }
    {
        std::ofstream out(acf_path);
        if (!out) throw std::runtime_error("write_density_csv: cannot open " + acf_path);
        out << "lag,acf\n";
        for (std::size_t lag = 0; lag < data.acf.size(); ++lag)
            out << lag << "," << fmt17(data.acf[lag]) << "\n";
    }
}

// --------------------------------------------------------------------------
// sensor chain

SensorRunResult run_sensor_chain(const SensorData& data, bool use_aux, std::uint64_t n,
                                 std::uint64_t burn_in, double s_variance, double epsilon_rel,
                                 RngStream& rng) {
    const int sensors = data.unknown_count;
    const int dim = 2 * sensors;
    Eigen::VectorXd state(dim);
    // Start near the middle of the layout with a little spread.
    for (int i = 0; i < dim; ++i) state[i] = 0.4 + 0.2 * rng.normal();

    const TargetDensity joint = sensor_target(data);
    const double log_eps = joint.log_unnorm(state) + std::log(epsilon_rel);

    EvaluableProposal inner = gaussian_random_walk(2, s_variance);

    SensorRunResult result;
    result.per_sensor_loops.resize(static_cast<std::size_t>(sensors));
    result.per_sensor_acceptance.assign(static_cast<std::size_t>(sensors), 0.0);
    result.trace.seed = rng.seed();
    result.trace.stream_id = rng.stream_id();
    result.trace.states.resize(static_cast<Eigen::Index>(n) + 1, dim);
    result.trace.accepted.resize(n);

    std::vector<std::uint64_t> accept_counts(static_cast<std::size_t>(sensors), 0);

    const auto sweep = [&](bool record, std::uint64_t k) {
        bool any = false;
        for (int s = 0; s < sensors; ++s) {
            RamProposal rp;
            rp.dimension = 2;
            rp.inner_sample = inner.sample;
            rp.inner_logdensity = inner.log_density;
            rp.symmetric = true;
            rp.log_epsilon = log_eps;
            rp.target = sensor_conditional(data, state, s);

            const Eigen::VectorXd current = state.segment<2>(2 * s);
            bool accepted = false;
            std::uint64_t loops = 0;
            if (use_aux) {
                AuxiliaryState aux;
                aux.x = current;
                aux.z = rp.inner_sample(current, rng);  // fresh auxiliary each update
                AuxStepResult res = ram_auxiliary_step(aux, rp, rng);
                accepted = res.accepted;
                loops = res.loops;
                if (accepted) state.segment<2>(2 * s) = res.state.x;
            } else {
                IntractableProposal ip = ram_to_intractable(rp);
                TwoCoinStepOutcome res = barker_two_coin_step(
                    rp.target, ip, current, rp.target.log_unnorm(current), rng);
                accepted = res.accepted;
                loops = res.loops;
                if (accepted) state.segment<2>(2 * s) = res.state;
            }
            if (record) {
                result.per_sensor_loops[static_cast<std::size_t>(s)].add(loops);
                accept_counts[static_cast<std::size_t>(s)] += accepted;
            }
            any = any || accepted;
        }
        if (record) {
            result.trace.states.row(static_cast<Eigen::Index>(k) + 1) = state.transpose();
            result.trace.accepted[k] = any ? 1 : 0;
        }
    };

    for (std::uint64_t k = 0; k < burn_in; ++k) sweep(false, 0);
    result.trace.states.row(0) = state.transpose();
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t k = 0; k < n; ++k) sweep(true, k);
    const auto t1 = std::chrono::steady_clock::now();
    result.trace.kernel_seconds = std::chrono::duration<double>(t1 - t0).count();

    for (int s = 0; s < sensors; ++s) {
        result.per_sensor_acceptance[static_cast<std::size_t>(s)] =
            static_cast<double>(accept_counts[static_cast<std::size_t>(s)]) /
            static_cast<double>(n);
        result.trace.loops.merge(result.per_sensor_loops[static_cast<std::size_t>(s)]);
    }
    return result;
}

// --------------------------------------------------------------------------
// inexact Cox baseline

ChainTrace run_inexact_cox_chain(const CoxModel& model, const Eigen::MatrixXd& proposal_chol,
                                 std::uint64_t mc_samples, std::uint64_t n, std::uint64_t burn_in,
                                 const Eigen::VectorXd& init, RngStream& rng) {
    ChainTrace trace;
    trace.seed = rng.seed();
    trace.stream_id = rng.stream_id();
    trace.states.resize(static_cast<Eigen::Index>(n) + 1, model.m);
    trace.accepted.resize(n);

    Eigen::VectorXd state = init;
    for (std::uint64_t k = 0; k < burn_in; ++k)
        state = inexact_mh_cox_step(model, state, proposal_chol, mc_samples, rng).state;

    trace.states.row(0) = state.transpose();
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t k = 0; k < n; ++k) {
        InexactCoxStep step = inexact_mh_cox_step(model, state, proposal_chol, mc_samples, rng);
        state = std::move(step.state);
        trace.states.row(static_cast<Eigen::Index>(k) + 1) = state.transpose();
        trace.accepted[k] = step.accepted ? 1 : 0;
    }
    const auto t1 = std::chrono::steady_clock::now();
    trace.kernel_seconds = std::chrono::duration<double>(t1 - t0).count();
    return trace;
}

double tune_inexact_cox(const CoxModel& model, double goal_rate, std::uint64_t mc_samples,
                        const Eigen::VectorXd& init, RngStream& rng, double initial_scale) {
    const auto pilot_rate = [&](double eta, std::uint64_t steps) {
        Eigen::LLT<Eigen::MatrixXd> llt(eta * model.gamma);
        if (llt.info() != Eigen::Success) return 0.0;
        const Eigen::MatrixXd chol = llt.matrixL();
        try {
            ChainTrace t = run_inexact_cox_chain(model, chol, mc_samples, steps, steps / 5, init, rng);
            double acc = 0.0;
            for (auto b : t.accepted) acc += b;
            return acc / static_cast<double>(t.accepted.size());
        } catch (const SamplerError&) {
            return 0.0;
        }
    };

    double log_scale = std::log(initial_scale);
    const double gain = 1.5 / (goal_rate * (1.0 - goal_rate));
    double last_rate = -1.0;
    const std::uint64_t pilot_n = 2'000;
    for (int k = 1; k <= 60; ++k) {
        double rate = pilot_rate(std::exp(log_scale), pilot_n);
        if (std::abs(rate - goal_rate) < 0.012) {
            const double confirmed = pilot_rate(std::exp(log_scale), 5 * pilot_n);
            if (std::abs(confirmed - goal_rate) <= 0.02) return std::exp(log_scale);
            rate = confirmed;
        }
        last_rate = rate;
        log_scale += (gain / static_cast<double>(k)) * (rate - goal_rate);
    }
    throw TuningFailure(last_rate, goal_rate);
}

// --------------------------------------------------------------------------
// the experiment driver

namespace {

struct RepOutcome {
    SummaryRow row;
    ChainTrace trace;
    SensorRunResult sensor;  // only for ram-sensor
    bool ok = false;
    std::string error;
};

void add_file(RunManifest& man, const fs::path& dir, const std::string& rel) {
    FileRecord rec;
    rec.path = rel;
    const std::string full = (dir / rel).string();
    rec.bytes = static_cast<std::uint64_t>(fs::file_size(full));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(full)));
    rec.fnv1a64 = buf;
    man.files.push_back(rec);
}

double goal_rate_for(const std::string& kernel, int dimension) {
    const bool high_dim = dimension > 1;
    if (kernel == "mh-exact" || kernel == "mh-inexact-cox") return high_dim ? 0.23 : 0.44;
    return high_dim ? 0.16 : 0.25;  // Barker flavours
}

void run_discrete_oracle(const ExperimentConfig& cfg, RunManifest& man, const fs::path& dir) {
    std::ofstream out(dir / "report.csv");
    out << "system,x,y,alpha_true,alpha_emp,abs_err,three_sigma,mean_loops_emp,mean_loops_expected\n";
    const std::vector<std::pair<std::string, DiscreteSystem>> systems = {
        {"three-state", discrete_three_state()}, {"four-state", discrete_four_state()}};
    RngStream rng(cfg.seed, kReplicationStreamBase);
    const std::uint64_t n = cfg.n_iter;
    for (const auto& [name, sys] : systems) {
        const IntractableProposal ip = sys.as_intractable();
        for (int x = 0; x < sys.size(); ++x) {
            for (int y = 0; y < sys.size(); ++y) {
                if (x == y) continue;
                const Eigen::VectorXd vx = Eigen::VectorXd::Constant(1, x);
                const Eigen::VectorXd vy = Eigen::VectorXd::Constant(1, y);
                TwoCoinInputs inputs;
                inputs.log_reject_weight = std::log(sys.pi()[x]) + std::log(sys.qtilde(x, y)) +
                                           std::log(sys.bound(y));
                inputs.log_accept_weight = std::log(sys.pi()[y]) + std::log(sys.qtilde(y, x)) +
                                           std::log(sys.bound(x));
                inputs.reject_coin = ip.normalizer_coin(vy);
                inputs.accept_coin = ip.normalizer_coin(vx);
                std::uint64_t ones = 0;
                double loops = 0.0;
                for (std::uint64_t k = 0; k < n; ++k) {
                    const LoopStats stats = two_coin(inputs, rng);
                    ones += stats.outcome;
                    loops += static_cast<double>(stats.loops);
                }
                const double alpha_emp = static_cast<double>(ones) / static_cast<double>(n);
                const double alpha_true = sys.alpha_barker(x, y);
                const double sigma =
                    3.0 * std::sqrt(alpha_true * (1.0 - alpha_true) / static_cast<double>(n));
                out << name << "," << x << "," << y << "," << fmt17(alpha_true) << ","
                    << fmt17(alpha_emp) << "," << fmt17(std::abs(alpha_emp - alpha_true)) << ","
                    << fmt17(sigma) << "," << fmt17(loops / static_cast<double>(n)) << ","
                    << fmt17(sys.expected_factory_loops(x, y)) << "\n";
            }
        }
    }
    out.close();
    add_file(man, dir, "report.csv");
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& user_config) {
    ExperimentConfig cfg = user_config;
    apply_preset(cfg);
    validate_config(cfg);

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    RunManifest man;
    man.config = cfg;
    man.dir = dir.string();

    if (cfg.experiment == "discrete-oracle") {
        run_discrete_oracle(cfg, man, dir);
        man.write((dir / "manifest.json").string());
        return man;
    }

    // --- model/target construction and scale selection -------------------
    TargetDensity target;
    std::function<AnyProposal(double)> family;
    Eigen::VectorXd init_center;
    KernelKind kind = KernelKind::BarkerTwoCoin;
    CoxModel cox;
    SensorData sensor_data;
    const bool is_sensor = cfg.experiment == "ram-sensor";
    const bool is_inexact_cox = cfg.kernel == "mh-inexact-cox";

    if (cfg.experiment == "gamma-trunc") {
        target = gamma_target(2.0, 1.0);
        init_center = Eigen::VectorXd::Constant(1, 2.0);
        if (cfg.kernel == "barker-bf") {
            kind = KernelKind::BarkerTwoCoin;
            family = [](double h) -> AnyProposal {
                return trunc_gauss_1d(Interval{0.0, std::numeric_limits<double>::infinity()}, h);
            };
        } else {
            kind = cfg.kernel == "mh-exact" ? KernelKind::MhExact : KernelKind::BarkerExact;
            family = [](double h) -> AnyProposal { return gaussian_random_walk(1, h); };
        }
    } else if (cfg.experiment == "cox-gp") {
        cox = make_cox_model(cfg.cox_m, cfg.sigma2, cfg.ell);
        RngStream data_rng(cfg.seed, kDataStream);
        cox.observations =
            simulate_cox_data(cox, default_cox_intensity, cfg.cox_n0, data_rng);
        write_point_patterns(cox.observations, (dir / "point_patterns.csv").string());
        target = cox_target(cox);
        double events = 0.0;
        for (const auto& p : cox.observations) events += static_cast<double>(p.size());
        const double mean_intensity =
            std::max(0.05, events / (static_cast<double>(cfg.cox_n0) * cox.domain_length));
        init_center = Eigen::VectorXd::Constant(cfg.cox_m, mean_intensity);
        if (!is_inexact_cox) {
            kind = KernelKind::BarkerTwoCoin;
            const CoxModel* model = &cox;
            family = [model](double eta) -> AnyProposal {
                return trunc_gauss_orthant(model->m, eta * model->gamma);
            };
        }
    } else if (is_sensor) {
        RngStream data_rng(cfg.seed, kDataStream);
        sensor_data = simulate_sensor_data(default_sensor_truth(), data_rng);
        write_sensor_csv(sensor_data, (dir / "sensor_data.csv").string());
        add_file(man, dir, "sensor_data.csv");
    }

    double scale = cfg.tuning;
    if (!is_sensor && scale <= 0.0) {
        RngStream tune_rng(cfg.seed, kTuningStream);
        const double goal = goal_rate_for(cfg.kernel, target.dimension);
        if (is_inexact_cox) {
            scale = tune_inexact_cox(cox, goal, cfg.mc_samples, init_center, tune_rng, 0.1);
        } else {
            TuneOptions topts;
            topts.initial_state = init_center;
            topts.initial_scale = cfg.experiment == "cox-gp" ? 0.1 : 1.0;
            scale = tune_scale(target, family, kind, goal, tune_rng, topts);
        }
    }
    man.tuned_scale = scale;

    if (cfg.experiment == "cox-gp") add_file(man, dir, "point_patterns.csv");

    // --- replications -----------------------------------------------------
    const int workers =
        cfg.workers > 0 ? cfg.workers
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    const auto run_one = [&](int rep) -> RepOutcome {
        RepOutcome out;
        RngStream rng(cfg.seed, kReplicationStreamBase + static_cast<std::uint64_t>(rep));
        try {
            if (is_sensor) {
                out.sensor = run_sensor_chain(sensor_data, cfg.kernel == "ram-aux", cfg.n_iter,
                                              cfg.burn_in, cfg.sensor_s_var, cfg.epsilon_rel, rng);
                out.trace = std::move(out.sensor.trace);
            } else if (is_inexact_cox) {
                Eigen::LLT<Eigen::MatrixXd> llt(scale * cox.gamma);
                if (llt.info() != Eigen::Success)
                    throw std::runtime_error("proposal covariance not SPD");
                out.trace = run_inexact_cox_chain(cox, llt.matrixL(), cfg.mc_samples, cfg.n_iter,
                                                  cfg.burn_in, init_center, rng);
            } else {
                const AnyProposal prop = family(scale);
                ChainOptions opts;
                opts.initial = draw_initial(target, prop, init_center, rng);
                opts.burn_in = cfg.burn_in;
                opts.record_loop_trace = true;
                opts.tuning_label = scale;
                out.trace = run_chain(target, prop, kind, cfg.n_iter, rng, opts);
            }
            out.row.replication = rep;
            out.row.kernel = cfg.kernel;
            out.row.ess = ess_min_coordinate(out.trace.states).ess;
            out.row.wall_time_sec = out.trace.kernel_seconds;
            out.row.ess_per_sec =
                out.trace.kernel_seconds > 0.0 ? out.row.ess / out.trace.kernel_seconds : 0.0;
            out.row.acceptance_rate = acceptance_rate(out.trace);
            out.row.mean_loops = out.trace.loops.mean();
            out.row.max_loops = static_cast<double>(out.trace.loops.max);
            out.row.tuning = scale;
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        return out;
    };

    SummaryTable table;
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.n_replications));
    for (int base = 0; base < cfg.n_replications; base += workers) {
        const int hi = std::min(cfg.n_replications, base + workers);
        std::vector<std::future<RepOutcome>> futures;
        for (int rep = base; rep < hi; ++rep)
            futures.push_back(std::async(std::launch::async, run_one, rep));
        for (int rep = base; rep < hi; ++rep)
            outcomes[static_cast<std::size_t>(rep)] = futures[static_cast<std::size_t>(rep - base)].get();
    }

    std::vector<LoopSummary> sensor_loops(is_sensor ? 4 : 0);
    std::vector<double> sensor_loop_max(is_sensor ? 4 : 0, 0.0);
    std::vector<double> sensor_acc(is_sensor ? 4 : 0, 0.0);
    int sensor_ok = 0;

    for (int rep = 0; rep < cfg.n_replications; ++rep) {
        RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];
        ReplicationRecord rec;
        rec.replication = rep;
        rec.stream_id = kReplicationStreamBase + static_cast<std::uint64_t>(rep);
        if (!out.ok) {
            rec.status = "error";
            rec.error = out.error;
            man.replications.push_back(rec);
            continue;
        }
        rec.status = "ok";
        rec.wall_time_sec = out.trace.kernel_seconds;
        man.replications.push_back(rec);
        table.rows.push_back(out.row);

        const std::string trace_name = "trace_rep" + std::to_string(rep) + ".csv";
        write_trace_csv(out.trace, (dir / trace_name).string(), cfg.thin);
        add_file(man, dir, trace_name);

        if (rep == 0 && !is_sensor) {
            const DensityData dd = emit_density_data(out.trace, 60);
            write_density_csv(dd, (dir / "density.csv").string(), (dir / "acf.csv").string());
            add_file(man, dir, "density.csv");
            add_file(man, dir, "acf.csv");
        }
        if (is_sensor) {
            ++sensor_ok;
            for (int s = 0; s < 4; ++s) {
                sensor_loops[static_cast<std::size_t>(s)].merge(
                    out.sensor.per_sensor_loops[static_cast<std::size_t>(s)]);
                sensor_loop_max[static_cast<std::size_t>(s)] += static_cast<double>(
                    out.sensor.per_sensor_loops[static_cast<std::size_t>(s)].max);
                sensor_acc[static_cast<std::size_t>(s)] +=
                    out.sensor.per_sensor_acceptance[static_cast<std::size_t>(s)];
            }
        }
    }

    table.write_csv((dir / "summary.csv").string());
    add_file(man, dir, "summary.csv");
    table.write_timing_csv((dir / "timing.csv").string());
    add_file(man, dir, "timing.csv");

    if (is_sensor && sensor_ok > 0) {
        std::ofstream out(dir / "sensor_loops.csv");
        out << "sensor,kernel,mean_loops,mean_max_loops,acceptance_rate\n";
        for (int s = 0; s < 4; ++s) {
            out << (s + 1) << "," << cfg.kernel << ","
                << fmt17(sensor_loops[static_cast<std::size_t>(s)].mean()) << ","
                << fmt17(sensor_loop_max[static_cast<std::size_t>(s)] / sensor_ok) << ","
                << fmt17(sensor_acc[static_cast<std::size_t>(s)] / sensor_ok) << "\n";
        }
        out.close();
        add_file(man, dir, "sensor_loops.csv");
    }

    man.write((dir / "manifest.json").string());
    return man;
}

std::string rebuild_report(const std::string& manifest_path) {
    const RunManifest man = RunManifest::read(manifest_path);
    const fs::path dir(man.dir);
    SummaryTable table;
    for (const auto& rec : man.replications) {
        if (rec.status != "ok") continue;
        const std::string trace_name = "trace_rep" + std::to_string(rec.replication) + ".csv";
        const StoredTrace stored = read_trace_csv((dir / trace_name).string());
        SummaryRow row;
        row.replication = rec.replication;
        row.kernel = man.config.kernel;
        row.ess = ess_min_coordinate(stored.states).ess;
        row.wall_time_sec = rec.wall_time_sec;
        row.ess_per_sec = rec.wall_time_sec > 0.0 ? row.ess / rec.wall_time_sec : 0.0;
        double acc = 0.0;
        for (auto b : stored.accepted) acc += b;
        row.acceptance_rate = stored.accepted.empty()
                                  ? 0.0
                                  : acc / static_cast<double>(stored.accepted.size());
        if (!stored.loops.empty()) {
            double total = 0.0;
            std::uint32_t mx = 0;
            for (auto l : stored.loops) {
                total += l;
                mx = std::max(mx, l);
            }
            row.mean_loops = total / static_cast<double>(stored.loops.size());
            row.max_loops = mx;
        }
        row.tuning = man.tuned_scale;
        table.rows.push_back(row);
    }
    table.write_csv((dir / "report_summary.csv").string());
    return table.pretty();
}

}  // namespace bfmcmc
