#include "erasim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "erasim/oracle.hpp"
#include "erasim/rng.hpp"
#include "erasim/version.hpp"

namespace erasim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::classical_bit: return "classical_bit";
        case Experiment::quantum_bit: return "quantum_bit";
        case Experiment::classical_cooperative: return "classical_cooperative";
        case Experiment::quantum_cooperative: return "quantum_cooperative";
        case Experiment::jc_scan: return "jc_scan";
        case Experiment::stability_hold: return "stability_hold";
        case Experiment::oracle_suite: return "oracle_suite";
    }
    throw std::logic_error("unknown experiment");
}

std::string to_string(Engine e) {
    return e == Engine::glauber ? "glauber" : "sqa";
}

std::string to_string(SamplingMode m) {
    return m == SamplingMode::trajectory ? "trajectory" : "resample";
}

Experiment experiment_from_string(const std::string& name) {
    for (Experiment e :
         {Experiment::classical_bit, Experiment::quantum_bit,
          Experiment::classical_cooperative, Experiment::quantum_cooperative,
          Experiment::jc_scan, Experiment::stability_hold, Experiment::oracle_suite}) {
        if (to_string(e) == name) return e;
    }
    throw std::invalid_argument("unknown experiment: " + name);
}

Engine engine_from_string(const std::string& name) {
    if (name == "glauber") return Engine::glauber;
    if (name == "sqa") return Engine::sqa;
    throw std::invalid_argument("unknown engine: " + name);
}

SamplingMode sampling_from_string(const std::string& name) {
    if (name == "trajectory") return SamplingMode::trajectory;
    if (name == "resample") return SamplingMode::resample;
    throw std::invalid_argument("unknown sampling mode: " + name);
}

Engine ExperimentConfig::effective_engine() const {
    if (engine.has_value()) return *engine;
    switch (experiment) {
        case Experiment::classical_bit:
        case Experiment::classical_cooperative:
            return Engine::glauber;
        default:
            return Engine::sqa;
    }
}

namespace {

std::vector<Breakpoint> breakpoints_from_json(const json& j) {
    std::vector<Breakpoint> out;
    for (const auto& pair : j) {
        out.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    return out;
}

json breakpoints_to_json(const std::vector<Breakpoint>& bps) {
    json out = json::array();
    for (const Breakpoint& b : bps) out.push_back({b.t_us, b.value});
    return out;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    if (j.contains("lattice")) {
        const json& l = j.at("lattice");
        c.rows = l.value("rows", c.rows);
        c.cols = l.value("cols", c.cols);
        const std::string b = l.value("boundary", std::string("open"));
        if (b == "open") {
            c.boundary = Boundary::open;
        } else if (b == "periodic") {
            c.boundary = Boundary::periodic;
        } else {
            throw std::invalid_argument("unknown boundary: " + b);
        }
    }
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        c.schedule.preset = s.value("preset", c.schedule.preset);
        c.schedule.duration_us = s.value("duration_us", c.schedule.duration_us);
        c.schedule.dt_us = s.value("dt_us", c.schedule.dt_us);
        if (s.contains("preset_params")) {
            const json& p = s.at("preset_params");
            PresetParams& pp = c.schedule.preset_params;
            pp.j_high_ghz = p.value("j_high_ghz", pp.j_high_ghz);
            pp.j_low_ghz = p.value("j_low_ghz", pp.j_low_ghz);
            pp.bz_peak_ghz = p.value("bz_peak_ghz", pp.bz_peak_ghz);
            pp.bx_floor_ghz = p.value("bx_floor_ghz", pp.bx_floor_ghz);
            pp.bx_pulse_peak_ghz = p.value("bx_pulse_peak_ghz", pp.bx_pulse_peak_ghz);
            pp.pulse_start = p.value("pulse_start", pp.pulse_start);
            pp.pulse_plateau_start = p.value("pulse_plateau_start", pp.pulse_plateau_start);
            pp.pulse_plateau_end = p.value("pulse_plateau_end", pp.pulse_plateau_end);
            pp.pulse_end = p.value("pulse_end", pp.pulse_end);
            pp.bz_rise_start = p.value("bz_rise_start", pp.bz_rise_start);
            pp.bz_plateau_start = p.value("bz_plateau_start", pp.bz_plateau_start);
            pp.bz_plateau_end = p.value("bz_plateau_end", pp.bz_plateau_end);
            pp.bz_fall_end = p.value("bz_fall_end", pp.bz_fall_end);
            pp.intervals = p.value("intervals", pp.intervals);
        }
        if (s.contains("bx")) c.schedule.bx_breakpoints = breakpoints_from_json(s.at("bx"));
        if (s.contains("bz")) c.schedule.bz_breakpoints = breakpoints_from_json(s.at("bz"));
        if (s.contains("j")) c.schedule.j_breakpoints = breakpoints_from_json(s.at("j"));
        if (s.contains("s")) c.schedule.s_breakpoints = breakpoints_from_json(s.at("s"));
        if (s.contains("g")) c.schedule.g_breakpoints = breakpoints_from_json(s.at("g"));
        c.schedule.curves_csv = s.value("curves_csv", c.schedule.curves_csv);
        c.schedule.j_coupler = s.value("j_coupler", c.schedule.j_coupler);
    }
    if (j.contains("bath")) {
        const json& b = j.at("bath");
        c.bath.temperature_mk = b.value("temperature_mk", c.bath.temperature_mk);
        c.bath.sweeps_per_us = b.value("sweeps_per_us", c.bath.sweeps_per_us);
        const std::string rule = b.value("acceptance", std::string("glauber"));
        c.bath.rule = rule == "metropolis" ? AcceptanceRule::metropolis
                                           : AcceptanceRule::glauber;
    }
    c.replicas = j.value("replicas", c.replicas);
    if (j.contains("trotter_p")) c.sqa.trotter_p = j.at("trotter_p").get<int>();
    if (j.contains("bx_floor_ghz")) c.sqa.bx_floor_ghz = j.at("bx_floor_ghz").get<double>();
    c.sqa.flip_rate_bx_exponent =
        j.value("flip_rate_bx_exponent", c.sqa.flip_rate_bx_exponent);
    c.sqa.flip_rate_cap = j.value("flip_rate_cap", c.sqa.flip_rate_cap);
    if (j.contains("engine")) {
        c.engine = engine_from_string(j.at("engine").get<std::string>());
    }
    if (j.contains("sampling")) {
        c.sampling = sampling_from_string(j.at("sampling").get<std::string>());
    }
    if (j.contains("thresholds")) {
        c.thresholds = j.at("thresholds").get<std::vector<double>>();
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.bootstrap_resamples = j.value("bootstrap_resamples", c.bootstrap_resamples);
    c.dump_trajectories = j.value("dump_trajectories", c.dump_trajectories);
    c.threads = j.value("threads", c.threads);
    c.oracle_gamma_per_us = j.value("oracle_gamma_per_us", c.oracle_gamma_per_us);
    if (j.contains("jc_scan")) {
        const json& s = j.at("jc_scan");
        c.jc.j_min_ghz = s.value("j_min_ghz", c.jc.j_min_ghz);
        c.jc.j_max_ghz = s.value("j_max_ghz", c.jc.j_max_ghz);
        c.jc.points = s.value("points", c.jc.points);
        c.jc.ramp_tau_us = s.value("ramp_tau_us", c.jc.ramp_tau_us);
        c.jc.samples_per_point = s.value("samples_per_point", c.jc.samples_per_point);
    }
    if (j.contains("stability")) {
        const json& s = j.at("stability");
        c.stability.source_run_dir = s.value("source_run_dir", c.stability.source_run_dir);
        c.stability.hold_us = s.value("hold_us", c.stability.hold_us);
        c.stability.record_every_us = s.value("record_every_us", c.stability.record_every_us);
    }
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["lattice"] = {{"rows", c.rows},
                    {"cols", c.cols},
                    {"boundary", c.boundary == Boundary::open ? "open" : "periodic"}};
    json s;
    s["preset"] = c.schedule.preset;
    s["duration_us"] = c.schedule.duration_us;
    s["dt_us"] = c.schedule.dt_us;
    const PresetParams& pp = c.schedule.preset_params;
    s["preset_params"] = {{"j_high_ghz", pp.j_high_ghz},
                          {"j_low_ghz", pp.j_low_ghz},
                          {"bz_peak_ghz", pp.bz_peak_ghz},
                          {"bx_floor_ghz", pp.bx_floor_ghz},
                          {"bx_pulse_peak_ghz", pp.bx_pulse_peak_ghz},
                          {"pulse_start", pp.pulse_start},
                          {"pulse_plateau_start", pp.pulse_plateau_start},
                          {"pulse_plateau_end", pp.pulse_plateau_end},
                          {"pulse_end", pp.pulse_end},
                          {"bz_rise_start", pp.bz_rise_start},
                          {"bz_plateau_start", pp.bz_plateau_start},
                          {"bz_plateau_end", pp.bz_plateau_end},
                          {"bz_fall_end", pp.bz_fall_end},
                          {"intervals", pp.intervals}};
    if (!c.schedule.bx_breakpoints.empty()) {
        s["bx"] = breakpoints_to_json(c.schedule.bx_breakpoints);
        s["bz"] = breakpoints_to_json(c.schedule.bz_breakpoints);
        s["j"] = breakpoints_to_json(c.schedule.j_breakpoints);
    }
    if (!c.schedule.s_breakpoints.empty()) {
        s["s"] = breakpoints_to_json(c.schedule.s_breakpoints);
        s["g"] = breakpoints_to_json(c.schedule.g_breakpoints);
        s["j_coupler"] = c.schedule.j_coupler;
        s["curves_csv"] = c.schedule.curves_csv;
    }
    j["schedule"] = s;
    j["bath"] = {{"temperature_mk", c.bath.temperature_mk},
                 {"sweeps_per_us", c.bath.sweeps_per_us},
                 {"acceptance",
                  c.bath.rule == AcceptanceRule::glauber ? "glauber" : "metropolis"}};
    j["replicas"] = c.replicas;
    j["trotter_p"] = c.sqa.trotter_p;
    j["bx_floor_ghz"] = c.sqa.bx_floor_ghz;
    j["flip_rate_bx_exponent"] = c.sqa.flip_rate_bx_exponent;
    j["flip_rate_cap"] = c.sqa.flip_rate_cap;
    j["engine"] = to_string(c.effective_engine());
    j["sampling"] = to_string(c.sampling);
    j["thresholds"] = c.thresholds;
    j["output_dir"] = c.output_dir;
    j["master_seed"] = c.master_seed;
    j["bootstrap_resamples"] = c.bootstrap_resamples;
    j["dump_trajectories"] = c.dump_trajectories;
    j["threads"] = c.threads;
    j["oracle_gamma_per_us"] = c.oracle_gamma_per_us;
    j["jc_scan"] = {{"j_min_ghz", c.jc.j_min_ghz},
                    {"j_max_ghz", c.jc.j_max_ghz},
                    {"points", c.jc.points},
                    {"ramp_tau_us", c.jc.ramp_tau_us},
                    {"samples_per_point", c.jc.samples_per_point}};
    j["stability"] = {{"source_run_dir", c.stability.source_run_dir},
                      {"hold_us", c.stability.hold_us},
                      {"record_every_us", c.stability.record_every_us}};
    return j;
}

ExperimentConfig load_config_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config file " + file.string());
    json j;
    in >> j;
    return config_from_json(j);
}

json RunManifest::to_json() const {
    json j;
    j["engine_version"] = engine_version;
    j["experiment"] = experiment;
    j["sampling"] = sampling;
    j["config"] = config;
    j["replica_seeds"] = replica_seeds;
    j["file_hashes"] = file_hashes;
    j["complete"] = complete;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["started_utc"] = started_utc;
    j["extra"] = extra;
    return j;
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.engine_version = j.at("engine_version").get<std::string>();
    m.experiment = j.at("experiment").get<std::string>();
    m.sampling = j.value("sampling", std::string("trajectory"));
    m.config = j.at("config");
    m.replica_seeds = j.at("replica_seeds").get<std::vector<std::uint64_t>>();
    m.file_hashes = j.at("file_hashes").get<std::map<std::string, std::string>>();
    m.complete = j.at("complete").get<bool>();
    m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    m.started_utc = j.value("started_utc", std::string());
    if (j.contains("extra")) m.extra = j.at("extra");
    return m;
}

std::string fnv1a64_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + file.string());
    std::uint64_t hash = 1469598103934665603ULL;
    char buffer[65536];
    while (in) {
        in.read(buffer, sizeof(buffer));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 1099511628211ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

FieldPath resolve_schedule(const ScheduleConfig& s) {
    if (s.preset == "classical") {
        return classical_preset(s.duration_us, s.preset_params);
    }
    if (s.preset == "quantum") {
        return quantum_preset(s.duration_us, s.preset_params);
    }
    if (s.preset == "direct") {
        return direct_path(PiecewiseLinear(s.bx_breakpoints),
                           PiecewiseLinear(s.bz_breakpoints),
                           PiecewiseLinear(s.j_breakpoints), s.duration_us, s.dt_us);
    }
    if (s.preset == "device") {
        DeviceCurves curves = DeviceCurves::synthetic_default();
        if (!s.curves_csv.empty()) {
            std::ifstream in(s.curves_csv);
            if (!in) {
                throw std::runtime_error("cannot open device curves " + s.curves_csv);
            }
            curves = DeviceCurves::load_csv(in);
        }
        const ControlProgram program{PiecewiseLinear(s.s_breakpoints),
                                     PiecewiseLinear(s.g_breakpoints), s.j_coupler,
                                     s.duration_us};
        return compile_path(curves, program, s.dt_us);
    }
    throw std::invalid_argument("unknown schedule preset: " + s.preset);
}

TrajectoryEnsemble run_ensemble(const LatticeGeometry& geometry,
                                const std::vector<SpinConfiguration>& initials,
                                const FieldPath& path, const BathParameters& bath,
                                Engine engine, const SqaParams& sqa,
                                const std::vector<std::uint64_t>& seeds,
                                int threads) {
    if (initials.size() != seeds.size()) {
        throw std::invalid_argument("one seed per replica required");
    }
    const std::size_t n = initials.size();
    std::vector<ReplicaTrajectory> results(n);

    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, n == 0 ? 1 : static_cast<unsigned>(n));

    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            BathParameters replica_bath = bath;
            replica_bath.rng_seed = seeds[r];
            results[r] = engine == Engine::glauber
                             ? run_replica(geometry, initials[r], path, replica_bath)
                             : run_sqa_replica(geometry, initials[r], path,
                                               replica_bath, sqa);
        }
    };

    if (n_threads <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (std::thread& t : pool) t.join();
    }

    TrajectoryEnsemble ensemble;
    for (std::size_t r = 0; r < n; ++r) ensemble.add(std::move(results[r]));
    return ensemble;
}

namespace {

constexpr double kPrerunConvergenceTv = 0.02;

std::vector<std::uint64_t> replica_seeds(std::uint64_t master, std::uint64_t domain,
                                         int count) {
    std::vector<std::uint64_t> seeds(count);
    for (int r = 0; r < count; ++r) seeds[r] = derive_seed(master, domain, r);
    return seeds;
}

void require_even_replicas(const ExperimentConfig& config) {
    if (config.replicas % 2 != 0) {
        throw std::invalid_argument(
            "macroscopic-bit experiments need an even replica count for the "
            "even logical mixture");
    }
}

}  // namespace

std::vector<SpinConfiguration> prepare_initial_ensemble(
    const ExperimentConfig& config, const LatticeGeometry& geometry,
    const std::vector<SpinConfiguration>* steady_state_source) {
    const int n_sites = geometry.sites();
    std::vector<SpinConfiguration> initials;
    initials.reserve(config.replicas);

    switch (config.experiment) {
        case Experiment::quantum_bit: {
            require_even_replicas(config);
            for (int i = 0; i < config.replicas / 2; ++i) {
                initials.push_back(SpinConfiguration::all_down(n_sites));
                initials.push_back(SpinConfiguration::all_up(n_sites));
            }
            return initials;
        }
        case Experiment::classical_bit: {
            require_even_replicas(config);
            if (steady_state_source == nullptr || steady_state_source->empty()) {
                throw std::invalid_argument(
                    "classical_bit needs a steady-state source ensemble");
            }
            for (int i = 0; i < config.replicas / 2; ++i) {
                const SpinConfiguration& source =
                    (*steady_state_source)[i % steady_state_source->size()];
                initials.push_back(source.global_flip());
                initials.push_back(source);
            }
            return initials;
        }
        case Experiment::classical_cooperative:
        case Experiment::quantum_cooperative: {
            for (int r = 0; r < config.replicas; ++r) {
                initials.push_back(random_configuration(
                    n_sites,
                    derive_seed(config.master_seed, seed_domain::initial_sampling, r)));
            }
            return initials;
        }
        default:
            throw std::invalid_argument(
                "initial ensembles exist only for the erasure experiments");
    }
}

namespace {

struct OutputWriter {
    fs::path dir;
    std::map<std::string, std::string> hashes;

    explicit OutputWriter(const fs::path& d) : dir(d) {
        fs::create_directories(dir);
    }

    template <typename Fn>
    void emit(const std::string& name, Fn&& fill) {
        const fs::path file = dir / name;
        {
            std::ofstream out(file, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + file.string());
            fill(out);
        }
        hashes[name] = fnv1a64_hex(file);
    }
};

std::string utc_now_string() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// Destructive-readout emulation: the configuration at sample time k comes
// from a fresh run over the truncated path with its own seed stream, as a
// hardware experiment would re-prepare and re-measure per time point.
TrajectoryEnsemble run_ensemble_resample(const LatticeGeometry& geometry,
                                         const std::vector<SpinConfiguration>& initials,
                                         const FieldPath& path,
                                         const BathParameters& bath, Engine engine,
                                         const SqaParams& sqa, std::uint64_t master,
                                         int threads) {
    TrajectoryEnsemble ensemble;
    ensemble.times_us = path.times_us();
    ensemble.replicas.resize(initials.size());
    for (std::size_t r = 0; r < initials.size(); ++r) {
        ensemble.replicas[r].times_us = path.times_us();
        ensemble.replicas[r].snapshots.assign(path.size(), initials[r]);
        ensemble.replicas[r].seed = derive_seed(master, seed_domain::resample_base, r);
    }
    for (std::size_t k = 1; k < path.size(); ++k) {
        std::vector<double> times(path.times_us().begin(),
                                  path.times_us().begin() + k + 1);
        std::vector<FieldSample> fields(path.fields().begin(),
                                        path.fields().begin() + k + 1);
        const FieldPath truncated(std::move(times), std::move(fields));
        const auto seeds = replica_seeds(master, seed_domain::resample_base + k,
                                         static_cast<int>(initials.size()));
        TrajectoryEnsemble slice = run_ensemble(geometry, initials, truncated, bath,
                                                engine, sqa, seeds, threads);
        for (std::size_t r = 0; r < initials.size(); ++r) {
            ensemble.replicas[r].snapshots[k] = slice.replicas[r].snapshots.back();
        }
    }
    return ensemble;
}

json switching_to_json(const SwitchingResult& s) {
    json j;
    j["switched"] = s.switched;
    if (s.switched) {
        j["switching_time_us"] = s.switching_time_us;
        j["t_lower_us"] = s.t_lower_us;
        j["t_upper_us"] = s.t_upper_us;
    } else {
        j["diagnostic"] = s.diagnostic;
    }
    return j;
}

ScheduleConfig effective_schedule(const ExperimentConfig& config) {
    ScheduleConfig schedule = config.schedule;
    if (schedule.preset == "auto") {
        const bool quantum = config.experiment == Experiment::quantum_bit ||
                             config.experiment == Experiment::quantum_cooperative;
        schedule.preset = quantum ? "quantum" : "classical";
    }
    return schedule;
}

RunManifest run_erasure_experiment(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    const LatticeGeometry geometry =
        LatticeGeometry::build(config.rows, config.cols, config.boundary);
    const FieldPath path = resolve_schedule(effective_schedule(config));
    const Engine engine = config.effective_engine();

    RunManifest manifest;
    manifest.engine_version = kVersion;
    manifest.experiment = to_string(config.experiment);
    manifest.sampling = to_string(config.sampling);
    manifest.config = config_to_json(config);
    manifest.started_utc = utc_now_string();

    // Steady-state pre-run for the classical macroscopic bit: relax the
    // all-down configuration through the same protocol and harvest the
    // final ensemble.
    std::vector<SpinConfiguration> steady_source;
    if (config.experiment == Experiment::classical_bit) {
        const auto seeds = replica_seeds(config.master_seed,
                                         seed_domain::steady_state_prerun,
                                         config.replicas);
        std::vector<SpinConfiguration> starts(
            config.replicas, SpinConfiguration::all_down(geometry.sites()));
        const TrajectoryEnsemble prerun = run_ensemble(
            geometry, starts, path, config.bath, engine, config.sqa, seeds,
            config.threads);
        const auto series = histogram_series(prerun);
        const double tail_tv = total_variation_distance(
            series[series.size() - 2], series[series.size() - 1]);
        manifest.extra["prerun_tail_tv"] = tail_tv;
        manifest.extra["prerun_converged"] = tail_tv < kPrerunConvergenceTv;
        steady_source = prerun.final_configs();
    }

    const std::vector<SpinConfiguration> initials = prepare_initial_ensemble(
        config, geometry,
        steady_source.empty() ? nullptr : &steady_source);

    manifest.replica_seeds =
        replica_seeds(config.master_seed, seed_domain::main_ensemble, config.replicas);

    const TrajectoryEnsemble ensemble =
        config.sampling == SamplingMode::trajectory
            ? run_ensemble(geometry, initials, path, config.bath, engine, config.sqa,
                           manifest.replica_seeds, config.threads)
            : run_ensemble_resample(geometry, initials, path, config.bath, engine,
                                    config.sqa, config.master_seed, config.threads);

    // Reductions
    const auto histograms = histogram_series(ensemble);
    const ForceSeries forces = force_series(geometry, ensemble,
                                            config.bootstrap_resamples,
                                            config.master_seed);

    const bool cooperative =
        config.experiment == Experiment::classical_cooperative ||
        config.experiment == Experiment::quantum_cooperative;

    const PathWork longitudinal = path_work(path, forces);
    const double delta_w = transverse_work_bound(path, forces);
    std::optional<QuenchCorrection> quench;
    if (cooperative) {
        quench = quench_correction(geometry, ensemble.final_configs(), path.fields().back(),
                                   std::max(0.02, config.sqa.bx_floor_ghz * 2.0));
    }
    const WorkLedger ledger =
        total_work(longitudinal, delta_w, quench,
                   cooperative ? LedgerMode::cooperative : LedgerMode::cycle);
    const int n_bits = cooperative ? geometry.sites() : 1;
    const LandauerReference landauer =
        landauer_reference(config.bath.temperature_mk, n_bits);

    // Switching times. Macroscopic-bit runs use the -threshold -> +threshold
    // convention over the switching subensemble; cooperative runs measure
    // from the transverse-pulse onset (protocol start when there is no
    // pulse) over the full ensemble.
    const double onset_us =
        path.bx_onset_time_us(config.sqa.bx_floor_ghz * 1.5 + 1e-12);
    json switching_json = json::object();
    std::optional<double> headline_switching;
    double headline_threshold = cooperative ? 0.998 : 0.5;
    if (!config.thresholds.empty() &&
        std::find(config.thresholds.begin(), config.thresholds.end(),
                  headline_threshold) == config.thresholds.end()) {
        headline_threshold = config.thresholds.front();
    }
    for (double threshold : config.thresholds) {
        SwitchingResult res;
        if (cooperative) {
            MeanSeries full;
            for (std::size_t k = 0; k < histograms.size(); ++k) {
                full.emplace_back(histograms[k].t_us, histograms[k].mean_mz());
            }
            res = switching_time_from_onset(full, threshold, onset_us);
        } else {
            const auto sub = switching_subensemble_mean(ensemble, threshold);
            if (sub.has_value()) {
                res = switching_time(*sub, threshold);
            } else {
                res.diagnostic = "no replicas start in logical 0";
            }
        }
        char key[32];
        std::snprintf(key, sizeof(key), "%g", threshold);
        switching_json[key] = switching_to_json(res);
        if (threshold == headline_threshold && res.switched) {
            headline_switching = res.switching_time_us;
        }
    }

    const SuccessRate success = success_rate(histograms.back(), headline_threshold);
    std::optional<ErasureReport> action;
    if (headline_switching.has_value()) {
        action = erasure_action(ledger.w_exp_erg / n_bits, *headline_switching,
                                success.qubit_fraction);
    }

    OutputWriter writer(config.output_dir);
    writer.emit("path.csv", [&](std::ostream& out) { path.write_csv(out); });
    writer.emit("histograms.csv",
                [&](std::ostream& out) { write_histograms_csv(out, histograms); });
    writer.emit("forces.csv", [&](std::ostream& out) { forces.write_csv(out); });
    writer.emit("ledger.csv", [&](std::ostream& out) {
        write_ledger_csv(out, ledger, landauer, to_string(config.experiment));
    });
    writer.emit("final_configs.txt", [&](std::ostream& out) {
        for (const SpinConfiguration& c : ensemble.final_configs()) {
            out << c.to_string() << '\n';
        }
    });
    for (int d = 0; d < std::min<int>(config.dump_trajectories,
                                      static_cast<int>(ensemble.n_replicas()));
         ++d) {
        char name[48];
        std::snprintf(name, sizeof(name), "trajectory_r%04d.txt", d);
        writer.emit(name, [&](std::ostream& out) {
            write_trajectory(out, ensemble.replicas[d]);
        });
    }

    json report;
    report["experiment"] = to_string(config.experiment);
    report["engine"] = to_string(engine);
    report["sampling"] = to_string(config.sampling);
    report["n_replicas"] = config.replicas;
    report["n_bits"] = n_bits;
    report["final_mean_mz"] = histograms.back().mean_mz();
    report["success_rate"] = {{"threshold", headline_threshold},
                              {"qubit_fraction", success.qubit_fraction},
                              {"replica_fraction", success.replica_fraction}};
    report["switching_times"] = switching_json;
    report["switching_convention"] =
        cooperative ? "pulse_onset_to_threshold" : "threshold_to_threshold";
    report["bx_pulse_onset_us"] = onset_us;
    report["work_ledger_1e18_erg"] = {
        {"W_z", ledger.w_z_erg * 1e18},
        {"W_zz", ledger.w_zz_erg * 1e18},
        {"delta_W", ledger.delta_w_erg * 1e18},
        {"U_f", cooperative ? json(ledger.u_f_erg * 1e18) : json()},
        {"W_exp", ledger.w_exp_erg * 1e18},
        {"stat_err_W_exp", ledger.stderr_w_exp_erg * 1e18}};
    report["landauer_1e18_erg"] = {{"kT_ln2_per_bit", landauer.per_bit_erg * 1e18},
                                   {"n_bits", landauer.n_bits},
                                   {"total", landauer.total_erg * 1e18}};
    if (action.has_value()) {
        report["erasure_action"] = {
            {"work_per_bit_erg", action->work_per_bit_erg},
            {"switching_time_us", action->switching_time_us},
            {"success_rate", action->success_rate},
            {"A_erg_s_per_bit", action->action_erg_s_per_bit},
            {"A_star_erg_s_per_bit", action->action_star_erg_s_per_bit}};
    }
    // Hardware reference values recorded for comparison, never asserted.
    report["hardware_reference"] = {
        {"final_mean_mz_classical", 0.84},
        {"final_mean_mz_quantum", 0.998},
        {"switching_time_classical_us", 5.0},
        {"switching_time_quantum_us", 2.0},
        {"cooperative_T999_us", 9.0},
        {"A_999_erg_s_per_bit", 3.19e-23}};
    writer.emit("report.json",
                [&](std::ostream& out) { out << report.dump(2) << '\n'; });

    manifest.file_hashes = writer.hashes;
    manifest.complete = true;
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    writer.emit("manifest.json", [&](std::ostream& out) {
        out << manifest.to_json().dump(2) << '\n';
    });
    return manifest;
}

RunManifest run_jc_scan(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    const LatticeGeometry geometry =
        LatticeGeometry::build(config.rows, config.cols, config.boundary);
    const DeviceCurves curves = DeviceCurves::synthetic_default();
    const double b_final = curves.b(1.0);

    RunManifest manifest;
    manifest.engine_version = kVersion;
    manifest.experiment = to_string(config.experiment);
    manifest.sampling = to_string(config.sampling);
    manifest.config = config_to_json(config);
    manifest.started_utc = utc_now_string();

    std::vector<CriticalCurvePoint> curve;
    double baseline_sample_sd = 0.0;
    for (int p = 0; p < config.jc.points; ++p) {
        const double j_target =
            config.jc.j_min_ghz + (config.jc.j_max_ghz - config.jc.j_min_ghz) * p /
                                      (config.jc.points - 1.0);
        BathParameters bath = config.bath;
        bath.rng_seed = derive_seed(config.master_seed, seed_domain::main_ensemble, p);
        const auto finals = sample_equilibrium_ramp(
            geometry, curves, 2.0 * j_target / b_final, config.jc.ramp_tau_us, bath,
            config.jc.samples_per_point);
        double sum = 0.0, sum2 = 0.0;
        for (const SpinConfiguration& c : finals) {
            const double m = std::abs(magnetization_density(c));
            sum += m;
            sum2 += m * m;
        }
        const double n = static_cast<double>(finals.size());
        const double mean = sum / n;
        const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
        curve.push_back({j_target, mean, std::sqrt(var / n)});
        if (p == 0) baseline_sample_sd = std::sqrt(var);
    }

    OutputWriter writer(config.output_dir);
    writer.emit("critical_curve.csv",
                [&](std::ostream& out) { write_critical_curve_csv(out, curve); });

    json report;
    report["experiment"] = to_string(config.experiment);
    report["bath_temperature_mk"] = config.bath.temperature_mk;
    report["noise_floor"] = 3.0 * baseline_sample_sd;
    try {
        // the zero-coupling reference's per-sample spread sets the
        // "noticeable deviation" scale
        const CriticalPointEstimate est =
            estimate_critical_point(curve, 3.0, 3.0 * baseline_sample_sd);
        const TemperatureEstimate temp =
            temperature_from_jc(est.j_c_ghz, est.uncertainty_ghz);
        report["J_C_GHz"] = est.j_c_ghz;
        report["J_C_uncertainty_GHz"] = est.uncertainty_ghz;
        report["baseline_offset"] = est.baseline_offset;
        report["temperature_mk"] = temp.t_mk;
        report["temperature_uncertainty_mk"] = temp.uncertainty_mk;
        report["onsager_J_C_GHz_at_bath_T"] =
            onsager_critical_coupling_ghz(config.bath.kt_erg());
    } catch (const std::exception& ex) {
        report["error"] = ex.what();
    }
    writer.emit("report.json",
                [&](std::ostream& out) { out << report.dump(2) << '\n'; });

    manifest.file_hashes = writer.hashes;
    manifest.complete = true;
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    writer.emit("manifest.json", [&](std::ostream& out) {
        out << manifest.to_json().dump(2) << '\n';
    });
    return manifest;
}

RunManifest run_stability_hold(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    const fs::path source_dir = config.stability.source_run_dir;
    std::ifstream manifest_in(source_dir / "manifest.json");
    if (!manifest_in) {
        throw std::runtime_error("stability hold needs a finished source run at " +
                                 source_dir.string());
    }
    json source_manifest_json;
    manifest_in >> source_manifest_json;
    const RunManifest source_manifest = RunManifest::from_json(source_manifest_json);
    const ExperimentConfig source_config = config_from_json(source_manifest.config);
    const LatticeGeometry geometry = LatticeGeometry::build(
        source_config.rows, source_config.cols, source_config.boundary);

    // Final ensemble of the source run
    std::vector<SpinConfiguration> initials;
    {
        std::ifstream in(source_dir / "final_configs.txt");
        if (!in) throw std::runtime_error("source run has no final_configs.txt");
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) initials.push_back(SpinConfiguration::parse(line));
        }
    }
    if (initials.empty()) {
        throw std::runtime_error("source run final ensemble is empty");
    }

    // Endpoint Hamiltonian of the source protocol, held constant.
    FieldSample endpoint;
    {
        std::ifstream in(source_dir / "path.csv");
        if (!in) throw std::runtime_error("source run has no path.csv");
        endpoint = FieldPath::read_csv(in).fields().back();
    }
    const int record_points = std::max(
        2, static_cast<int>(std::lround(config.stability.hold_us /
                                        config.stability.record_every_us)) + 1);
    std::vector<double> times;
    std::vector<FieldSample> fields;
    for (int k = 0; k < record_points; ++k) {
        times.push_back(config.stability.hold_us * k / (record_points - 1.0));
        fields.push_back(endpoint);
    }
    const FieldPath hold_path(std::move(times), std::move(fields));

    const auto seeds =
        replica_seeds(config.master_seed, seed_domain::stability_hold,
                      static_cast<int>(initials.size()));
    const TrajectoryEnsemble ensemble =
        run_ensemble(geometry, initials, hold_path, config.bath, Engine::glauber,
                     config.sqa, seeds, config.threads);
    const auto histograms = histogram_series(ensemble);

    const double tv =
        total_variation_distance(histograms.front(), histograms.back());
    const double noise_sigma = tv_noise_sigma(histograms.front(), histograms.back());

    RunManifest manifest;
    manifest.engine_version = kVersion;
    manifest.experiment = to_string(config.experiment);
    manifest.sampling = to_string(config.sampling);
    manifest.config = config_to_json(config);
    manifest.started_utc = utc_now_string();
    manifest.replica_seeds = seeds;

    OutputWriter writer(config.output_dir);
    writer.emit("histograms.csv",
                [&](std::ostream& out) { write_histograms_csv(out, histograms); });
    json report;
    report["experiment"] = to_string(config.experiment);
    report["source_run"] = source_dir.string();
    report["hold_us"] = config.stability.hold_us;
    report["initial_mean_mz"] = histograms.front().mean_mz();
    report["final_mean_mz"] = histograms.back().mean_mz();
    report["tv_distance"] = tv;
    report["tv_noise_sigma"] = noise_sigma;
    report["stable_within_3_sigma"] = tv < 3.0 * noise_sigma;
    writer.emit("report.json",
                [&](std::ostream& out) { out << report.dump(2) << '\n'; });

    manifest.file_hashes = writer.hashes;
    manifest.complete = true;
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    writer.emit("manifest.json", [&](std::ostream& out) {
        out << manifest.to_json().dump(2) << '\n';
    });
    return manifest;
}

RunManifest run_oracle_suite(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    const double kt = config.bath.kt_erg();
    json report;

    // Single-qubit thermal state against the closed form.
    {
        const LatticeGeometry site = LatticeGeometry::build(1, 1, Boundary::open);
        const FieldSample f{0.0, 0.8, 0.0};
        const auto state = thermal_state(build_hamiltonian(f, site), kt);
        const auto bloch = bloch_components(state);
        const double expected =
            std::tanh(constants::erg_per_ghz * f.bz_ghz / kt);
        report["single_qubit_sz"] = bloch[0].z;
        report["single_qubit_sz_expected"] = expected;
        report["single_qubit_sz_error"] = std::abs(bloch[0].z - expected);
    }

    // Thermal stationarity under the dissipator.
    {
        const LatticeGeometry pair = LatticeGeometry::build(1, 2, Boundary::open);
        const FieldSample f{0.3, 0.2, 0.4};
        const auto h = build_hamiltonian(f, pair);
        const auto gibbs = thermal_state(h, kt);
        std::vector<double> times{0.0, 2.0};
        std::vector<FieldSample> fields{f, f};
        LindbladOptions opts;
        opts.gamma_per_us = config.oracle_gamma_per_us;
        const auto result = lindblad_evolve(
            gibbs, pair, FieldPath(std::move(times), std::move(fields)), kt, opts);
        report["gibbs_stationarity_trace_distance"] =
            trace_distance(result.final_state, gibbs);
        report["gibbs_stationarity_work_erg"] = result.record.total_work();
    }

    // Driven cycle: first law and the transverse bound.
    ThermoRecord cycle_record;
    {
        const LatticeGeometry pair = LatticeGeometry::build(1, 2, Boundary::open);
        const PiecewiseLinear bx({{0.0, 0.05}, {2.0, 0.4}, {4.0, 0.05}});
        const PiecewiseLinear bz({{0.0, 0.1}, {2.0, 0.3}, {4.0, 0.1}});
        const PiecewiseLinear j({{0.0, 0.2}, {2.0, 0.1}, {4.0, 0.2}});
        const FieldPath path = direct_path(bx, bz, j, 4.0, 0.25);
        const auto h0 = build_hamiltonian(path.at(0), pair);
        LindbladOptions opts;
        opts.gamma_per_us = config.oracle_gamma_per_us;
        const auto result = lindblad_evolve(thermal_state(h0, kt), pair, path, kt, opts);
        cycle_record = result.record;
        const double du = result.record.delta_u();
        const double w = result.record.total_work();
        const double q = result.record.total_heat();
        report["first_law_residual_erg"] = du - w - q;
        report["cycle_work_erg"] = w;
        report["cycle_free_energy_change_erg"] = 0.0;
        report["second_law_satisfied"] = w >= -1e-6 * std::abs(w);

        ForceSeries m_star_series;
        for (std::size_t k = 0; k < path.size(); ++k) {
            ForcePoint p;
            p.t_us = path.time_us(k);
            p.m_star = result.forces[k].m_star;
            m_star_series.points.push_back(p);
        }
        const double delta_w = transverse_work_bound(path, m_star_series);
        report["exact_Wx_erg"] = result.work_x_erg;
        report["delta_W_bound_erg"] = delta_w;
        report["bound_satisfied"] = std::abs(result.work_x_erg) <= delta_w;
    }

    OutputWriter writer(config.output_dir);
    writer.emit("thermo.csv",
                [&](std::ostream& out) { cycle_record.write_csv(out); });
    writer.emit("oracle_report.json",
                [&](std::ostream& out) { out << report.dump(2) << '\n'; });

    RunManifest manifest;
    manifest.engine_version = kVersion;
    manifest.experiment = to_string(config.experiment);
    manifest.sampling = to_string(config.sampling);
    manifest.config = config_to_json(config);
    manifest.started_utc = utc_now_string();
    manifest.file_hashes = writer.hashes;
    manifest.complete = true;
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    writer.emit("manifest.json", [&](std::ostream& out) {
        out << manifest.to_json().dump(2) << '\n';
    });
    return manifest;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config) {
    if (config.replicas < 1) {
        throw std::invalid_argument("replica count must be at least 1");
    }
    switch (config.experiment) {
        case Experiment::jc_scan:
            return run_jc_scan(config);
        case Experiment::stability_hold:
            return run_stability_hold(config);
        case Experiment::oracle_suite:
            return run_oracle_suite(config);
        default:
            return run_erasure_experiment(config);
    }
}

namespace {

// keyed by (t index, sum_z-like key) reconstructed from the emitted CSV
using HistogramTable = std::vector<std::pair<double, std::map<long, double>>>;

HistogramTable load_histograms_csv(const fs::path& file, int n_sites) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    std::getline(in, line);  // header
    HistogramTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t = 0.0, mz = 0.0, prob = 0.0;
        char c1 = 0, c2 = 0;
        std::istringstream row(line);
        if (!(row >> t >> c1 >> mz >> c2 >> prob) || c1 != ',' || c2 != ',') {
            throw std::runtime_error("malformed histogram row: " + line);
        }
        if (table.empty() || table.back().first != t) {
            table.push_back({t, {}});
        }
        table.back().second[std::lround(mz * n_sites)] += prob;
    }
    return table;
}

}  // namespace

json CompareReport::to_json() const {
    json j;
    j["times_us"] = times_us;
    j["tv_distance"] = tv_distance;
    j["max_tv"] = max_tv;
    j["tv_noise_3sigma"] = tv_noise_3sigma;
    if (switching_delta_us.has_value()) j["switching_delta_us"] = *switching_delta_us;
    if (switching_ratio.has_value()) j["switching_ratio"] = *switching_ratio;
    j["ledger_delta_1e18_erg"] = ledger_delta_1e18_erg;
    j["ledger_delta_err_1e18_erg"] = ledger_delta_err_1e18_erg;
    return j;
}

CompareReport compare_runs(const fs::path& run_a, const fs::path& run_b) {
    auto load_manifest = [](const fs::path& dir) {
        std::ifstream in(dir / "manifest.json");
        if (!in) throw std::runtime_error("no manifest in " + dir.string());
        json j;
        in >> j;
        return RunManifest::from_json(j);
    };
    const RunManifest ma = load_manifest(run_a);
    const RunManifest mb = load_manifest(run_b);
    const ExperimentConfig ca = config_from_json(ma.config);
    const ExperimentConfig cb = config_from_json(mb.config);
    if (ca.rows != cb.rows || ca.cols != cb.cols) {
        throw std::invalid_argument("runs use incompatible lattices");
    }
    const int n_sites = ca.rows * ca.cols;
    const HistogramTable ha = load_histograms_csv(run_a / "histograms.csv", n_sites);
    const HistogramTable hb = load_histograms_csv(run_b / "histograms.csv", n_sites);
    if (ha.size() != hb.size()) {
        throw std::invalid_argument("runs have different sample grids");
    }

    CompareReport report;
    const double n_a = ca.replicas, n_b = cb.replicas;
    double noise = 0.0;
    for (std::size_t k = 0; k < ha.size(); ++k) {
        if (std::abs(ha[k].first - hb[k].first) > 1e-9) {
            throw std::invalid_argument("runs have different sample times");
        }
        double tv = 0.0;
        std::map<long, double> keys;
        for (const auto& [key, p] : ha[k].second) keys[key] += 0.0;
        for (const auto& [key, p] : hb[k].second) keys[key] += 0.0;
        double sigma = 0.0;
        for (const auto& [key, unused] : keys) {
            const auto ia = ha[k].second.find(key);
            const auto ib = hb[k].second.find(key);
            const double pa = ia == ha[k].second.end() ? 0.0 : ia->second;
            const double pb = ib == hb[k].second.end() ? 0.0 : ib->second;
            tv += std::abs(pa - pb);
            const double pooled = (pa * n_a + pb * n_b) / (n_a + n_b);
            sigma += std::sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b));
        }
        report.times_us.push_back(ha[k].first);
        report.tv_distance.push_back(0.5 * tv);
        report.max_tv = std::max(report.max_tv, 0.5 * tv);
        noise = std::max(noise, 0.5 * sigma);
    }
    report.tv_noise_3sigma = 3.0 * noise;

    // Switching-time comparison from the reports, when both runs have one.
    auto headline_switching = [](const fs::path& dir) -> std::optional<double> {
        std::ifstream in(dir / "report.json");
        if (!in) return std::nullopt;
        json j;
        in >> j;
        if (!j.contains("erasure_action")) return std::nullopt;
        return j["erasure_action"].value("switching_time_us", 0.0);
    };
    const auto sa = headline_switching(run_a);
    const auto sb = headline_switching(run_b);
    if (sa.has_value() && sb.has_value()) {
        report.switching_delta_us = *sa - *sb;
        if (*sb != 0.0) report.switching_ratio = *sa / *sb;
    }

    // Ledger deltas row by row, with the statistical errors combined in
    // quadrature.
    auto load_ledger = [](const fs::path& dir) {
        std::map<std::string, std::pair<double, double>> rows;
        std::ifstream in(dir / "ledger.csv");
        if (!in) return rows;
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            const auto comma1 = line.find(',');
            const auto comma2 = line.find(',', comma1 + 1);
            if (comma1 == std::string::npos || comma2 == std::string::npos) continue;
            const std::string value =
                line.substr(comma1 + 1, comma2 - comma1 - 1);
            if (value.empty()) continue;
            const std::string err = line.substr(comma2 + 1);
            rows[line.substr(0, comma1)] = {std::stod(value),
                                            err.empty() ? 0.0 : std::stod(err)};
        }
        return rows;
    };
    const auto la = load_ledger(run_a);
    const auto lb = load_ledger(run_b);
    for (const auto& [row, value] : la) {
        const auto it = lb.find(row);
        if (it != lb.end()) {
            report.ledger_delta_1e18_erg[row] = value.first - it->second.first;
            report.ledger_delta_err_1e18_erg[row] =
                std::hypot(value.second, it->second.second);
        }
    }
    return report;
}

std::vector<std::string> verify_run(const fs::path& run_dir) {
    std::ifstream in(run_dir / "manifest.json");
    if (!in) throw std::runtime_error("no manifest in " + run_dir.string());
    json j;
    in >> j;
    const RunManifest manifest = RunManifest::from_json(j);
    std::vector<std::string> mismatches;
    for (const auto& [name, expected] : manifest.file_hashes) {
        const fs::path file = run_dir / name;
        if (!fs::exists(file)) {
            mismatches.push_back(name + ": missing");
            continue;
        }
        const std::string actual = fnv1a64_hex(file);
        if (actual != expected) {
            mismatches.push_back(name + ": hash mismatch");
        }
    }
    return mismatches;
}

}  // namespace erasim
