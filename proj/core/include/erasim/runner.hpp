#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "erasim/ensemble.hpp"
#include "erasim/estimators.hpp"
#include "erasim/glauber.hpp"
#include "erasim/lattice.hpp"
#include "erasim/schedule.hpp"
#include "erasim/sqa.hpp"
#include "erasim/thermo.hpp"

namespace erasim {

enum class Experiment {
    classical_bit,
    quantum_bit,
    classical_cooperative,
    quantum_cooperative,
    jc_scan,
    stability_hold,
    oracle_suite,
};

enum class Engine { glauber, sqa };
enum class SamplingMode { trajectory, resample };

std::string to_string(Experiment e);
std::string to_string(Engine e);
std::string to_string(SamplingMode m);
Experiment experiment_from_string(const std::string& name);
Engine engine_from_string(const std::string& name);
SamplingMode sampling_from_string(const std::string& name);

// Schedule selection: a named preset, a direct per-channel breakpoint
// specification, or a device-curve program. "auto" picks the preset that
// matches the experiment (classical_* -> classical, quantum_* -> quantum).
struct ScheduleConfig {
    std::string preset = "auto";  // "auto" | "classical" | "quantum" | "direct" | "device"
    double duration_us = 40.0;
    PresetParams preset_params;

    // direct mode
    std::vector<Breakpoint> bx_breakpoints;
    std::vector<Breakpoint> bz_breakpoints;
    std::vector<Breakpoint> j_breakpoints;
    double dt_us = 1.0;

    // device mode
    std::string curves_csv;  // empty -> synthetic default curves
    std::vector<Breakpoint> s_breakpoints;
    std::vector<Breakpoint> g_breakpoints;
    double j_coupler = 0.0;
};

struct JcScanConfig {
    double j_min_ghz = 0.05;
    double j_max_ghz = 0.75;
    int points = 15;
    double ramp_tau_us = 800.0;
    int samples_per_point = 400;
};

struct StabilityConfig {
    std::string source_run_dir;
    double hold_us = 2000.0;
    double record_every_us = 100.0;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::quantum_cooperative;
    int rows = 16;
    int cols = 16;
    Boundary boundary = Boundary::open;
    ScheduleConfig schedule;
    BathParameters bath;  // rng_seed unused: master_seed governs all streams
    int replicas = 2000;
    SqaParams sqa;
    std::optional<Engine> engine;  // default: glauber for classical_*, sqa otherwise
    SamplingMode sampling = SamplingMode::trajectory;
    std::vector<double> thresholds = {0.5, 0.98, 0.99, 0.998};
    std::string output_dir = "run_out";
    std::uint64_t master_seed = 1;
    int bootstrap_resamples = 200;
    int dump_trajectories = 0;
    int threads = 0;  // 0 = hardware concurrency
    double oracle_gamma_per_us = 1.0;
    JcScanConfig jc;
    StabilityConfig stability;

    Engine effective_engine() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::filesystem::path& file);

struct RunManifest {
    std::string engine_version;
    std::string experiment;
    std::string sampling;
    nlohmann::json config;
    std::vector<std::uint64_t> replica_seeds;
    std::map<std::string, std::string> file_hashes;  // file name -> fnv1a-64 hex
    bool complete = false;
    double wall_clock_seconds = 0.0;
    std::string started_utc;
    nlohmann::json extra;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Executes the configured experiment end to end: schedule resolution,
// initial-ensemble preparation (including the steady-state pre-run for the
// classical macroscopic-bit protocol), the replica fan-out, estimator
// reductions, the work ledger, and persistence. Every emitted file's hash
// lands in the returned manifest, which is also written to the run
// directory. Identical config + master seed reproduce identical bytes.
RunManifest run_experiment(const ExperimentConfig& config);

// Initial-ensemble preparation rules, exposed for tests:
//   quantum_bit:            N/2 all-up, N/2 all-down, interleaved in pairs
//   classical_bit:          pairs (flip(source_i), source_i) drawn from the
//                           steady-state source ensemble
//   *_cooperative:          each spin independently +-1 with probability 1/2
std::vector<SpinConfiguration> prepare_initial_ensemble(
    const ExperimentConfig& config, const LatticeGeometry& geometry,
    const std::vector<SpinConfiguration>* steady_state_source);

// Resolved field path for the configured schedule.
FieldPath resolve_schedule(const ScheduleConfig& schedule);

// Replica fan-out with per-replica seeds; deterministic merge by index.
TrajectoryEnsemble run_ensemble(const LatticeGeometry& geometry,
                                const std::vector<SpinConfiguration>& initials,
                                const FieldPath& path, const BathParameters& bath,
                                Engine engine, const SqaParams& sqa,
                                const std::vector<std::uint64_t>& seeds,
                                int threads);

struct CompareReport {
    std::vector<double> times_us;
    std::vector<double> tv_distance;
    double max_tv = 0.0;
    double tv_noise_3sigma = 0.0;
    std::optional<double> switching_delta_us;
    std::optional<double> switching_ratio;
    std::map<std::string, double> ledger_delta_1e18_erg;
    std::map<std::string, double> ledger_delta_err_1e18_erg;

    nlohmann::json to_json() const;
};

CompareReport compare_runs(const std::filesystem::path& run_a,
                           const std::filesystem::path& run_b);

// Re-hashes every file listed in the manifest; returns the list of
// mismatches (empty means the run verifies).
std::vector<std::string> verify_run(const std::filesystem::path& run_dir);

// FNV-1a 64-bit content hash (hex); integrity fingerprint for manifests,
// not a cryptographic digest.
std::string fnv1a64_hex(const std::filesystem::path& file);

}  // namespace erasim
