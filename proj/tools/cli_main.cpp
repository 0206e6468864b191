// erasim command line: drives the erasure experiments, the critical-point
// scan, stability holds, and run maintenance (compare/verify).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "erasim/runner.hpp"
#include "erasim/schedule.hpp"
#include "erasim/version.hpp"

namespace {

struct CommonOverrides {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> replicas;
    std::optional<std::string> preset;
    std::optional<std::string> engine;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOverrides& o) {
    cmd->add_option("--config", o.config_file, "JSON experiment configuration");
    cmd->add_option("--seed", o.seed, "master seed (64-bit)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--replicas", o.replicas, "ensemble size");
    cmd->add_option("--preset", o.preset,
                    "schedule preset: classical | quantum | direct | device");
    cmd->add_option("--engine", o.engine, "engine: glauber | sqa");
    cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
}

erasim::ExperimentConfig resolve(const CommonOverrides& o,
                                 std::optional<erasim::Experiment> forced) {
    erasim::ExperimentConfig config;
    if (!o.config_file.empty()) {
        config = erasim::load_config_file(o.config_file);
    }
    if (forced.has_value()) config.experiment = *forced;
    if (o.seed) config.master_seed = *o.seed;
    if (o.out) config.output_dir = *o.out;
    if (o.replicas) config.replicas = *o.replicas;
    if (o.preset) config.schedule.preset = *o.preset;
    if (o.engine) config.engine = erasim::engine_from_string(*o.engine);
    if (o.threads) config.threads = *o.threads;
    return config;
}

int execute(const erasim::ExperimentConfig& config) {
    const erasim::RunManifest manifest = erasim::run_experiment(config);
    std::printf("experiment %s finished in %.1f s -> %s\n",
                manifest.experiment.c_str(), manifest.wall_clock_seconds,
                config.output_dir.c_str());
    return manifest.complete ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symmetry-breaking erasure protocols on a 2D driven Ising "
                 "lattice: simulation engines, thermodynamic accounting, and "
                 "experiment orchestration"};
    app.set_version_flag("--version", erasim::kVersion);
    app.require_subcommand(1);

    CommonOverrides run_opts;
    std::string run_experiment_name;
    CLI::App* run = app.add_subcommand("run", "run a configured experiment");
    add_common(run, run_opts);
    run->add_option("--experiment", run_experiment_name,
                    "classical_bit | quantum_bit | classical_cooperative | "
                    "quantum_cooperative | jc_scan | stability_hold | "
                    "oracle_suite");

    CommonOverrides jc_opts;
    double jc_min = 0.0, jc_max = 0.0;
    int jc_points = 0, jc_samples = 0;
    double jc_tau = 0.0;
    CLI::App* jc = app.add_subcommand(
        "jc-scan", "estimate the critical coupling from equilibrium ramps");
    add_common(jc, jc_opts);
    jc->add_option("--j-min", jc_min, "lowest coupling (GHz)");
    jc->add_option("--j-max", jc_max, "highest coupling (GHz)");
    jc->add_option("--points", jc_points, "grid points");
    jc->add_option("--samples", jc_samples, "samples per point");
    jc->add_option("--tau", jc_tau, "ramp duration (us)");

    CommonOverrides stab_opts;
    std::string stab_source;
    double stab_hold = 0.0;
    CLI::App* stab = app.add_subcommand(
        "stability", "hold a finished run's final ensemble under the endpoint "
                     "Hamiltonian");
    add_common(stab, stab_opts);
    stab->add_option("--source", stab_source, "finished run directory")
        ->required();
    stab->add_option("--hold", stab_hold, "hold duration (us)");

    std::string cmp_a, cmp_b;
    bool cmp_json = false;
    CLI::App* cmp = app.add_subcommand("compare", "compare two finished runs");
    cmp->add_option("run_a", cmp_a)->required();
    cmp->add_option("run_b", cmp_b)->required();
    cmp->add_flag("--json", cmp_json, "emit the full JSON report");

    std::string verify_dir;
    CLI::App* verify = app.add_subcommand(
        "verify", "re-hash a run's files against its manifest");
    verify->add_option("run_dir", verify_dir)->required();

    CommonOverrides oracle_opts;
    CLI::App* oracle = app.add_subcommand(
        "oracle-suite", "exact small-N validation battery");
    add_common(oracle, oracle_opts);

    std::string path_preset = "classical", path_out;
    double path_duration = 40.0;
    CLI::App* export_path =
        app.add_subcommand("export-path", "write a preset field path as CSV");
    export_path->add_option("--preset", path_preset, "classical | quantum");
    export_path->add_option("--duration", path_duration, "duration (us)");
    export_path->add_option("--out", path_out, "output CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto config = resolve(
                run_opts, run_experiment_name.empty()
                              ? std::nullopt
                              : std::optional<erasim::Experiment>(
                                    erasim::experiment_from_string(
                                        run_experiment_name)));
            return execute(config);
        }
        if (jc->parsed()) {
            auto config = resolve(jc_opts, erasim::Experiment::jc_scan);
            if (jc_min > 0.0) config.jc.j_min_ghz = jc_min;
            if (jc_max > 0.0) config.jc.j_max_ghz = jc_max;
            if (jc_points > 0) config.jc.points = jc_points;
            if (jc_samples > 0) config.jc.samples_per_point = jc_samples;
            if (jc_tau > 0.0) config.jc.ramp_tau_us = jc_tau;
            return execute(config);
        }
        if (stab->parsed()) {
            auto config = resolve(stab_opts, erasim::Experiment::stability_hold);
            config.stability.source_run_dir = stab_source;
            if (stab_hold > 0.0) config.stability.hold_us = stab_hold;
            return execute(config);
        }
        if (cmp->parsed()) {
            const auto report = erasim::compare_runs(cmp_a, cmp_b);
            if (cmp_json) {
                std::cout << report.to_json().dump(2) << '\n';
            } else {
                std::printf("max TV distance: %.6g (3-sigma noise %.6g)\n",
                            report.max_tv, report.tv_noise_3sigma);
                if (report.switching_delta_us) {
                    std::printf("switching-time delta: %.3g us",
                                *report.switching_delta_us);
                    if (report.switching_ratio) {
                        std::printf(" (ratio %.3g)", *report.switching_ratio);
                    }
                    std::printf("\n");
                }
                for (const auto& [row, delta] : report.ledger_delta_1e18_erg) {
                    std::printf("ledger %-8s delta: %.6g e-18 erg\n", row.c_str(),
                                delta);
                }
            }
            return 0;
        }
        if (verify->parsed()) {
            const auto mismatches = erasim::verify_run(verify_dir);
            if (mismatches.empty()) {
                std::printf("verified: every hashed file matches the manifest\n");
                return 0;
            }
            for (const std::string& m : mismatches) {
                std::fprintf(stderr, "mismatch: %s\n", m.c_str());
            }
            return 1;
        }
        if (oracle->parsed()) {
            auto config = resolve(oracle_opts, erasim::Experiment::oracle_suite);
            return execute(config);
        }
        if (export_path->parsed()) {
            const auto path = path_preset == "quantum"
                                  ? erasim::quantum_preset(path_duration)
                                  : erasim::classical_preset(path_duration);
            std::ofstream out(path_out);
            if (!out) {
                std::fprintf(stderr, "cannot write %s\n", path_out.c_str());
                return 1;
            }
            path.write_csv(out);
            return 0;
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
