#include <benchmark/benchmark.h>

#include "erasim/constants.hpp"
#include "erasim/estimators.hpp"
#include "erasim/glauber.hpp"
#include "erasim/oracle.hpp"
#include "erasim/rng.hpp"
#include "erasim/schedule.hpp"
#include "erasim/sqa.hpp"

using namespace erasim;

namespace {

FieldPath constant_path(const FieldSample& fields, double duration_us, double dt_us) {
    std::vector<double> times;
    std::vector<FieldSample> samples;
    for (double t = 0.0; t <= duration_us + 1e-9; t += dt_us) {
        times.push_back(t);
        samples.push_back(fields);
    }
    return FieldPath(std::move(times), std::move(samples));
}

}  // namespace

static void BM_GlauberReplica(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto geometry = LatticeGeometry::build(side, side, Boundary::open);
    const auto path = classical_preset(40.0);
    BathParameters bath;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        bath.rng_seed = seed++;
        auto trajectory = run_replica(
            geometry, SpinConfiguration::all_down(geometry.sites()), path, bath);
        benchmark::DoNotOptimize(trajectory);
    }
    state.SetItemsProcessed(state.iterations() * 80 * geometry.sites());
}
BENCHMARK(BM_GlauberReplica)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_SqaReplica(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const auto geometry = LatticeGeometry::build(16, 16, Boundary::open);
    const auto path = quantum_preset(40.0);
    BathParameters bath;
    SqaParams params;
    params.trotter_p = p;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        bath.rng_seed = seed++;
        auto trajectory = run_sqa_replica(
            geometry, SpinConfiguration::all_down(256), path, bath, params);
        benchmark::DoNotOptimize(trajectory);
    }
    state.SetItemsProcessed(state.iterations() * 80 * 256 * (p + 1));
}
BENCHMARK(BM_SqaReplica)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_ForceSeries(benchmark::State& state) {
    const auto geometry = LatticeGeometry::build(16, 16, Boundary::open);
    TrajectoryEnsemble ensemble;
    for (int r = 0; r < 200; ++r) {
        ReplicaTrajectory trajectory;
        for (int k = 0; k < 41; ++k) {
            trajectory.times_us.push_back(k);
            trajectory.snapshots.push_back(
                random_configuration(256, derive_seed(5, k, r)));
        }
        ensemble.add(std::move(trajectory));
    }
    for (auto _ : state) {
        auto forces = force_series(geometry, ensemble, 100, 7);
        benchmark::DoNotOptimize(forces);
    }
}
BENCHMARK(BM_ForceSeries)->Unit(benchmark::kMillisecond);

static void BM_LindbladPair(benchmark::State& state) {
    const auto geometry = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const auto path = constant_path({0.3, 0.2, 0.25}, 1.0, 0.25);
    const auto rho0 = thermal_state(build_hamiltonian(path.at(0), geometry), kt);
    for (auto _ : state) {
        auto result = lindblad_evolve(rho0, geometry, path, kt, {});
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_LindbladPair)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
