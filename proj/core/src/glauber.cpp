#include "erasim/glauber.hpp"

#include <cmath>
#include <stdexcept>

#include "erasim/rng.hpp"

namespace erasim {

namespace {

// x = dE/kT
double accept_probability(double x, AcceptanceRule rule) {
    if (rule == AcceptanceRule::metropolis) {
        return x <= 0.0 ? 1.0 : std::exp(-x);
    }
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

double glauber_flip_probability(double delta_e_erg, double kt_erg) {
    if (kt_erg <= 0.0) throw std::invalid_argument("kT must be positive");
    return accept_probability(delta_e_erg / kt_erg, AcceptanceRule::glauber);
}

ReplicaTrajectory run_replica(const LatticeGeometry& geometry,
                              const SpinConfiguration& initial,
                              const FieldPath& path, const BathParameters& bath) {
    if (initial.size() != geometry.sites()) {
        throw std::invalid_argument("initial configuration does not match lattice");
    }
    if (bath.temperature_mk <= 0.0) {
        throw std::invalid_argument("bath temperature must be positive");
    }

    const int n = geometry.sites();
    const double kt = bath.kt_erg();
    Xoshiro256pp rng(bath.rng_seed);

    ReplicaTrajectory trajectory;
    trajectory.seed = bath.rng_seed;
    trajectory.times_us = path.times_us();
    trajectory.snapshots.reserve(path.size());

    std::vector<std::int8_t> spins(initial.spins().begin(), initial.spins().end());
    trajectory.snapshots.push_back(initial);

    // Flip probabilities keyed by current spin sign and neighbor sum; the
    // neighbor sum of a square-lattice site is always in [-4, 4].
    double p_flip[2][9];

    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double t0 = path.time_us(k);
        const double dt = path.time_us(k + 1) - t0;
        const int n_sweeps =
            static_cast<int>(std::llround(bath.sweeps_per_us * dt));
        for (int sweep = 0; sweep < n_sweeps; ++sweep) {
            const double t_mid = t0 + (sweep + 0.5) * dt / n_sweeps;
            const FieldSample f = path.interpolate(t_mid);
            const double r_bz = constants::erg_per_ghz * f.bz_ghz / kt;
            const double r_j = constants::erg_per_ghz * f.j_ghz / kt;
            for (int sign = 0; sign < 2; ++sign) {
                const double s = sign == 0 ? -1.0 : 1.0;
                for (int nb = -4; nb <= 4; ++nb) {
                    p_flip[sign][nb + 4] =
                        accept_probability(2.0 * s * (r_bz + r_j * nb), bath.rule);
                }
            }
            for (int attempt = 0; attempt < n; ++attempt) {
                const int site = static_cast<int>(rng.next_index(n));
                int nbrsum = 0;
                for (int j : geometry.neighbors(site)) nbrsum += spins[j];
                const double p = p_flip[spins[site] > 0 ? 1 : 0][nbrsum + 4];
                if (rng.next_double() < p) {
                    spins[site] = static_cast<std::int8_t>(-spins[site]);
                }
            }
        }
        trajectory.snapshots.emplace_back(spins);
    }
    return trajectory;
}

SpinConfiguration random_configuration(int n_sites, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    std::vector<std::int8_t> spins(n_sites);
    for (int i = 0; i < n_sites; ++i) {
        spins[i] = (rng.next_u64() & 1ULL) ? std::int8_t{1} : std::int8_t{-1};
    }
    return SpinConfiguration(std::move(spins));
}

std::vector<SpinConfiguration> sample_equilibrium_ramp(
    const LatticeGeometry& geometry, const DeviceCurves& curves, double j_coupler,
    double tau_us, const BathParameters& bath, int n_samples) {
    if (tau_us < 100.0) {
        throw std::invalid_argument(
            "ramp slower than 100 us required for equilibrium sampling");
    }
    const ControlProgram program{
        PiecewiseLinear({{0.0, 0.0}, {tau_us, 1.0}}),  // s(t) = t / tau
        PiecewiseLinear({{0.0, 0.0}, {tau_us, 0.0}}),  // g = 0
        j_coupler, tau_us};
    const FieldPath path = compile_path(curves, program, tau_us / 200.0);

    std::vector<SpinConfiguration> finals;
    finals.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        BathParameters replica_bath = bath;
        replica_bath.rng_seed =
            derive_seed(bath.rng_seed, seed_domain::main_ensemble, i);
        const SpinConfiguration start = random_configuration(
            geometry.sites(),
            derive_seed(bath.rng_seed, seed_domain::initial_sampling, i));
        finals.push_back(
            run_replica(geometry, start, path, replica_bath).snapshots.back());
    }
    return finals;
}

}  // namespace erasim
