#pragma once

#include <cstdint>
#include <vector>

#include "erasim/constants.hpp"
#include "erasim/ensemble.hpp"
#include "erasim/lattice.hpp"
#include "erasim/schedule.hpp"

namespace erasim {

enum class AcceptanceRule { glauber, metropolis };

struct BathParameters {
    double temperature_mk = 39.0;
    // Single fitted constant mapping simulation sweeps to physical time,
    // calibrated so the classical preset switches in a few microseconds.
    double sweeps_per_us = 2.0;
    std::uint64_t rng_seed = 0;
    // Metropolis is available for sensitivity checks only.
    AcceptanceRule rule = AcceptanceRule::glauber;

    double kt_erg() const { return kt_erg_from_mk(temperature_mk); }
};

// Heat-bath flip probability 1 / (1 + exp(dE/kT)). Overflow-safe for
// |dE/kT| far beyond the exp() range.
double glauber_flip_probability(double delta_e_erg, double kt_erg);

// Single-spin-flip stochastic dynamics under the diagonal part of the
// Hamiltonian along a field path. Between consecutive samples the engine
// performs round(sweeps_per_us * dt) sweeps of N random-site flip attempts
// each, with fields interpolated at each sweep's midpoint time; the
// configuration is recorded at every path sample time. The trajectory is
// fully determined by (initial, path, bath).
ReplicaTrajectory run_replica(const LatticeGeometry& geometry,
                              const SpinConfiguration& initial,
                              const FieldPath& path, const BathParameters& bath);

// Forward annealing ramp s(t) = t/tau at g = 0: n_samples independent
// replicas, each from a uniformly random configuration, evolved through
// the ramp; the final configurations sample the equilibrium distribution
// at the ramp end when tau is slow enough (tau >= 100 us at the default
// sweep rate).
std::vector<SpinConfiguration> sample_equilibrium_ramp(
    const LatticeGeometry& geometry, const DeviceCurves& curves, double j_coupler,
    double tau_us, const BathParameters& bath, int n_samples);

// Uniformly random configuration, each spin independently +-1.
SpinConfiguration random_configuration(int n_sites, std::uint64_t seed);

}  // namespace erasim
