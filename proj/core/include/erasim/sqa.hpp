#pragma once

#include <cstdint>

#include "erasim/ensemble.hpp"
#include "erasim/glauber.hpp"
#include "erasim/lattice.hpp"
#include "erasim/schedule.hpp"

namespace erasim {

// Dimensionless couplings of the (2+1)-dimensional classical model that
// the Suzuki-Trotter decomposition maps the transverse-field Hamiltonian
// onto, at inverse temperature beta = 1/kT with P imaginary-time slices:
//   k_space = (beta/P) h J        per in-slice bond
//   k_field = (beta/P) h Bz       per in-slice site
//   k_tau   = -(1/2) ln tanh((beta/P) h Bx)   per inter-slice bond
struct TrotterCouplings {
    double k_space = 0.0;
    double k_field = 0.0;
    double k_tau = 0.0;
};

// Throws when bx == 0: the mapping degenerates (k_tau diverges) and the
// caller must either use the classical engine or clamp bx to the floor.
TrotterCouplings trotter_couplings(const FieldSample& fields, double kt_erg, int p);

struct SqaParams {
    int trotter_p = 16;
    // Simulation image of the hardware's never-exactly-zero transverse
    // scale; keeps k_tau finite.
    double bx_floor_ghz = 0.01;
    // Incoherent single-flip attempt rate relative to the floor. Thermal
    // flips in a transverse-field device are mediated by the transverse
    // matrix element, so the attempt frequency grows as (bx/floor)^exponent
    // up to the cap. At the floor the multiplier is 1 and the dynamics
    // reduces to the classical engine's calibrated rate; exponent 0
    // disables the scaling.
    double flip_rate_bx_exponent = 2.0;
    double flip_rate_cap = 4.0;
};

// Path-integral Monte Carlo dynamics along a field path. All P slices
// start as copies of the initial configuration. One sweep performs
// N * P single-site Metropolis updates at random (site, slice) positions
// followed by N whole-worldline heat-bath updates at random sites (the
// worldline move leaves the inter-slice action unchanged and reduces
// exactly to one classical Glauber sweep when the slices are locked).
// The sweep count per sample interval uses the same sweeps_per_us
// calibration as the classical engine. The measurement at each sample
// time is the configuration of slice 0, mirroring a projective sigma_z
// readout.
ReplicaTrajectory run_sqa_replica(const LatticeGeometry& geometry,
                                  const SpinConfiguration& initial,
                                  const FieldPath& path, const BathParameters& bath,
                                  const SqaParams& params = {});

// Equilibrium expectation values at fixed fields, for validation against
// exact thermal states: slice- and site-averaged <sigma_z> and bond-
// averaged <sigma_z sigma_z>. Standard errors come from batch means.
struct SqaEquilibrium {
    double mean_sz = 0.0;
    double stderr_sz = 0.0;
    double mean_szsz = 0.0;
    double stderr_szsz = 0.0;
};

SqaEquilibrium sqa_equilibrium(const LatticeGeometry& geometry,
                               const FieldSample& fields, const BathParameters& bath,
                               int trotter_p, long n_sweeps, long burn_in_sweeps);

}  // namespace erasim
