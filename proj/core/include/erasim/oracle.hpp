#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "erasim/field_sample.hpp"
#include "erasim/lattice.hpp"
#include "erasim/schedule.hpp"

// Brute-force ground truth at small N: dense quantum states, exact thermal
// ensembles, and open-system evolution under the time-dependent Hamiltonian
// with a Davies-style thermal dissipator. Exists to validate the Monte
// Carlo engines and the thermodynamic bounds, not to scale.

namespace erasim {

using Operator = Eigen::MatrixXcd;

// Density operator with validated trace, Hermiticity and positivity.
// Basis convention: computational (sigma_z) product basis; site i maps to
// bit (n_sites - 1 - i) of the basis index, bit value 0 meaning s_i = +1.
class DenseOperatorState {
public:
    explicit DenseOperatorState(Eigen::MatrixXcd matrix);

    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    int dimension() const { return static_cast<int>(matrix_.rows()); }
    int n_sites() const;
    double purity() const;  // Tr rho^2

private:
    Eigen::MatrixXcd matrix_;
};

// H = -h * 1e9 * [bx sum_i sx_i + bz sum_i sz_i + j sum_<ij> sz_i sz_j],
// dense in the computational basis, in erg. N <= 8.
Operator build_hamiltonian(const FieldSample& fields, const LatticeGeometry& geometry);

// rho = exp(-H/kT) / Z. For H = 0 this is the maximally mixed state.
DenseOperatorState thermal_state(const Operator& hamiltonian, double kt_erg);

// F = -kT ln Z, with Z = Tr exp(-H/kT).
double free_energy_erg(const Operator& hamiltonian, double kt_erg);

double trace_distance(const DenseOperatorState& a, const DenseOperatorState& b);

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Per-site Bloch vectors (<sx_i>, <sy_i>, <sz_i>).
std::vector<BlochVector> bloch_components(const DenseOperatorState& state);

// Work/heat/internal-energy time series along a driven evolution, in erg.
// Sign convention: W is energy injected by the drive, Q is energy received
// from the bath, so dU = dW + dQ along the path.
struct ThermoRecord {
    std::vector<double> t_us;
    std::vector<double> internal_erg;
    std::vector<double> work_erg;
    std::vector<double> heat_erg;

    double total_work() const { return work_erg.back() - work_erg.front(); }
    double total_heat() const { return heat_erg.back() - heat_erg.front(); }
    double delta_u() const { return internal_erg.back() - internal_erg.front(); }

    // CSV "t_us,U_erg,W_erg,Q_erg"
    void write_csv(std::ostream& out) const;
};

// Exact conjugated-force expectations at one path sample time.
struct ExactForces {
    double m_x = 0.0;     // sum_i <sx_i>
    double m_z = 0.0;     // sum_i <sz_i>
    double k_zz = 0.0;    // sum_<ij> <sz_i sz_j>
    double m_star = 0.0;  // sum_i sqrt(1 - <sz_i>^2)
};

struct LindbladOptions {
    double gamma_per_us = 1.0;  // bath coupling rate
    double rel_tol = 1e-8;      // per-step relative tolerance on rho
    double abs_tol = 1e-12;
    double min_step_us = 1e-9;      // below this, the step controller gives up
    double drift_tol = 1e-9;        // trace/Hermiticity drift guard at samples
    double initial_step_us = 1e-4;
};

struct LindbladResult {
    DenseOperatorState final_state;
    ThermoRecord record;                // entries at every path sample time
    std::vector<ExactForces> forces;    // entries at every path sample time
    // Exact per-channel work decomposition over the whole path.
    double work_x_erg = 0.0;
    double work_z_erg = 0.0;
    double work_zz_erg = 0.0;
};

// Adaptive Runge-Kutta propagation of
//   drho/dt = -(i/hbar)[H(t), rho] + D_T(rho)
// with H(t) linearly interpolated between path samples and single-site
// (sigma_x) jump operators in the instantaneous energy eigenbasis whose
// rates obey the thermal detailed-balance ratio at kT, so the Gibbs state
// of the instantaneous Hamiltonian is stationary. Work and heat are
// accumulated as part of the integration. A step-size failure throws;
// it is never silently ignored. N <= 6.
LindbladResult lindblad_evolve(const DenseOperatorState& initial,
                               const LatticeGeometry& geometry,
                               const FieldPath& path, double kt_erg,
                               const LindbladOptions& options = {});

// Exact thermal expectation values for engine validation.
struct ExactThermalObservables {
    std::vector<double> sz_per_site;
    double sz_site_mean = 0.0;
    double szsz_bond_mean = 0.0;
};

ExactThermalObservables exact_thermal_observables(const FieldSample& fields,
                                                  const LatticeGeometry& geometry,
                                                  double kt_erg);

}  // namespace erasim
