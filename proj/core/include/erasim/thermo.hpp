#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "erasim/estimators.hpp"
#include "erasim/lattice.hpp"
#include "erasim/schedule.hpp"

namespace erasim {

// Work accumulated against the measured longitudinal forces along a path,
// by the midpoint rule:
//   W_z  = -h sum_k Mz_mid,k dBz_k,   W_zz = -h sum_k K_mid,k dJ_k
struct PathWork {
    double w_z_erg = 0.0;
    double w_zz_erg = 0.0;
    double stderr_w_z_erg = 0.0;
    double stderr_w_zz_erg = 0.0;
};

PathWork path_work(const FieldPath& path, const ForceSeries& forces);

// Upper bound on |W_x| from the Bloch-vector bound M_* >= |M_x|:
// the path is split at the global bx maximum into a forward and a backward
// branch and delta_W = h [ sum_F M_*|dbx| + sum_B M_*|dbx| ], so that
// -delta_W <= W_x <= delta_W. A path whose global bx maximum is attained
// on non-contiguous stretches is rejected.
double transverse_work_bound(const FieldPath& path, const ForceSeries& forces);

// Mean energy of the final diagonal Hamiltonian over the final ensemble;
// the cost of quenching back to the null Hamiltonian at the end of a
// cooperative protocol. The final fields must be diagonal up to the
// transverse floor tolerance.
struct QuenchCorrection {
    double u_f_erg = 0.0;
    double stderr_erg = 0.0;
};

QuenchCorrection quench_correction(const LatticeGeometry& geometry,
                                   const std::vector<SpinConfiguration>& final_configs,
                                   const FieldSample& final_fields,
                                   double bx_tolerance_ghz = 0.02);

enum class LedgerMode { cycle, cooperative };

// Complete work account of one experiment. w_exp_erg is defined as
// (-u_f if cooperative) + w_z + w_zz in exactly that association order;
// the +-delta_w band is carried separately and never folded into the
// statistical uncertainty.
struct WorkLedger {
    LedgerMode mode = LedgerMode::cycle;
    double w_z_erg = 0.0;
    double w_zz_erg = 0.0;
    double delta_w_erg = 0.0;
    double u_f_erg = 0.0;  // zero and unused in cycle mode
    double w_exp_erg = 0.0;
    double stderr_w_z_erg = 0.0;
    double stderr_w_zz_erg = 0.0;
    double stderr_u_f_erg = 0.0;
    double stderr_w_exp_erg = 0.0;  // quadrature of the statistical terms
};

WorkLedger total_work(const PathWork& longitudinal, double delta_w_erg,
                      const std::optional<QuenchCorrection>& quench,
                      LedgerMode mode);

struct LandauerReference {
    double kt_erg = 0.0;
    double per_bit_erg = 0.0;  // kT ln 2
    int n_bits = 0;
    double total_erg = 0.0;    // n_bits * per_bit, exactly
};

LandauerReference landauer_reference(double temperature_mk, int n_bits);

// Headline figures of merit: erasure action A = w * T (T in seconds) and
// the success-rate-weighted variant A* = A (1 - R).
struct ErasureReport {
    double switching_time_us = 0.0;
    double success_rate = 0.0;
    double work_per_bit_erg = 0.0;
    double action_erg_s_per_bit = 0.0;
    double action_star_erg_s_per_bit = 0.0;
};

ErasureReport erasure_action(double work_per_bit_erg, double switching_time_us,
                             double success_rate);

// Ledger table: rows W_z, W_zz, delta_W, U_f, W_exp, W_L; values in
// units of 1e-18 erg, one column per experiment.
void write_ledger_csv(std::ostream& out, const WorkLedger& ledger,
                      const LandauerReference& landauer,
                      const std::string& experiment_name);

}  // namespace erasim
