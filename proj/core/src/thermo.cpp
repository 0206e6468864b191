#include "erasim/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "erasim/constants.hpp"

namespace erasim {

namespace {

void check_grids(const FieldPath& path, const ForceSeries& forces) {
    if (forces.points.size() != path.size()) {
        throw std::invalid_argument("path and force series have different grids");
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (std::abs(forces.points[k].t_us - path.time_us(k)) > 1e-9) {
            throw std::invalid_argument("path and force series have different grids");
        }
    }
}

}  // namespace

PathWork path_work(const FieldPath& path, const ForceSeries& forces) {
    check_grids(path, forces);
    PathWork w;
    double var_z = 0.0, var_zz = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const ForcePoint& f0 = forces.points[k];
        const ForcePoint& f1 = forces.points[k + 1];
        const double dbz = path.at(k + 1).bz_ghz - path.at(k).bz_ghz;
        const double dj = path.at(k + 1).j_ghz - path.at(k).j_ghz;
        w.w_z_erg += -constants::erg_per_ghz * 0.5 * (f0.m_z + f1.m_z) * dbz;
        w.w_zz_erg += -constants::erg_per_ghz * 0.5 * (f0.k_zz + f1.k_zz) * dj;
        const double sig_mz =
            0.5 * std::sqrt(f0.stderr_m_z * f0.stderr_m_z +
                            f1.stderr_m_z * f1.stderr_m_z);
        const double sig_k = 0.5 * std::sqrt(f0.stderr_k_zz * f0.stderr_k_zz +
                                             f1.stderr_k_zz * f1.stderr_k_zz);
        var_z += dbz * dbz * sig_mz * sig_mz;
        var_zz += dj * dj * sig_k * sig_k;
    }
    w.stderr_w_z_erg = constants::erg_per_ghz * std::sqrt(var_z);
    w.stderr_w_zz_erg = constants::erg_per_ghz * std::sqrt(var_zz);
    return w;
}

double transverse_work_bound(const FieldPath& path, const ForceSeries& forces) {
    check_grids(path, forces);

    // Locate the global bx maximum and require it to be attained on one
    // contiguous stretch of samples.
    constexpr double tol = 1e-12;
    double bx_max = path.at(0).bx_ghz;
    for (std::size_t k = 0; k < path.size(); ++k) {
        bx_max = std::max(bx_max, path.at(k).bx_ghz);
    }
    std::size_t first = path.size(), last = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path.at(k).bx_ghz >= bx_max - tol) {
            first = std::min(first, k);
            last = std::max(last, k);
        }
    }
    for (std::size_t k = first; k <= last; ++k) {
        if (path.at(k).bx_ghz < bx_max - tol) {
            throw std::invalid_argument(
                "transverse_work_bound: bx attains its maximum on separated "
                "stretches; split the path at a single pulse");
        }
    }

    double bound = 0.0;  // in GHz units, converted at the end
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double dbx = std::abs(path.at(k + 1).bx_ghz - path.at(k).bx_ghz);
        const double m_star_mid =
            0.5 * (forces.points[k].m_star + forces.points[k + 1].m_star);
        bound += m_star_mid * dbx;
    }
    return constants::erg_per_ghz * bound;
}

QuenchCorrection quench_correction(const LatticeGeometry& geometry,
                                   const std::vector<SpinConfiguration>& final_configs,
                                   const FieldSample& final_fields,
                                   double bx_tolerance_ghz) {
    if (final_configs.empty()) {
        throw std::invalid_argument("quench correction needs final configurations");
    }
    if (final_fields.bx_ghz > bx_tolerance_ghz) {
        throw std::invalid_argument(
            "final Hamiltonian is not diagonal: bx exceeds the floor tolerance");
    }
    double sum = 0.0, sum2 = 0.0;
    for (const SpinConfiguration& c : final_configs) {
        const double e = diagonal_energy(geometry, c, final_fields);
        sum += e;
        sum2 += e * e;
    }
    const double n = static_cast<double>(final_configs.size());
    QuenchCorrection q;
    q.u_f_erg = sum / n;
    if (final_configs.size() > 1) {
        const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
        q.stderr_erg = std::sqrt(var / n);
    }
    return q;
}

WorkLedger total_work(const PathWork& longitudinal, double delta_w_erg,
                      const std::optional<QuenchCorrection>& quench,
                      LedgerMode mode) {
    if (delta_w_erg < 0.0) {
        throw std::invalid_argument("delta_W must be non-negative");
    }
    if (mode == LedgerMode::cooperative && !quench.has_value()) {
        throw std::invalid_argument(
            "cooperative accounting needs the final-configuration quench term");
    }
    WorkLedger ledger;
    ledger.mode = mode;
    ledger.w_z_erg = longitudinal.w_z_erg;
    ledger.w_zz_erg = longitudinal.w_zz_erg;
    ledger.delta_w_erg = delta_w_erg;
    ledger.stderr_w_z_erg = longitudinal.stderr_w_z_erg;
    ledger.stderr_w_zz_erg = longitudinal.stderr_w_zz_erg;

    double uf_term = 0.0;
    if (mode == LedgerMode::cooperative) {
        ledger.u_f_erg = quench->u_f_erg;
        ledger.stderr_u_f_erg = quench->stderr_erg;
        uf_term = -ledger.u_f_erg;
    }
    // Fixed association order; the ledger identity test recomputes this
    // exact expression.
    ledger.w_exp_erg = uf_term + ledger.w_z_erg + ledger.w_zz_erg;
    ledger.stderr_w_exp_erg = std::sqrt(
        ledger.stderr_w_z_erg * ledger.stderr_w_z_erg +
        ledger.stderr_w_zz_erg * ledger.stderr_w_zz_erg +
        ledger.stderr_u_f_erg * ledger.stderr_u_f_erg);
    return ledger;
}

LandauerReference landauer_reference(double temperature_mk, int n_bits) {
    if (temperature_mk <= 0.0) {
        throw std::invalid_argument("temperature must be positive");
    }
    if (n_bits < 0) throw std::invalid_argument("bit count must be non-negative");
    LandauerReference ref;
    ref.kt_erg = kt_erg_from_mk(temperature_mk);
    ref.per_bit_erg = ref.kt_erg * M_LN2;
    ref.n_bits = n_bits;
    ref.total_erg = n_bits * ref.per_bit_erg;
    return ref;
}

ErasureReport erasure_action(double work_per_bit_erg, double switching_time_us,
                             double success_rate) {
    if (!(success_rate >= 0.0 && success_rate <= 1.0)) {
        throw std::invalid_argument("success rate must be in [0, 1]");
    }
    if (!std::isfinite(work_per_bit_erg) || !std::isfinite(switching_time_us)) {
        throw std::invalid_argument("erasure action inputs must be finite");
    }
    ErasureReport report;
    report.switching_time_us = switching_time_us;
    report.success_rate = success_rate;
    report.work_per_bit_erg = work_per_bit_erg;
    report.action_erg_s_per_bit = work_per_bit_erg * switching_time_us * 1e-6;
    report.action_star_erg_s_per_bit =
        report.action_erg_s_per_bit * (1.0 - success_rate);
    return report;
}

void write_ledger_csv(std::ostream& out, const WorkLedger& ledger,
                      const LandauerReference& landauer,
                      const std::string& experiment_name) {
    char buf[200];
    out << "quantity_1e-18_erg," << experiment_name << ",stat_err\n";
    auto row = [&](const char* name, double value_erg, double err_erg) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.9g\n", name, value_erg * 1e18,
                      err_erg * 1e18);
        out << buf;
    };
    row("W_z", ledger.w_z_erg, ledger.stderr_w_z_erg);
    row("W_zz", ledger.w_zz_erg, ledger.stderr_w_zz_erg);
    row("delta_W", ledger.delta_w_erg, 0.0);
    if (ledger.mode == LedgerMode::cooperative) {
        row("U_f", ledger.u_f_erg, ledger.stderr_u_f_erg);
    } else {
        out << "U_f,,\n";
    }
    row("W_exp", ledger.w_exp_erg, ledger.stderr_w_exp_erg);
    row("W_L", landauer.total_erg, 0.0);
}

}  // namespace erasim
