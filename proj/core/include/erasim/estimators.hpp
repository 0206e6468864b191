#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "erasim/ensemble.hpp"
#include "erasim/lattice.hpp"

namespace erasim {

// Histogram of the magnetization density at one sample time, keyed by the
// integer spin sum so every entry sits exactly on the m_z grid
// {-1, -1 + 2/N, ..., +1}. No binning loss.
struct MagnetizationHistogram {
    double t_us = 0.0;
    int n_sites = 0;
    int total = 0;
    std::map<int, int> counts;  // sum_z -> multiplicity

    double mz_of(int sum_z) const {
        return static_cast<double>(sum_z) / n_sites;
    }
    double probability(int sum_z) const;
    double mean_mz() const;
    // fraction of replicas with m_z >= threshold
    double fraction_at_least(double threshold) const;
};

std::vector<MagnetizationHistogram> histogram_series(const TrajectoryEnsemble& ensemble);

MagnetizationHistogram histogram_at(const std::vector<SpinConfiguration>& configs,
                                    double t_us);

double total_variation_distance(const MagnetizationHistogram& a,
                                const MagnetizationHistogram& b);

// One-sigma multinomial sampling scale for the TV distance between two
// empirical histograms of the same distribution:
//   sigma = 1/2 sum_k sqrt(p_k (1-p_k) (1/n_a + 1/n_b))
// with p_k pooled. Stability checks compare TV against 3x this value.
double tv_noise_sigma(const MagnetizationHistogram& a,
                      const MagnetizationHistogram& b);

// CSV "t_us,m_z,probability"
void write_histograms_csv(std::ostream& out,
                          const std::vector<MagnetizationHistogram>& series);

// Ensemble estimates of the conjugated forces at one sample time:
//   M_z = sum_i <sz_i>, K = sum_<ij> <sz_i sz_j>,
//   M_* = sum_i sqrt(1 - <sz_i>^2)  (Bloch bound on |M_x|).
struct ForcePoint {
    double t_us = 0.0;
    double m_z = 0.0;
    double k_zz = 0.0;
    double m_star = 0.0;
    double stderr_m_z = 0.0;
    double stderr_k_zz = 0.0;
    double stderr_m_star = 0.0;
};

struct ForceSeries {
    std::vector<ForcePoint> points;
    // CSV "t_us,Mz,K,Mstar,stderr_Mz,stderr_K,stderr_Mstar"
    void write_csv(std::ostream& out) const;
};

// Standard errors come from a seeded replica-level bootstrap.
ForceSeries force_series(const LatticeGeometry& geometry,
                         const TrajectoryEnsemble& ensemble,
                         int bootstrap_resamples = 200,
                         std::uint64_t bootstrap_seed = 0);

// Switching time of a mean-magnetization series: the temporal distance
// between the last time the series sits at or below -threshold and the
// first time it reaches +threshold, both linearly interpolated. A series
// that never reaches +threshold yields an explicit no-switch result.
struct SwitchingResult {
    bool switched = false;
    double switching_time_us = 0.0;
    double t_lower_us = 0.0;  // leaves -threshold (or pulse onset)
    double t_upper_us = 0.0;  // reaches +threshold
    std::string diagnostic;
};

using MeanSeries = std::vector<std::pair<double, double>>;  // (t_us, mean m_z)

SwitchingResult switching_time(const MeanSeries& series, double threshold);

// Cooperative-erasure convention: the switching interval starts at the
// given onset time (when the transverse pulse turns on) instead of the
// -threshold crossing.
SwitchingResult switching_time_from_onset(const MeanSeries& series,
                                          double threshold, double onset_us);

// Mean m_z over the switching subensemble: replicas whose t = 0
// magnetization is at or below -threshold.
std::optional<MeanSeries> switching_subensemble_mean(const TrajectoryEnsemble& ensemble,
                                                     double threshold);

// Two readings of the erasure success rate; the qubit fraction
// (1 + mean m_z)/2 is the headline number, the replica fraction is the
// threshold-crossing probability.
struct SuccessRate {
    double qubit_fraction = 0.0;
    double replica_fraction = 0.0;
};

SuccessRate success_rate(const MagnetizationHistogram& final_histogram,
                         double threshold);

struct CriticalCurvePoint {
    double j_ghz = 0.0;
    double mean_abs_mz = 0.0;
    double stderr = 0.0;
};

struct CriticalPointEstimate {
    double j_c_ghz = 0.0;
    double uncertainty_ghz = 0.0;
    double baseline_offset = 0.0;  // zero-coupling |m_z| value subtracted
    std::vector<CriticalCurvePoint> curve;  // offset-subtracted
};

// Locates the interval bracketing the growth of the spontaneous
// magnetization. The first curve point is the zero-coupling baseline and
// is subtracted. A point's noise band is max(n_sigma * combined stderr,
// noise_floor); pass the fluctuation scale of the zero-coupling reference
// (n_sigma times its per-sample spread) as noise_floor so the smooth
// finite-size paramagnetic tail does not trigger the onset.
//   j_low:  first point above its band, confirmed by the next point
//   j_high: first point whose increment over the previous point exceeds
//           the band scale, confirmed by the next point staying above
// Returns the midpoint and half-width (at least half a grid step).
CriticalPointEstimate estimate_critical_point(
    const std::vector<CriticalCurvePoint>& curve, double n_sigma = 3.0,
    double noise_floor = 0.0);

// CSV "J_GHz,mean_abs_mz,stderr"
void write_critical_curve_csv(std::ostream& out,
                              const std::vector<CriticalCurvePoint>& curve);

struct TemperatureEstimate {
    double t_mk = 0.0;
    double uncertainty_mk = 0.0;
};

// kT = 2 h J_C / ln(1 + sqrt 2), uncertainty propagated linearly.
TemperatureEstimate temperature_from_jc(double j_c_ghz, double uncertainty_ghz);

// Inverse relation: the critical coupling of the square-lattice model at
// thermal energy kT.
double onsager_critical_coupling_ghz(double kt_erg);

}  // namespace erasim
