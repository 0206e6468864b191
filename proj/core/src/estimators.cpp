#include "erasim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "erasim/constants.hpp"
#include "erasim/rng.hpp"

namespace erasim {

double MagnetizationHistogram::probability(int sum_z) const {
    const auto it = counts.find(sum_z);
    return it == counts.end() ? 0.0
                              : static_cast<double>(it->second) / total;
}

double MagnetizationHistogram::mean_mz() const {
    double acc = 0.0;
    for (const auto& [sum_z, count] : counts) {
        acc += static_cast<double>(sum_z) * count;
    }
    return acc / (static_cast<double>(total) * n_sites);
}

double MagnetizationHistogram::fraction_at_least(double threshold) const {
    long long hits = 0;
    for (const auto& [sum_z, count] : counts) {
        if (mz_of(sum_z) >= threshold) hits += count;
    }
    return static_cast<double>(hits) / total;
}

MagnetizationHistogram histogram_at(const std::vector<SpinConfiguration>& configs,
                                    double t_us) {
    if (configs.empty()) {
        throw std::invalid_argument("histogram needs at least one configuration");
    }
    MagnetizationHistogram h;
    h.t_us = t_us;
    h.n_sites = configs.front().size();
    h.total = static_cast<int>(configs.size());
    for (const SpinConfiguration& c : configs) {
        int sum_z = 0;
        for (int i = 0; i < c.size(); ++i) sum_z += c[i];
        ++h.counts[sum_z];
    }
    return h;
}

std::vector<MagnetizationHistogram> histogram_series(
    const TrajectoryEnsemble& ensemble) {
    if (ensemble.replicas.empty()) {
        throw std::invalid_argument("empty ensemble");
    }
    std::vector<MagnetizationHistogram> series;
    series.reserve(ensemble.n_times());
    for (std::size_t k = 0; k < ensemble.n_times(); ++k) {
        std::vector<SpinConfiguration> configs;
        configs.reserve(ensemble.n_replicas());
        for (const ReplicaTrajectory& r : ensemble.replicas) {
            configs.push_back(r.snapshots[k]);
        }
        series.push_back(histogram_at(configs, ensemble.times_us[k]));
    }
    return series;
}

double total_variation_distance(const MagnetizationHistogram& a,
                                const MagnetizationHistogram& b) {
    if (a.n_sites != b.n_sites) {
        throw std::invalid_argument("histograms live on different m_z grids");
    }
    double tv = 0.0;
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() || ib != b.counts.end()) {
        if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
            tv += a.probability(ia->first);
            ++ia;
        } else if (ia == a.counts.end() || ib->first < ia->first) {
            tv += b.probability(ib->first);
            ++ib;
        } else {
            tv += std::abs(a.probability(ia->first) - b.probability(ib->first));
            ++ia;
            ++ib;
        }
    }
    return 0.5 * tv;
}

double tv_noise_sigma(const MagnetizationHistogram& a,
                      const MagnetizationHistogram& b) {
    const double inv = 1.0 / a.total + 1.0 / b.total;
    const double pooled_total = a.total + b.total;
    std::map<int, double> pooled;
    for (const auto& [k, c] : a.counts) pooled[k] += c;
    for (const auto& [k, c] : b.counts) pooled[k] += c;
    double sigma = 0.0;
    for (const auto& [k, c] : pooled) {
        const double p = c / pooled_total;
        sigma += std::sqrt(p * (1.0 - p) * inv);
    }
    return 0.5 * sigma;
}

void write_histograms_csv(std::ostream& out,
                          const std::vector<MagnetizationHistogram>& series) {
    out << "t_us,m_z,probability\n";
    char buf[96];
    for (const MagnetizationHistogram& h : series) {
        for (const auto& [sum_z, count] : h.counts) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.17g,%.17g\n", h.t_us,
                          h.mz_of(sum_z), static_cast<double>(count) / h.total);
            out << buf;
        }
    }
}

void ForceSeries::write_csv(std::ostream& out) const {
    out << "t_us,Mz,K,Mstar,stderr_Mz,stderr_K,stderr_Mstar\n";
    char buf[200];
    for (const ForcePoint& p : points) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.17g,%.17g,%.17g,%.9g,%.9g,%.9g\n",
                      p.t_us, p.m_z, p.k_zz, p.m_star, p.stderr_m_z, p.stderr_k_zz,
                      p.stderr_m_star);
        out << buf;
    }
}

namespace {

struct ForceStats {
    double m_z = 0.0;
    double k_zz = 0.0;
    double m_star = 0.0;
};

// Forces for a weighted subset of replicas at a fixed time index. The
// weights are bootstrap multiplicities; pass empty weights for the plain
// estimate (weight 1 each).
ForceStats forces_at(const LatticeGeometry& geometry,
                     const TrajectoryEnsemble& ensemble, std::size_t k,
                     const std::vector<int>& weights) {
    const int n = geometry.sites();
    const std::size_t n_rep = ensemble.n_replicas();
    std::vector<double> site_sum(n, 0.0);
    double sz_sum = 0.0, zz_sum = 0.0, weight_total = 0.0;
    for (std::size_t r = 0; r < n_rep; ++r) {
        const int w = weights.empty() ? 1 : weights[r];
        if (w == 0) continue;
        const SpinConfiguration& c = ensemble.replicas[r].snapshots[k];
        long long sz = 0;
        for (int i = 0; i < n; ++i) {
            site_sum[i] += w * static_cast<double>(c[i]);
            sz += c[i];
        }
        long long zz = 0;
        for (const Bond& b : geometry.bonds()) {
            zz += static_cast<long long>(c[b.a]) * c[b.b];
        }
        sz_sum += w * static_cast<double>(sz);
        zz_sum += w * static_cast<double>(zz);
        weight_total += w;
    }
    ForceStats f;
    f.m_z = sz_sum / weight_total;
    f.k_zz = zz_sum / weight_total;
    for (int i = 0; i < n; ++i) {
        const double mean_i = site_sum[i] / weight_total;
        f.m_star += std::sqrt(std::max(0.0, 1.0 - mean_i * mean_i));
    }
    return f;
}

}  // namespace

ForceSeries force_series(const LatticeGeometry& geometry,
                         const TrajectoryEnsemble& ensemble,
                         int bootstrap_resamples, std::uint64_t bootstrap_seed) {
    const std::size_t n_rep = ensemble.n_replicas();
    if (n_rep < 2) {
        throw std::invalid_argument("force estimation needs at least 2 replicas");
    }
    ForceSeries series;
    series.points.reserve(ensemble.n_times());
    const std::vector<int> no_weights;

    for (std::size_t k = 0; k < ensemble.n_times(); ++k) {
        const ForceStats base = forces_at(geometry, ensemble, k, no_weights);
        ForcePoint p;
        p.t_us = ensemble.times_us[k];
        p.m_z = base.m_z;
        p.k_zz = base.k_zz;
        p.m_star = base.m_star;

        if (bootstrap_resamples > 1) {
            Xoshiro256pp rng(derive_seed(bootstrap_seed, seed_domain::bootstrap, k));
            std::vector<int> weights(n_rep);
            double s_mz = 0, s2_mz = 0, s_k = 0, s2_k = 0, s_ms = 0, s2_ms = 0;
            for (int b = 0; b < bootstrap_resamples; ++b) {
                std::fill(weights.begin(), weights.end(), 0);
                for (std::size_t d = 0; d < n_rep; ++d) {
                    ++weights[rng.next_index(static_cast<std::uint32_t>(n_rep))];
                }
                const ForceStats f = forces_at(geometry, ensemble, k, weights);
                s_mz += f.m_z;
                s2_mz += f.m_z * f.m_z;
                s_k += f.k_zz;
                s2_k += f.k_zz * f.k_zz;
                s_ms += f.m_star;
                s2_ms += f.m_star * f.m_star;
            }
            const double nb = bootstrap_resamples;
            auto sd = [&](double s, double s2) {
                return std::sqrt(std::max(0.0, (s2 - s * s / nb) / (nb - 1.0)));
            };
            p.stderr_m_z = sd(s_mz, s2_mz);
            p.stderr_k_zz = sd(s_k, s2_k);
            p.stderr_m_star = sd(s_ms, s2_ms);
        }
        series.points.push_back(p);
    }
    return series;
}

namespace {

double interp_crossing(double t0, double m0, double t1, double m1, double level) {
    if (m1 == m0) return t0;
    return t0 + (level - m0) * (t1 - t0) / (m1 - m0);
}

SwitchingResult upper_crossing(const MeanSeries& series, double threshold) {
    SwitchingResult res;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (series[k].second >= threshold) {
            res.switched = true;
            res.t_upper_us =
                k == 0 ? series[0].first
                       : interp_crossing(series[k - 1].first, series[k - 1].second,
                                         series[k].first, series[k].second,
                                         threshold);
            return res;
        }
    }
    res.diagnostic = "mean magnetization never reaches +threshold";
    return res;
}

}  // namespace

SwitchingResult switching_time(const MeanSeries& series, double threshold) {
    if (series.size() < 2) {
        throw std::invalid_argument("switching time needs at least 2 samples");
    }
    if (threshold <= 0.0 || threshold >= 1.0) {
        throw std::invalid_argument("threshold must be in (0, 1)");
    }
    SwitchingResult res = upper_crossing(series, threshold);

    std::ptrdiff_t idx_minus = -1;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (series[k].second <= -threshold) idx_minus = static_cast<std::ptrdiff_t>(k);
    }
    if (idx_minus < 0) {
        res.switched = false;
        res.diagnostic = "series never at or below -threshold";
        return res;
    }
    if (!res.switched) return res;

    if (static_cast<std::size_t>(idx_minus) + 1 >= series.size()) {
        res.switched = false;
        res.diagnostic = "series ends at or below -threshold";
        return res;
    }
    res.t_lower_us = interp_crossing(
        series[idx_minus].first, series[idx_minus].second,
        series[idx_minus + 1].first, series[idx_minus + 1].second, -threshold);
    if (res.t_lower_us > res.t_upper_us) {
        res.switched = false;
        res.diagnostic = "series re-enters -threshold after reaching +threshold";
        return res;
    }
    res.switching_time_us = res.t_upper_us - res.t_lower_us;
    return res;
}

SwitchingResult switching_time_from_onset(const MeanSeries& series,
                                          double threshold, double onset_us) {
    if (series.size() < 2) {
        throw std::invalid_argument("switching time needs at least 2 samples");
    }
    if (threshold <= 0.0 || threshold > 1.0) {
        throw std::invalid_argument("threshold must be in (0, 1]");
    }
    SwitchingResult res = upper_crossing(series, threshold);
    if (!res.switched) return res;
    res.t_lower_us = onset_us;
    res.switching_time_us = res.t_upper_us - onset_us;
    return res;
}

std::optional<MeanSeries> switching_subensemble_mean(
    const TrajectoryEnsemble& ensemble, double threshold) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < ensemble.n_replicas(); ++r) {
        if (magnetization_density(ensemble.replicas[r].snapshots.front()) <=
            -threshold) {
            members.push_back(r);
        }
    }
    if (members.empty()) return std::nullopt;
    MeanSeries series;
    series.reserve(ensemble.n_times());
    for (std::size_t k = 0; k < ensemble.n_times(); ++k) {
        double acc = 0.0;
        for (std::size_t r : members) {
            acc += magnetization_density(ensemble.replicas[r].snapshots[k]);
        }
        series.emplace_back(ensemble.times_us[k], acc / members.size());
    }
    return series;
}

SuccessRate success_rate(const MagnetizationHistogram& final_histogram,
                         double threshold) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw std::invalid_argument("threshold must be in (0, 1]");
    }
    SuccessRate s;
    s.qubit_fraction = 0.5 * (1.0 + final_histogram.mean_mz());
    s.replica_fraction = final_histogram.fraction_at_least(threshold);
    return s;
}

CriticalPointEstimate estimate_critical_point(
    const std::vector<CriticalCurvePoint>& curve, double n_sigma,
    double noise_floor) {
    if (curve.size() < 3) {
        throw std::invalid_argument("critical-point curve needs at least 3 points");
    }
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].j_ghz <= curve[i - 1].j_ghz) {
            throw std::invalid_argument("curve couplings must be strictly increasing");
        }
    }

    CriticalPointEstimate est;
    est.baseline_offset = curve.front().mean_abs_mz;
    const double sigma0 = curve.front().stderr;
    for (const CriticalCurvePoint& p : curve) {
        est.curve.push_back({p.j_ghz, p.mean_abs_mz - est.baseline_offset,
                             std::sqrt(p.stderr * p.stderr + sigma0 * sigma0)});
    }

    auto band = [&](std::size_t i) {
        return std::max(n_sigma * est.curve[i].stderr, noise_floor);
    };
    auto above_band = [&](std::size_t i) {
        return est.curve[i].mean_abs_mz > band(i);
    };

    // Onset: first point above its noise band, confirmed by the next one.
    std::ptrdiff_t onset = -1;
    for (std::size_t i = 1; i + 1 < est.curve.size(); ++i) {
        if (above_band(i) && above_band(i + 1)) {
            onset = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    if (onset < 0) {
        throw std::runtime_error(
            "no critical point: offset curve never clears the noise band");
    }
    if (onset == 1) {
        throw std::runtime_error(
            "no critical point: curve already grown at the lowest coupling");
    }

    // Growth: first point at or after the onset whose rise over the
    // previous grid point exceeds the band scale, the next point staying
    // above its own band.
    std::ptrdiff_t growth = -1;
    for (std::size_t i = static_cast<std::size_t>(onset);
         i + 1 < est.curve.size(); ++i) {
        const double increment =
            est.curve[i].mean_abs_mz - est.curve[i - 1].mean_abs_mz;
        if (increment > band(i) && above_band(i + 1)) {
            growth = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    if (growth < 0) {
        throw std::runtime_error(
            "no critical point: offset curve never steepens beyond the noise band");
    }

    double min_spacing = est.curve[1].j_ghz - est.curve[0].j_ghz;
    for (std::size_t i = 2; i < est.curve.size(); ++i) {
        min_spacing = std::min(min_spacing,
                               est.curve[i].j_ghz - est.curve[i - 1].j_ghz);
    }

    const double j_low = est.curve[onset].j_ghz;
    const double j_high = est.curve[growth].j_ghz;
    est.j_c_ghz = 0.5 * (j_low + j_high);
    est.uncertainty_ghz = std::max(0.5 * (j_high - j_low), 0.5 * min_spacing);
    return est;
}

void write_critical_curve_csv(std::ostream& out,
                              const std::vector<CriticalCurvePoint>& curve) {
    out << "J_GHz,mean_abs_mz,stderr\n";
    char buf[120];
    for (const CriticalCurvePoint& p : curve) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.9g\n", p.j_ghz,
                      p.mean_abs_mz, p.stderr);
        out << buf;
    }
}

TemperatureEstimate temperature_from_jc(double j_c_ghz, double uncertainty_ghz) {
    if (j_c_ghz <= 0.0) {
        throw std::invalid_argument("critical coupling must be positive");
    }
    const double ln_silver = std::log(1.0 + std::sqrt(2.0));
    const double kt_erg = 2.0 * constants::erg_per_ghz * j_c_ghz / ln_silver;
    TemperatureEstimate t;
    t.t_mk = kt_erg / constants::boltzmann_erg_per_k * 1e3;
    t.uncertainty_mk = t.t_mk * (uncertainty_ghz / j_c_ghz);
    return t;
}

double onsager_critical_coupling_ghz(double kt_erg) {
    return kt_erg * std::log(1.0 + std::sqrt(2.0)) /
           (2.0 * constants::erg_per_ghz);
}

}  // namespace erasim
