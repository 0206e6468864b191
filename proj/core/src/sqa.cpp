#include "erasim/sqa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "erasim/constants.hpp"
#include "erasim/rng.hpp"

namespace erasim {

TrotterCouplings trotter_couplings(const FieldSample& fields, double kt_erg, int p) {
    if (p < 2) throw std::invalid_argument("Trotter number must be at least 2");
    if (kt_erg <= 0.0) throw std::invalid_argument("kT must be positive");
    if (fields.bx_ghz < 0.0) throw std::invalid_argument("bx must be non-negative");
    if (fields.bx_ghz == 0.0) {
        throw std::invalid_argument(
            "bx = 0 is the classical limit; use the classical engine or a bx floor");
    }
    const double beta_h_over_p = constants::erg_per_ghz / (kt_erg * p);
    TrotterCouplings k;
    k.k_space = beta_h_over_p * fields.j_ghz;
    k.k_field = beta_h_over_p * fields.bz_ghz;
    k.k_tau = -0.5 * std::log(std::tanh(beta_h_over_p * fields.bx_ghz));
    return k;
}

namespace {

// Working state: worldline-contiguous storage, spins[site * P + slice].
class TrotterState {
public:
    TrotterState(const LatticeGeometry& geometry, const SpinConfiguration& initial,
                 int p)
        : geometry_(geometry), n_(geometry.sites()), p_(p), spins_(n_ * p) {
        for (int i = 0; i < n_; ++i) {
            for (int sl = 0; sl < p_; ++sl) spins_[i * p_ + sl] = initial[i];
        }
    }

    void sweep(const TrotterCouplings& k, AcceptanceRule rule, Xoshiro256pp& rng) {
        local_updates(k, rng);
        worldline_updates(k, rule, rng);
    }

    SpinConfiguration slice_config(int slice) const {
        std::vector<std::int8_t> out(n_);
        for (int i = 0; i < n_; ++i) out[i] = spins_[i * p_ + slice];
        return SpinConfiguration(std::move(out));
    }

    double slice_site_average_sz() const {
        long long sum = 0;
        for (std::int8_t s : spins_) sum += s;
        return static_cast<double>(sum) / (static_cast<double>(n_) * p_);
    }

    double slice_bond_average_szsz() const {
        const auto& bonds = geometry_.bonds();
        if (bonds.empty()) return 0.0;
        long long sum = 0;
        for (const Bond& b : bonds) {
            const std::int8_t* wa = &spins_[b.a * p_];
            const std::int8_t* wb = &spins_[b.b * p_];
            for (int sl = 0; sl < p_; ++sl) sum += wa[sl] * wb[sl];
        }
        return static_cast<double>(sum) / (static_cast<double>(bonds.size()) * p_);
    }

private:
    void local_updates(const TrotterCouplings& k, Xoshiro256pp& rng) {
        const int total = n_ * p_;
        for (int attempt = 0; attempt < total; ++attempt) {
            const int idx = static_cast<int>(rng.next_index(total));
            const int site = idx / p_;
            const int slice = idx - site * p_;
            const std::int8_t s = spins_[idx];
            int nbrsum = 0;
            for (int j : geometry_.neighbors(site)) nbrsum += spins_[j * p_ + slice];
            const int up = slice + 1 == p_ ? 0 : slice + 1;
            const int dn = slice == 0 ? p_ - 1 : slice - 1;
            const int tausum = spins_[site * p_ + up] + spins_[site * p_ + dn];
            const double x = 2.0 * s *
                             (k.k_field + k.k_space * nbrsum + k.k_tau * tausum);
            if (x <= 0.0 || rng.next_double() < std::exp(-x)) {
                spins_[idx] = static_cast<std::int8_t>(-s);
            }
        }
    }

    void worldline_updates(const TrotterCouplings& k, AcceptanceRule rule,
                           Xoshiro256pp& rng) {
        for (int attempt = 0; attempt < n_; ++attempt) {
            const int site = static_cast<int>(rng.next_index(n_));
            double x = 0.0;
            const std::int8_t* w = &spins_[site * p_];
            const auto nbrs = geometry_.neighbors(site);
            for (int sl = 0; sl < p_; ++sl) {
                int nbrsum = 0;
                for (int j : nbrs) nbrsum += spins_[j * p_ + sl];
                x += 2.0 * w[sl] * (k.k_field + k.k_space * nbrsum);
            }
            double p_accept;
            if (rule == AcceptanceRule::metropolis) {
                p_accept = x <= 0.0 ? 1.0 : std::exp(-x);
            } else if (x >= 0.0) {
                const double e = std::exp(-x);
                p_accept = e / (1.0 + e);
            } else {
                p_accept = 1.0 / (1.0 + std::exp(x));
            }
            if (rng.next_double() < p_accept) {
                std::int8_t* mutable_w = &spins_[site * p_];
                for (int sl = 0; sl < p_; ++sl) {
                    mutable_w[sl] = static_cast<std::int8_t>(-mutable_w[sl]);
                }
            }
        }
    }

    const LatticeGeometry& geometry_;
    int n_;
    int p_;
    std::vector<std::int8_t> spins_;
};

}  // namespace

ReplicaTrajectory run_sqa_replica(const LatticeGeometry& geometry,
                                  const SpinConfiguration& initial,
                                  const FieldPath& path, const BathParameters& bath,
                                  const SqaParams& params) {
    if (initial.size() != geometry.sites()) {
        throw std::invalid_argument("initial configuration does not match lattice");
    }
    if (params.bx_floor_ghz <= 0.0) {
        throw std::invalid_argument("bx floor must be positive");
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path.at(k).bx_ghz < params.bx_floor_ghz - 1e-12) {
            throw std::invalid_argument("path sample below the bx floor");
        }
    }

    const double kt = bath.kt_erg();
    Xoshiro256pp rng(bath.rng_seed);
    TrotterState state(geometry, initial, params.trotter_p);

    ReplicaTrajectory trajectory;
    trajectory.seed = bath.rng_seed;
    trajectory.times_us = path.times_us();
    trajectory.snapshots.reserve(path.size());
    trajectory.snapshots.push_back(initial);

    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double t0 = path.time_us(k);
        const double dt = path.time_us(k + 1) - t0;
        const int n_sweeps =
            static_cast<int>(std::llround(bath.sweeps_per_us * dt));
        for (int sweep = 0; sweep < n_sweeps; ++sweep) {
            const double t_mid = t0 + (sweep + 0.5) * dt / n_sweeps;
            const FieldSample fields = path.interpolate(t_mid);
            const TrotterCouplings couplings =
                trotter_couplings(fields, kt, params.trotter_p);
            int repeats = 1;
            if (params.flip_rate_bx_exponent > 0.0) {
                const double boost = std::pow(fields.bx_ghz / params.bx_floor_ghz,
                                              params.flip_rate_bx_exponent);
                repeats = static_cast<int>(std::llround(
                    std::clamp(boost, 1.0, params.flip_rate_cap)));
            }
            for (int rep = 0; rep < repeats; ++rep) {
                state.sweep(couplings, bath.rule, rng);
            }
        }
        trajectory.snapshots.push_back(state.slice_config(0));
    }
    return trajectory;
}

SqaEquilibrium sqa_equilibrium(const LatticeGeometry& geometry,
                               const FieldSample& fields, const BathParameters& bath,
                               int trotter_p, long n_sweeps, long burn_in_sweeps) {
    const TrotterCouplings couplings =
        trotter_couplings(fields, bath.kt_erg(), trotter_p);
    Xoshiro256pp rng(bath.rng_seed);
    TrotterState state(geometry, SpinConfiguration::all_up(geometry.sites()),
                       trotter_p);

    for (long sweep = 0; sweep < burn_in_sweeps; ++sweep) {
        state.sweep(couplings, bath.rule, rng);
    }

    constexpr int n_batches = 32;
    const long per_batch = std::max<long>(1, n_sweeps / n_batches);
    std::vector<double> batch_sz, batch_szsz;
    for (int batch = 0; batch < n_batches; ++batch) {
        double acc_sz = 0.0, acc_szsz = 0.0;
        for (long sweep = 0; sweep < per_batch; ++sweep) {
            state.sweep(couplings, bath.rule, rng);
            acc_sz += state.slice_site_average_sz();
            acc_szsz += state.slice_bond_average_szsz();
        }
        batch_sz.push_back(acc_sz / per_batch);
        batch_szsz.push_back(acc_szsz / per_batch);
    }

    auto mean_stderr = [](const std::vector<double>& batches) {
        double mean = 0.0;
        for (double b : batches) mean += b;
        mean /= batches.size();
        double var = 0.0;
        for (double b : batches) var += (b - mean) * (b - mean);
        var /= (batches.size() - 1.0);
        return std::pair<double, double>(mean, std::sqrt(var / batches.size()));
    };

    SqaEquilibrium out;
    std::tie(out.mean_sz, out.stderr_sz) = mean_stderr(batch_sz);
    std::tie(out.mean_szsz, out.stderr_szsz) = mean_stderr(batch_szsz);
    return out;
}

}  // namespace erasim
