#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "erasim/lattice.hpp"

namespace erasim {

// Time series of measured configurations for one replica. Snapshot times
// equal the field-path sample times.
struct ReplicaTrajectory {
    std::vector<double> times_us;
    std::vector<SpinConfiguration> snapshots;
    std::uint64_t seed = 0;
};

// Replica-major record of a whole experiment: every replica shares the
// same sample-time grid.
struct TrajectoryEnsemble {
    std::vector<double> times_us;
    std::vector<ReplicaTrajectory> replicas;

    std::size_t n_replicas() const { return replicas.size(); }
    std::size_t n_times() const { return times_us.size(); }

    void add(ReplicaTrajectory trajectory);

    // Final-time configurations of every replica.
    std::vector<SpinConfiguration> final_configs() const;
};

inline void TrajectoryEnsemble::add(ReplicaTrajectory trajectory) {
    if (replicas.empty() && times_us.empty()) {
        times_us = trajectory.times_us;
    }
    if (trajectory.times_us != times_us) {
        throw std::invalid_argument("replica sample grid does not match ensemble");
    }
    replicas.push_back(std::move(trajectory));
}

inline std::vector<SpinConfiguration> TrajectoryEnsemble::final_configs() const {
    std::vector<SpinConfiguration> out;
    out.reserve(replicas.size());
    for (const ReplicaTrajectory& r : replicas) out.push_back(r.snapshots.back());
    return out;
}

// Dump format: one line per sample time, "t_us=<t> <+-string>".
inline void write_trajectory(std::ostream& out, const ReplicaTrajectory& trajectory) {
    for (std::size_t k = 0; k < trajectory.times_us.size(); ++k) {
        out << "t_us=" << trajectory.times_us[k] << ' '
            << trajectory.snapshots[k].to_string() << '\n';
    }
}

}  // namespace erasim
