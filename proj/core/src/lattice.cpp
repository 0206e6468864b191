#include "erasim/lattice.hpp"

#include <algorithm>
#include <stdexcept>

#include "erasim/constants.hpp"

namespace erasim {

LatticeGeometry LatticeGeometry::build(int rows, int cols, Boundary boundary) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("lattice dimensions must be positive");
    }

    LatticeGeometry g;
    g.rows_ = rows;
    g.cols_ = cols;
    g.boundary_ = boundary;

    const int n = rows * cols;
    auto add_bond = [&](int a, int b) {
        if (a == b) return;  // periodic wrap on a 1-wide axis
        if (a > b) std::swap(a, b);
        g.bonds_.push_back({a, b});
    };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int site = r * cols + c;
            if (c + 1 < cols) {
                add_bond(site, site + 1);
            } else if (boundary == Boundary::periodic) {
                add_bond(site, r * cols);
            }
            if (r + 1 < rows) {
                add_bond(site, site + cols);
            } else if (boundary == Boundary::periodic) {
                add_bond(site, c);
            }
        }
    }

    // A 2-wide periodic axis enumerates each wrap bond twice; keep one.
    std::sort(g.bonds_.begin(), g.bonds_.end(), [](const Bond& x, const Bond& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    g.bonds_.erase(std::unique(g.bonds_.begin(), g.bonds_.end(),
                               [](const Bond& x, const Bond& y) {
                                   return x.a == y.a && x.b == y.b;
                               }),
                   g.bonds_.end());

    // CSR neighbor lists from the deduplicated bond set.
    std::vector<std::vector<int>> adj(n);
    for (const Bond& b : g.bonds_) {
        adj[b.a].push_back(b.b);
        adj[b.b].push_back(b.a);
    }
    g.offsets_.resize(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        std::sort(adj[i].begin(), adj[i].end());
        g.offsets_[i + 1] = g.offsets_[i] + static_cast<int>(adj[i].size());
    }
    g.neighbors_.reserve(g.offsets_[n]);
    for (int i = 0; i < n; ++i) {
        g.neighbors_.insert(g.neighbors_.end(), adj[i].begin(), adj[i].end());
    }
    return g;
}

SpinConfiguration::SpinConfiguration(std::vector<std::int8_t> spins)
    : spins_(std::move(spins)) {
    if (spins_.empty()) {
        throw std::invalid_argument("spin configuration must not be empty");
    }
    for (std::int8_t s : spins_) {
        if (s != 1 && s != -1) {
            throw std::invalid_argument("spin values must be +1 or -1");
        }
    }
}

SpinConfiguration SpinConfiguration::all_up(int n_sites) {
    return SpinConfiguration(std::vector<std::int8_t>(n_sites, 1));
}

SpinConfiguration SpinConfiguration::all_down(int n_sites) {
    return SpinConfiguration(std::vector<std::int8_t>(n_sites, -1));
}

SpinConfiguration SpinConfiguration::parse(std::string_view text) {
    std::vector<std::int8_t> spins;
    spins.reserve(text.size());
    for (char ch : text) {
        if (ch == '+') {
            spins.push_back(1);
        } else if (ch == '-') {
            spins.push_back(-1);
        } else {
            throw std::invalid_argument("spin text must contain only '+'/'-'");
        }
    }
    return SpinConfiguration(std::move(spins));
}

std::string SpinConfiguration::to_string() const {
    std::string out;
    out.reserve(spins_.size());
    for (std::int8_t s : spins_) out.push_back(s > 0 ? '+' : '-');
    return out;
}

SpinConfiguration SpinConfiguration::global_flip() const {
    std::vector<std::int8_t> flipped(spins_.size());
    for (std::size_t i = 0; i < spins_.size(); ++i) {
        flipped[i] = static_cast<std::int8_t>(-spins_[i]);
    }
    return SpinConfiguration(std::move(flipped));
}

DiagonalObservables diagonal_observables(const LatticeGeometry& geometry,
                                         const SpinConfiguration& config) {
    if (config.size() != geometry.sites()) {
        throw std::invalid_argument("configuration size does not match lattice");
    }
    DiagonalObservables obs;
    for (int i = 0; i < config.size(); ++i) obs.sum_z += config[i];
    for (const Bond& b : geometry.bonds()) {
        obs.sum_zz += static_cast<long long>(config[b.a]) * config[b.b];
    }
    obs.m_z = static_cast<double>(obs.sum_z) / geometry.sites();
    return obs;
}

double magnetization_density(const SpinConfiguration& config) {
    long long sum = 0;
    for (int i = 0; i < config.size(); ++i) sum += config[i];
    return static_cast<double>(sum) / config.size();
}

double diagonal_energy(const LatticeGeometry& geometry,
                       const SpinConfiguration& config,
                       const FieldSample& fields) {
    const DiagonalObservables obs = diagonal_observables(geometry, config);
    return -constants::erg_per_ghz *
           (fields.bz_ghz * static_cast<double>(obs.sum_z) +
            fields.j_ghz * static_cast<double>(obs.sum_zz));
}

double local_flip_cost(const LatticeGeometry& geometry,
                       const SpinConfiguration& config, int site,
                       const FieldSample& fields) {
    if (site < 0 || site >= geometry.sites()) {
        throw std::out_of_range("site index out of range");
    }
    if (config.size() != geometry.sites()) {
        throw std::invalid_argument("configuration size does not match lattice");
    }
    long long neighbor_sum = 0;
    for (int j : geometry.neighbors(site)) neighbor_sum += config[j];
    const double s = config[site];
    return 2.0 * constants::erg_per_ghz * s *
           (fields.bz_ghz + fields.j_ghz * static_cast<double>(neighbor_sum));
}

}  // namespace erasim
