#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erasim/field_sample.hpp"

namespace erasim {

enum class Boundary { open, periodic };

// Nearest-neighbour bond; stored with a < b, listed exactly once.
struct Bond {
    int a;
    int b;
};

// Finite 2D square lattice. Sites are indexed row-major:
// site(r, c) = r * cols + c. Bonds are sorted lexicographically by (a, b)
// so that bond-order-dependent sums are reproducible bit for bit.
class LatticeGeometry {
public:
    static LatticeGeometry build(int rows, int cols, Boundary boundary);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int sites() const { return rows_ * cols_; }
    Boundary boundary() const { return boundary_; }

    int site_index(int row, int col) const { return row * cols_ + col; }

    const std::vector<Bond>& bonds() const { return bonds_; }

    std::span<const int> neighbors(int site) const {
        return {neighbors_.data() + offsets_[site],
                static_cast<std::size_t>(offsets_[site + 1] - offsets_[site])};
    }

private:
    LatticeGeometry() = default;

    int rows_ = 0;
    int cols_ = 0;
    Boundary boundary_ = Boundary::open;
    std::vector<Bond> bonds_;
    // CSR neighbor lists
    std::vector<int> neighbors_;
    std::vector<int> offsets_;
};

// A classical spin configuration, one value in {-1, +1} per site.
class SpinConfiguration {
public:
    explicit SpinConfiguration(std::vector<std::int8_t> spins);

    static SpinConfiguration all_up(int n_sites);
    static SpinConfiguration all_down(int n_sites);

    // Text form used by fixtures and trajectory dumps: '+' / '-' per site
    // in site-index order, e.g. "++-+".
    static SpinConfiguration parse(std::string_view text);
    std::string to_string() const;

    int size() const { return static_cast<int>(spins_.size()); }
    std::int8_t operator[](int site) const { return spins_[site]; }
    std::span<const std::int8_t> spins() const { return spins_; }

    void flip(int site) { spins_[site] = static_cast<std::int8_t>(-spins_[site]); }

    SpinConfiguration global_flip() const;

    bool operator==(const SpinConfiguration&) const = default;

private:
    std::vector<std::int8_t> spins_;
};

struct DiagonalObservables {
    long long sum_z = 0;   // sum_i s_i
    long long sum_zz = 0;  // sum_<ij> s_i s_j
    double m_z = 0.0;      // sum_z / N
};

DiagonalObservables diagonal_observables(const LatticeGeometry& geometry,
                                         const SpinConfiguration& config);

// sum_i s_i / N; exact on the grid {-1, -1 + 2/N, ..., +1}.
double magnetization_density(const SpinConfiguration& config);

// Diagonal part of the Hamiltonian in erg:
//   E = -h * 1e9 * (bz * sum_z + j * sum_zz)
// The transverse field does not contribute to the diagonal energy.
double diagonal_energy(const LatticeGeometry& geometry,
                       const SpinConfiguration& config,
                       const FieldSample& fields);

// Energy change of flipping one spin, from its local neighborhood only.
// Equals diagonal_energy(flipped) - diagonal_energy(config) exactly.
double local_flip_cost(const LatticeGeometry& geometry,
                       const SpinConfiguration& config, int site,
                       const FieldSample& fields);

}  // namespace erasim
