#include "doctest.h"

#include <stdexcept>

#include <cmath>

#include "erasim/constants.hpp"
#include "erasim/lattice.hpp"
#include "support/brute_force.hpp"

using namespace erasim;

namespace {
constexpr double kHGhz = constants::erg_per_ghz;
}

TEST_CASE("geometry: 16x16 open lattice") {
    const auto g = LatticeGeometry::build(16, 16, Boundary::open);
    CHECK(g.sites() == 256);
    CHECK(g.bonds().size() == 480);  // 2 * 16 * 15
    for (int site = 0; site < g.sites(); ++site) {
        const auto nbrs = g.neighbors(site);
        CHECK(nbrs.size() >= 2);
        CHECK(nbrs.size() <= 4);
    }
}

TEST_CASE("geometry: single site") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    CHECK(g.sites() == 1);
    CHECK(g.bonds().empty());
}

TEST_CASE("geometry: 2x2 torus deduplicates doubled bonds") {
    const auto g = LatticeGeometry::build(2, 2, Boundary::periodic);
    CHECK(g.bonds().size() == 4);
    for (int site = 0; site < 4; ++site) {
        CHECK(g.neighbors(site).size() == 2);
    }
}

TEST_CASE("geometry: periodic sites have exactly 4 neighbors when wide enough") {
    const auto g = LatticeGeometry::build(4, 5, Boundary::periodic);
    CHECK(g.bonds().size() == 2u * 4 * 5);
    for (int site = 0; site < g.sites(); ++site) {
        CHECK(g.neighbors(site).size() == 4);
    }
}

TEST_CASE("geometry: bonds enumerated exactly once and symmetric") {
    for (Boundary b : {Boundary::open, Boundary::periodic}) {
        const auto g = LatticeGeometry::build(3, 4, b);
        for (std::size_t i = 1; i < g.bonds().size(); ++i) {
            const Bond& lo = g.bonds()[i - 1];
            const Bond& hi = g.bonds()[i];
            CHECK((lo.a < hi.a || (lo.a == hi.a && lo.b < hi.b)));
        }
        // neighbor relation matches the bond set both ways
        std::size_t half_edges = 0;
        for (int site = 0; site < g.sites(); ++site) {
            half_edges += g.neighbors(site).size();
        }
        CHECK(half_edges == 2 * g.bonds().size());
    }
}

TEST_CASE("geometry rejects non-positive dimensions") {
    CHECK_THROWS_AS(LatticeGeometry::build(0, 3, Boundary::open),
                    std::invalid_argument);
    CHECK_THROWS_AS(LatticeGeometry::build(3, -1, Boundary::open),
                    std::invalid_argument);
}

TEST_CASE("magnetization density") {
    CHECK(magnetization_density(SpinConfiguration::all_up(7)) == 1.0);
    CHECK(magnetization_density(SpinConfiguration::all_down(7)) == -1.0);
    CHECK(magnetization_density(SpinConfiguration::parse("+++-")) == 0.5);
}

TEST_CASE("magnetization sits on the exact grid") {
    const int n = 6;
    for (const auto& config : testing::enumerate_configurations(n)) {
        const double m = magnetization_density(config);
        const double grid_pos = (m + 1.0) * n / 2.0;
        CHECK(grid_pos == doctest::Approx(std::round(grid_pos)).epsilon(1e-12));
    }
}

TEST_CASE("spin configuration round trip and validation") {
    const auto c = SpinConfiguration::parse("+-+");
    CHECK(c.to_string() == "+-+");
    CHECK(c.global_flip().to_string() == "-+-");
    CHECK_THROWS_AS(SpinConfiguration::parse("+x-"), std::invalid_argument);
    CHECK_THROWS_AS(SpinConfiguration(std::vector<std::int8_t>{1, 0}),
                    std::invalid_argument);
}

TEST_CASE("diagonal energy: null fields give zero") {
    const auto g = LatticeGeometry::build(3, 3, Boundary::open);
    for (const char* text : {"+++++++++", "----+----", "+-+-+-+-+"}) {
        CHECK(diagonal_energy(g, SpinConfiguration::parse(text), {0.5, 0.0, 0.0}) ==
              0.0);
    }
}

TEST_CASE("diagonal energy: single Zeeman term") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const double e =
        diagonal_energy(g, SpinConfiguration::all_up(1), {0.0, 1.0, 0.7});
    CHECK(e == doctest::Approx(-kHGhz).epsilon(1e-14));
}

TEST_CASE("diagonal energy: 2x2 open ferromagnet, 4 bonds") {
    const auto g = LatticeGeometry::build(2, 2, Boundary::open);
    const double e =
        diagonal_energy(g, SpinConfiguration::all_up(4), {0.0, 0.0, 1.0});
    CHECK(e == doctest::Approx(-4.0 * kHGhz).epsilon(1e-14));
}

TEST_CASE("local flip cost: isolated spin against the field") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const double de =
        local_flip_cost(g, SpinConfiguration::all_up(1), 0, {0.0, 1.0, 0.0});
    CHECK(de == doctest::Approx(2.0 * kHGhz).epsilon(1e-14));
}

TEST_CASE("local flip cost: zero fields cost nothing") {
    const auto g = LatticeGeometry::build(2, 3, Boundary::open);
    CHECK(local_flip_cost(g, SpinConfiguration::parse("+-+-+-"), 3,
                          {0.3, 0.0, 0.0}) == 0.0);
}

TEST_CASE("local flip cost: center of a 3x3 ferromagnet") {
    const auto g = LatticeGeometry::build(3, 3, Boundary::open);
    const double de =
        local_flip_cost(g, SpinConfiguration::all_up(9), 4, {0.0, 0.0, 1.0});
    CHECK(de == doctest::Approx(8.0 * kHGhz).epsilon(1e-14));
}

TEST_CASE("local flip cost rejects out-of-range sites") {
    const auto g = LatticeGeometry::build(2, 2, Boundary::open);
    CHECK_THROWS_AS(
        local_flip_cost(g, SpinConfiguration::all_up(4), 4, {0, 0, 0}),
        std::out_of_range);
}

TEST_CASE("local flip cost equals the full energy difference, exhaustively") {
    const FieldSample fields{0.1, 0.37, -0.52};
    for (Boundary b : {Boundary::open, Boundary::periodic}) {
        const auto g = LatticeGeometry::build(2, 4, b);
        for (const auto& config : testing::enumerate_configurations(g.sites())) {
            for (int site = 0; site < g.sites(); ++site) {
                SpinConfiguration flipped = config;
                flipped.flip(site);
                const double expected = testing::brute_energy_erg(g, flipped, fields) -
                                        testing::brute_energy_erg(g, config, fields);
                CHECK(local_flip_cost(g, config, site, fields) ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("global flip negates sum_z, preserves sum_zz") {
    const auto g = LatticeGeometry::build(3, 3, Boundary::open);
    for (const char* text : {"+++------", "+-+-+-+-+", "++-++-++-"}) {
        const auto config = SpinConfiguration::parse(text);
        const auto obs = diagonal_observables(g, config);
        const auto flipped = diagonal_observables(g, config.global_flip());
        CHECK(flipped.sum_z == -obs.sum_z);
        CHECK(flipped.m_z == -obs.m_z);
        CHECK(flipped.sum_zz == obs.sum_zz);
        // energy invariant under global flip when bz = 0
        CHECK(diagonal_energy(g, config, {0.0, 0.0, 0.8}) ==
              doctest::Approx(diagonal_energy(g, config.global_flip(), {0.0, 0.0, 0.8}))
                  .epsilon(1e-14));
    }
}
