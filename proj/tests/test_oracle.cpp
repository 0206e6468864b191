#include "doctest.h"

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "erasim/constants.hpp"
#include "erasim/oracle.hpp"

using namespace erasim;

namespace {

constexpr double kHGhz = constants::erg_per_ghz;

FieldPath constant_path(const FieldSample& fields, double duration_us, double dt_us) {
    std::vector<double> times;
    std::vector<FieldSample> samples;
    for (double t = 0.0; t <= duration_us + 1e-9; t += dt_us) {
        times.push_back(t);
        samples.push_back(fields);
    }
    return FieldPath(std::move(times), std::move(samples));
}

}  // namespace

TEST_CASE("hamiltonian: single Zeeman term") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const auto h = build_hamiltonian({0.0, 1.0, 0.0}, g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-kHGhz).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(kHGhz).epsilon(1e-12));
}

TEST_CASE("hamiltonian: mixed transverse and longitudinal single qubit") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const auto h = build_hamiltonian({1.0, 1.0, 0.0}, g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    CHECK(es.eigenvalues()(0) ==
          doctest::Approx(-std::sqrt(2.0) * kHGhz).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) ==
          doctest::Approx(std::sqrt(2.0) * kHGhz).epsilon(1e-12));
}

TEST_CASE("hamiltonian: null fields give the zero operator") {
    const auto g = LatticeGeometry::build(2, 2, Boundary::open);
    const auto h = build_hamiltonian({0.0, 0.0, 0.0}, g);
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hamiltonian rejects more than 8 sites") {
    const auto g = LatticeGeometry::build(2, 4, Boundary::open);
    CHECK(build_hamiltonian({0, 0, 0.1}, g).rows() == 256);
    const auto too_big = LatticeGeometry::build(3, 3, Boundary::open);
    CHECK_THROWS_AS(build_hamiltonian({0, 0, 0.1}, too_big), std::invalid_argument);
}

TEST_CASE("thermal state: null Hamiltonian is maximally mixed") {
    const auto g = LatticeGeometry::build(1, 3, Boundary::open);
    const auto rho = thermal_state(build_hamiltonian({0, 0, 0}, g), 1e-17);
    for (int i = 0; i < 8; ++i) {
        CHECK(rho.matrix()(i, i).real() == doctest::Approx(0.125).epsilon(1e-12));
    }
}

TEST_CASE("thermal state: zero-temperature limit projects on the ground state") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const auto rho =
        thermal_state(build_hamiltonian({0.0, 1.0, 0.0}, g), 1e-3 * kHGhz);
    CHECK(rho.matrix()(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rho.matrix()(1, 1).real() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("thermal state: two-spin ferromagnet populations by hand") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const double j = 0.3;
    const auto rho = thermal_state(build_hamiltonian({0.0, 0.0, j}, g), kt);
    const double w_aligned = std::exp(kHGhz * j / kt);
    const double w_anti = std::exp(-kHGhz * j / kt);
    const double z = 2.0 * (w_aligned + w_anti);
    CHECK(rho.matrix()(0, 0).real() == doctest::Approx(w_aligned / z).epsilon(1e-10));
    CHECK(rho.matrix()(1, 1).real() == doctest::Approx(w_anti / z).epsilon(1e-10));
    CHECK(rho.matrix()(2, 2).real() == doctest::Approx(w_anti / z).epsilon(1e-10));
    CHECK(rho.matrix()(3, 3).real() == doctest::Approx(w_aligned / z).epsilon(1e-10));
}

TEST_CASE("bloch components: reference states") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const auto mixed = thermal_state(build_hamiltonian({0, 0, 0}, g), 1e-17);
    for (const auto& v : bloch_components(mixed)) {
        CHECK(v.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(v.y == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(v.z == doctest::Approx(0.0).epsilon(1e-12));
    }

    Eigen::MatrixXcd all_up = Eigen::MatrixXcd::Zero(4, 4);
    all_up(0, 0) = 1.0;
    for (const auto& v : bloch_components(DenseOperatorState(all_up))) {
        CHECK(v.x == doctest::Approx(0.0));
        CHECK(v.z == doctest::Approx(1.0));
    }
}

TEST_CASE("bloch components: single-qubit Gibbs closed form") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const double bz = 0.6;
    const auto rho = thermal_state(build_hamiltonian({0.0, bz, 0.0}, g), kt);
    const auto bloch = bloch_components(rho);
    CHECK(bloch[0].x == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(bloch[0].y == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(bloch[0].z ==
          doctest::Approx(std::tanh(kHGhz * bz / kt)).epsilon(1e-10));
}

TEST_CASE("density operator validation") {
    Eigen::MatrixXcd bad_trace = Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(DenseOperatorState{bad_trace}, std::invalid_argument);

    Eigen::MatrixXcd not_hermitian = Eigen::MatrixXcd::Zero(2, 2);
    not_hermitian(0, 0) = 0.5;
    not_hermitian(1, 1) = 0.5;
    not_hermitian(0, 1) = 0.3;
    CHECK_THROWS_AS(DenseOperatorState{not_hermitian}, std::invalid_argument);

    Eigen::MatrixXcd negative = Eigen::MatrixXcd::Zero(2, 2);
    negative(0, 0) = 1.2;
    negative(1, 1) = -0.2;
    CHECK_THROWS_AS(DenseOperatorState{negative}, std::invalid_argument);
}

TEST_CASE("lindblad: unitary limit conserves purity") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(4, 4);
    rho0(0, 0) = 0.7;
    rho0(3, 3) = 0.3;
    const PiecewiseLinear bx({{0.0, 0.1}, {2.0, 0.4}});
    const PiecewiseLinear bz({{0.0, 0.2}, {2.0, 0.1}});
    const PiecewiseLinear j({{0.0, 0.1}, {2.0, 0.3}});
    LindbladOptions opts;
    opts.gamma_per_us = 0.0;
    opts.rel_tol = 1e-12;
    const auto result = lindblad_evolve(DenseOperatorState(rho0), g,
                                        direct_path(bx, bz, j, 2.0, 0.25), kt, opts);
    CHECK(result.final_state.purity() ==
          doctest::Approx(0.7 * 0.7 + 0.3 * 0.3).epsilon(1e-8));
}

TEST_CASE("lindblad: relaxation to the Gibbs state") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const FieldSample f{0.3, 0.5, 0.0};
    const auto h = build_hamiltonian(f, g);
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(2, 2);
    rho0(1, 1) = 1.0;  // excited-ish computational state
    LindbladOptions opts;
    opts.rel_tol = 1e-10;
    const auto result = lindblad_evolve(DenseOperatorState(rho0), g,
                                        constant_path(f, 25.0, 1.0), kt, opts);
    CHECK(trace_distance(result.final_state, thermal_state(h, kt)) < 1e-6);
}

TEST_CASE("lindblad: the Gibbs state is stationary") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const FieldSample f{0.25, 0.15, 0.35};
    const auto gibbs = thermal_state(build_hamiltonian(f, g), kt);
    const auto result =
        lindblad_evolve(gibbs, g, constant_path(f, 2.0, 0.5), kt, {});
    CHECK(trace_distance(result.final_state, gibbs) < 1e-8);
    // static Hamiltonian: no drive work at all
    CHECK(result.record.total_work() == 0.0);
}

TEST_CASE("lindblad: null path does nothing") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const auto mixed = thermal_state(Eigen::MatrixXcd::Zero(4, 4), kt);
    const auto result =
        lindblad_evolve(mixed, g, constant_path({0, 0, 0}, 3.0, 0.5), kt, {});
    CHECK(result.record.total_work() == 0.0);
    CHECK(result.record.total_heat() == 0.0);
}

TEST_CASE("lindblad: first law closes on a driven path") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const PiecewiseLinear bx({{0.0, 0.05}, {3.0, 0.35}, {6.0, 0.05}});
    const PiecewiseLinear bz({{0.0, 0.1}, {3.0, 0.25}, {6.0, 0.1}});
    const PiecewiseLinear j({{0.0, 0.3}, {3.0, 0.12}, {6.0, 0.3}});
    const auto path = direct_path(bx, bz, j, 6.0, 0.25);
    const auto rho0 = thermal_state(build_hamiltonian(path.at(0), g), kt);
    const auto result = lindblad_evolve(rho0, g, path, kt, {});
    const double du = result.record.delta_u();
    const double w = result.record.total_work();
    const double q = result.record.total_heat();
    const double scale =
        std::max({std::abs(w), std::abs(q), std::abs(du), kHGhz});
    CHECK(std::abs(du - w - q) < 1e-6 * scale);

    // per-channel split adds up to the total drive work
    CHECK(result.work_x_erg + result.work_z_erg + result.work_zz_erg ==
          doctest::Approx(w).epsilon(1e-9));
}

TEST_CASE("lindblad: bloch bound holds along the whole trajectory") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const PiecewiseLinear bx({{0.0, 0.05}, {2.0, 0.5}, {4.0, 0.05}});
    const PiecewiseLinear bz({{0.0, 0.0}, {2.0, 0.2}, {4.0, 0.0}});
    const PiecewiseLinear j({{0.0, 0.25}, {4.0, 0.25}});
    const auto path = direct_path(bx, bz, j, 4.0, 0.2);
    const auto rho0 = thermal_state(build_hamiltonian(path.at(0), g), kt);
    const auto result = lindblad_evolve(rho0, g, path, kt, {});
    for (const ExactForces& f : result.forces) {
        CHECK(std::abs(f.m_x) <= f.m_star + 1e-9);
    }
}

TEST_CASE("thermo record csv carries the declared header") {
    ThermoRecord record;
    record.t_us = {0.0, 1.0};
    record.internal_erg = {1e-18, 2e-18};
    record.work_erg = {0.0, 5e-19};
    record.heat_erg = {0.0, 5e-19};
    std::ostringstream out;
    record.write_csv(out);
    CHECK(out.str().rfind("t_us,U_erg,W_erg,Q_erg\n", 0) == 0);
}

TEST_CASE("free energy is consistent with the partition sum") {
    const auto g = LatticeGeometry::build(1, 1, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const double bz = 0.4;
    const double f = free_energy_erg(build_hamiltonian({0.0, bz, 0.0}, g), kt);
    const double expected = -kt * std::log(2.0 * std::cosh(kHGhz * bz / kt));
    CHECK(f == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("exact thermal observables match bloch output") {
    const auto g = LatticeGeometry::build(1, 2, Boundary::open);
    const double kt = kt_erg_from_mk(39.0);
    const FieldSample fields{0.2, 0.3, 0.25};
    const auto obs = exact_thermal_observables(fields, g, kt);
    const auto rho = thermal_state(build_hamiltonian(fields, g), kt);
    const auto bloch = bloch_components(rho);
    CHECK(obs.sz_per_site[0] == doctest::Approx(bloch[0].z).epsilon(1e-10));
    CHECK(obs.sz_per_site[1] == doctest::Approx(bloch[1].z).epsilon(1e-10));
}
