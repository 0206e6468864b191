#include "doctest.h"

#include <stdexcept>

#include <cmath>
#include <fstream>
#include <sstream>

#include "erasim/schedule.hpp"

using namespace erasim;

#ifndef ERASIM_SOURCE_DIR
#define ERASIM_SOURCE_DIR "."
#endif

TEST_CASE("device curves: minimal monotone table") {
    const auto curves = DeviceCurves::from_points({{0.0, 6.0, 0.1}, {1.0, 0.01, 9.0}});
    CHECK(curves.a(0.0) == 6.0);
    CHECK(curves.b(1.0) == 9.0);
    CHECK(curves.a(0.5) == doctest::Approx(0.5 * (6.0 + 0.01)));
}

TEST_CASE("device curves: validation failures") {
    std::istringstream non_monotone(
        "s,A_GHz,B_GHz\n0,6,0.1\n0.5,3,4\n0.4,2,5\n1,0.01,9\n");
    CHECK_THROWS_AS(DeviceCurves::load_csv(non_monotone), std::invalid_argument);

    std::istringstream short_table("s,A_GHz,B_GHz\n0,6,0.1\n");
    CHECK_THROWS_AS(DeviceCurves::load_csv(short_table), std::invalid_argument);

    std::istringstream negative("s,A_GHz,B_GHz\n0,6,-0.1\n1,0.01,9\n");
    CHECK_THROWS_AS(DeviceCurves::load_csv(negative), std::invalid_argument);

    std::istringstream bad_span("s,A_GHz,B_GHz\n0.1,6,0.1\n1,0.01,9\n");
    CHECK_THROWS_AS(DeviceCurves::load_csv(bad_span), std::invalid_argument);

    std::istringstream a_grows("s,A_GHz,B_GHz\n0,1,0.1\n0.5,2,3\n1,0.01,9\n");
    CHECK_THROWS_AS(DeviceCurves::load_csv(a_grows), std::invalid_argument);
}

TEST_CASE("shipped default curve file loads with the expected shape") {
    std::ifstream in(std::string(ERASIM_SOURCE_DIR) +
                     "/data/default_device_curves.csv");
    REQUIRE(in.good());
    const auto curves = DeviceCurves::load_csv(in);
    CHECK(curves.a(0.0) > curves.a(1.0));
    CHECK(curves.b(1.0) > curves.b(0.0));
    // matches the built-in synthetic table
    const auto synthetic = DeviceCurves::synthetic_default();
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        CHECK(curves.a(s) == doctest::Approx(synthetic.a(s)).epsilon(1e-12));
        CHECK(curves.b(s) == doctest::Approx(synthetic.b(s)).epsilon(1e-12));
    }
}

TEST_CASE("compile_path: constant program hits the device identity") {
    const auto curves = DeviceCurves::synthetic_default();
    const double j_coupler = 0.14;
    const ControlProgram program{
        PiecewiseLinear({{0.0, 1.0}, {10.0, 1.0}}),
        PiecewiseLinear({{0.0, 0.0}, {10.0, 0.0}}), j_coupler, 10.0};
    const auto path = compile_path(curves, program, 1.0);
    REQUIRE(path.size() == 11);
    for (std::size_t k = 0; k < path.size(); ++k) {
        CHECK(path.at(k).bx_ghz == doctest::Approx(curves.a(1.0) / 2).epsilon(1e-14));
        CHECK(path.at(k).bz_ghz == 0.0);
        CHECK(path.at(k).j_ghz ==
              doctest::Approx(curves.b(1.0) * j_coupler / 2).epsilon(1e-14));
    }
}

TEST_CASE("compile_path: forward ramp is monotone in the right directions") {
    const auto curves = DeviceCurves::synthetic_default();
    const ControlProgram program{
        PiecewiseLinear({{0.0, 0.0}, {20.0, 1.0}}),  // s = t / tau
        PiecewiseLinear({{0.0, 0.0}, {20.0, 0.0}}), 0.1, 20.0};
    const auto path = compile_path(curves, program, 0.5);
    for (std::size_t k = 1; k < path.size(); ++k) {
        CHECK(path.at(k).bx_ghz <= path.at(k - 1).bx_ghz + 1e-12);
        CHECK(path.at(k).j_ghz >= path.at(k - 1).j_ghz - 1e-12);
    }
}

TEST_CASE("compile_path: device-mode identity bz/j = g/J") {
    const auto curves = DeviceCurves::synthetic_default();
    const double j_coupler = 0.2;
    const ControlProgram program{
        PiecewiseLinear({{0.0, 0.3}, {8.0, 0.9}, {16.0, 0.5}}),
        PiecewiseLinear({{0.0, 0.1}, {16.0, 0.8}}), j_coupler, 16.0};
    const auto path = compile_path(curves, program, 0.25);
    for (std::size_t k = 0; k < path.size(); ++k) {
        const double t = path.time_us(k);
        const double g = 0.1 + (0.8 - 0.1) * t / 16.0;
        CHECK(path.at(k).bz_ghz / path.at(k).j_ghz ==
              doctest::Approx(g / j_coupler).epsilon(1e-12));
    }
}

TEST_CASE("compile_path rejects bad dt") {
    const auto curves = DeviceCurves::synthetic_default();
    const ControlProgram program{PiecewiseLinear({{0.0, 0.0}, {10.0, 1.0}}),
                                 PiecewiseLinear({{0.0, 0.0}, {10.0, 0.0}}), 0.1,
                                 10.0};
    CHECK_THROWS_AS(compile_path(curves, program, 20.0), std::invalid_argument);
    CHECK_THROWS_AS(compile_path(curves, program, 3.0), std::invalid_argument);
}

TEST_CASE("compile_path is deterministic") {
    const auto curves = DeviceCurves::synthetic_default();
    const ControlProgram program{
        PiecewiseLinear({{0.0, 0.2}, {12.0, 1.0}}),
        PiecewiseLinear({{0.0, 0.0}, {6.0, 0.4}, {12.0, 0.0}}), 0.15, 12.0};
    const auto a = compile_path(curves, program, 0.5);
    const auto b = compile_path(curves, program, 0.5);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.at(k).bx_ghz == b.at(k).bx_ghz);
        CHECK(a.at(k).bz_ghz == b.at(k).bz_ghz);
        CHECK(a.at(k).j_ghz == b.at(k).j_ghz);
    }
}

TEST_CASE("dt refinement agrees at coarse sample times exactly") {
    const PiecewiseLinear bx({{0.0, 0.01}, {40.0, 0.01}});
    const PiecewiseLinear bz({{0.0, 0.0}, {17.0, 0.2}, {40.0, 0.0}});
    const PiecewiseLinear j({{0.0, 0.7}, {23.0, 0.15}, {40.0, 0.7}});
    const auto coarse = direct_path(bx, bz, j, 40.0, 1.0);
    const auto fine = direct_path(bx, bz, j, 40.0, 0.5);
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        CHECK(fine.at(2 * k).bz_ghz == coarse.at(k).bz_ghz);
        CHECK(fine.at(2 * k).j_ghz == coarse.at(k).j_ghz);
        CHECK(fine.at(2 * k).bx_ghz == coarse.at(k).bx_ghz);
    }
}

TEST_CASE("classical preset satisfies its published shape") {
    const auto path = classical_preset(40.0);
    const PresetParams defaults;

    CHECK(path.size() == 41);
    CHECK(path.time_us(1) - path.time_us(0) == doctest::Approx(1.0));
    CHECK(path.is_closed_cycle());

    // starts in the ferromagnetic phase with no steering field
    CHECK(path.at(0).bz_ghz == 0.0);
    CHECK(path.at(0).j_ghz > 0.36);

    CHECK(path.max_bx_ghz() <= 0.02);

    // j dips below the critical region mid-protocol and returns
    double j_min = 1e9;
    for (std::size_t k = 0; k < path.size(); ++k) {
        j_min = std::min(j_min, path.at(k).j_ghz);
    }
    CHECK(j_min < 0.36);
    CHECK(j_min == doctest::Approx(defaults.j_low_ghz));
    CHECK(path.fields().back().j_ghz == doctest::Approx(defaults.j_high_ghz));

    // circumvents the critical point from above: bz > 0 wherever j = j_c
    const double j_c = 0.358;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double j0 = path.at(k).j_ghz, j1 = path.at(k + 1).j_ghz;
        if ((j0 - j_c) * (j1 - j_c) < 0.0) {
            const double frac = (j_c - j0) / (j1 - j0);
            const double bz =
                path.at(k).bz_ghz + frac * (path.at(k + 1).bz_ghz - path.at(k).bz_ghz);
            CHECK(bz > 0.05);
        }
    }
}

TEST_CASE("quantum preset adds a pulse around the critical crossings") {
    const auto classical = classical_preset(40.0);
    const auto quantum = quantum_preset(40.0);

    CHECK(quantum.is_closed_cycle());
    CHECK(quantum.at(0).bx_ghz <= 0.02);
    CHECK(quantum.fields().back().bx_ghz <= 0.02);
    CHECK(quantum.max_bx_ghz() > 10.0 * classical.max_bx_ghz());

    // shared longitudinal projection
    REQUIRE(classical.size() == quantum.size());
    for (std::size_t k = 0; k < quantum.size(); ++k) {
        CHECK(quantum.at(k).bz_ghz ==
              doctest::Approx(classical.at(k).bz_ghz).epsilon(0.05));
        CHECK(quantum.at(k).j_ghz ==
              doctest::Approx(classical.at(k).j_ghz).epsilon(0.05));
    }

    // pulse window contains both j_c crossings: bx above the floor there
    const double j_c = 0.358;
    const PresetParams defaults;
    int crossings = 0;
    for (std::size_t k = 0; k + 1 < quantum.size(); ++k) {
        const double j0 = quantum.at(k).j_ghz, j1 = quantum.at(k + 1).j_ghz;
        if ((j0 - j_c) * (j1 - j_c) < 0.0) {
            ++crossings;
            const double t_cross =
                quantum.time_us(k) + (j_c - j0) / (j1 - j0) *
                                         (quantum.time_us(k + 1) - quantum.time_us(k));
            CHECK(quantum.interpolate(t_cross).bx_ghz > 3.0 * defaults.bx_floor_ghz);
        }
    }
    CHECK(crossings == 2);
}

TEST_CASE("presets reject too-short durations") {
    CHECK_THROWS_AS(classical_preset(5.0), std::invalid_argument);
    CHECK_THROWS_AS(quantum_preset(9.9), std::invalid_argument);
}

TEST_CASE("field path csv round trip") {
    const auto path = quantum_preset(40.0);
    std::stringstream buffer;
    path.write_csv(buffer);
    const auto loaded = FieldPath::read_csv(buffer);
    REQUIRE(loaded.size() == path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        CHECK(loaded.time_us(k) == path.time_us(k));
        CHECK(loaded.at(k).bx_ghz == path.at(k).bx_ghz);
        CHECK(loaded.at(k).bz_ghz == path.at(k).bz_ghz);
        CHECK(loaded.at(k).j_ghz == path.at(k).j_ghz);
    }
}

TEST_CASE("bx onset time finds the pulse start") {
    const auto quantum = quantum_preset(40.0);
    const double onset = quantum.bx_onset_time_us(0.015);
    CHECK(onset > 11.9);
    CHECK(onset < 13.5);
    const auto classical = classical_preset(40.0);
    CHECK(classical.bx_onset_time_us(0.015) == 0.0);
}
