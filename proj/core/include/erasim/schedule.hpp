#pragma once

#include <iosfwd>
#include <vector>

#include "erasim/field_sample.hpp"

namespace erasim {

// One row of an annealer control-curve table.
struct CurvePoint {
    double s;       // annealing parameter, in [0, 1]
    double a_ghz;   // transverse energy scale A(s)
    double b_ghz;   // longitudinal/coupling energy scale B(s)
};

// Tabulated device curves A(s), B(s) with linear interpolation on [0, 1].
// s must be strictly increasing from 0 to 1; A non-increasing, B
// non-decreasing, both non-negative.
class DeviceCurves {
public:
    static DeviceCurves from_points(std::vector<CurvePoint> points);

    // CSV "s,A_GHz,B_GHz" with a header row.
    static DeviceCurves load_csv(std::istream& in);

    // Smooth monotone stand-in for a real device table:
    //   A(s) = 6 * (0.01/6)^s   (6 -> 0.01 GHz)
    //   B(s) = 0.1 + 8.9 * s^2  (0.1 -> 9 GHz)
    static DeviceCurves synthetic_default();

    double a(double s) const;
    double b(double s) const;
    const std::vector<CurvePoint>& points() const { return points_; }

private:
    DeviceCurves() = default;
    std::vector<CurvePoint> points_;
};

struct Breakpoint {
    double t_us;
    double value;
};

// Piecewise-linear function of time defined by breakpoints with strictly
// increasing times. Evaluation outside [front, back] clamps to the ends.
class PiecewiseLinear {
public:
    explicit PiecewiseLinear(std::vector<Breakpoint> breakpoints);

    double operator()(double t_us) const;
    double front_time() const { return breakpoints_.front().t_us; }
    double back_time() const { return breakpoints_.back().t_us; }
    const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

private:
    std::vector<Breakpoint> breakpoints_;
};

// User program composed with the device curves:
//   bx(t) = A(s(t)) / 2,  bz(t) = B(s(t)) g(t) / 2,  j(t) = B(s(t)) J / 2.
// The coupler program J is a single dimensionless value fixed in time.
struct ControlProgram {
    PiecewiseLinear s_of_t;  // values must stay in [0, 1]
    PiecewiseLinear g_of_t;
    double j_coupler = 0.0;
    double duration_us = 0.0;
};

// Time-discretized effective field path.
class FieldPath {
public:
    FieldPath(std::vector<double> times_us, std::vector<FieldSample> fields);

    std::size_t size() const { return times_us_.size(); }
    double time_us(std::size_t k) const { return times_us_[k]; }
    const FieldSample& at(std::size_t k) const { return fields_[k]; }
    const std::vector<double>& times_us() const { return times_us_; }
    const std::vector<FieldSample>& fields() const { return fields_; }
    double duration_us() const { return times_us_.back(); }

    // Linear interpolation between samples; clamped outside the range.
    FieldSample interpolate(double t_us) const;

    bool is_closed_cycle(double tol_ghz = 1e-12) const;
    double max_bx_ghz() const;

    // First time at which bx exceeds `threshold_ghz`; used as the pulse
    // onset for the cooperative switching-time convention. Returns
    // front time if never exceeded (no pulse).
    double bx_onset_time_us(double threshold_ghz) const;

    // CSV "t_us,Bx_GHz,Bz_GHz,J_GHz"
    void write_csv(std::ostream& out) const;
    static FieldPath read_csv(std::istream& in);

private:
    std::vector<double> times_us_;
    std::vector<FieldSample> fields_;
};

// Sample the composed program on a uniform grid t = 0, dt, ..., duration.
// dt must divide the duration to within 1e-9 us.
FieldPath compile_path(const DeviceCurves& curves, const ControlProgram& program,
                       double dt_us);

// Sample directly specified per-channel breakpoint functions on a uniform
// grid; the construction mode for protocols not tied to device curves.
FieldPath direct_path(const PiecewiseLinear& bx, const PiecewiseLinear& bz,
                      const PiecewiseLinear& j, double duration_us, double dt_us);

// Default numeric choices for the erasure presets. Fractions are of the
// total duration. Both presets share the (bz, j) projection; they differ
// only in the transverse channel.
struct PresetParams {
    double j_high_ghz = 0.70;          // ferromagnetic start/end, above j_c
    double j_low_ghz = 0.15;           // paramagnetic dip, below j_c
    double bz_peak_ghz = 0.20;         // steering field plateau
    double bx_floor_ghz = 0.01;        // "effectively zero" transverse floor
    double bx_pulse_peak_ghz = 0.50;   // quantum tunneling pulse
    double j_dip = 0.5;                  // dip vertex
    double j_recover_end = 0.8;        // back at j_high; flat tail afterwards
    double bz_rise_start = 0.15;
    double bz_plateau_start = 0.35;
    double bz_plateau_end = 0.65;
    double bz_fall_end = 0.85;
    double pulse_start = 0.30;         // pulse spans the middle 40%
    double pulse_plateau_start = 0.40;
    double pulse_plateau_end = 0.60;
    double pulse_end = 0.70;
    int intervals = 40;                // samples = intervals + 1
};

// Closed-cycle erasure schedules. j dips from j_high through the critical
// region to j_low at mid-protocol and back; bz rises to a plateau around
// the dip and returns to zero, so the cycle passes the critical point on
// the bz > 0 side. The classical preset keeps bx at the floor throughout;
// the quantum preset adds a bx pulse covering both critical crossings.
FieldPath classical_preset(double duration_us, const PresetParams& params = {});
FieldPath quantum_preset(double duration_us, const PresetParams& params = {});

}  // namespace erasim
