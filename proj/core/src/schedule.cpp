#include "erasim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace erasim {

namespace {

double lerp(double x0, double y0, double x1, double y1, double x) {
    if (x1 == x0) return y0;
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

int grid_intervals(double duration_us, double dt_us) {
    if (dt_us <= 0.0) throw std::invalid_argument("dt must be positive");
    if (dt_us > duration_us) {
        throw std::invalid_argument("dt larger than the path duration");
    }
    const double k = duration_us / dt_us;
    const double rounded = std::round(k);
    if (std::abs(k - rounded) > 1e-9 * std::max(1.0, k)) {
        throw std::invalid_argument("dt must divide the path duration");
    }
    return static_cast<int>(rounded);
}

}  // namespace

DeviceCurves DeviceCurves::from_points(std::vector<CurvePoint> points) {
    if (points.size() < 2) {
        throw std::invalid_argument("device curves need at least 2 rows");
    }
    if (std::abs(points.front().s) > 1e-12 || std::abs(points.back().s - 1.0) > 1e-12) {
        throw std::invalid_argument("annealing parameter must span [0, 1]");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const CurvePoint& p = points[i];
        if (p.s < -1e-12 || p.s > 1.0 + 1e-12) {
            throw std::invalid_argument("annealing parameter out of [0, 1]");
        }
        if (p.a_ghz < 0.0 || p.b_ghz < 0.0) {
            throw std::invalid_argument("curve frequencies must be non-negative");
        }
        if (i > 0) {
            if (p.s <= points[i - 1].s) {
                throw std::invalid_argument("annealing parameter must be strictly increasing");
            }
            if (p.a_ghz > points[i - 1].a_ghz + 1e-12) {
                throw std::invalid_argument("A(s) must be non-increasing");
            }
            if (p.b_ghz < points[i - 1].b_ghz - 1e-12) {
                throw std::invalid_argument("B(s) must be non-decreasing");
            }
        }
    }
    DeviceCurves c;
    c.points_ = std::move(points);
    return c;
}

DeviceCurves DeviceCurves::load_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("empty device curve stream");
    }
    std::vector<CurvePoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CurvePoint p{};
        char comma1 = 0, comma2 = 0;
        std::istringstream row(line);
        if (!(row >> p.s >> comma1 >> p.a_ghz >> comma2 >> p.b_ghz) ||
            comma1 != ',' || comma2 != ',') {
            throw std::invalid_argument("malformed device curve row: " + line);
        }
        points.push_back(p);
    }
    return from_points(std::move(points));
}

DeviceCurves DeviceCurves::synthetic_default() {
    std::vector<CurvePoint> points;
    const int n = 51;
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / (n - 1);
        points.push_back({s, 6.0 * std::pow(0.01 / 6.0, s), 0.1 + 8.9 * s * s});
    }
    return from_points(std::move(points));
}

namespace {

double interp_curve(const std::vector<CurvePoint>& pts, double s, bool use_a) {
    if (s < -1e-12 || s > 1.0 + 1e-12) {
        throw std::invalid_argument("annealing parameter out of [0, 1]");
    }
    s = std::clamp(s, 0.0, 1.0);
    std::size_t hi = 1;
    while (hi + 1 < pts.size() && pts[hi].s < s) ++hi;
    const CurvePoint& p0 = pts[hi - 1];
    const CurvePoint& p1 = pts[hi];
    return use_a ? lerp(p0.s, p0.a_ghz, p1.s, p1.a_ghz, s)
                 : lerp(p0.s, p0.b_ghz, p1.s, p1.b_ghz, s);
}

}  // namespace

double DeviceCurves::a(double s) const { return interp_curve(points_, s, true); }
double DeviceCurves::b(double s) const { return interp_curve(points_, s, false); }

PiecewiseLinear::PiecewiseLinear(std::vector<Breakpoint> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty()) {
        throw std::invalid_argument("piecewise-linear function needs breakpoints");
    }
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        if (breakpoints_[i].t_us <= breakpoints_[i - 1].t_us) {
            throw std::invalid_argument("breakpoint times must be strictly increasing");
        }
    }
}

double PiecewiseLinear::operator()(double t_us) const {
    if (t_us <= breakpoints_.front().t_us) return breakpoints_.front().value;
    if (t_us >= breakpoints_.back().t_us) return breakpoints_.back().value;
    std::size_t hi = 1;
    while (breakpoints_[hi].t_us < t_us) ++hi;
    const Breakpoint& b0 = breakpoints_[hi - 1];
    const Breakpoint& b1 = breakpoints_[hi];
    return lerp(b0.t_us, b0.value, b1.t_us, b1.value, t_us);
}

FieldPath::FieldPath(std::vector<double> times_us, std::vector<FieldSample> fields)
    : times_us_(std::move(times_us)), fields_(std::move(fields)) {
    if (times_us_.empty() || times_us_.size() != fields_.size()) {
        throw std::invalid_argument("field path needs matching, non-empty samples");
    }
    if (times_us_.front() != 0.0) {
        throw std::invalid_argument("field path must start at t = 0");
    }
    for (std::size_t k = 1; k < times_us_.size(); ++k) {
        if (times_us_[k] <= times_us_[k - 1]) {
            throw std::invalid_argument("field path times must be strictly increasing");
        }
    }
}

FieldSample FieldPath::interpolate(double t_us) const {
    if (t_us <= times_us_.front()) return fields_.front();
    if (t_us >= times_us_.back()) return fields_.back();
    std::size_t hi = 1;
    while (times_us_[hi] < t_us) ++hi;
    const double t0 = times_us_[hi - 1], t1 = times_us_[hi];
    const FieldSample& f0 = fields_[hi - 1];
    const FieldSample& f1 = fields_[hi];
    return {lerp(t0, f0.bx_ghz, t1, f1.bx_ghz, t_us),
            lerp(t0, f0.bz_ghz, t1, f1.bz_ghz, t_us),
            lerp(t0, f0.j_ghz, t1, f1.j_ghz, t_us)};
}

bool FieldPath::is_closed_cycle(double tol_ghz) const {
    const FieldSample& f = fields_.front();
    const FieldSample& l = fields_.back();
    return std::abs(f.bx_ghz - l.bx_ghz) <= tol_ghz &&
           std::abs(f.bz_ghz - l.bz_ghz) <= tol_ghz &&
           std::abs(f.j_ghz - l.j_ghz) <= tol_ghz;
}

double FieldPath::max_bx_ghz() const {
    double m = fields_.front().bx_ghz;
    for (const FieldSample& f : fields_) m = std::max(m, f.bx_ghz);
    return m;
}

double FieldPath::bx_onset_time_us(double threshold_ghz) const {
    for (std::size_t k = 0; k < size(); ++k) {
        if (fields_[k].bx_ghz > threshold_ghz) {
            if (k == 0) return times_us_[0];
            // interpolate the crossing inside the previous interval
            const double b0 = fields_[k - 1].bx_ghz;
            const double b1 = fields_[k].bx_ghz;
            return lerp(b0, times_us_[k - 1], b1, times_us_[k], threshold_ghz);
        }
    }
    return times_us_.front();
}

void FieldPath::write_csv(std::ostream& out) const {
    out << "t_us,Bx_GHz,Bz_GHz,J_GHz\n";
    char buf[160];
    for (std::size_t k = 0; k < size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.17g,%.17g,%.17g\n", times_us_[k],
                      fields_[k].bx_ghz, fields_[k].bz_ghz, fields_[k].j_ghz);
        out << buf;
    }
}

FieldPath FieldPath::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("empty field path stream");
    }
    std::vector<double> times;
    std::vector<FieldSample> fields;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t = 0.0;
        FieldSample f{};
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream row(line);
        if (!(row >> t >> c1 >> f.bx_ghz >> c2 >> f.bz_ghz >> c3 >> f.j_ghz) ||
            c1 != ',' || c2 != ',' || c3 != ',') {
            throw std::invalid_argument("malformed field path row: " + line);
        }
        times.push_back(t);
        fields.push_back(f);
    }
    return FieldPath(std::move(times), std::move(fields));
}

FieldPath compile_path(const DeviceCurves& curves, const ControlProgram& program,
                       double dt_us) {
    if (program.duration_us <= 0.0) {
        throw std::invalid_argument("program duration must be positive");
    }
    const int intervals = grid_intervals(program.duration_us, dt_us);
    std::vector<double> times;
    std::vector<FieldSample> fields;
    times.reserve(intervals + 1);
    fields.reserve(intervals + 1);
    for (int k = 0; k <= intervals; ++k) {
        const double t = (k == intervals) ? program.duration_us : k * dt_us;
        const double s = program.s_of_t(t);
        const double a = curves.a(s);
        const double b = curves.b(s);
        times.push_back(t);
        fields.push_back({a / 2.0, b * program.g_of_t(t) / 2.0,
                          b * program.j_coupler / 2.0});
    }
    return FieldPath(std::move(times), std::move(fields));
}

FieldPath direct_path(const PiecewiseLinear& bx, const PiecewiseLinear& bz,
                      const PiecewiseLinear& j, double duration_us, double dt_us) {
    if (duration_us <= 0.0) {
        throw std::invalid_argument("path duration must be positive");
    }
    const int intervals = grid_intervals(duration_us, dt_us);
    std::vector<double> times;
    std::vector<FieldSample> fields;
    times.reserve(intervals + 1);
    fields.reserve(intervals + 1);
    for (int k = 0; k <= intervals; ++k) {
        const double t = (k == intervals) ? duration_us : k * dt_us;
        times.push_back(t);
        fields.push_back({bx(t), bz(t), j(t)});
    }
    return FieldPath(std::move(times), std::move(fields));
}

namespace {

FieldPath build_preset(double duration_us, const PresetParams& p, bool with_pulse) {
    if (duration_us < 10.0) {
        throw std::invalid_argument("preset duration must be at least 10 us");
    }
    const double tau = duration_us;
    const PiecewiseLinear j({{0.0, p.j_high_ghz},
                             {p.j_dip * tau, p.j_low_ghz},
                             {p.j_recover_end * tau, p.j_high_ghz},
                             {tau, p.j_high_ghz}});
    const PiecewiseLinear bz({{0.0, 0.0},
                              {p.bz_rise_start * tau, 0.0},
                              {p.bz_plateau_start * tau, p.bz_peak_ghz},
                              {p.bz_plateau_end * tau, p.bz_peak_ghz},
                              {p.bz_fall_end * tau, 0.0},
                              {tau, 0.0}});
    const PiecewiseLinear bx =
        with_pulse ? PiecewiseLinear({{0.0, p.bx_floor_ghz},
                                      {p.pulse_start * tau, p.bx_floor_ghz},
                                      {p.pulse_plateau_start * tau, p.bx_pulse_peak_ghz},
                                      {p.pulse_plateau_end * tau, p.bx_pulse_peak_ghz},
                                      {p.pulse_end * tau, p.bx_floor_ghz},
                                      {tau, p.bx_floor_ghz}})
                   : PiecewiseLinear({{0.0, p.bx_floor_ghz}, {tau, p.bx_floor_ghz}});
    return direct_path(bx, bz, j, tau, tau / p.intervals);
}

}  // namespace

FieldPath classical_preset(double duration_us, const PresetParams& params) {
    return build_preset(duration_us, params, false);
}

FieldPath quantum_preset(double duration_us, const PresetParams& params) {
    return build_preset(duration_us, params, true);
}

}  // namespace erasim
