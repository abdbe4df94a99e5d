#include "sgi/field.hpp"

#include <cmath>
#include <limits>

#include "sgi/errors.hpp"

namespace sgi {

FieldVec FieldProfile::at(double x, double y) const {
    switch (kind) {
    case ProfileKind::gradient_positive: return {B0 - eta * x, eta * y};
    case ProfileKind::uniform:           return {B1, 0.0};
    case ProfileKind::gradient_negative: return {-(B0 - eta * x), -eta * y};
    }
    return {};
}

double FieldProfile::dbx_dx() const {
    switch (kind) {
    case ProfileKind::gradient_positive: return -eta;
    case ProfileKind::uniform:           return 0.0;
    case ProfileKind::gradient_negative: return eta;
    }
    return 0.0;
}

double FieldProfile::offset() const {
    switch (kind) {
    case ProfileKind::gradient_positive: return B0;
    case ProfileKind::uniform:           return B1;
    case ProfileKind::gradient_negative: return -B0;
    }
    return 0.0;
}

double FieldProfile::slope() const { return -dbx_dx(); }

double switching_weight(double t, double t_on, double t_off, double delta) {
    return 0.25 * (std::tanh(delta * (t - t_on)) + 1.0) *
           (std::tanh(delta * (t_off - t)) + 1.0);
}

Weights FieldSchedule::weights(double t) const {
    Weights w;
    w.w1 = std::isinf(t_mid1) ? 1.0 : 0.5 * (std::tanh(delta * (t_mid1 - t)) + 1.0);
    w.w3 = std::isinf(t_mid2) ? 0.0 : 0.5 * (std::tanh(delta * (t - t_mid2)) + 1.0);
    w.w2 = 1.0 - w.w1 - w.w3;
    return w;
}

FieldVec FieldSchedule::field(double x, double y, double t) const {
    Weights w = weights(t);
    double grad = (w.w1 - w.w3) * (B0 - eta * x);
    return {grad + w.w2 * B1, (w.w1 - w.w3) * eta * y};
}

double FieldSchedule::dbx_dx(double t) const {
    Weights w = weights(t);
    return (w.w3 - w.w1) * eta;
}

double FieldSchedule::offset(double t) const {
    Weights w = weights(t);
    return (w.w1 - w.w3) * B0 + w.w2 * B1;
}

double FieldSchedule::slope(double t) const {
    Weights w = weights(t);
    return (w.w1 - w.w3) * eta;
}

FieldSchedule FieldSchedule::from_run(const RunSpec& run, double t_mid1, double t_mid2) {
    FieldSchedule s;
    s.B0 = run.field.B0;
    s.B1 = run.field.B1;
    s.eta = run.field.eta;
    s.delta = run.field.delta;
    s.t_mid1 = t_mid1;
    s.t_mid2 = t_mid2;
    s.window = run.switch_window();
    return s;
}

std::optional<std::pair<double, double>> forbidden_interval(double b, double p,
                                                            double epsilon) {
    if (p == 0.0) return std::nullopt;
    double lo = (b - epsilon) / p;
    double hi = (b + epsilon) / p;
    if (lo > hi) std::swap(lo, hi);
    return std::make_pair(lo, hi);
}

std::optional<std::pair<double, double>> forbidden_interval(const FieldSchedule& s,
                                                            double t, double epsilon) {
    double p = s.slope(t);
    if (std::abs(p) < 1e-12 * s.eta) return std::nullopt; // effectively uniform
    return forbidden_interval(s.offset(t), p, epsilon);
}

MaxwellResidual maxwell_residuals(const FieldSchedule& s,
                                  std::span<const std::array<double, 3>> points,
                                  double h) {
    if (h <= 0.0) fail(ErrorCode::invalid_spec, "finite-difference step must be > 0");
    MaxwellResidual r;
    for (const auto& pt : points) {
        double x = pt[0], y = pt[1], t = pt[2];
        FieldVec xp = s.field(x + h, y, t), xm = s.field(x - h, y, t);
        FieldVec yp = s.field(x, y + h, t), ym = s.field(x, y - h, t);
        double dbx_dx = (xp.bx - xm.bx) / (2.0 * h);
        double dby_dy = (yp.by - ym.by) / (2.0 * h);
        double dby_dx = (xp.by - xm.by) / (2.0 * h);
        double dbx_dy = (yp.bx - ym.bx) / (2.0 * h);
        r.max_div = std::max(r.max_div, std::abs(dbx_dx + dby_dy));
        r.max_curl = std::max(r.max_curl, std::abs(dby_dx - dbx_dy));
    }
    return r;
}

} // namespace sgi
