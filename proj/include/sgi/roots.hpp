#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "sgi/errors.hpp"

namespace sgi {

/// Brent's method. Requires f(a) and f(b) of opposite sign (either may be 0).
inline double brent(const std::function<double(double)>& f, double a, double b,
                    double fa, double fb, double xtol, int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb))
        fail(ErrorCode::no_event, "root bracket does not straddle a sign change");

    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::signbit(fb) == std::signbit(fc)) {
            c = a; fc = fa; d = b - a; e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol1 = 2.0 * 2.220446049250313e-16 * std::abs(b) + 0.5 * xtol;
        double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
        fb = f(b);
    }
    return b;
}

/// Walks [a, b] in n uniform steps and returns the first subinterval with a
/// sign change (or a root hit exactly).
inline std::optional<std::pair<double, double>>
scan_for_sign_change(const std::function<double(double)>& f, double a, double b, int n) {
    double fa = f(a);
    if (fa == 0.0) return std::make_pair(a, a);
    double t_prev = a, f_prev = fa;
    for (int i = 1; i <= n; ++i) {
        double t = a + (b - a) * static_cast<double>(i) / n;
        double ft = f(t);
        if (ft == 0.0 || std::signbit(ft) != std::signbit(f_prev))
            return std::make_pair(t_prev, t);
        t_prev = t;
        f_prev = ft;
    }
    return std::nullopt;
}

} // namespace sgi
