#include "sgi/phase.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sgi/errors.hpp"

namespace sgi {

StabilityBudget stability_budget(double B0, double tau_total, double phase_tol,
                                 const PhysicalConstants& k) {
    if (B0 <= 0.0 || tau_total <= 0.0 || phase_tol <= 0.0)
        fail(ErrorCode::invalid_spec, "stability budget needs positive inputs");
    double rate = 0.5 * k.gyromagnetic_ratio(); // g e / (4 m_e)
    return {phase_tol / (rate * B0), phase_tol / (rate * tau_total)};
}

double segment_kinetic_action(const SegmentSolution& seg, double ta, double tb,
                              double mass, const PhysicalConstants& k) {
    double slack = 1e-9 * std::max({1.0, std::abs(seg.t_start),
                                    std::isfinite(seg.t_end) ? std::abs(seg.t_end) : 0.0});
    if (ta < seg.t_start - slack || tb > seg.t_end + slack || tb < ta)
        fail(ErrorCode::invalid_spec, "action interval outside segment range");
    double w = seg.omega, A = seg.amplitude;
    double s = std::sin(2.0 * (w * tb + seg.phase)) - std::sin(2.0 * (w * ta + seg.phase));
    return (mass * w * w * A * A / (4.0 * k.hbar)) * ((tb - ta) - s / (2.0 * w));
}

namespace {

// integral of v^2 over [ta, tb] within one window piece, from the action
// accumulated by the integrator (Hermite-refined between nodes)
double window_v2_integral(const WindowPiece& w, double ta, double tb) {
    auto action_at = [&](double t) -> double {
        auto it = std::upper_bound(w.nodes.begin(), w.nodes.end(), t,
                                   [](double v, const WindowPiece::Node& n) {
                                       return v < n.t;
                                   });
        const WindowPiece::Node* n0 =
            it == w.nodes.begin() ? &w.nodes.front() : &*(it - 1);
        if (n0 == &w.nodes.back() || t == n0->t) return n0->action;
        const WindowPiece::Node* n1 = n0 + 1;
        // Hermite on the running integral, derivative v^2
        double h = n1->t - n0->t;
        double s = (t - n0->t) / h;
        double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * n0->action +
               (s3 - 2 * s2 + s) * h * (n0->v * n0->v) +
               (-2 * s3 + 3 * s2) * n1->action + (s3 - s2) * h * (n1->v * n1->v);
    };
    return action_at(tb) - action_at(ta);
}

// per-arm kinetic phase over [0, t_stop]
double arm_phase(const ArmPath& path, double t_stop, double mass,
                 const PhysicalConstants& k, const StageTimes& times,
                 PhaseBreakdown* b, double sign) {
    double total = 0.0;
    for (const Piece& p : path.pieces()) {
        if (p.t_start >= t_stop) break;
        double ta = p.t_start;
        double tb = std::min(p.t_end, t_stop);
        double part = 0.0;
        switch (p.kind) {
        case Piece::Kind::harmonic:
            part = segment_kinetic_action(p.segment, ta, tb, mass, k);
            break;
        case Piece::Kind::drift:
            part = mass / (2.0 * k.hbar) * p.drift.v0 * p.drift.v0 * (tb - ta);
            break;
        case Piece::Kind::window:
            part = mass / (2.0 * k.hbar) *
                   (tb >= p.t_end ? p.window.action_total()
                                  : window_v2_integral(p.window, ta, tb));
            break;
        }
        total += part;
        if (b) {
            if (p.kind == Piece::Kind::drift) b->drift += sign * part;
            else if (p.kind == Piece::Kind::window)
                (p.t_start < times.tau3 ? b->window1 : b->window2) += sign * part;
            else if (p.t_start == 0.0) b->stage1 += sign * part;
            else if (p.t_start < times.tau5) b->stage5 += sign * part;
            else b->final_stage += sign * part;
        }
    }
    return total;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double fa,
                        double m, double fm, double b, double fb, double whole,
                        double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, fa, m, fm, b, fb, whole, tol, 40);
}

} // namespace

double phase_difference_exact(const Trajectory& traj, PhaseBreakdown* breakdown) {
    if (traj.t.empty()) fail(ErrorCode::invalid_spec, "empty trajectory");
    double m = traj.run.particle.mass;
    double stop = traj.times.tau6;
    if (breakdown) *breakdown = {};
    double plus = arm_phase(traj.plus, stop, m, traj.run.constants, traj.times,
                            breakdown, +1.0);
    double minus = arm_phase(traj.minus, stop, m, traj.run.constants, traj.times,
                             breakdown, -1.0);
    return plus - minus;
}

double phase_difference_numeric(const Trajectory& traj, double rel_tol) {
    double m = traj.run.particle.mass;
    double stop = traj.times.tau6;
    auto f = [&](double t) {
        double vp = traj.plus.v_at(t);
        double vm = traj.minus.v_at(t);
        return vp * vp - vm * vm;
    };
    double vmax = 0.0;
    for (std::size_t i = 0; i < traj.t.size() && traj.t[i] <= stop; ++i)
        vmax = std::max({vmax, std::abs(traj.v_plus[i]), std::abs(traj.v_minus[i])});
    double scale = std::max(vmax * vmax * stop, 1e-300);

    const StageTimes& ts = traj.times;
    double cuts[7] = {0.0, ts.tau1, ts.tau2, ts.tau3, ts.tau4, ts.tau5, stop};
    double total = 0.0;
    for (int i = 0; i < 6; ++i) {
        double a = cuts[i], b = std::min(cuts[i + 1], stop);
        if (b <= a) continue;
        double tol = rel_tol * scale * (b - a) / stop;
        total += integrate(f, a, b, tol);
    }
    return m / (2.0 * traj.run.constants.hbar) * total;
}

double phase_difference_approx(const StageTimes& t, double B0,
                               const PhysicalConstants& k) {
    return k.gyromagnetic_ratio() * B0 * (2.0 * t.tau1 - 2.0 * t.tau5 + t.tau6);
}

double stage1_phase_closed_form(const Trajectory& traj) {
    const auto& pp = traj.plus.pieces();
    const auto& mp = traj.minus.pieces();
    if (pp.empty() || pp.front().kind != Piece::Kind::harmonic || mp.empty() ||
        mp.front().kind != Piece::Kind::harmonic)
        fail(ErrorCode::invalid_spec, "trajectory lacks stage-1 arcs");
    double ap = pp.front().segment.amplitude;
    double am = mp.front().segment.amplitude;
    double w = traj.run.omega();
    double m = traj.run.particle.mass;
    return m * w * w * traj.times.tau1 / (4.0 * traj.run.constants.hbar) *
           (ap * ap - am * am);
}

PhaseReport make_phase_report(const Trajectory& traj) {
    PhaseReport r;
    PhaseBreakdown b;
    r.dtheta_exact = phase_difference_exact(traj, &b);
    r.dtheta_numeric = phase_difference_numeric(traj);
    r.dtheta_approx = phase_difference_approx(traj.times, traj.run.field.B0,
                                              traj.run.constants);
    r.dtheta_windows = b.windows();
    double tau6 = traj.times.tau6;
    r.duty_factor =
        (2.0 * traj.times.tau1 - 2.0 * traj.times.tau5 + tau6) / tau6;
    r.prefactor = r.dtheta_approx / (traj.run.field.B0 * tau6);
    StabilityBudget s = stability_budget(traj.run.field.B0, tau6,
                                         traj.run.numerics.phase_tolerance,
                                         traj.run.constants);
    r.dt_max = s.dt_max;
    r.db0_max = s.db0_max;
    return r;
}

} // namespace sgi
