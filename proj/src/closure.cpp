#include "sgi/closure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "sgi/errors.hpp"
#include "sgi/roots.hpp"

namespace sgi {

bool ClosureResult::meets(double rel_tol) const {
    if (degenerate) return true;
    return std::abs(residual_dx) <= rel_tol * dx_max &&
           std::abs(residual_dv) <= rel_tol * max_abs_dv;
}

namespace {

struct Candidate {
    double tau6 = 0.0;
    double dx6 = 0.0;
    bool degenerate = false;
    FlipExtension ext;
};

// first dv = 0 after tau5 on the post-flip arcs
Candidate evaluate(const StagePlan& plan, double tau5, double period) {
    Candidate c;
    c.ext = extend_plan(plan, tau5);
    auto zero = first_relative_velocity_zero(c.ext.final_plus, c.ext.final_minus,
                                             tau5, period);
    if (!zero) {
        c.degenerate = true;
        c.tau6 = tau5;
        c.dx6 = 0.0;
        return c;
    }
    c.tau6 = *zero;
    c.dx6 = c.ext.final_plus.x_at(c.tau6) - c.ext.final_minus.x_at(c.tau6);
    return c;
}

// extremal |dx| of two same-frequency arcs over [ta, tb]
double max_abs_separation(const SegmentSolution& p, const SegmentSolution& m,
                          double ta, double tb) {
    double re = p.amplitude * std::cos(p.phase) - m.amplitude * std::cos(m.phase);
    double im = p.amplitude * std::sin(p.phase) - m.amplitude * std::sin(m.phase);
    double r = std::hypot(re, im);
    double psi = std::atan2(im, re);
    double dc = p.center - m.center;
    double w = p.omega;

    double best = std::max(std::abs(r * std::cos(w * ta + psi) + dc),
                           std::abs(r * std::cos(w * tb + psi) + dc));
    // interior extrema where the oscillatory part peaks
    double pi = std::numbers::pi;
    double k0 = std::ceil((w * ta + psi) / pi);
    for (double k = k0; k * pi <= w * tb + psi; k += 1.0) {
        double dxv = r * std::cos(k * pi) + dc;
        best = std::max(best, std::abs(dxv));
    }
    return best;
}

double analytic_dx_max(const StagePlan& plan, const Candidate& c) {
    double pre = max_abs_separation(plan.seg5_plus, plan.seg5_minus, plan.tau4,
                                    c.ext.tau5);
    double post = max_abs_separation(c.ext.final_plus, c.ext.final_minus, c.ext.tau5,
                                     c.tau6);
    return std::max(pre, post);
}

} // namespace

double tau6_given_tau5(const Trajectory& traj, bool* degenerate) {
    const auto& plus = traj.plus.pieces();
    const auto& minus = traj.minus.pieces();
    if (plus.empty() || plus.back().kind != Piece::Kind::harmonic ||
        minus.empty() || minus.back().kind != Piece::Kind::harmonic)
        fail(ErrorCode::invalid_spec, "trajectory lacks post-flip analytic arcs");
    auto zero = first_relative_velocity_zero(plus.back().segment,
                                             minus.back().segment, traj.times.tau5,
                                             traj.run.trap_period());
    if (degenerate) *degenerate = !zero.has_value();
    // identical arms: the earliest admissible instant counts as closed
    return zero ? *zero : traj.times.tau5 + traj.run.sample_dt();
}

namespace {

ClosureResult solve_closure_impl(const StagePlan& plan, Trajectory* traj_out) {
    const RunSpec& run = plan.run;
    double period = run.trap_period();
    int evals = 0;
    constexpr int kMaxEvals = 60;

    auto f = [&](double tau5) {
        ++evals;
        return evaluate(plan, tau5, period);
    };

    double tau5_0 = 2.0 * plan.tau4;
    Candidate c0 = f(tau5_0);

    ClosureResult res;
    if (c0.degenerate) {
        // identical arms: any flip time closes the loop trivially
        res.degenerate = true;
        res.tau5 = tau5_0;
        res.tau6 = tau5_0 + run.sample_dt();
        res.iterations = evals;
        Trajectory traj = simulate(plan, res.tau5);
        res.majorana_ok = traj.plus.x_at(res.tau6) >
                          (run.field.B0 + run.field.epsilon) / run.field.eta;
        if (traj_out) *traj_out = std::move(traj);
        return res;
    }

    // dx(tau6) decreases as tau5 grows, so march towards the sign change
    double lo = plan.tau4 + 1e-9 * period;
    double hi = plan.tau4 + 4.0 * period;
    double step = period / 8.0;
    double a = tau5_0, b = tau5_0;
    Candidate ca = c0, cb = c0;
    while (ca.dx6 < 0.0 && a > lo) {
        b = a; cb = ca;
        a = std::max(lo, a - step);
        ca = f(a);
        if (evals > kMaxEvals)
            fail(ErrorCode::no_closure, "no tau5 bracket found while marching down");
    }
    while (cb.dx6 > 0.0 && b < hi) {
        a = b; ca = cb;
        b = std::min(hi, b + step);
        cb = f(b);
        if (evals > kMaxEvals)
            fail(ErrorCode::no_closure, "no tau5 bracket found while marching up");
    }
    if (!(ca.dx6 >= 0.0 && cb.dx6 <= 0.0))
        fail(ErrorCode::no_closure,
             "dx(tau6) does not change sign within [tau4, tau4 + 4 periods]; "
             "the arms cannot be recombined for these parameters");

    // bisection/secant on g(tau5) = dx6, stopping on the residual criterion
    double tol_scale = run.numerics.closure_rel_tol;
    Candidate best = std::abs(ca.dx6) < std::abs(cb.dx6) ? ca : cb;
    double best_tau5 = std::abs(ca.dx6) < std::abs(cb.dx6) ? a : b;
    while (evals < kMaxEvals) {
        double dxmax = analytic_dx_max(plan, best);
        if (std::abs(best.dx6) <= tol_scale * dxmax) break;
        // secant proposal, guarded towards bisection
        double mid;
        if (cb.dx6 != ca.dx6) {
            mid = a - ca.dx6 * (b - a) / (cb.dx6 - ca.dx6);
            if (!(mid > a && mid < b)) mid = 0.5 * (a + b);
        } else {
            mid = 0.5 * (a + b);
        }
        Candidate cm = f(mid);
        if (std::abs(cm.dx6) < std::abs(best.dx6)) {
            best = cm;
            best_tau5 = mid;
        }
        if (cm.dx6 > 0.0) {
            a = mid; ca = cm;
        } else {
            b = mid; cb = cm;
        }
        if (b - a < 1e-15 * std::max(1.0, b)) break;
    }

    double dxmax_est = analytic_dx_max(plan, best);
    if (std::abs(best.dx6) > tol_scale * dxmax_est) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "closure residual %.3e m (tolerance %.3e m) not met within "
                      "60 iterations",
                      best.dx6, tol_scale * dxmax_est);
        fail(ErrorCode::no_closure, buf);
    }

    res.tau5 = best_tau5;
    res.tau6 = best.tau6;
    res.residual_dx = best.dx6;
    res.residual_dv = best.ext.final_plus.v_at(best.tau6) -
                      best.ext.final_minus.v_at(best.tau6);
    res.iterations = evals;

    Trajectory traj = simulate(plan, res.tau5);
    SuperpositionMax sup = max_superposition(traj);
    res.dx_max = sup.dx_max;
    res.t_at_dx_max = sup.t_at;
    double max_dv = 0.0;
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        if (traj.t[i] <= res.tau6) max_dv = std::max(max_dv, std::abs(traj.dv[i]));
    res.max_abs_dv = max_dv;
    res.majorana_ok = traj.plus.x_at(res.tau6) >
                      (run.field.B0 + run.field.epsilon) / run.field.eta;
    if (traj_out) *traj_out = std::move(traj);
    return res;
}

} // namespace

ClosureResult solve_closure(const StagePlan& plan) {
    return solve_closure_impl(plan, nullptr);
}

ClosureResult solve_closure(const StagePlan& plan, Trajectory& trajectory_out) {
    return solve_closure_impl(plan, &trajectory_out);
}

ClosureResult solve_closure(const RunSpec& run) {
    StagePlan plan = build_plan(run);
    return solve_closure_impl(plan, nullptr);
}

SuperpositionMax max_superposition(const Trajectory& traj) {
    SuperpositionMax out;
    if (traj.t.empty()) return out;
    std::size_t best = 0;
    std::size_t last = traj.t.size();
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        if (traj.t[i] > traj.times.tau6) { last = i; break; }
        if (std::abs(traj.dx[i]) > std::abs(traj.dx[best])) best = i;
    }
    double t_at = traj.t[best];
    double peak = std::abs(traj.dx[best]);
    if (best > 0 && best + 1 < last) {
        double ym = std::abs(traj.dx[best - 1]);
        double y0 = peak;
        double yp = std::abs(traj.dx[best + 1]);
        double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) {
            double s = 0.5 * (ym - yp) / denom;
            s = std::clamp(s, -0.5, 0.5);
            double dt = traj.t[best + 1] - traj.t[best];
            t_at += s * dt;
            peak = y0 - 0.25 * (ym - yp) * s;
        }
    }
    out.dx_max = peak;
    out.t_at = t_at;
    out.in_expected_window = t_at > traj.times.tau4 && t_at < traj.times.tau5;
    return out;
}

} // namespace sgi
