#include "sgi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "sgi/errors.hpp"
#include "sgi/ode.hpp"
#include "sgi/roots.hpp"

namespace sgi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* arm_name(ArmLabel a) { return a == ArmLabel::plus ? "plus" : "minus"; }

} // namespace

double SegmentSolution::x_at(double t) const {
    return amplitude * std::cos(omega * t + phase) + center;
}

double SegmentSolution::v_at(double t) const {
    return -amplitude * omega * std::sin(omega * t + phase);
}

namespace {

// cubic Hermite between two nodes given values and first derivatives
double hermite(double t, double t0, double t1, double y0, double dy0, double y1,
               double dy1) {
    double h = t1 - t0;
    double s = (t - t0) / h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * dy0 +
           (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * dy1;
}

const WindowPiece::Node* window_bracket(const std::vector<WindowPiece::Node>& nodes,
                                        double t) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), t,
                               [](double v, const WindowPiece::Node& n) { return v < n.t; });
    if (it == nodes.begin()) return &nodes.front();
    return &*(it - 1);
}

} // namespace

double WindowPiece::x_at(double t) const {
    const Node* n0 = window_bracket(nodes, t);
    if (n0 == &nodes.back() || t == n0->t) return n0->x;
    const Node* n1 = n0 + 1;
    return hermite(t, n0->t, n1->t, n0->x, n0->v, n1->x, n1->v);
}

double WindowPiece::v_at(double t) const {
    const Node* n0 = window_bracket(nodes, t);
    if (n0 == &nodes.back() || t == n0->t) return n0->v;
    const Node* n1 = n0 + 1;
    return hermite(t, n0->t, n1->t, n0->v, n0->a, n1->v, n1->a);
}

double WindowPiece::action_total() const {
    return nodes.empty() ? 0.0 : nodes.back().action - nodes.front().action;
}

void ArmPath::add(Piece piece) {
    pieces_.push_back(std::move(piece));
}

const Piece& ArmPath::piece_at(double t) const {
    if (pieces_.empty()) fail(ErrorCode::invalid_spec, "empty trajectory");
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double v, const Piece& p) { return v < p.t_start; });
    if (it != pieces_.begin()) --it;
    return *it;
}

double ArmPath::x_at(double t) const {
    const Piece& p = piece_at(t);
    switch (p.kind) {
    case Piece::Kind::harmonic: return p.segment.x_at(t);
    case Piece::Kind::drift:    return p.drift.x_at(t);
    case Piece::Kind::window:   return p.window.x_at(t);
    }
    return 0.0;
}

double ArmPath::v_at(double t) const {
    const Piece& p = piece_at(t);
    switch (p.kind) {
    case Piece::Kind::harmonic: return p.segment.v_at(t);
    case Piece::Kind::drift:    return p.drift.v0;
    case Piece::Kind::window:   return p.window.v_at(t);
    }
    return 0.0;
}

double ArmPath::t_end() const { return pieces_.empty() ? 0.0 : pieces_.back().t_end; }

double potential(double x, double t, int spin_sign, const FieldSchedule& s,
                 const ParticleSpec& p, const PhysicalConstants& k) {
    double bx = s.field(x, 0.0, t).bx;
    return -(p.chi_m * p.mass / (2.0 * k.mu0)) * bx * bx -
           p.mu_eff * static_cast<double>(spin_sign) * bx;
}

double acceleration(double x, double t, int spin_sign, const FieldSchedule& s,
                    const ParticleSpec& p, const PhysicalConstants& k) {
    double bx = s.field(x, 0.0, t).bx;
    double dbx = s.dbx_dx(t);
    return (p.chi_m / k.mu0) * bx * dbx +
           (p.mu_eff * static_cast<double>(spin_sign) / p.mass) * dbx;
}

double stage_center(int stage, int spin_sign, const ParticleSpec& p,
                    const FieldSpec& f, const PhysicalConstants& k) {
    if (stage != 1 && stage != 5)
        fail(ErrorCode::invalid_spec,
             "no well centre in stage " + std::to_string(stage) +
                 " (uniform field has no minimum)");
    double a = derive_alpha(p, f, k, +1);
    double s = static_cast<double>(spin_sign);
    // minimum of the potential for the active gradient profile
    return stage == 1 ? f.B0 / f.eta - s * a : f.B0 / f.eta + s * a;
}

SegmentSolution harmonic_segment(double x0, double v0, double t0, double center,
                                 double omega) {
    if (omega <= 0.0) fail(ErrorCode::invalid_spec, "harmonic segment needs omega > 0");
    SegmentSolution seg;
    seg.center = center;
    seg.omega = omega;
    seg.t_start = t0;
    seg.t_end = kInf;
    double dev = x0 - center;
    seg.amplitude = std::hypot(dev, v0 / omega);
    // two-argument form keeps the x0 = C case well defined
    seg.phase = seg.amplitude > 0.0
                    ? std::atan2(-v0 / omega, dev) - omega * t0
                    : 0.0;
    return seg;
}

double detect_tau1(const SegmentSolution& arc, const FieldSpec& f) {
    double target = (f.B0 - f.B1) / f.eta;
    double lo = arc.center - arc.amplitude;
    double hi = arc.center + arc.amplitude;
    if (target < lo || target > hi)
        fail(ErrorCode::no_event,
             "stage-1 handover position " + std::to_string(target) +
                 " m is outside the reachable range of arm " + arm_name(arc.arm));
    double period = 2.0 * std::numbers::pi / arc.omega;
    auto fn = [&](double t) { return arc.x_at(t) - target; };
    double start = arc.t_start + period * 1e-12;
    auto bracket = scan_for_sign_change(fn, start, arc.t_start + 1.05 * period, 256);
    if (!bracket)
        fail(ErrorCode::no_event, "stage-1 handover position never crossed");
    if (bracket->first == bracket->second) return bracket->first;
    double xtol = 1e-12 * std::max(1.0, bracket->second);
    return brent(fn, bracket->first, bracket->second, fn(bracket->first),
                 fn(bracket->second), xtol);
}

double detect_tau3(const ArmState& state, const FieldSpec& f) {
    double target = (f.B0 + f.B1) / f.eta;
    if (state.x >= target) return state.t;
    if (state.v <= 0.0)
        fail(ErrorCode::no_event,
             "arm minus is not drifting forward (v = " + std::to_string(state.v) +
                 " m/s); gradient restore position unreachable");
    return state.t + (target - state.x) / state.v;
}

WindowOutcome integrate_window(const ArmState& state, const FieldSchedule& sched,
                               double t_to, const ParticleSpec& particle,
                               const PhysicalConstants& k, double rel_tol,
                               double grid_dt) {
    if (t_to <= state.t)
        fail(ErrorCode::invalid_spec, "window must extend forward in time");

    int spin = state.spin_sign;
    auto rhs = [&](double t, const std::array<double, 3>& y, std::array<double, 3>& dy) {
        dy[0] = y[1];
        dy[1] = acceleration(y[0], t, spin, sched, particle, k);
        dy[2] = y[1] * y[1];
    };

    double xscale = sched.B0 / sched.eta;
    double omega = std::sqrt(-particle.chi_m / k.mu0) * sched.eta;
    std::array<double, 3> abs_tol = {rel_tol * xscale, rel_tol * xscale * omega,
                                     rel_tol * xscale * xscale * omega};
    double dt0 = std::min({grid_dt, (t_to - state.t) / 10.0, 0.1 / sched.delta});
    AdaptiveRk<3, decltype(rhs)> rk(rhs, state.t, {state.x, state.v, 0.0}, rel_tol,
                                    abs_tol, dt0);

    // land exactly on every dense-output instant inside the span
    long k0 = static_cast<long>(std::floor(state.t / grid_dt)) + 1;
    for (long i = k0; static_cast<double>(i) * grid_dt < t_to; ++i) {
        double tg = static_cast<double>(i) * grid_dt;
        if (tg > state.t) rk.advance_to(tg);
    }
    rk.advance_to(t_to);

    WindowOutcome out;
    out.piece.t_start = state.t;
    out.piece.t_end = t_to;
    out.piece.nodes.reserve(rk.nodes().size());
    for (const auto& n : rk.nodes())
        out.piece.nodes.push_back({n.t, n.y[0], n.y[1], n.dydt[1], n.y[2]});
    out.end = state;
    out.end.x = rk.state()[0];
    out.end.v = rk.state()[1];
    out.end.t = t_to;
    return out;
}

void apply_spin_flip(ArmState& a, ArmState& b) {
    a.spin_sign = -a.spin_sign;
    b.spin_sign = -b.spin_sign;
}

namespace {

Piece make_harmonic(SegmentSolution seg, double t_start, double t_end) {
    Piece p;
    p.kind = Piece::Kind::harmonic;
    p.t_start = t_start;
    p.t_end = t_end;
    seg.t_start = t_start;
    seg.t_end = t_end;
    p.segment = seg;
    return p;
}

Piece make_drift(const ArmState& s, double t_end) {
    Piece p;
    p.kind = Piece::Kind::drift;
    p.t_start = s.t;
    p.t_end = t_end;
    p.drift = {s.x, s.v, s.t, s.t, t_end};
    return p;
}

Piece make_window(WindowPiece w) {
    Piece p;
    p.kind = Piece::Kind::window;
    p.t_start = w.t_start;
    p.t_end = w.t_end;
    p.window = std::move(w);
    return p;
}

struct ArmBuild {
    ArmLabel label;
    int spin;
    ArmPath path;
    ArmState state; // rolling state at the end of the last piece
};

} // namespace

StagePlan plan_from_times(const RunSpec& run, double tau1, double tau2, double tau3,
                          double tau4) {
    if (!(0.0 < tau1 && tau1 <= tau2 && tau2 <= tau3 && tau3 <= tau4))
        fail(ErrorCode::stage_overlap,
             "stage boundaries must satisfy 0 < tau1 <= tau2 <= tau3 <= tau4");

    StagePlan plan;
    plan.run = run;
    plan.tau1 = tau1;
    plan.tau2 = tau2;
    plan.tau3 = tau3;
    plan.tau4 = tau4;
    plan.schedule = FieldSchedule::from_run(run, 0.5 * (tau1 + tau2), 0.5 * (tau3 + tau4));

    double omega = run.omega();
    double grid = run.sample_dt();
    double rtol = run.numerics.integrator_rel_tol;

    ArmBuild arms[2] = {{ArmLabel::plus, initial_spin_sign(ArmLabel::plus), {}, {}},
                        {ArmLabel::minus, initial_spin_sign(ArmLabel::minus), {}, {}}};

    for (auto& arm : arms) {
        double c1 = stage_center(1, arm.spin, run.particle, run.field, run.constants);
        SegmentSolution seg =
            harmonic_segment(run.numerics.x0, run.numerics.v0, 0.0, c1, omega);
        seg.arm = arm.label;
        arm.path.add(make_harmonic(seg, 0.0, tau1));
        arm.state = {arm.label, arm.spin, seg.x_at(tau1), seg.v_at(tau1), tau1};

        auto w1 = integrate_window(arm.state, plan.schedule, tau2, run.particle,
                                   run.constants, rtol, grid);
        arm.path.add(make_window(std::move(w1.piece)));
        arm.state = w1.end;

        if (tau3 > tau2) {
            arm.path.add(make_drift(arm.state, tau3));
            arm.state.x = arm.state.x + arm.state.v * (tau3 - arm.state.t);
            arm.state.t = tau3;
        }

        auto w2 = integrate_window(arm.state, plan.schedule, tau4, run.particle,
                                   run.constants, rtol, grid);
        arm.path.add(make_window(std::move(w2.piece)));
        arm.state = w2.end;

        double c5 = stage_center(5, arm.spin, run.particle, run.field, run.constants);
        SegmentSolution seg5 =
            harmonic_segment(arm.state.x, arm.state.v, tau4, c5, omega);
        seg5.arm = arm.label;
        if (arm.label == ArmLabel::plus) {
            plan.plus = std::move(arm.path);
            plan.plus_at_tau4 = arm.state;
            plan.seg5_plus = seg5;
        } else {
            plan.minus = std::move(arm.path);
            plan.minus_at_tau4 = arm.state;
            plan.seg5_minus = seg5;
        }
    }
    return plan;
}

StagePlan build_plan(const RunSpec& run) {
    double omega = run.omega();
    double half = 0.5 * run.switch_window();
    bool begin = run.numerics.alignment == SwitchAlignment::begin_at_event;

    double c1p = stage_center(1, initial_spin_sign(ArmLabel::plus), run.particle,
                              run.field, run.constants);
    SegmentSolution arc = harmonic_segment(run.numerics.x0, run.numerics.v0, 0.0,
                                           c1p, omega);
    arc.arm = ArmLabel::plus;
    double event1 = detect_tau1(arc, run.field);

    double mid1 = begin ? event1 + half : event1;
    double tau1 = mid1 - half;
    double tau2 = mid1 + half;
    if (tau1 <= 0.0)
        fail(ErrorCode::invalid_spec,
             "first switching window would start before t = 0; shrink the window "
             "or use begin alignment");

    // the drift handover feeds back into the window-1 field through the
    // second crossover's tanh tail, so settle it by fixed point
    double mid2 = kInf;
    double event3 = kInf;
    for (int pass = 0; pass < 8; ++pass) {
        FieldSchedule sched = FieldSchedule::from_run(run, mid1, mid2);
        SegmentSolution m_arc =
            harmonic_segment(run.numerics.x0, run.numerics.v0, 0.0,
                             stage_center(1, initial_spin_sign(ArmLabel::minus),
                                          run.particle, run.field, run.constants),
                             omega);
        ArmState minus1{ArmLabel::minus, initial_spin_sign(ArmLabel::minus),
                        m_arc.x_at(tau1), m_arc.v_at(tau1), tau1};
        auto w1 = integrate_window(minus1, sched, tau2, run.particle, run.constants,
                                   run.numerics.integrator_rel_tol, run.sample_dt());
        event3 = detect_tau3(w1.end, run.field);
        double next = begin ? event3 + half : event3;
        if (!std::isinf(mid2) && std::abs(next - mid2) < 1e-12) {
            mid2 = next;
            break;
        }
        mid2 = next;
    }

    double tau3 = mid2 - half;
    double tau4 = mid2 + half;
    if (tau3 < tau2)
        fail(ErrorCode::stage_overlap,
             "switching windows overlap (uniform stage would last " +
                 std::to_string(tau3 - tau2) +
                 " s); reduce switch_window_over_delta or the window alignment");

    StagePlan plan = plan_from_times(run, tau1, tau2, tau3, tau4);
    plan.event1 = event1;
    plan.event3 = event3;
    return plan;
}

FlipExtension extend_plan(const StagePlan& plan, double tau5) {
    if (!(tau5 > plan.tau4))
        fail(ErrorCode::invalid_spec, "tau5 must lie beyond tau4 = " +
                                          std::to_string(plan.tau4) + " s");
    FlipExtension ext;
    ext.tau5 = tau5;
    ext.seg5_plus = plan.seg5_plus;
    ext.seg5_minus = plan.seg5_minus;
    ext.seg5_plus.t_end = tau5;
    ext.seg5_minus.t_end = tau5;

    ArmState plus{ArmLabel::plus, plan.plus_at_tau4.spin_sign,
                  ext.seg5_plus.x_at(tau5), ext.seg5_plus.v_at(tau5), tau5};
    ArmState minus{ArmLabel::minus, plan.minus_at_tau4.spin_sign,
                   ext.seg5_minus.x_at(tau5), ext.seg5_minus.v_at(tau5), tau5};
    apply_spin_flip(plus, minus);

    double omega = plan.run.omega();
    ext.final_plus = harmonic_segment(
        plus.x, plus.v, tau5,
        stage_center(5, plus.spin_sign, plan.run.particle, plan.run.field,
                     plan.run.constants),
        omega);
    ext.final_plus.arm = ArmLabel::plus;
    ext.final_plus.t_start = tau5;
    ext.final_minus = harmonic_segment(
        minus.x, minus.v, tau5,
        stage_center(5, minus.spin_sign, plan.run.particle, plan.run.field,
                     plan.run.constants),
        omega);
    ext.final_minus.arm = ArmLabel::minus;
    ext.final_minus.t_start = tau5;
    return ext;
}

std::optional<double> first_relative_velocity_zero(const SegmentSolution& p,
                                                   const SegmentSolution& m,
                                                   double t_from, double period) {
    auto dv = [&](double t) { return p.v_at(t) - m.v_at(t); };
    double vscale = p.omega * (std::abs(p.amplitude) + std::abs(m.amplitude));
    double floor = 1e-13 * vscale;

    double a = t_from + period * 1e-9;
    double b = t_from + 1.02 * period;
    double max_abs = 0.0;
    for (int i = 0; i <= 256; ++i) {
        double t = a + (b - a) * i / 256.0;
        max_abs = std::max(max_abs, std::abs(dv(t)));
    }
    if (max_abs <= floor || vscale == 0.0) return std::nullopt;

    auto bracket = scan_for_sign_change(dv, a, b, 256);
    if (!bracket)
        fail(ErrorCode::no_closure,
             "no relative-velocity zero within one trap period after the spin flip");
    if (bracket->first == bracket->second) return bracket->first;
    double xtol = 1e-13 * std::max(1.0, b);
    return brent(dv, bracket->first, bracket->second, dv(bracket->first),
                 dv(bracket->second), xtol);
}

Trajectory simulate(const StagePlan& plan, double tau5) {
    const RunSpec& run = plan.run;
    FlipExtension ext = extend_plan(plan, tau5);
    double period = run.trap_period();
    double dt = run.sample_dt();

    auto zero = first_relative_velocity_zero(ext.final_plus, ext.final_minus, tau5,
                                             period);
    bool degenerate = !zero.has_value();
    double tau6 = degenerate ? tau5 + dt : *zero;
    double t_end = tau6 + period / 16.0;

    Trajectory traj;
    traj.run = run;
    traj.schedule = plan.schedule;
    traj.times = {plan.tau1, plan.tau2, plan.tau3, plan.tau4, tau5, tau6};
    traj.tau6_degenerate = degenerate;
    traj.t_end = t_end;

    traj.plus = plan.plus;
    traj.plus.add(make_harmonic(ext.seg5_plus, plan.tau4, tau5));
    traj.plus.add(make_harmonic(ext.final_plus, tau5, t_end));
    traj.minus = plan.minus;
    traj.minus.add(make_harmonic(ext.seg5_minus, plan.tau4, tau5));
    traj.minus.add(make_harmonic(ext.final_minus, tau5, t_end));

    auto n_samples = static_cast<std::size_t>(std::floor(t_end / dt)) + 1;
    traj.t.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) traj.t.push_back(double(i) * dt);

    traj.x_plus.reserve(n_samples);
    traj.v_plus.reserve(n_samples);
    traj.x_minus.reserve(n_samples);
    traj.v_minus.reserve(n_samples);
    traj.bx_plus.reserve(n_samples);
    traj.bx_minus.reserve(n_samples);
    traj.dx.reserve(n_samples);
    traj.dv.reserve(n_samples);

    double eps = run.field.epsilon;
    for (double t : traj.t) {
        double xp = traj.plus.x_at(t), vp = traj.plus.v_at(t);
        double xm = traj.minus.x_at(t), vm = traj.minus.v_at(t);
        traj.x_plus.push_back(xp);
        traj.v_plus.push_back(vp);
        traj.x_minus.push_back(xm);
        traj.v_minus.push_back(vm);
        traj.bx_plus.push_back(plan.schedule.field(xp, 0.0, t).bx);
        traj.bx_minus.push_back(plan.schedule.field(xm, 0.0, t).bx);
        traj.dx.push_back(xp - xm);
        traj.dv.push_back(vp - vm);

        // the margin past tau6 is outside the interferometer proper
        if (eps > 0.0 && t <= tau6) {
            if (auto iv = forbidden_interval(plan.schedule, t, eps)) {
                for (double x : {xp, xm}) {
                    if (x > iv->first && x < iv->second)
                        fail(ErrorCode::forbidden_region,
                             "arm position " + std::to_string(x) +
                                 " m entered the low-field region at t = " +
                                 std::to_string(t) + " s");
                }
            }
        }
    }
    return traj;
}

Trajectory simulate(const RunSpec& run, double tau5) {
    return simulate(build_plan(run), tau5);
}

Trajectory simulate_fixed(const RunSpec& run, const StageTimes& b, double tau5) {
    return simulate(plan_from_times(run, b.tau1, b.tau2, b.tau3, b.tau4), tau5);
}

namespace {

double piece_x(const Piece& p, double t) {
    switch (p.kind) {
    case Piece::Kind::harmonic: return p.segment.x_at(t);
    case Piece::Kind::drift:    return p.drift.x_at(t);
    case Piece::Kind::window:   return p.window.x_at(t);
    }
    return 0.0;
}

double piece_v(const Piece& p, double t) {
    switch (p.kind) {
    case Piece::Kind::harmonic: return p.segment.v_at(t);
    case Piece::Kind::drift:    return p.drift.v0;
    case Piece::Kind::window:   return p.window.v_at(t);
    }
    return 0.0;
}

} // namespace

double max_boundary_mismatch(const Trajectory& traj) {
    double xscale = traj.run.field.B0 / traj.run.field.eta;
    double vscale = traj.run.omega() * xscale;
    double worst = 0.0;
    for (const ArmPath* path : {&traj.plus, &traj.minus}) {
        const auto& ps = path->pieces();
        for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
            double tb = ps[i].t_end;
            double dxm = std::abs(piece_x(ps[i], tb) - piece_x(ps[i + 1], tb)) / xscale;
            double dvm = std::abs(piece_v(ps[i], tb) - piece_v(ps[i + 1], tb)) / vscale;
            worst = std::max({worst, dxm, dvm});
        }
    }
    return worst;
}

double max_energy_drift(const Trajectory& traj) {
    const RunSpec& run = traj.run;
    double saturation = 12.0 / run.field.delta; // tanh weights terminal past this
    double mid1 = traj.schedule.t_mid1, mid2 = traj.schedule.t_mid2;

    auto saturated = [&](double t) {
        return std::abs(t - mid1) >= saturation && std::abs(t - mid2) >= saturation;
    };

    // the spin flip at tau5 changes the potential, so stage 5 splits there;
    // spans are half-open to keep each one under a single spin orientation
    struct Span { double a, b; int flip; };
    const Span spans[4] = {{0.0, traj.times.tau1, +1},
                           {traj.times.tau2, traj.times.tau3, +1},
                           {traj.times.tau4, traj.times.tau5, +1},
                           {traj.times.tau5, traj.t_end, -1}};

    double worst = 0.0;
    for (int armi = 0; armi < 2; ++armi) {
        const auto& xs = armi == 0 ? traj.x_plus : traj.x_minus;
        const auto& vs = armi == 0 ? traj.v_plus : traj.v_minus;
        int spin0 = initial_spin_sign(armi == 0 ? ArmLabel::plus : ArmLabel::minus);
        for (const auto& span : spans) {
            double emin = kInf, emax = -kInf, ke_max = 0.0;
            int count = 0;
            for (std::size_t i = 0; i < traj.t.size(); ++i) {
                double t = traj.t[i];
                if (t < span.a || t >= span.b || !saturated(t)) continue;
                double ke = 0.5 * run.particle.mass * vs[i] * vs[i];
                double en = ke + potential(xs[i], t, span.flip * spin0, traj.schedule,
                                           run.particle, run.constants);
                emin = std::min(emin, en);
                emax = std::max(emax, en);
                ke_max = std::max(ke_max, ke);
                ++count;
            }
            if (count < 2) continue;
            double scale = std::max(std::abs(emax), ke_max);
            if (scale > 0.0) worst = std::max(worst, (emax - emin) / scale);
        }
    }
    return worst;
}

double min_experienced_field(const Trajectory& traj) {
    double m = kInf;
    for (std::size_t i = 0; i < traj.t.size() && traj.t[i] <= traj.times.tau6; ++i) {
        m = std::min(m, std::abs(traj.bx_plus[i]));
        m = std::min(m, std::abs(traj.bx_minus[i]));
    }
    return m;
}

} // namespace sgi
