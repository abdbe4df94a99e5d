#include "sgi/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "sgi/diagnostics.hpp"
#include "sgi/errors.hpp"

namespace sgi {

namespace {

// reported stage-1 boundary for a trial epsilon; closed form on the
// analytic arc, no window integration needed
double tau1_for_epsilon(const RunSpec& base, double eps) {
    RunSpec run = base;
    run.field.epsilon = eps;
    run.field.omega_L_min = 0.0;
    run.field.B1 = 0.0;
    run.resolve();
    double omega = run.omega();
    SegmentSolution arc = harmonic_segment(
        run.numerics.x0, run.numerics.v0, 0.0,
        stage_center(1, initial_spin_sign(ArmLabel::plus), run.particle, run.field,
                     run.constants),
        omega);
    arc.arm = ArmLabel::plus;
    double event = detect_tau1(arc, run.field);
    bool centered = run.numerics.alignment == SwitchAlignment::centered_on_event;
    return centered ? event - 0.5 * run.switch_window() : event;
}

} // namespace

CalibrationResult calibrate_epsilon(double target_tau1, double eta,
                                    const RunSpec& run_template) {
    if (target_tau1 <= 0.0)
        fail(ErrorCode::invalid_spec, "target tau1 must be positive");
    RunSpec base = run_template;
    base.field.eta = eta;

    double lo = base.field.B0 * 1e-12;
    double hi = base.field.B0 / base.numerics.b1_over_epsilon * (1.0 - 1e-9);
    double t_lo = tau1_for_epsilon(base, lo);  // weakest bridge, latest handover
    double t_hi = tau1_for_epsilon(base, hi);
    if (target_tau1 > t_lo || target_tau1 < t_hi)
        fail(ErrorCode::no_event,
             "target tau1 not bracketed by the admissible epsilon range");

    CalibrationResult res;
    double tau1 = 0.0;
    for (res.iterations = 1; res.iterations <= 120; ++res.iterations) {
        double mid = 0.5 * (lo + hi);
        tau1 = tau1_for_epsilon(base, mid);
        if (tau1 > target_tau1) lo = mid; // larger epsilon brings the handover earlier
        else hi = mid;
        res.epsilon = mid;
        if (std::abs(tau1 - target_tau1) <= 1e-4 * target_tau1 &&
            (hi - lo) <= 1e-12 * hi)
            break;
    }
    res.achieved_tau1 = tau1;
    res.implied_omega_l_min = larmor_frequency(res.epsilon, base.constants);
    return res;
}

SweepRecord run_record(const RunSpec& run) {
    SweepRecord rec;
    rec.mass = run.particle.mass;
    rec.eta = run.field.eta;
    rec.B0 = run.field.B0;
    rec.B1 = run.field.B1;
    rec.epsilon = run.field.epsilon;
    try {
        StagePlan plan = build_plan(run);
        Trajectory traj;
        ClosureResult closure = solve_closure(plan, traj);
        rec.times = traj.times;
        rec.dx_max = closure.dx_max;
        rec.t_at_dx_max = closure.t_at_dx_max;
        rec.dtheta_exact = phase_difference_exact(traj);
        rec.closure_ok = closure.meets(run.numerics.closure_rel_tol);
        rec.field_floor_ok = min_experienced_field(traj) >= run.field.epsilon;
        rec.continuity_ok = max_boundary_mismatch(traj) <= 1e-9;
        rec.majorana_ok = closure.majorana_ok;
    } catch (const SimError& e) {
        rec.error = e.what();
    }
    return rec;
}

EtaSweep sweep_eta(std::span<const double> etas, const RunSpec& run_template) {
    EtaSweep sweep;
    for (double eta : etas) {
        RunSpec run = run_template;
        run.field.eta = eta;
        sweep.records.push_back(run_record(run));
    }
    double sum = 0.0;
    int n = 0;
    for (const auto& r : sweep.records)
        if (r.ok()) { sum += r.times.tau6 * r.eta; ++n; }
    if (n > 0) {
        sweep.tau6_eta_mean = sum / n;
        for (const auto& r : sweep.records)
            if (r.ok())
                sweep.tau6_eta_max_rel_dev =
                    std::max(sweep.tau6_eta_max_rel_dev,
                             std::abs(r.times.tau6 * r.eta / sweep.tau6_eta_mean - 1.0));
    }
    return sweep;
}

MassSweep sweep_mass(std::span<const double> masses, const RunSpec& run_template) {
    MassSweep sweep;
    for (double mass : masses) {
        if (mass < 1e-17 * (1.0 - 1e-12)) {
            SweepRecord rec;
            rec.mass = mass;
            rec.eta = run_template.field.eta;
            rec.B0 = run_template.field.B0;
            rec.B1 = run_template.field.B1;
            rec.epsilon = run_template.field.epsilon;
            rec.error = "mass below the 1e-17 kg validity floor of the default schedule";
            sweep.records.push_back(rec);
            continue;
        }
        RunSpec run = run_template;
        run.particle.mass = mass;
        sweep.records.push_back(run_record(run));
    }

    double sum_c = 0.0;
    int n = 0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& r : sweep.records) {
        if (!r.ok() || r.dx_max <= 0.0 || r.times.tau6 <= 0.0) continue;
        sum_c += r.dx_max * r.mass / r.times.tau6;
        double lx = std::log(r.mass), ly = std::log(r.dx_max);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n > 0) sweep.coefficient = sum_c / n;
    if (n > 1) {
        double denom = n * sxx - sx * sx;
        if (denom != 0.0) sweep.exponent = (n * sxy - sx * sy) / denom;
    }
    return sweep;
}

Table figure_paths(const Trajectory& traj) {
    Table t;
    t.header = {"t_s", "x_plus_m", "v_plus_mps", "x_minus_m", "v_minus_mps"};
    t.rows.reserve(traj.t.size());
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        t.rows.push_back({traj.t[i], traj.x_plus[i], traj.v_plus[i], traj.x_minus[i],
                          traj.v_minus[i]});
    return t;
}

Table figure_separation(const Trajectory& traj) {
    Table t;
    t.header = {"t_s", "dx_m"};
    t.rows.reserve(traj.t.size());
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        t.rows.push_back({traj.t[i], traj.dx[i]});
    return t;
}

Table figure_max_superposition(const MassSweep& sweep) {
    Table t;
    t.header = {"mass_kg", "tau6_s", "dx_max_m"};
    for (const auto& r : sweep.records)
        if (r.ok()) t.rows.push_back({r.mass, r.times.tau6, r.dx_max});
    return t;
}

Table figure_phase_scaling(std::span<const double> etas,
                           std::span<const double> masses,
                           const RunSpec& run_template) {
    Table t;
    t.header = {"mass_kg", "eta_T_per_m", "tau_total_s", "abs_dtheta_rad"};
    for (double mass : masses) {
        for (double eta : etas) {
            RunSpec run = run_template;
            run.particle.mass = mass;
            run.field.eta = eta;
            SweepRecord rec = run_record(run);
            if (rec.ok())
                t.rows.push_back({mass, eta, rec.times.tau6,
                                  std::abs(rec.dtheta_exact)});
        }
    }
    return t;
}

} // namespace sgi
