#pragma once

#include "sgi/dynamics.hpp"

namespace sgi {

struct StabilityBudget {
    double dt_max = 0.0;  // timing jitter keeping the phase within tolerance [s]
    double db0_max = 0.0; // bias-field drift budget [T]
};

StabilityBudget stability_budget(double B0, double tau_total, double phase_tol,
                                 const PhysicalConstants&);

/// Kinetic action phase (m / 2 hbar) * integral of v^2 over [ta, tb] of a
/// harmonic arc, in closed form.
double segment_kinetic_action(const SegmentSolution&, double ta, double tb,
                              double mass, const PhysicalConstants&);

struct PhaseBreakdown {
    double stage1 = 0.0;
    double window1 = 0.0;
    double drift = 0.0;
    double window2 = 0.0;
    double stage5 = 0.0;
    double final_stage = 0.0;

    [[nodiscard]] double total() const {
        return stage1 + window1 + drift + window2 + stage5 + final_stage;
    }
    [[nodiscard]] double windows() const { return window1 + window2; }
};

/// theta_plus - theta_minus accumulated over [0, tau6]: closed forms on the
/// analytic pieces, integrator-accumulated action across the windows.
double phase_difference_exact(const Trajectory&, PhaseBreakdown* breakdown = nullptr);

/// Independent check: adaptive quadrature of v+^2 - v-^2 over [0, tau6]
/// using only trajectory evaluation.
double phase_difference_numeric(const Trajectory&, double rel_tol = 1e-9);

/// Duty-cycle approximation (g e B0 / 2 m_e) (2 tau1 - 2 tau5 + tau6).
double phase_difference_approx(const StageTimes&, double B0, const PhysicalConstants&);

/// Closed-form stage-1 phase difference from the actual arc amplitudes,
/// (m omega^2 tau1 / 4 hbar) (A+^2 - A-^2); equals (g e B0 / 2 m_e) tau1
/// when the arms start at rest at the origin.
double stage1_phase_closed_form(const Trajectory&);

struct PhaseReport {
    double dtheta_exact = 0.0;
    double dtheta_numeric = 0.0;
    double dtheta_approx = 0.0;
    double dtheta_windows = 0.0; // switching-window share of dtheta_exact
    double duty_factor = 0.0;    // (2 tau1 - 2 tau5 + tau6) / tau6
    double prefactor = 0.0;      // dtheta_approx / (B0 tau6) [rad / (T s)]
    double dt_max = 0.0;
    double db0_max = 0.0;
};

PhaseReport make_phase_report(const Trajectory&);

} // namespace sgi
