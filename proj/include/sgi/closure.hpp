#pragma once

#include "sgi/dynamics.hpp"

namespace sgi {

struct ClosureResult {
    double tau5 = 0.0;
    double tau6 = 0.0;
    double residual_dx = 0.0; // dx(tau6) [m]
    double residual_dv = 0.0; // dv(tau6) [m/s]
    double dx_max = 0.0;
    double t_at_dx_max = 0.0;
    double max_abs_dv = 0.0;  // scale for the dv residual ratio
    int iterations = 0;
    bool degenerate = false;  // dv identically zero (alpha = 0)
    bool majorana_ok = false; // x_plus(tau6) > (B0 + eps) / eta

    [[nodiscard]] bool meets(double rel_tol) const;
};

/// First dv = 0 instant after tau5 on the final analytic arcs of a
/// simulated trajectory. Sets *degenerate instead when dv vanishes
/// identically and returns the earliest admissible time.
double tau6_given_tau5(const Trajectory&, bool* degenerate = nullptr);

/// Nested search: a 1D root find over tau5 on dx(tau6(tau5)), with
/// tau6(tau5) itself the first dv zero. Initial guess 2 tau4; bracket
/// expansion assumes dx(tau6) decreases with tau5.
ClosureResult solve_closure(const RunSpec&);
ClosureResult solve_closure(const StagePlan&);
ClosureResult solve_closure(const StagePlan&, Trajectory& trajectory_out);

struct SuperpositionMax {
    double dx_max = 0.0;
    double t_at = 0.0;
    bool in_expected_window = false; // maximum inside (tau4, tau5)
};

/// Maximum |dx(t)| over the dense samples, refined by local quadratic
/// interpolation.
SuperpositionMax max_superposition(const Trajectory&);

} // namespace sgi
