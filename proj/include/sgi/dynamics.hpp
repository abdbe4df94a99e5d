#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sgi/field.hpp"
#include "sgi/run_spec.hpp"

namespace sgi {

enum class ArmLabel { plus, minus };

/// Instantaneous state of one interferometer arm. spin_sign is the current
/// effective moment orientation entering the potential; it flips exactly
/// once per run, at tau5. Arm "plus" is the arm whose stage-1 well sits at
/// B0/eta + alpha, which under the potential below carries spin_sign = -1.
struct ArmState {
    ArmLabel label = ArmLabel::plus;
    int spin_sign = -1;
    double x = 0.0;
    double v = 0.0;
    double t = 0.0;
};

inline int initial_spin_sign(ArmLabel label) {
    return label == ArmLabel::plus ? -1 : +1;
}

/// One analytic harmonic arc, x(t) = A cos(omega t + phi) + C.
struct SegmentSolution {
    double amplitude = 0.0;
    double phase = 0.0;
    double center = 0.0;
    double omega = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    ArmLabel arm = ArmLabel::plus;

    [[nodiscard]] double x_at(double t) const;
    [[nodiscard]] double v_at(double t) const;
};

struct DriftPiece {
    double x0 = 0.0, v0 = 0.0, t0 = 0.0;
    double t_start = 0.0, t_end = 0.0;

    [[nodiscard]] double x_at(double t) const { return x0 + v0 * (t - t0); }
};

/// Numerically integrated span (a switching window). Nodes are the accepted
/// integrator steps; "action" is the accumulated integral of v^2 from
/// t_start. Evaluation between nodes uses cubic Hermite interpolation.
struct WindowPiece {
    struct Node {
        double t = 0.0, x = 0.0, v = 0.0, a = 0.0, action = 0.0;
    };
    double t_start = 0.0, t_end = 0.0;
    std::vector<Node> nodes;

    [[nodiscard]] double x_at(double t) const;
    [[nodiscard]] double v_at(double t) const;
    [[nodiscard]] double action_total() const; // integral of v^2 over the window
};

struct Piece {
    enum class Kind { harmonic, drift, window };
    Kind kind = Kind::harmonic;
    double t_start = 0.0, t_end = 0.0;
    SegmentSolution segment{};
    DriftPiece drift{};
    WindowPiece window{};
};

/// Piecewise trajectory of one arm, contiguous in time from t = 0.
class ArmPath {
public:
    void add(Piece piece);
    [[nodiscard]] double x_at(double t) const;
    [[nodiscard]] double v_at(double t) const;
    [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }
    [[nodiscard]] double t_end() const;

private:
    [[nodiscard]] const Piece& piece_at(double t) const;
    std::vector<Piece> pieces_;
};

/// Full two-arm result: dense samples on a uniform grid plus the exact
/// piecewise representation used to generate them.
struct Trajectory {
    RunSpec run;
    FieldSchedule schedule;
    StageTimes times;
    bool tau6_degenerate = false; // dv was identically zero (alpha = 0)
    double t_end = 0.0;
    ArmPath plus;
    ArmPath minus;

    std::vector<double> t;
    std::vector<double> x_plus, v_plus, x_minus, v_minus;
    std::vector<double> bx_plus, bx_minus; // field experienced at the arm position
    std::vector<double> dx, dv;
};

// potential energy and acceleration of one arm at y = 0 under the blended field
double potential(double x, double t, int spin_sign, const FieldSchedule&,
                 const ParticleSpec&, const PhysicalConstants&);
double acceleration(double x, double t, int spin_sign, const FieldSchedule&,
                    const ParticleSpec&, const PhysicalConstants&);

/// Well centre of the active gradient profile (stage 1 or 5) for the given
/// spin orientation. Errors on the uniform stage.
double stage_center(int stage, int spin_sign, const ParticleSpec&, const FieldSpec&,
                    const PhysicalConstants&);

/// Harmonic arc through (x0, v0) at t0 about the given centre.
SegmentSolution harmonic_segment(double x0, double v0, double t0, double center,
                                 double omega);

/// First time t > segment.t_start at which the arm-plus arc reaches the
/// stage-1 handover position x = (B0 - B1) / eta.
double detect_tau1(const SegmentSolution& plus_arc, const FieldSpec&);

/// Time at which a free-drifting arm-minus state reaches x = (B0 + B1) / eta;
/// closed form, requires positive velocity.
double detect_tau3(const ArmState& minus_drift, const FieldSpec&);

struct WindowOutcome {
    ArmState end;
    WindowPiece piece;
};

/// Adaptive integration of one arm across [state.t, t_to] under the blended
/// field, landing exactly on every grid time in the span and on t_to.
WindowOutcome integrate_window(const ArmState& state, const FieldSchedule&,
                               double t_to, const ParticleSpec&,
                               const PhysicalConstants&, double rel_tol,
                               double grid_dt);

/// Reverses both arms' effective moment orientation (the tau5 operation).
/// Involutive; positions and velocities are untouched.
void apply_spin_flip(ArmState& a, ArmState& b);

/// First v_plus = v_minus instant after t_from on a pair of same-frequency
/// arcs; std::nullopt when the relative velocity vanishes identically
/// (indistinguishable arms).
std::optional<double> first_relative_velocity_zero(const SegmentSolution& plus,
                                                   const SegmentSolution& minus,
                                                   double t_from, double period);

/// Stage structure up to tau4, independent of the tau5 choice.
struct StagePlan {
    RunSpec run;
    FieldSchedule schedule;
    double event1 = 0.0; // detected stage-1 handover time
    double event3 = 0.0; // detected drift handover time
    double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0, tau4 = 0.0;
    ArmPath plus, minus;               // pieces covering [0, tau4]
    ArmState plus_at_tau4, minus_at_tau4;
    SegmentSolution seg5_plus, seg5_minus; // pre-flip stage-5 arcs from tau4
};

StagePlan build_plan(const RunSpec&);

/// Same stage assembly with the window boundaries imposed instead of
/// detected (sensitivity studies at a frozen schedule).
StagePlan plan_from_times(const RunSpec&, double tau1, double tau2, double tau3,
                          double tau4);

/// Post-flip analytic arcs for a candidate tau5.
struct FlipExtension {
    double tau5 = 0.0;
    SegmentSolution seg5_plus, seg5_minus;   // truncated at tau5
    SegmentSolution final_plus, final_minus; // swapped wells, from tau5
};

FlipExtension extend_plan(const StagePlan&, double tau5);

/// Seven-stage propagation with the spin flip at the given tau5 (> tau4).
/// The trajectory extends past the closure candidate; times.tau6 is the
/// first dv = 0 instant after tau5.
Trajectory simulate(const RunSpec&, double tau5);
Trajectory simulate(const StagePlan&, double tau5);

/// Propagation with all window boundaries frozen to the given times.
Trajectory simulate_fixed(const RunSpec&, const StageTimes& bounds, double tau5);

// diagnostics used by tests and the acceptance suite
double max_boundary_mismatch(const Trajectory&); // relative, across both arms
double max_energy_drift(const Trajectory&);      // relative, static stages only
double min_experienced_field(const Trajectory&); // min |Bx| along both arms

} // namespace sgi
