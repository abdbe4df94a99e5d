#pragma once

#include <span>
#include <string>
#include <vector>

#include "sgi/closure.hpp"
#include "sgi/phase.hpp"

namespace sgi {

struct CalibrationResult {
    double epsilon = 0.0;
    double implied_omega_l_min = 0.0;
    double achieved_tau1 = 0.0;
    int iterations = 0;
};

/// Bisection on epsilon (with B1 = b1_over_epsilon * epsilon) until the
/// reported stage-1 boundary matches target_tau1 to 1e-4 relative.
CalibrationResult calibrate_epsilon(double target_tau1, double eta,
                                    const RunSpec& run_template);

struct SweepRecord {
    double mass = 0.0, eta = 0.0, B0 = 0.0, B1 = 0.0, epsilon = 0.0;
    StageTimes times{};
    double dx_max = 0.0, t_at_dx_max = 0.0, dtheta_exact = 0.0;
    bool closure_ok = false, field_floor_ok = false, continuity_ok = false,
         majorana_ok = false;
    std::string error; // non-empty when the run failed outright

    [[nodiscard]] bool ok() const {
        return error.empty() && closure_ok && field_floor_ok && continuity_ok &&
               majorana_ok;
    }
};

SweepRecord run_record(const RunSpec&);

struct EtaSweep {
    std::vector<SweepRecord> records;
    double tau6_eta_mean = 0.0;
    double tau6_eta_max_rel_dev = 0.0;
};

/// One closed run per gradient value; epsilon is whatever the template
/// carries (a hardware floor, calibrated once, not re-tuned per run).
EtaSweep sweep_eta(std::span<const double> etas, const RunSpec& run_template);

struct MassSweep {
    std::vector<SweepRecord> records;
    double coefficient = 0.0; // mean of dx_max * m / tau6 [kg m / s]
    double exponent = 0.0;    // fitted power of m in dx_max ~ m^exponent
};

/// One closed run per mass. Masses below the 1e-17 kg validity floor are
/// rejected into the record's error field; the sweep continues.
MassSweep sweep_mass(std::span<const double> masses, const RunSpec& run_template);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table figure_paths(const Trajectory&);             // t, x+/-, v+/-
Table figure_separation(const Trajectory&);        // t, dx
Table figure_max_superposition(const MassSweep&);  // m, tau6, dx_max
/// |dtheta| against total runtime, one block per mass: solves closure at
/// every (eta, mass) pair.
Table figure_phase_scaling(std::span<const double> etas,
                           std::span<const double> masses,
                           const RunSpec& run_template);

} // namespace sgi
