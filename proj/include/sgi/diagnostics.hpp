#pragma once

#include "sgi/dynamics.hpp"

namespace sgi {

/// Spin-following margins along both arms: the field floor, the precession
/// rate-of-change bound and the switching-speed ratio.
struct AdiabaticityReport {
    double min_abs_b = 0.0;            // min |Bx| experienced [T]
    double min_omega_l = 0.0;          // rad/s
    double max_rate_ratio = 0.0;       // max |d omega_L / dt| / omega_L^2
    double delta_over_min_omega_l = 0.0;
    bool field_floor_ok = false;       // min |Bx| >= epsilon
    bool precession_ok = false;        // rate ratio < 0.1
    bool switching_ok = false;         // delta / omega_L^min < 0.1

    [[nodiscard]] bool ok() const {
        return field_floor_ok && precession_ok && switching_ok;
    }
};

AdiabaticityReport adiabaticity_report(const Trajectory&);

} // namespace sgi
