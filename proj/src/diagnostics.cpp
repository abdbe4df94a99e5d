#include "sgi/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "sgi/errors.hpp"

namespace sgi {

AdiabaticityReport adiabaticity_report(const Trajectory& traj) {
    if (traj.t.size() < 3) fail(ErrorCode::invalid_spec, "empty trajectory");
    const PhysicalConstants& k = traj.run.constants;
    double gyro = k.gyromagnetic_ratio();

    std::size_t last = traj.t.size();
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        if (traj.t[i] > traj.times.tau6) { last = i; break; }
    }
    if (last < 3) last = std::min<std::size_t>(3, traj.t.size());

    AdiabaticityReport r;
    r.min_abs_b = std::numeric_limits<double>::infinity();
    for (const auto* bx : {&traj.bx_plus, &traj.bx_minus}) {
        for (std::size_t i = 0; i < last; ++i)
            r.min_abs_b = std::min(r.min_abs_b, std::abs((*bx)[i]));
        // centred differences of omega_L along the sampled path
        for (std::size_t i = 1; i + 1 < last; ++i) {
            double wl = gyro * std::abs((*bx)[i]);
            if (wl <= 0.0) continue;
            double dwl = gyro * (std::abs((*bx)[i + 1]) - std::abs((*bx)[i - 1])) /
                         (traj.t[i + 1] - traj.t[i - 1]);
            r.max_rate_ratio = std::max(r.max_rate_ratio, std::abs(dwl) / (wl * wl));
        }
    }
    r.min_omega_l = gyro * r.min_abs_b;
    r.delta_over_min_omega_l =
        r.min_omega_l > 0.0 ? traj.run.field.delta / r.min_omega_l
                            : std::numeric_limits<double>::infinity();
    r.field_floor_ok = r.min_abs_b >= traj.run.field.epsilon;
    r.precession_ok = r.max_rate_ratio < 0.1;
    r.switching_ok = r.delta_over_min_omega_l < 0.1;
    return r;
}

} // namespace sgi
