#pragma once

namespace sgi {

/// CODATA 2018 values, fixed here so every derived quantity and golden
/// output is bit-reproducible across builds.
struct PhysicalConstants {
    double mu0      = 1.25663706212e-6;  // vacuum permeability [T m / A]
    double mu_b     = 9.2740100783e-24;  // Bohr magneton [J / T]
    double e_charge = 1.602176634e-19;   // elementary charge [C]
    double m_e      = 9.1093837015e-31;  // electron mass [kg]
    double hbar     = 1.054571817e-34;   // reduced Planck constant [J s]
    double g_factor = 2.0;               // Lande g factor

    // spin precession rate per unit field, g e / (2 m_e) [rad s^-1 T^-1]
    [[nodiscard]] double gyromagnetic_ratio() const {
        return g_factor * e_charge / (2.0 * m_e);
    }
};

} // namespace sgi
