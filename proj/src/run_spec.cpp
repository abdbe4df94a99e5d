#include "sgi/run_spec.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sgi/errors.hpp"

namespace sgi {

ParticleSpec ParticleSpec::diamond(double mass_kg, const PhysicalConstants& k) {
    ParticleSpec p;
    p.mass = mass_kg;
    p.chi_m = -6.2e-9;
    p.mu_eff = k.g_factor * k.mu_b;
    return p;
}

double derive_omega(const ParticleSpec& p, const FieldSpec& f,
                    const PhysicalConstants& k) {
    if (p.chi_m >= 0.0)
        fail(ErrorCode::invalid_spec,
             "trap frequency undefined for non-diamagnetic particle (chi_m >= 0)");
    return std::sqrt(-p.chi_m / k.mu0) * f.eta;
}

double derive_alpha(const ParticleSpec& p, const FieldSpec& f,
                    const PhysicalConstants& k, int eta_sign) {
    if (p.mass == 0.0 || f.eta == 0.0 || eta_sign == 0)
        fail(ErrorCode::invalid_spec, "alpha requires non-zero mass and gradient");
    return -p.mu_eff * k.mu0 / (p.chi_m * p.mass * static_cast<double>(eta_sign) * f.eta);
}

double derive_epsilon(double omega_l_min, const PhysicalConstants& k) {
    // magnitude form of the Larmor floor relation
    return 2.0 * k.m_e * omega_l_min / (k.g_factor * k.e_charge);
}

double larmor_frequency(double b_magnitude, const PhysicalConstants& k) {
    return k.gyromagnetic_ratio() * std::abs(b_magnitude);
}

void RunSpec::resolve() {
    if (particle.mu_eff == 0.0) particle.mu_eff = constants.g_factor * constants.mu_b;
    if (field.epsilon <= 0.0 && field.omega_L_min > 0.0)
        field.epsilon = derive_epsilon(field.omega_L_min, constants);
    if (field.omega_L_min <= 0.0 && field.epsilon > 0.0)
        field.omega_L_min = larmor_frequency(field.epsilon, constants);
    if (field.B1 <= 0.0) field.B1 = numerics.b1_over_epsilon * field.epsilon;
}

double RunSpec::omega() const { return derive_omega(particle, field, constants); }

double RunSpec::alpha() const { return derive_alpha(particle, field, constants, +1); }

double RunSpec::trap_period() const { return 2.0 * std::numbers::pi / omega(); }

double RunSpec::sample_dt() const {
    return numerics.sample_dt > 0.0 ? numerics.sample_dt : trap_period() / 2000.0;
}

double RunSpec::switch_window() const {
    return numerics.switch_window_over_delta / field.delta;
}

namespace {

void check(std::vector<Violation>& out, bool ok, const std::string& invariant,
           double value, const std::string& detail) {
    if (!ok) out.push_back({invariant, value, detail});
}

} // namespace

std::vector<Violation> validate_spec(const RunSpec& run) {
    std::vector<Violation> v;
    const auto& k = run.constants;
    const auto& p = run.particle;
    const auto& f = run.field;
    const auto& n = run.numerics;

    check(v, k.mu0 > 0 && k.mu_b > 0 && k.e_charge > 0 && k.m_e > 0 && k.hbar > 0 &&
                 k.g_factor > 0,
          "constants.positive", 0.0, "all physical constants must be positive");

    check(v, p.mass > 0, "particle.mass_positive", p.mass, "mass must be > 0 kg");
    check(v, p.chi_m < 0, "particle.diamagnetic", p.chi_m,
          "chi_m must be negative (diamagnetic)");
    check(v, p.mu_eff >= 0, "particle.mu_eff_sign", p.mu_eff,
          "effective moment magnitude must be >= 0");
    check(v, p.mass >= 1e-17, "particle.mass_floor", p.mass,
          "default schedule is only valid for mass >= 1e-17 kg");

    check(v, f.B0 > 0, "field.B0_positive", f.B0, "bias field must be > 0 T");
    check(v, f.B1 > 0, "field.B1_positive", f.B1, "bridge field must be > 0 T");
    check(v, f.eta > 0, "field.eta_positive", f.eta, "gradient must be > 0 T/m");
    check(v, f.delta > 0, "field.delta_positive", f.delta,
          "switching frequency must be > 0 Hz");
    check(v, f.epsilon > 0, "field.epsilon_positive", f.epsilon,
          "field floor must be > 0 T");
    if (f.epsilon > 0) {
        check(v, f.B1 >= 10.0 * f.epsilon, "field.bridge_over_floor", f.B1,
              "bridge field must satisfy B1 >= 10 epsilon");
    }
    check(v, f.B1 < f.B0, "field.bridge_below_bias", f.B1,
          "bridge field must sit inside the stage-1 range (B1 < B0)");
    if (f.epsilon > 0 && f.omega_L_min > 0) {
        double eps_from_omega = derive_epsilon(f.omega_L_min, k);
        check(v, std::abs(eps_from_omega - f.epsilon) <= 1e-9 * f.epsilon,
              "field.larmor_link", f.omega_L_min,
              "epsilon and omega_L_min disagree through the Larmor relation");
        check(v, f.delta <= 1e-2 * f.omega_L_min, "field.switching_adiabatic",
              f.delta / f.omega_L_min,
              "switching must be slow against the Larmor floor "
              "(delta / omega_L_min <= 1e-2)");
    }

    check(v, n.integrator_rel_tol > 0 && n.integrator_rel_tol <= 1e-6,
          "numerics.integrator_tol", n.integrator_rel_tol,
          "integrator relative tolerance must be in (0, 1e-6]");
    check(v, n.closure_rel_tol > 0 && n.closure_rel_tol < 1,
          "numerics.closure_tol", n.closure_rel_tol,
          "closure tolerance must be in (0, 1)");
    check(v, n.phase_tolerance > 0, "numerics.phase_tolerance", n.phase_tolerance,
          "phase tolerance must be > 0 rad");
    check(v, n.b1_over_epsilon >= 10.0, "numerics.b1_ratio", n.b1_over_epsilon,
          "B1 / epsilon must be at least 10");
    check(v, n.switch_window_over_delta > 0, "numerics.switch_window",
          n.switch_window_over_delta, "switch window must be positive");
    check(v, n.sample_dt >= 0, "numerics.sample_dt", n.sample_dt,
          "sample_dt must be >= 0 (0 selects the default)");

    return v;
}

void require_valid(const RunSpec& run) {
    auto violations = validate_spec(run);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "invalid run specification (" << violations.size() << " violation"
        << (violations.size() == 1 ? "" : "s") << "):";
    for (const auto& viol : violations)
        msg << "\n  " << viol.invariant << " = " << viol.value << ": " << viol.detail;
    fail(ErrorCode::invalid_spec, msg.str());
}

} // namespace sgi
