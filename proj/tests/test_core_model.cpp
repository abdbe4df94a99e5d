#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgi/errors.hpp"
#include "sgi/run_spec.hpp"

using namespace sgi;

namespace {

RunSpec default_run(double eta = 40.0, double eps = 3e-6) {
    RunSpec run;
    run.particle = ParticleSpec::diamond(1e-17, run.constants);
    run.field.B0 = 1e-2;
    run.field.eta = eta;
    run.field.delta = 1e3;
    run.field.epsilon = eps;
    run.resolve();
    return run;
}

} // namespace

TEST_CASE("trap frequency") {
    RunSpec run = default_run();
    CHECK(derive_omega(run.particle, run.field, run.constants) ==
          doctest::Approx(2.8096).epsilon(1e-3));

    run.field.eta = 4.0;
    CHECK(derive_omega(run.particle, run.field, run.constants) ==
          doctest::Approx(0.28096).epsilon(1e-3));

    run.field.eta = 0.0;
    CHECK(derive_omega(run.particle, run.field, run.constants) == 0.0);

    run.particle.chi_m = +6.2e-9;
    run.field.eta = 40.0;
    CHECK_THROWS_AS(derive_omega(run.particle, run.field, run.constants), SimError);
}

TEST_CASE("well displacement alpha") {
    RunSpec run = default_run();
    double a = derive_alpha(run.particle, run.field, run.constants, +1);
    CHECK(a == doctest::Approx(9.40e-6).epsilon(1e-3));
    CHECK(a > 0.0);

    run.particle.mass = 1e-16;
    CHECK(derive_alpha(run.particle, run.field, run.constants, +1) ==
          doctest::Approx(9.40e-7).epsilon(1e-3));

    run.particle.mass = 1e-17;
    CHECK(derive_alpha(run.particle, run.field, run.constants, -1) ==
          doctest::Approx(-a).epsilon(1e-12));

    run.particle.mass = 0.0;
    CHECK_THROWS_AS(derive_alpha(run.particle, run.field, run.constants, +1), SimError);
    run.particle.mass = 1e-17;
    run.field.eta = 0.0;
    CHECK_THROWS_AS(derive_alpha(run.particle, run.field, run.constants, +1), SimError);
}

TEST_CASE("alpha scales as 1/m at fixed gradient") {
    RunSpec run = default_run();
    double ref = derive_alpha(run.particle, run.field, run.constants, +1) *
                 run.particle.mass;
    for (double m : {2e-17, 7e-17, 1e-16, 3e-15, 1e-14}) {
        run.particle.mass = m;
        double prod = derive_alpha(run.particle, run.field, run.constants, +1) * m;
        CHECK(prod == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("omega is mass independent and linear in eta") {
    RunSpec run = default_run();
    double w40 = derive_omega(run.particle, run.field, run.constants);
    run.particle.mass = 5e-15;
    CHECK(derive_omega(run.particle, run.field, run.constants) == w40);
    run.field.eta = 80.0;
    CHECK(derive_omega(run.particle, run.field, run.constants) ==
          doctest::Approx(2.0 * w40).epsilon(1e-12));
}

TEST_CASE("field floor from the Larmor relation") {
    PhysicalConstants k;
    CHECK(derive_epsilon(1.7588e9, k) == doctest::Approx(1e-2).epsilon(1e-3));
    CHECK(derive_epsilon(0.0, k) == 0.0);
    CHECK(larmor_frequency(1e-2, k) == doctest::Approx(1.7588e9).epsilon(1e-4));

    // round trip is the identity
    for (double eps : {1e-6, 3.5e-6, 1e-2}) {
        double wl = larmor_frequency(eps, k);
        CHECK(derive_epsilon(wl, k) == doctest::Approx(eps).epsilon(1e-12));
    }
}

TEST_CASE("resolve fills derived quantities") {
    RunSpec run;
    run.particle = ParticleSpec::diamond(1e-17, run.constants);
    run.field.epsilon = 3e-6;
    run.resolve();
    CHECK(run.field.B1 == doctest::Approx(100.0 * 3e-6).epsilon(1e-12));
    CHECK(run.field.omega_L_min ==
          doctest::Approx(larmor_frequency(3e-6, run.constants)).epsilon(1e-12));
    CHECK(run.particle.mu_eff ==
          doctest::Approx(run.constants.g_factor * run.constants.mu_b).epsilon(1e-12));

    RunSpec other;
    other.particle = ParticleSpec::diamond(1e-17, other.constants);
    other.field.omega_L_min = larmor_frequency(3e-6, other.constants);
    other.resolve();
    CHECK(other.field.epsilon == doctest::Approx(3e-6).epsilon(1e-12));
}

TEST_CASE("validation accepts the reference parameter set") {
    RunSpec run = default_run();
    CHECK(validate_spec(run).empty());
    CHECK_NOTHROW(require_valid(run));
}

TEST_CASE("validation flags individual violations") {
    RunSpec run = default_run();
    run.particle.chi_m = +6.2e-9;
    auto v = validate_spec(run);
    REQUIRE(!v.empty());
    bool found = false;
    for (const auto& viol : v) found = found || viol.invariant == "particle.diamagnetic";
    CHECK(found);

    run = default_run();
    run.field.B1 = run.field.epsilon; // bridge equal to the floor
    v = validate_spec(run);
    found = false;
    for (const auto& viol : v)
        found = found || viol.invariant == "field.bridge_over_floor";
    CHECK(found);
}

TEST_CASE("validation reports every violation at once") {
    RunSpec run = default_run();
    run.particle.chi_m = 1.0;
    run.particle.mass = -1.0;
    run.field.delta = -5.0;
    auto v = validate_spec(run);
    CHECK(v.size() >= 3);
    CHECK_THROWS_AS(require_valid(run), SimError);
}

TEST_CASE("validation enforces switching adiabaticity") {
    RunSpec run = default_run();
    run.field.delta = 0.5 * run.field.omega_L_min; // far too fast
    auto v = validate_spec(run);
    bool found = false;
    for (const auto& viol : v)
        found = found || viol.invariant == "field.switching_adiabatic";
    CHECK(found);
}
