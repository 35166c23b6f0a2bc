#include <cmath>
#include <numbers>

#include "doctest.h"
#include "haps/aero.hpp"

using namespace haps;

TEST_CASE("air density spot values") {
  CHECK(air_density(20000.0) == doctest::Approx(0.0882).epsilon(5e-4));
  CHECK(air_density(30000.0) == doctest::Approx(0.0411).epsilon(5e-4));
  CHECK(air_density(25000.0) < air_density(20000.0));
  CHECK_THROWS_AS(air_density(10000.0), std::domain_error);
  CHECK_THROWS_AS(air_density(40000.0), std::domain_error);
}

TEST_CASE("thrust decomposition") {
  const AeroParams aero;  // defaults
  const double rho = air_density(20000.0);
  const double v = 50.0;
  const double parasitic = 0.5 * rho * v * v * aero.s * aero.c_d0;
  const double induced =
      2.0 * aero.induced_coeff() * aero.f_w * aero.f_w / (rho * aero.s * v * v);
  CHECK(thrust_approx(rho, v, aero) == doctest::Approx(parasitic));
  CHECK(thrust_full(rho, v, aero) == doctest::Approx(parasitic + induced));
  CHECK(aero.induced_coeff() ==
        doctest::Approx(1.0 / (std::numbers::pi * 0.6385 * 30.0)));
}

TEST_CASE("circular-flight power: 15.46 kW reference point") {
  const AeroParams aero;
  // rho at 20 km, V = 50 m/s, level flight, parasitic-drag thrust.
  const double p = scf_power(0.0882, 50.0, aero, 0.0, /*approx=*/true);
  CHECK(p == doctest::Approx(15460.0).epsilon(0.005));
}

TEST_CASE("banked flight divides by cos^2") {
  const AeroParams aero;
  const double rho = air_density(22000.0);
  const double bank = 10.0 * std::numbers::pi / 180.0;
  const double level = scf_power(rho, 40.0, aero, 0.0);
  CHECK(scf_power(rho, 40.0, aero, bank) ==
        doctest::Approx(level / (std::cos(bank) * std::cos(bank))));
}

TEST_CASE("energy ledger sums slot draws against the budget") {
  Scenario s;
  s.users = {{0, 0}};
  s.targets = {{1, 0}};
  s.weights = {1.0};
  s.horizon = 80.0;
  s.slots = 4;
  const std::vector<double> z(4, 20000.0);
  const std::vector<double> speed(4, 40.0);
  const std::vector<double> p_ave(4, 10.0);

  SUBCASE("unconstrained when no budget is given") {
    const EnergyLedger l = energy_ledger(z, speed, p_ave, s);
    REQUIRE(l.per_slot.size() == 4);
    const double slot =
        (10.0 + scf_power(air_density(20000.0), 40.0, s.aero,
                          s.flight.bank_angle)) *
        20.0;
    CHECK(l.per_slot[0] == doctest::Approx(slot));
    CHECK(l.cumulative == doctest::Approx(4.0 * slot));
    CHECK(l.feasible);
    CHECK_FALSE(l.budget.has_value());
  }

  SUBCASE("budget violations are flagged") {
    s.e_start = 1.0;  // absurdly small
    const EnergyLedger l = energy_ledger(z, speed, p_ave, s);
    CHECK_FALSE(l.feasible);
    s.e_start = 1e9;
    CHECK(energy_ledger(z, speed, p_ave, s).feasible);
  }
}

TEST_CASE("energy bound coefficient") {
  Scenario s;
  s.users = {{0, 0}};
  s.targets = {{1, 0}};
  s.weights = {1.0};
  const double c = s.flight.v_xy_max;  // placeholder to silence unused warnings
  (void)c;
  const double vmax = std::sqrt(s.flight.v_xy_max * s.flight.v_xy_max +
                                s.flight.v_z_max * s.flight.v_z_max);
  const double expect =
      vmax * vmax * vmax * s.aero.s * s.aero.c_d0 /
      (2.0 * std::cos(s.flight.bank_angle) * std::cos(s.flight.bank_angle) *
       s.aero.f_p * s.aero.f_e);
  CHECK(energy_bound_coeff(s) == doctest::Approx(expect));
}
