#include "haps/aero.hpp"

#include <cmath>
#include <stdexcept>

namespace haps {

double air_density(double z_m) {
  if (z_m < 18000.0 || z_m > 32000.0)
    throw std::domain_error("air_density: fit valid only on [18 km, 32 km]");
  const double z = z_m / 1000.0;
  return (0.95162 * z * z - 52.29356 * z + 753.39927) * 1e-3;
}

double thrust_full(double rho, double v, const AeroParams& aero) {
  return thrust_approx(rho, v, aero) +
         2.0 * aero.induced_coeff() * aero.f_w * aero.f_w / (rho * aero.s * v * v);
}

double thrust_approx(double rho, double v, const AeroParams& aero) {
  return 0.5 * rho * v * v * aero.s * aero.c_d0;
}

double scf_power(double rho, double v, const AeroParams& aero, double bank_angle,
                 bool approx) {
  const double ft = approx ? thrust_approx(rho, v, aero) : thrust_full(rho, v, aero);
  const double shf = ft * v / (aero.f_p * aero.f_e);
  const double cb = std::cos(bank_angle);
  return shf / (cb * cb);
}

double energy_bound_coeff(const Scenario& s) {
  const double vx = s.flight.v_xy_max, vz = s.flight.v_z_max;
  const double vmax = std::sqrt(vx * vx + vz * vz);
  const double cb = std::cos(s.flight.bank_angle);
  return vmax * vmax * vmax * s.aero.s * s.aero.c_d0 /
         (2.0 * cb * cb * s.aero.f_p * s.aero.f_e);
}

EnergyLedger energy_ledger(const std::vector<double>& z,
                           const std::vector<double>& speed,
                           const std::vector<double>& p_ave, const Scenario& s) {
  if (z.size() != speed.size() || z.size() != p_ave.size())
    throw std::invalid_argument("energy_ledger: mismatched slot arrays");
  EnergyLedger ledger;
  ledger.budget = s.e_start;
  const double dt = s.dt();
  for (size_t n = 0; n < z.size(); ++n) {
    const double p_prop =
        scf_power(air_density(z[n]), speed[n], s.aero, s.flight.bank_angle);
    ledger.per_slot.push_back((p_ave[n] + p_prop) * dt);
    ledger.cumulative += ledger.per_slot.back();
  }
  ledger.feasible = !ledger.budget || ledger.cumulative <= *ledger.budget;
  return ledger;
}

}  // namespace haps
