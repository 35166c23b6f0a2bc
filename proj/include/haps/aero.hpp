#pragma once

#include <optional>
#include <vector>

#include "haps/scenario.hpp"

namespace haps {

/// Stratospheric density from the quadratic altitude fit. Input meters,
/// valid on [18 km, 32 km]; outside the window the fit is untrusted.
double air_density(double z_m);

double thrust_full(double rho, double v, const AeroParams& aero);
double thrust_approx(double rho, double v, const AeroParams& aero);

/// Steady-circular-flight propulsion power; bank angle 0 gives SHF power.
/// Uses the approximate (parasitic-only) thrust when approx = true.
double scf_power(double rho, double v, const AeroParams& aero, double bank_angle,
                 bool approx = true);

/// Convex-in-z upper bound (P_max + c * rho(z)) * dt used inside the
/// trajectory subproblem; c = V_max^3 S C_D0 / (2 cos^2(bank) f_p f_e).
double energy_bound_coeff(const Scenario& s);

struct EnergyLedger {
  std::vector<double> per_slot;  // J, slot n = 1..N
  double cumulative = 0.0;
  std::optional<double> budget;
  bool feasible = true;
};

/// Slot energies (P_ave[n] + P_SCF[n]) dt from actual per-slot speeds and
/// densities along a trajectory given as altitudes + speeds.
EnergyLedger energy_ledger(const std::vector<double>& z,       // per slot, m
                           const std::vector<double>& speed,   // per slot, m/s
                           const std::vector<double>& p_ave,   // per slot, W
                           const Scenario& s);

}  // namespace haps
