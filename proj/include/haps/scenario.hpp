#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace haps {

/// Horizontal ground coordinate, z = 0 implied. SI meters.
struct GroundPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Flight envelope of the platform.
struct FlightLimits {
  double h_min = 20000.0;    // m
  double h_max = 30000.0;    // m
  double v_xy_max = 40.0;    // m/s
  double v_z_max = 30.0;     // m/s
  double bank_angle = 0.174532925199432957;  // rad, 10 deg default
  double obs_angle = 0.785398163397448310;   // rad, 45 deg default
};

/// Radar link-budget constants. All linear / SI.
struct SarParams {
  double g_t = 3162.2776601683795;   // 35 dB
  double g_r = 3162.2776601683795;   // 35 dB
  double sigma0 = 1.0;
  double tau_p = 1e-5;               // s
  double prf = 2.0;                  // Hz
  double t_o = 290.0;                // K
  double nf = 3.9810717055349722;    // 6 dB
  double b_r = 2e8;                  // Hz
  double l_tot = 10.0;               // 10 dB
  double kappa = 1.380649e-23;       // J/K
  double c = 2.99792458e8;           // m/s
};

/// Airframe constants for the propulsion-power model.
struct AeroParams {
  double c_d0 = 0.015;
  double s = 143.0;         // m^2
  double f_p = 0.85;
  double f_e = 0.90;
  double e_o = 0.6385;
  double ar_w = 30.0;
  double f_w = 165.0 * 9.80665;  // N (weight force)

  double induced_coeff() const;  // 1 / (pi * e_o * AR_w)
};

/// Immutable problem instance. All fields SI / linear after load.
struct Scenario {
  std::vector<GroundPoint> users;
  std::vector<GroundPoint> targets;
  std::vector<double> weights;       // beta_k > 0, one per user
  int m_antennas = 4;
  double wavelength = 0.15;          // m (never stated upstream; required here)
  double ref_gain = 1e3;             // rho_0, linear power ratio at 1 m
  double noise_power = 1e-9;         // sigma_k^2, W (same for every user)
  double rician_k = 10.0;            // K_u; >= ~1e12 treated as pure LOS
  FlightLimits flight;
  SarParams sar;
  AeroParams aero;
  double power_max = 10.0;           // W
  double bp_threshold = 0.0;         // Gamma, W
  double snr_min = 0.0;              // linear
  std::optional<double> e_start;     // J; absent = unconstrained
  double horizon = 80.0;             // T, s
  int slots = 8;                     // N
  std::uint64_t rng_seed = 1;
  std::optional<double> eps_disc;    // discretization accuracy check, if given

  double dt() const { return horizon / slots; }
  int num_users() const { return static_cast<int>(users.size()); }
  int num_targets() const { return static_cast<int>(targets.size()); }
  bool los_only() const { return rician_k >= 1e12; }
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Parse + validate a JSON scenario file. dB/dBm/km spellings are converted
/// to linear/W/m on load, so equivalent files produce bitwise-equal scenarios.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_json(const std::string& text);
std::string serialize_scenario(const Scenario& s);

/// Collects every invariant failure; throws ValidationError listing all.
void validate_scenario(const Scenario& s);

struct TimeGrid {
  double dt = 0.0;
  std::vector<double> midpoints;  // slot centers, n = 1..N
};
TimeGrid time_grid(const Scenario& s);

double db_to_linear(double db);
double dbm_to_watts(double dbm);

}  // namespace haps
