#include "haps/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace haps {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double AeroParams::induced_coeff() const {
  return 1.0 / (std::numbers::pi * e_o * ar_w);
}

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void schema_fail(const std::string& path, const std::string& msg) {
  throw SchemaError(path + ": " + msg);
}

class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema_fail(path_, "expected an object");
  }

  ~Obj() = default;

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) schema_fail(path_ + "." + it.key(), "unknown key");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key) {
    mark(key);
    const json& v = j_.at(key);
    if (!v.is_number()) schema_fail(path_ + "." + key, "expected a number");
    return v.get<double>();
  }

  // Value given either linearly or with a unit-suffixed alternate spelling.
  // conv maps the suffixed value to the canonical unit.
  bool alt(const std::string& key, const std::string& suffix,
           double (*conv)(double), double* out) {
    const std::string alt_key = key + suffix;
    if (j_.contains(key) && j_.contains(alt_key))
      schema_fail(path_ + "." + key, "given both linearly and as " + alt_key);
    if (j_.contains(key)) {
      *out = number(key);
      return true;
    }
    if (j_.contains(alt_key)) {
      *out = conv(number(alt_key));
      return true;
    }
    return false;
  }

  const json& raw(const std::string& key) {
    mark(key);
    return j_.at(key);
  }

  const json& node() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  void mark(const std::string& key) const { seen_.insert(key); }
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

double km_to_m(double km) { return km * 1000.0; }
double deg_to_rad(double deg) { return deg * kDegToRad; }
double kg_to_newton(double kg) { return kg * 9.80665; }

std::vector<GroundPoint> parse_points(const json& j, const std::string& path) {
  if (!j.is_array()) schema_fail(path, "expected an array of {x, y} points");
  std::vector<GroundPoint> pts;
  for (size_t i = 0; i < j.size(); ++i) {
    Obj o(j[i], path + "[" + std::to_string(i) + "]");
    GroundPoint p;
    p.x = o.number("x");
    p.y = o.number("y");
    o.finish();
    pts.push_back(p);
  }
  return pts;
}

FlightLimits parse_flight(const json& j, const std::string& path) {
  Obj o(j, path);
  FlightLimits f;
  o.alt("H_min", "_km", km_to_m, &f.h_min);
  o.alt("H_max", "_km", km_to_m, &f.h_max);
  if (o.has("V_xy_max")) f.v_xy_max = o.number("V_xy_max");
  if (o.has("V_z_max")) f.v_z_max = o.number("V_z_max");
  o.alt("bank_angle", "_deg", deg_to_rad, &f.bank_angle);
  o.alt("obs_angle", "_deg", deg_to_rad, &f.obs_angle);
  o.finish();
  return f;
}

SarParams parse_sar(const json& j, const std::string& path) {
  Obj o(j, path);
  SarParams p;
  o.alt("G_t", "_dB", db_to_linear, &p.g_t);
  o.alt("G_r", "_dB", db_to_linear, &p.g_r);
  if (o.has("sigma0")) p.sigma0 = o.number("sigma0");
  if (o.has("tau_p")) p.tau_p = o.number("tau_p");
  if (o.has("PRF")) p.prf = o.number("PRF");
  if (o.has("T_o")) p.t_o = o.number("T_o");
  o.alt("NF", "_dB", db_to_linear, &p.nf);
  if (o.has("B_r")) p.b_r = o.number("B_r");
  o.alt("L_tot", "_dB", db_to_linear, &p.l_tot);
  if (o.has("kappa")) p.kappa = o.number("kappa");
  if (o.has("c")) p.c = o.number("c");
  o.finish();
  return p;
}

AeroParams parse_aero(const json& j, const std::string& path) {
  Obj o(j, path);
  AeroParams a;
  if (o.has("C_D0")) a.c_d0 = o.number("C_D0");
  if (o.has("S")) a.s = o.number("S");
  if (o.has("f_p")) a.f_p = o.number("f_p");
  if (o.has("f_e")) a.f_e = o.number("f_e");
  if (o.has("e_o")) a.e_o = o.number("e_o");
  if (o.has("AR_w")) a.ar_w = o.number("AR_w");
  o.alt("F_w", "_kg", kg_to_newton, &a.f_w);
  o.finish();
  return a;
}

}  // namespace

Scenario parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario: invalid JSON: ") + e.what());
  }
  Obj o(j, "scenario");
  Scenario s;
  s.users = parse_points(o.raw("users"), "scenario.users");
  s.targets = parse_points(o.raw("targets"), "scenario.targets");
  if (o.has("weights")) {
    const json& w = o.raw("weights");
    if (!w.is_array()) schema_fail("scenario.weights", "expected an array");
    s.weights = w.get<std::vector<double>>();
  } else {
    s.weights.assign(s.users.size(), 1.0);
  }
  if (o.has("M")) s.m_antennas = static_cast<int>(o.number("M"));
  if (o.has("wavelength")) s.wavelength = o.number("wavelength");
  o.alt("ref_gain", "_dB", db_to_linear, &s.ref_gain);
  o.alt("noise_power", "_dBm", dbm_to_watts, &s.noise_power);
  if (o.has("rician_K")) {
    const json& k = o.raw("rician_K");
    if (k.is_string() && k.get<std::string>() == "inf")
      s.rician_k = std::numeric_limits<double>::infinity();
    else if (k.is_number())
      s.rician_k = k.get<double>();
    else
      schema_fail("scenario.rician_K", "expected a number or \"inf\"");
  }
  if (o.has("flight")) s.flight = parse_flight(o.raw("flight"), "scenario.flight");
  if (o.has("sar")) s.sar = parse_sar(o.raw("sar"), "scenario.sar");
  if (o.has("aero")) s.aero = parse_aero(o.raw("aero"), "scenario.aero");
  if (o.has("power_max")) s.power_max = o.number("power_max");
  o.alt("bp_threshold", "_dBm", dbm_to_watts, &s.bp_threshold);
  o.alt("snr_min", "_dB", db_to_linear, &s.snr_min);
  if (o.has("e_start")) s.e_start = o.number("e_start");
  if (o.has("horizon")) s.horizon = o.number("horizon");
  if (o.has("slots")) s.slots = static_cast<int>(o.number("slots"));
  if (o.has("rng_seed")) s.rng_seed = static_cast<std::uint64_t>(o.number("rng_seed"));
  if (o.has("eps_disc")) s.eps_disc = o.number("eps_disc");
  o.finish();
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("scenario file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str());
}

void validate_scenario(const Scenario& s) {
  std::vector<std::string> errs;
  auto req = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  req(!s.users.empty(), "users: list must be non-empty");
  req(!s.targets.empty(), "targets: list must be non-empty");
  req(s.weights.size() == s.users.size(), "weights: one weight per user required");
  for (size_t k = 0; k < s.weights.size(); ++k)
    req(s.weights[k] > 0.0, "weights[" + std::to_string(k) + "]: must be > 0");
  for (size_t k = 0; k < s.users.size(); ++k)
    req(std::isfinite(s.users[k].x) && std::isfinite(s.users[k].y),
        "users[" + std::to_string(k) + "]: coordinates must be finite");
  for (size_t q = 0; q < s.targets.size(); ++q)
    req(std::isfinite(s.targets[q].x) && std::isfinite(s.targets[q].y),
        "targets[" + std::to_string(q) + "]: coordinates must be finite");
  req(s.m_antennas >= 1, "M: antenna count must be >= 1");
  req(s.wavelength > 0.0, "wavelength: must be > 0");
  req(s.ref_gain > 0.0, "ref_gain: must be > 0");
  req(s.noise_power > 0.0, "noise_power: must be > 0");
  req(s.rician_k >= 0.0, "rician_K: must be >= 0");
  req(s.flight.h_min < s.flight.h_max, "flight.H_min: must be < H_max");
  req(s.flight.h_min > 0.0, "flight.H_min: must be > 0");
  req(s.flight.v_xy_max > 0.0, "flight.V_xy_max: must be > 0");
  req(s.flight.v_z_max > 0.0, "flight.V_z_max: must be > 0");
  req(s.flight.obs_angle > 0.0 && s.flight.obs_angle < std::numbers::pi / 2,
      "flight.obs_angle: must lie in (0, pi/2)");
  req(s.flight.bank_angle >= 0.0 && s.flight.bank_angle < std::numbers::pi / 2,
      "flight.bank_angle: must lie in [0, pi/2)");
  req(s.sar.g_t > 0 && s.sar.g_r > 0 && s.sar.sigma0 > 0 && s.sar.tau_p > 0 &&
          s.sar.prf > 0 && s.sar.t_o > 0 && s.sar.nf > 0 && s.sar.b_r > 0 &&
          s.sar.l_tot > 0 && s.sar.kappa > 0 && s.sar.c > 0,
      "sar: all parameters must be strictly positive");
  req(s.aero.induced_coeff() > 0.0, "aero: 1/(pi e_o AR_w) must be > 0");
  req(s.aero.c_d0 > 0 && s.aero.s > 0 && s.aero.f_w > 0,
      "aero: C_D0, S, F_w must be > 0");
  req(s.aero.f_p > 0 && s.aero.f_p <= 1 && s.aero.f_e > 0 && s.aero.f_e <= 1,
      "aero: efficiencies must lie in (0, 1]");
  req(s.power_max > 0.0, "power_max: must be > 0");
  req(s.bp_threshold >= 0.0, "bp_threshold: must be >= 0");
  req(s.snr_min >= 0.0, "snr_min: must be >= 0");
  req(s.slots >= 1, "slots: must be >= 1");
  req(s.horizon > 0.0, "horizon: must be > 0");
  if (s.e_start) req(*s.e_start > 0.0, "e_start: must be > 0 when given");
  if (s.eps_disc && s.slots >= 1 && s.flight.h_min > 0) {
    const double n_min = s.flight.v_xy_max * s.horizon / (s.flight.h_min * *s.eps_disc);
    req(s.slots >= n_min,
        "slots: N must be >= V_xy T / (H_min eps_disc) = " + std::to_string(n_min));
  }
  if (!errs.empty()) {
    std::string msg = "scenario validation failed:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ValidationError(msg);
  }
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  auto pts = [](const std::vector<GroundPoint>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({{"x", p.x}, {"y", p.y}});
    return a;
  };
  j["users"] = pts(s.users);
  j["targets"] = pts(s.targets);
  j["weights"] = s.weights;
  j["M"] = s.m_antennas;
  j["wavelength"] = s.wavelength;
  j["ref_gain"] = s.ref_gain;
  j["noise_power"] = s.noise_power;
  if (std::isinf(s.rician_k))
    j["rician_K"] = "inf";
  else
    j["rician_K"] = s.rician_k;
  j["flight"] = {{"H_min", s.flight.h_min},     {"H_max", s.flight.h_max},
                 {"V_xy_max", s.flight.v_xy_max}, {"V_z_max", s.flight.v_z_max},
                 {"bank_angle", s.flight.bank_angle},
                 {"obs_angle", s.flight.obs_angle}};
  j["sar"] = {{"G_t", s.sar.g_t},   {"G_r", s.sar.g_r},   {"sigma0", s.sar.sigma0},
              {"tau_p", s.sar.tau_p}, {"PRF", s.sar.prf}, {"T_o", s.sar.t_o},
              {"NF", s.sar.nf},     {"B_r", s.sar.b_r},   {"L_tot", s.sar.l_tot},
              {"kappa", s.sar.kappa}, {"c", s.sar.c}};
  j["aero"] = {{"C_D0", s.aero.c_d0}, {"S", s.aero.s},   {"f_p", s.aero.f_p},
               {"f_e", s.aero.f_e},   {"e_o", s.aero.e_o}, {"AR_w", s.aero.ar_w},
               {"F_w", s.aero.f_w}};
  j["power_max"] = s.power_max;
  j["bp_threshold"] = s.bp_threshold;
  j["snr_min"] = s.snr_min;
  if (s.e_start) j["e_start"] = *s.e_start;
  j["horizon"] = s.horizon;
  j["slots"] = s.slots;
  j["rng_seed"] = s.rng_seed;
  if (s.eps_disc) j["eps_disc"] = *s.eps_disc;
  return j.dump(2);
}

TimeGrid time_grid(const Scenario& s) {
  if (s.slots < 1) throw ValidationError("time_grid: N must be >= 1");
  TimeGrid g;
  g.dt = s.horizon / s.slots;
  for (int n = 1; n <= s.slots; ++n) g.midpoints.push_back((n - 0.5) * g.dt);
  return g;
}

}  // namespace haps
