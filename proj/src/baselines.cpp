#include "haps/baselines.hpp"

#include <cmath>
#include <numbers>

#include "haps/radar.hpp"
#include "haps/runio.hpp"

namespace haps {

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::comm_only_static: return "comm-only-static";
    case BaselineKind::sar_only_static: return "sar-only-static";
    case BaselineKind::comm_only_dynamic: return "comm-only-dynamic";
    case BaselineKind::sar_only_dynamic: return "sar-only-dynamic";
    case BaselineKind::isotropic_dynamic: return "isotropic-dynamic";
    case BaselineKind::circle_flight: return "circle-flight";
  }
  return "?";
}

bool baseline_from_string(const std::string& name, BaselineKind* out) {
  for (BaselineKind k :
       {BaselineKind::comm_only_static, BaselineKind::sar_only_static,
        BaselineKind::comm_only_dynamic, BaselineKind::sar_only_dynamic,
        BaselineKind::isotropic_dynamic, BaselineKind::circle_flight}) {
    if (name == to_string(k)) {
      *out = k;
      return true;
    }
  }
  return false;
}

double min_normalized_beampattern(const Scenario& s, const Placement3D& p,
                                  const Eigen::MatrixXcd& r_s) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : s.targets) {
    const double d = distance(p, t);
    best = std::min(best, beampattern_gain(p, t, r_s) / (d * d));
  }
  return best;
}

namespace {

Scenario comm_only(Scenario s) {
  s.bp_threshold = 0.0;
  s.snr_min = 0.0;
  return s;
}

/// Max-min normalized beampattern with the whole budget on sensing:
/// maximize r s.t. tr(A_q H) >= r d_q^2, tr(H) <= P_max, H psd.
struct SensingOnly {
  bool ok = false;
  Eigen::MatrixXcd h_cov;
  double value = 0.0;  // achieved min normalized gain
};

SensingOnly sensing_only_beams(const Scenario& s, const Placement3D& p) {
  const int m = s.m_antennas;
  conic::ConicProgram prog;
  const int r_idx = prog.add_reals(1);
  const int block = prog.add_psd_block(m, conic::BlockKind::hermitian);

  conic::Affine obj = prog.affine(0.0);
  obj.coeff[r_idx] = 1.0;
  prog.set_linear_objective(std::move(obj));

  for (const auto& t : s.targets) {
    const Eigen::VectorXcd a = steering_vector(p, t, m);
    const double d = distance(p, t);
    conic::Affine floor = prog.affine(0.0);
    prog.add_trace_term(floor, block, a * a.adjoint());
    floor.coeff[r_idx] = -d * d;
    prog.add_ineq(std::move(floor));
  }
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
  conic::Affine cap = prog.affine(s.power_max);
  prog.add_trace_term(cap, block, eye, -1.0);
  prog.add_ineq(std::move(cap));
  conic::Affine pos = prog.affine(0.0);
  pos.coeff[r_idx] = 1.0;
  prog.add_ineq(std::move(pos));

  conic::SolveOptions opts;
  opts.tol = conic::default_solver_tol();
  const conic::SolveResult res = conic::solve(prog, opts);
  SensingOnly out;
  if (res.status == conic::SolveStatus::optimal ||
      res.status == conic::SolveStatus::inaccurate) {
    out.ok = true;
    out.h_cov = prog.block_value(0, res.v);
    out.value = min_normalized_beampattern(s, p, out.h_cov);
  }
  return out;
}

SlotBeams sensing_only_slot(const Scenario& s, const Eigen::MatrixXcd& h_cov) {
  SlotBeams b;
  for (int k = 0; k < s.num_users(); ++k)
    b.w_cov.push_back(Eigen::MatrixXcd::Zero(s.m_antennas, s.m_antennas));
  b.r_s = h_cov;
  return b;
}

StaticDesign sar_only_static(const Scenario& s, const GridSpec& grid) {
  StaticDesign design;
  int best = -1;
  std::vector<SensingOnly> sols;
  const auto points = enumerate_grid(s, grid);
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    const SensingOnly so = sensing_only_beams(s, points[i]);
    sols.push_back(so);
    GridPointResult row;
    row.placement = points[i];
    row.feasible = so.ok;
    row.objective = so.ok ? so.value : 0.0;
    design.table.push_back(row);
    if (!so.ok) continue;
    if (best < 0 || so.value > sols[best].value) best = i;
  }
  if (best < 0) return design;
  design.feasible = true;
  design.placement = points[best];
  design.beams = sensing_only_slot(s, sols[best].h_cov);
  design.objective = sols[best].value;
  return design;
}

DynamicDesign sar_only_dynamic(const Scenario& s) {
  DynamicDesign d;
  d.trajectory = circular_init(s);
  double worst = std::numeric_limits<double>::infinity();
  for (int slot = 1; slot <= d.trajectory.slots(); ++slot) {
    const Placement3D& p = d.trajectory.slot_position(slot);
    const SensingOnly so = sensing_only_beams(s, p);
    if (!so.ok) {
      d.detail = "sensing solve failed at slot " + std::to_string(slot);
      return d;
    }
    d.solution.slots.push_back(sensing_only_slot(s, so.h_cov));
    d.solution.p_ave.push_back(d.solution.slots.back().total_power());
    worst = std::min(worst, so.value);
  }
  d.feasible = true;
  d.objective = worst;  // min normalized sensing gain, not a rate
  d.ledger = design_ledger(s, d.trajectory, d.solution);
  return d;
}

DynamicDesign isotropic_dynamic(const Scenario& s, int jobs) {
  DynamicDesign d;
  d.trajectory = circular_init(s);
  const int m = s.m_antennas;
  const int n = d.trajectory.slots();
  d.solution.slots.resize(n);
  d.solution.p_ave.resize(n);
  std::vector<std::string> errors(n);
  parallel_for_indexed(n, jobs, [&](int i) {
    const int slot = i + 1;
    const Placement3D& p = d.trajectory.slot_position(slot);
    // Isotropic sensing: a^H (P_s/M) I a = P_s, so the smallest compliant
    // sensing power is Gamma * max_q d_q^2.
    double p_s = 0.0;
    for (const auto& t : s.targets) {
      const double dd = distance(p, t);
      p_s = std::max(p_s, s.bp_threshold * dd * dd);
    }
    if (p_s >= s.power_max) {
      errors[i] = "isotropic sensing power exceeds the budget";
      return;
    }
    const Eigen::MatrixXcd r_iso =
        (p_s / m) * Eigen::MatrixXcd::Identity(m, m);

    // Fold the fixed isotropic interference into each user's channel scale:
    // scaling g_k by sqrt(sigma^2 / sigma_k^2) reproduces the SINR with
    // per-user noise sigma_k^2 = sigma^2 + g_k^H R_iso g_k.
    std::vector<Eigen::VectorXcd> channels, scaled;
    for (int k = 0; k < s.num_users(); ++k) {
      const double dd = distance(p, s.users[k]);
      Eigen::VectorXcd g = std::sqrt(path_gain(dd, s.ref_gain)) *
                           steering_vector(p, s.users[k], m);
      const double sig_k =
          s.noise_power + (g.adjoint() * r_iso * g).value().real();
      channels.push_back(g);
      scaled.push_back(std::sqrt(s.noise_power / sig_k) * g);
    }
    SlotConstraints cons = dynamic_constraints(s, p);
    cons.bp_rhs.clear();
    cons.power_max = s.power_max - p_s;
    cons.power_floor = std::max(0.0, cons.power_floor - p_s);
    if (cons.power_floor >= cons.power_max) {
      errors[i] = "sensing floor leaves no communication budget";
      return;
    }
    Scenario comm = s;
    comm.power_max = cons.power_max;
    const BeamformResult res =
        solve_beamforming(s, p, scaled, {}, cons, initial_beams(comm, scaled));
    if (res.status != BeamformStatus::ok) {
      errors[i] = res.detail;
      return;
    }
    SlotBeams b;
    b.w_cov = res.beams.w_cov;
    b.r_s = r_iso;  // the solve's residual sensing block is vestigial
    d.solution.slots[i] = std::move(b);
    d.solution.p_ave[i] = d.solution.slots[i].total_power();
  });
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty()) {
      d.detail = "slot " + std::to_string(i + 1) + ": " + errors[i];
      return d;
    }
  d.feasible = true;
  d.objective = dynamic_objective(s, d.trajectory, d.solution);
  d.ledger = design_ledger(s, d.trajectory, d.solution);
  return d;
}

double unit_from_draw(std::uint64_t seed, std::uint64_t idx) {
  // Deterministic (0, 1) value from the counter RNG's complex normal.
  const std::complex<double> z = cn_unit_draw(seed, 7, 7, idx);
  double u = std::abs(std::arg(z)) / std::numbers::pi;
  if (u <= 0.0) u = 0.5;
  if (u >= 1.0) u = 0.5;
  return u;
}

}  // namespace

DynamicDesign circle_flight_design(const Scenario& s, std::uint64_t seed,
                                   int jobs) {
  GroundPoint c{0.0, 0.0};
  for (const auto& t : s.targets) {
    c.x += t.x / s.num_targets();
    c.y += t.y / s.num_targets();
  }
  const int n = s.slots;
  const double r_fit =
      s.flight.v_xy_max * s.dt() / (2.0 * std::sin(std::numbers::pi / n));
  const double radius = r_fit * (0.25 + 0.75 * unit_from_draw(seed, 0));
  const double off_r = r_fit * unit_from_draw(seed, 1);
  const double off_phi = 2.0 * std::numbers::pi * unit_from_draw(seed, 2);
  const double z = s.flight.h_min +
                   (s.flight.h_max - s.flight.h_min) * unit_from_draw(seed, 3);

  Trajectory t;
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / n;
    t.nodes.push_back({c.x + off_r * std::cos(off_phi) + radius * std::cos(phi),
                       c.y + off_r * std::sin(off_phi) + radius * std::sin(phi),
                       z});
  }

  DynamicDesign d;
  d.trajectory = t;
  BeamformingSolution sol;
  const BeamformResult bf = beamforming_along(s, t, sol, jobs, 1e-3, 50);
  if (bf.status != BeamformStatus::ok) {
    d.detail = bf.detail;
    return d;
  }
  d.feasible = true;
  d.solution = sol;
  d.objective = dynamic_objective(s, t, sol);
  d.ledger = design_ledger(s, t, sol);
  return d;
}

BaselineDesign solve_baseline(BaselineKind kind, const Scenario& s,
                              const GridSpec& grid, int jobs) {
  switch (kind) {
    case BaselineKind::comm_only_static:
      return solve_static(comm_only(s), grid, jobs);
    case BaselineKind::sar_only_static:
      return sar_only_static(s, grid);
    case BaselineKind::comm_only_dynamic:
      return solve_dynamic(comm_only(s), 1e-3, 10, jobs);
    case BaselineKind::sar_only_dynamic:
      return sar_only_dynamic(s);
    case BaselineKind::isotropic_dynamic:
      return isotropic_dynamic(s, jobs);
    case BaselineKind::circle_flight:
      return circle_flight_design(s, s.rng_seed, jobs);
  }
  throw std::logic_error("unreachable baseline kind");
}

}  // namespace haps
