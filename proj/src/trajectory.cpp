#include "haps/trajectory.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "haps/radar.hpp"
#include "haps/runio.hpp"

namespace haps {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvLn2 = std::numbers::log2e;

/// Value and u-derivative of f(W, u) = Re(a(u)^H W a(u)), a_m = e^{j pi (m-1) u}.
struct PhaseForm {
  double value = 0.0;
  double du = 0.0;
};

PhaseForm phase_form(const Eigen::MatrixXcd& w, double u) {
  const int m = static_cast<int>(w.rows());
  PhaseForm out;
  for (int i = 0; i < m; ++i) {
    out.value += w(i, i).real();
    for (int j = i + 1; j < m; ++j) {
      const double k = kPi * (j - i);
      const std::complex<double> e =
          w(i, j) * std::polar(1.0, k * u);
      out.value += 2.0 * e.real();
      out.du += -2.0 * k * e.imag();
    }
  }
  return out;
}

struct GeomDerivs {
  double d = 0.0;
  double u = 0.0;               // cos(theta) = z / d
  Eigen::Vector2d dh = Eigen::Vector2d::Zero();  // h - ground point
  Eigen::Vector2d du_dh = Eigen::Vector2d::Zero();
  double du_dz = 0.0;
};

GeomDerivs geom(const Placement3D& p, const GroundPoint& g) {
  GeomDerivs gd;
  gd.dh << p.x - g.x, p.y - g.y;
  gd.d = std::sqrt(gd.dh.squaredNorm() + p.z * p.z);
  gd.u = p.z / gd.d;
  const double d3 = gd.d * gd.d * gd.d;
  gd.du_dh = -p.z * gd.dh / d3;
  gd.du_dz = gd.dh.squaredNorm() / d3;
  return gd;
}

/// Gradient of q(W) = (rho0 / d^2) f(W, u) in (h, z).
struct QuadFormDerivs {
  double value = 0.0;
  Eigen::Vector2d dh = Eigen::Vector2d::Zero();
  double dz = 0.0;
};

QuadFormDerivs received_power(const Eigen::MatrixXcd& w, const GeomDerivs& gd,
                              double rho0) {
  const PhaseForm pf = phase_form(w, gd.u);
  const double d2 = gd.d * gd.d;
  QuadFormDerivs q;
  q.value = rho0 / d2 * pf.value;
  const Eigen::Vector2d dd_dh = gd.dh / gd.d;
  const double dd_dz = gd.u;
  q.dh = rho0 * (-2.0 / (d2 * gd.d) * pf.value * dd_dh +
                 1.0 / d2 * pf.du * gd.du_dh);
  q.dz = rho0 * (-2.0 / (d2 * gd.d) * pf.value * dd_dz +
                 1.0 / d2 * pf.du * gd.du_dz);
  return q;
}

}  // namespace

bool trajectory_feasible(const Trajectory& t, const Scenario& s,
                         std::string* why) {
  const double dt = s.dt();
  const int n = t.slots();
  std::ostringstream msg;
  bool ok = true;
  for (int i = 0; i < n; ++i) {
    const Placement3D& p = t.node(i);
    if (p.z < s.flight.h_min - 1e-6 || p.z > s.flight.h_max + 1e-6) {
      ok = false;
      msg << "node " << i << " altitude " << p.z << " outside envelope; ";
    }
    const Placement3D& q = t.node(i + 1);
    const double dx = q.x - p.x, dy = q.y - p.y;
    const double hdist = std::hypot(dx, dy);
    const double vdist = std::abs(q.z - p.z);
    const double hmax = s.flight.v_xy_max * dt;
    const double vmax = s.flight.v_z_max * dt;
    if (hdist > hmax * (1.0 + 1e-9) + 1e-9) {
      ok = false;
      msg << "segment " << i << " horizontal step " << hdist << " > " << hmax
          << "; ";
    }
    if (vdist > vmax * (1.0 + 1e-9) + 1e-9) {
      ok = false;
      msg << "segment " << i << " vertical step " << vdist << " > " << vmax
          << "; ";
    }
  }
  if (!ok && why) *why = msg.str();
  return ok;
}

Trajectory circular_init(const Scenario& s) {
  GroundPoint c{0.0, 0.0};
  for (const auto& t : s.targets) {
    c.x += t.x / s.num_targets();
    c.y += t.y / s.num_targets();
  }
  const int n = s.slots;
  const double z = s.flight.h_min;
  const double chord_max = s.flight.v_xy_max * s.dt();
  double radius = z * std::tan(s.flight.obs_angle);
  const double r_fit = chord_max / (2.0 * std::sin(kPi / n));
  if (radius > r_fit) radius = r_fit;
  Trajectory traj;
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * kPi * i / n;
    traj.nodes.push_back(
        {c.x + radius * std::cos(phi), c.y + radius * std::sin(phi), z});
  }
  return traj;
}

double exact_quadratic_form(const Eigen::MatrixXcd& w, const Placement3D& p,
                            const GroundPoint& g) {
  return phase_form(w, geom(p, g).u).value;
}

RateTaylor rate_taylor(const Placement3D& point, const SlotBeams& beams, int k,
                       const GroundPoint& user, double noise_power, double rho0) {
  const GeomDerivs gd = geom(point, user);
  const Eigen::MatrixXcd h_cov = beams.total_covariance();
  const QuadFormDerivs num = received_power(h_cov, gd, rho0);
  const QuadFormDerivs den =
      received_power(h_cov - beams.w_cov[k], gd, rho0);
  RateTaylor rt;
  rt.eta = num.value + noise_power;
  rt.mu = den.value + noise_power;
  rt.constant = std::log2(rt.eta) - std::log2(rt.mu);
  rt.grad_h = kInvLn2 * (num.dh / rt.eta - den.dh / rt.mu);
  rt.grad_z = kInvLn2 * (num.dz / rt.eta - den.dz / rt.mu);
  return rt;
}

BeampatternTaylor beampattern_taylor(const Placement3D& point,
                                     const Eigen::MatrixXcd& h_cov,
                                     const GroundPoint& target) {
  const GeomDerivs gd = geom(point, target);
  const PhaseForm pf = phase_form(h_cov, gd.u);
  BeampatternTaylor bt;
  bt.constant = pf.value;
  bt.grad_h = pf.du * gd.du_dh;
  bt.grad_z = pf.du * gd.du_dz;
  return bt;
}

conic::ConicProgram build_traj_subproblem(const Scenario& s,
                                          const BeamformingSolution& sol,
                                          const Trajectory& expansion,
                                          double radius) {
  const int n = expansion.slots();
  conic::ConicProgram prog;
  prog.add_reals(3 * n);  // [dx_i, dy_i, dz_i] per free node
  const auto ix = [](int i) { return 3 * i; };
  const auto iy = [](int i) { return 3 * i + 1; };
  const auto iz = [](int i) { return 3 * i + 2; };

  // Objective: linearized averaged weighted sum rate.
  conic::Affine obj = prog.affine(0.0);
  for (int slot = 1; slot <= n; ++slot) {
    const int node = slot % n;
    const Placement3D& p = expansion.node(node);
    for (int k = 0; k < s.num_users(); ++k) {
      const RateTaylor rt = rate_taylor(p, sol.slots[slot - 1], k, s.users[k],
                                        s.noise_power, s.ref_gain);
      const double w = s.weights[k] / n;
      obj.constant += w * rt.constant;
      obj.coeff[ix(node)] += w * rt.grad_h(0);
      obj.coeff[iy(node)] += w * rt.grad_h(1);
      obj.coeff[iz(node)] += w * rt.grad_z;
    }
  }
  prog.set_linear_objective(std::move(obj));

  // Trust region per node.
  for (int i = 0; i < n; ++i) {
    conic::ConicProgram::Soc tr;
    for (int c = 0; c < 3; ++c) {
      conic::Affine a = prog.affine(0.0);
      a.coeff[3 * i + c] = 1.0;
      tr.u.push_back(std::move(a));
    }
    tr.rhs = prog.affine(radius);
    prog.add_soc(std::move(tr));
  }

  // Speed limits on the N closed-loop segments, altitude bounds per node.
  const double dt = s.dt();
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Placement3D& pi = expansion.node(i);
    const Placement3D& pj = expansion.node(j);
    conic::ConicProgram::Soc sp;
    conic::Affine ux = prog.affine(pj.x - pi.x);
    ux.coeff[ix(j)] = 1.0;
    ux.coeff[ix(i)] = -1.0;
    conic::Affine uy = prog.affine(pj.y - pi.y);
    uy.coeff[iy(j)] = 1.0;
    uy.coeff[iy(i)] = -1.0;
    sp.u.push_back(std::move(ux));
    sp.u.push_back(std::move(uy));
    sp.rhs = prog.affine(s.flight.v_xy_max * dt);
    prog.add_soc(std::move(sp));

    const double dz0 = pj.z - pi.z;
    conic::Affine vu = prog.affine(s.flight.v_z_max * dt - dz0);
    vu.coeff[iz(j)] = -1.0;
    vu.coeff[iz(i)] = 1.0;
    prog.add_ineq(std::move(vu));
    conic::Affine vl = prog.affine(s.flight.v_z_max * dt + dz0);
    vl.coeff[iz(j)] = 1.0;
    vl.coeff[iz(i)] = -1.0;
    prog.add_ineq(std::move(vl));

    conic::Affine above = prog.affine(pi.z - s.flight.h_min);
    above.coeff[iz(i)] = 1.0;
    prog.add_ineq(std::move(above));
    conic::Affine below = prog.affine(s.flight.h_max - pi.z);
    below.coeff[iz(i)] = -1.0;
    prog.add_ineq(std::move(below));
  }

  // Beampattern floors: linearized gain >= Gamma * exact squared distance.
  for (int slot = 1; s.bp_threshold > 0.0 && slot <= n; ++slot) {
    const int node = slot % n;
    const Placement3D& p = expansion.node(node);
    const Eigen::MatrixXcd h_cov = sol.slots[slot - 1].total_covariance();
    for (const auto& t : s.targets) {
      const BeampatternTaylor bt = beampattern_taylor(p, h_cov, t);
      const double gamma = s.bp_threshold;
      conic::ConicProgram::Quad q;
      q.p_mat = Eigen::MatrixXd::Zero(prog.num_params(), prog.num_params());
      q.p_vec = Eigen::VectorXd::Zero(prog.num_params());
      for (int c = 0; c < 3; ++c) q.p_mat(3 * node + c, 3 * node + c) = gamma;
      q.p_vec[ix(node)] = 2.0 * gamma * (p.x - t.x) - bt.grad_h(0);
      q.p_vec[iy(node)] = 2.0 * gamma * (p.y - t.y) - bt.grad_h(1);
      q.p_vec[iz(node)] = 2.0 * gamma * p.z - bt.grad_z;
      const double d = distance(p, t);
      q.constant = gamma * d * d - bt.constant;
      prog.add_quad(std::move(q));
    }
  }

  // Onboard energy bound, convex in the altitude deltas.
  if (s.e_start) {
    const double ce = energy_bound_coeff(s);
    conic::ConicProgram::Quad q;
    q.p_mat = Eigen::MatrixXd::Zero(prog.num_params(), prog.num_params());
    q.p_vec = Eigen::VectorXd::Zero(prog.num_params());
    q.constant = -*s.e_start;
    for (int i = 0; i < n; ++i) {
      const double z0 = expansion.node(i).z;
      // The density fit is an exact quadratic; recover its local coefficients
      // from three evaluations.
      const double f0 = air_density(z0);
      const double fp = air_density(z0 + 1.0);
      const double fm = air_density(z0 - 1.0);
      const double qa = 0.5 * (fp - 2.0 * f0 + fm);
      const double qb = 0.5 * (fp - fm);
      q.p_mat(iz(i), iz(i)) += dt * ce * qa;
      q.p_vec[iz(i)] += dt * ce * qb;
      q.constant += dt * (s.power_max + ce * f0);
    }
    prog.add_quad(std::move(q));
  }
  return prog;
}

std::vector<std::vector<Eigen::VectorXcd>> trajectory_channels(
    const Scenario& s, const Trajectory& t) {
  std::vector<std::vector<Eigen::VectorXcd>> out;
  for (int slot = 1; slot <= t.slots(); ++slot) {
    const Placement3D& p = t.slot_position(slot);
    std::vector<Eigen::VectorXcd> g;
    for (const auto& u : s.users) {
      const double d = distance(p, u);
      g.push_back(std::sqrt(path_gain(d, s.ref_gain)) *
                  steering_vector(p, u, s.m_antennas));
    }
    out.push_back(std::move(g));
  }
  return out;
}

double dynamic_objective(const Scenario& s, const Trajectory& t,
                         const BeamformingSolution& sol) {
  return weighted_sum_rate(sol, trajectory_channels(s, t), s.weights,
                           s.noise_power);
}

EnergyLedger design_ledger(const Scenario& s, const Trajectory& t,
                           const BeamformingSolution& sol) {
  const int n = t.slots();
  const double dt = s.dt();
  std::vector<double> z(n), speed(n), p_ave(n);
  for (int slot = 1; slot <= n; ++slot) {
    const Placement3D& cur = t.slot_position(slot);
    const Placement3D& prev = t.slot_position(slot - 1);
    z[slot - 1] = cur.z;
    speed[slot - 1] = std::sqrt((cur.x - prev.x) * (cur.x - prev.x) +
                                (cur.y - prev.y) * (cur.y - prev.y) +
                                (cur.z - prev.z) * (cur.z - prev.z)) /
                      dt;
    p_ave[slot - 1] = slot - 1 < static_cast<int>(sol.p_ave.size())
                          ? sol.p_ave[slot - 1]
                          : sol.slots[slot - 1].total_power();
  }
  return energy_ledger(z, speed, p_ave, s);
}

namespace {

bool true_constraints_ok(const Scenario& s, const Trajectory& t,
                         const BeamformingSolution& sol) {
  if (!trajectory_feasible(t, s)) return false;
  for (int slot = 1; slot <= t.slots(); ++slot) {
    const Placement3D& p = t.slot_position(slot);
    const Eigen::MatrixXcd h = sol.slots[slot - 1].total_covariance();
    for (const auto& tgt : s.targets)
      if (!bp_constraint_ok(p, tgt, h, s.bp_threshold)) return false;
  }
  if (s.e_start && !design_ledger(s, t, sol).feasible) return false;
  return true;
}

}  // namespace

Trajectory solve_trajectory(const Scenario& s, const BeamformingSolution& sol,
                            const Trajectory& init, double radius0, double eps,
                            TrajectoryStepTrace* trace) {
  Trajectory cur = init;
  double radius = radius0;
  double obj = dynamic_objective(s, cur, sol);
  conic::SolveOptions sopts;
  sopts.tol = conic::default_solver_tol();

  const int n = cur.slots();
  for (int it = 0; it < 80 && radius >= eps; ++it) {
    conic::ConicProgram prog = build_traj_subproblem(s, sol, cur, radius);
    const conic::SolveResult res = conic::solve(prog, sopts);
    bool accepted = false;
    if (res.status == conic::SolveStatus::optimal ||
        res.status == conic::SolveStatus::inaccurate) {
      Trajectory cand = cur;
      for (int i = 0; i < n; ++i) {
        cand.nodes[i].x += res.v[3 * i];
        cand.nodes[i].y += res.v[3 * i + 1];
        cand.nodes[i].z += res.v[3 * i + 2];
      }
      if (true_constraints_ok(s, cand, sol)) {
        const double cobj = dynamic_objective(s, cand, sol);
        if (cobj >= obj) {
          accepted = true;
          const double gain = cobj - obj;
          cur = std::move(cand);
          obj = cobj;
          // A vanishing accepted step means the model is locally exhausted
          // at this radius.
          if (gain < 1e-9 * std::max(1.0, std::abs(obj))) radius *= 0.5;
        }
      }
    }
    if (!accepted) radius *= 0.5;
    if (trace) trace->rows.push_back({it, radius, accepted, obj});
  }
  return cur;
}

BeamformResult beamforming_along(const Scenario& s, const Trajectory& t,
                                 BeamformingSolution& sol, int jobs, double eps,
                                 int max_iter) {
  const int n = t.slots();
  const auto channels = trajectory_channels(s, t);
  const bool warm = static_cast<int>(sol.slots.size()) == n;
  std::vector<BeamformResult> results(n);
  parallel_for_indexed(n, jobs, [&](int i) {
    const int slot = i + 1;
    const Placement3D& p = t.slot_position(slot);
    std::vector<Eigen::VectorXcd> steer;
    for (const auto& tgt : s.targets)
      steer.push_back(steering_vector(p, tgt, s.m_antennas));
    const SlotConstraints cons = dynamic_constraints(s, p);
    const SlotBeams init =
        warm ? sol.slots[i] : initial_beams(s, channels[i]);
    results[i] = solve_beamforming(s, p, channels[i], steer, cons, init, eps,
                                   max_iter);
  });
  BeamformResult agg;
  agg.status = BeamformStatus::ok;
  BeamformingSolution next;
  for (int i = 0; i < n; ++i) {
    if (results[i].status != BeamformStatus::ok) {
      agg.status = results[i].status;
      agg.detail = "slot " + std::to_string(i + 1) + ": " + results[i].detail;
      return agg;
    }
    next.slots.push_back(results[i].beams);
    next.p_ave.push_back(results[i].beams.total_power());
  }
  sol = std::move(next);
  agg.trace = results[0].trace;
  agg.objective = dynamic_objective(s, t, sol);
  return agg;
}

DynamicDesign solve_dynamic(const Scenario& s, double eps, int max_outer,
                            int jobs) {
  DynamicDesign d;
  Trajectory t = circular_init(s);
  BeamformingSolution sol;
  BeamformResult bf = beamforming_along(s, t, sol, jobs, 1e-3, 50);
  if (bf.status != BeamformStatus::ok) {
    d.detail = bf.detail;
    d.trajectory = t;
    return d;
  }
  double obj = dynamic_objective(s, t, sol);
  d.outer_objectives.push_back(obj);
  const double radius0 = s.flight.v_xy_max * s.dt();
  for (int outer = 0; outer < max_outer; ++outer) {
    t = solve_trajectory(s, sol, t, radius0, 1e-3 * radius0, &d.traj_trace);
    bf = beamforming_along(s, t, sol, jobs, 1e-3, 50);
    if (bf.status != BeamformStatus::ok) {
      d.detail = bf.detail;
      d.trajectory = t;
      return d;
    }
    const double next = dynamic_objective(s, t, sol);
    d.outer_objectives.push_back(next);
    const double incr = (next - obj) / std::max(std::abs(obj), 1e-12);
    obj = next;
    if (incr < eps) break;
  }

  // Rank-1 recovery per slot; keep the covariance design if a slot's
  // extraction breaks a sensing floor.
  const auto channels = trajectory_channels(s, t);
  BeamformingSolution extracted;
  bool use_extracted = true;
  for (int i = 0; i < t.slots(); ++i) {
    bool randomized = false;
    SlotBeams b = extract_rank_one(sol.slots[i], channels[i], s.weights,
                                   s.noise_power, &randomized,
                                   s.rng_seed + i + 1);
    const Placement3D& p = t.slot_position(i + 1);
    const Eigen::MatrixXcd h = b.total_covariance();
    for (const auto& tgt : s.targets)
      if (!bp_constraint_ok(p, tgt, h, s.bp_threshold)) use_extracted = false;
    extracted.slots.push_back(std::move(b));
    extracted.p_ave.push_back(extracted.slots.back().total_power());
  }
  if (use_extracted) sol = std::move(extracted);

  d.feasible = true;
  d.trajectory = t;
  d.solution = sol;
  d.objective = dynamic_objective(s, t, sol);
  d.ledger = design_ledger(s, t, sol);
  if (!true_constraints_ok(s, t, sol)) {
    d.feasible = false;
    d.detail = "final design failed the exact constraint audit";
  }
  return d;
}

}  // namespace haps
