#include "haps/beamforming.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <numbers>

#include "haps/radar.hpp"

namespace haps {

namespace {

constexpr double kLog2E = std::numbers::log2e;

Eigen::MatrixXcd outer(const Eigen::VectorXcd& g) { return g * g.adjoint(); }

double trace_prod(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.cwiseProduct(b.transpose())).sum().real();
}

double total_speed_max(const Scenario& s) {
  const double vx = s.flight.v_xy_max, vz = s.flight.v_z_max;
  return std::sqrt(vx * vx + vz * vz);
}

}  // namespace

SlotConstraints static_constraints(const Scenario& s, const Placement3D& p) {
  SlotConstraints cons;
  cons.power_max = s.power_max;
  for (const auto& t : s.targets) {
    const double d = distance(p, t);
    cons.bp_rhs.push_back(s.bp_threshold * d * d);
  }
  if (s.snr_min > 0.0) {
    const double c0 = sar_snr_coeff(s.sar, s.wavelength, s.flight.obs_angle);
    cons.power_floor = s.snr_min * p.z * p.z * p.z * total_speed_max(s) / c0;
  }
  return cons;
}

SlotConstraints dynamic_constraints(const Scenario& s, const Placement3D& p) {
  SlotConstraints cons = static_constraints(s, p);
  if (s.snr_min > 0.0) {
    const double c0 = sar_snr_coeff(s.sar, s.wavelength, s.flight.obs_angle);
    const double z = s.flight.h_max;
    cons.power_floor = s.snr_min * z * z * z * total_speed_max(s) / c0;
  }
  return cons;
}

SurrogatePoint build_surrogate(const std::vector<Eigen::VectorXcd>& channels,
                               const std::vector<Eigen::MatrixXcd>& w_cov,
                               const Eigen::MatrixXcd& r_s, double noise_power) {
  SurrogatePoint sp;
  sp.w_cov = w_cov;
  sp.r_s = r_s;
  const int k_users = static_cast<int>(channels.size());
  for (int k = 0; k < k_users; ++k) {
    const Eigen::MatrixXcd gk = outer(channels[k]);
    double denom = trace_prod(gk, r_s) + noise_power;
    for (int p = 0; p < k_users; ++p)
      if (p != k) denom += trace_prod(gk, w_cov[p]);
    sp.a_bar.push_back(std::log2(denom));
    sp.b_bar.push_back((kLog2E / denom) * gk);
  }
  return sp;
}

conic::ConicProgram build_sdr(const Scenario& s, const Placement3D& p,
                              const std::vector<Eigen::VectorXcd>& channels,
                              const std::vector<Eigen::VectorXcd>& target_steering,
                              const SlotConstraints& cons,
                              const SurrogatePoint& surrogate) {
  const int k_users = static_cast<int>(channels.size());
  const int m = s.m_antennas;
  conic::ConicProgram prog;
  std::vector<int> w_blocks;
  for (int k = 0; k < k_users; ++k)
    w_blocks.push_back(prog.add_psd_block(m, conic::BlockKind::hermitian));
  const int rs_block = prog.add_psd_block(m, conic::BlockKind::hermitian);

  // Objective: sum_k beta_k [ log2(tr(G_k H) + sigma^2) - linearized log ].
  conic::Affine linear = prog.affine(0.0);
  for (int k = 0; k < k_users; ++k) {
    const double beta = s.weights[k];
    const Eigen::MatrixXcd gk = outer(channels[k]);
    conic::Affine arg = prog.affine(s.noise_power);
    for (int q = 0; q < k_users; ++q) prog.add_trace_term(arg, w_blocks[q], gk);
    prog.add_trace_term(arg, rs_block, gk);
    prog.add_log2_term(beta, std::move(arg));

    double cst = -surrogate.a_bar[k];
    for (int q = 0; q < k_users; ++q) {
      if (q == k) continue;
      prog.add_trace_term(linear, w_blocks[q], surrogate.b_bar[k], -beta);
      cst += trace_prod(surrogate.b_bar[k], surrogate.w_cov[q]);
    }
    prog.add_trace_term(linear, rs_block, surrogate.b_bar[k], -beta);
    cst += trace_prod(surrogate.b_bar[k], surrogate.r_s);
    linear.constant += beta * cst;
  }
  prog.set_linear_objective(std::move(linear));

  // Beampattern floors, SNR power floor, power cap.
  for (size_t q = 0; q < target_steering.size(); ++q) {
    const Eigen::MatrixXcd aq = outer(target_steering[q]);
    conic::Affine bp = prog.affine(-cons.bp_rhs[q]);
    for (int k = 0; k < k_users; ++k) prog.add_trace_term(bp, w_blocks[k], aq);
    prog.add_trace_term(bp, rs_block, aq);
    prog.add_ineq(std::move(bp));
  }
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
  if (cons.power_floor > 0.0) {
    conic::Affine floor = prog.affine(-cons.power_floor);
    for (int k = 0; k < k_users; ++k) prog.add_trace_term(floor, w_blocks[k], eye);
    prog.add_trace_term(floor, rs_block, eye);
    prog.add_ineq(std::move(floor));
  }
  conic::Affine cap = prog.affine(cons.power_max);
  for (int k = 0; k < k_users; ++k) prog.add_trace_term(cap, w_blocks[k], eye, -1.0);
  prog.add_trace_term(cap, rs_block, eye, -1.0);
  prog.add_ineq(std::move(cap));
  return prog;
}

SlotBeams initial_beams(const Scenario& s,
                        const std::vector<Eigen::VectorXcd>& channels) {
  const int k_users = static_cast<int>(channels.size());
  const int m = s.m_antennas;
  const double rho = 0.5;
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
  SlotBeams beams;
  for (int k = 0; k < k_users; ++k) {
    const double pk = rho * s.power_max / k_users;
    const Eigen::MatrixXcd mrt = outer(channels[k]) / channels[k].squaredNorm();
    // 5% identity loading keeps the iterate strictly PD for the barrier.
    beams.w_cov.push_back(pk * (0.95 * mrt + (0.05 / m) * eye));
  }
  beams.r_s = ((1.0 - rho) * s.power_max / m) * eye;
  return beams;
}

namespace {

double true_objective(const Scenario& s,
                      const std::vector<Eigen::VectorXcd>& channels,
                      const SlotBeams& beams) {
  double obj = 0.0;
  for (size_t k = 0; k < channels.size(); ++k)
    obj += s.weights[k] *
           rate(static_cast<int>(k), channels, beams, s.noise_power);
  return obj;
}

std::string infeasibility_class(const Scenario& s, const SlotConstraints& cons) {
  double worst_bp = 0.0;
  for (double rhs : cons.bp_rhs) worst_bp = std::max(worst_bp, rhs);
  if (worst_bp > s.m_antennas * cons.power_max)
    return "beampattern threshold exceeds M * P_max";
  if (cons.power_floor > cons.power_max)
    return "SNR power floor exceeds P_max";
  return "constraint set (beampattern / SNR floor / power cap) infeasible";
}

}  // namespace

BeamformResult solve_beamforming(const Scenario& s, const Placement3D& p,
                                 const std::vector<Eigen::VectorXcd>& channels,
                                 const std::vector<Eigen::VectorXcd>& target_steering,
                                 const SlotConstraints& cons,
                                 const SlotBeams& init, double eps, int max_iter,
                                 double solver_tol) {
  using clock = std::chrono::steady_clock;
  BeamformResult res;
  conic::SolveOptions sopts;
  sopts.tol = solver_tol > 0 ? solver_tol : conic::default_solver_tol();

  SlotBeams current = init;
  double prev_obj = true_objective(s, channels, current);
  for (int it = 0; it < max_iter; ++it) {
    const auto t0 = clock::now();
    const SurrogatePoint sp =
        build_surrogate(channels, current.w_cov, current.r_s, s.noise_power);
    conic::ConicProgram prog =
        build_sdr(s, p, channels, target_steering, cons, sp);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(prog.num_params());
    for (size_t k = 0; k < current.w_cov.size(); ++k)
      prog.set_block_value(static_cast<int>(k), current.w_cov[k], warm);
    prog.set_block_value(static_cast<int>(current.w_cov.size()), current.r_s, warm);
    sopts.initial = warm;
    const conic::SolveResult sol = conic::solve(prog, sopts);
    const double secs =
        std::chrono::duration<double>(clock::now() - t0).count();
    if (sol.status == conic::SolveStatus::infeasible) {
      res.status = BeamformStatus::infeasible;
      res.detail = infeasibility_class(s, cons);
      return res;
    }
    if (sol.status == conic::SolveStatus::failed) {
      res.status = BeamformStatus::solver_failure;
      res.detail = "conic solve failed";
      return res;
    }
    SlotBeams next;
    for (size_t k = 0; k < current.w_cov.size(); ++k)
      next.w_cov.push_back(prog.block_value(static_cast<int>(k), sol.v));
    next.r_s = prog.block_value(static_cast<int>(current.w_cov.size()), sol.v);
    const double obj = true_objective(s, channels, next);
    // SCA ascent: keep the better iterate if the solve was only inaccurate.
    if (obj >= prev_obj - 1e-9 * std::max(1.0, std::abs(prev_obj)))
      current = std::move(next);
    const double cur_obj = true_objective(s, channels, current);
    res.trace.rows.push_back({it, cur_obj, sol.status, secs});
    const double incr = (cur_obj - prev_obj) / std::max(std::abs(prev_obj), 1e-12);
    prev_obj = cur_obj;
    if (it >= 1 && incr < eps) break;
  }
  res.status = BeamformStatus::ok;
  res.beams = std::move(current);
  res.objective = prev_obj;
  return res;
}

SlotBeams extract_rank_one(const SlotBeams& beams,
                           const std::vector<Eigen::VectorXcd>& channels,
                           const std::vector<double>& beta, double noise_power,
                           bool* randomized, std::uint64_t seed) {
  if (randomized) *randomized = false;
  const int m = static_cast<int>(beams.r_s.rows());
  const int k_users = static_cast<int>(beams.w_cov.size());
  const Eigen::MatrixXcd h = beams.total_covariance();

  SlotBeams out;
  out.r_s = h;
  bool ok = true;
  for (int k = 0; k < k_users; ++k) {
    const Eigen::VectorXcd& g = channels[k];
    const double pk = (g.adjoint() * beams.w_cov[k] * g).value().real();
    Eigen::VectorXcd wk = Eigen::VectorXcd::Zero(m);
    if (pk > 1e-14) wk = (beams.w_cov[k] * g) / std::sqrt(pk);
    out.w_vec.push_back(wk);
    out.w_cov.push_back(wk * wk.adjoint());
    out.r_s -= out.w_cov.back();
  }
  out.r_s = 0.5 * (out.r_s + out.r_s.adjoint());
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.r_s,
                                                       Eigen::EigenvaluesOnly);
    const double tr = std::max(1e-12, h.trace().real());
    if (es.eigenvalues().minCoeff() < -1e-7 * tr) ok = false;
  }
  if (ok) {
    // Clip the tiny negative tail so downstream PSD checks hold exactly.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.r_s);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    out.r_s = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    return out;
  }

  // Randomization fallback: trace-preserving rank-1 draws, best objective.
  if (randomized) *randomized = true;
  SlotBeams best = beams;
  double best_obj = -std::numeric_limits<double>::infinity();
  for (int draw = 0; draw < 200; ++draw) {
    SlotBeams cand;
    cand.r_s = beams.r_s;
    for (int k = 0; k < k_users; ++k) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(beams.w_cov[k]);
      const Eigen::MatrixXcd sqrt_w =
          es.eigenvectors() *
          es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
          es.eigenvectors().adjoint();
      Eigen::VectorXcd e(m);
      for (int i = 0; i < m; ++i)
        e(i) = cn_unit_draw(seed ^ 0x5bd1e995u, k, draw, i);
      Eigen::VectorXcd wk = sqrt_w * e;
      const double tr = std::max(1e-300, wk.squaredNorm());
      wk *= std::sqrt(std::max(0.0, beams.w_cov[k].trace().real()) / tr);
      cand.w_vec.push_back(wk);
      cand.w_cov.push_back(wk * wk.adjoint());
    }
    double obj = 0.0;
    for (int k = 0; k < k_users; ++k)
      obj += beta[k] * rate(k, channels, cand, noise_power);
    if (obj > best_obj) {
      best_obj = obj;
      best = cand;
    }
  }
  return best;
}

}  // namespace haps
