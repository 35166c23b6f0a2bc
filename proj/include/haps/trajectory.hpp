#pragma once

#include <Eigen/Dense>
#include <vector>

#include "haps/aero.hpp"
#include "haps/beamforming.hpp"
#include "haps/comm.hpp"
#include "haps/conic.hpp"
#include "haps/geometry.hpp"
#include "haps/scenario.hpp"

namespace haps {

/// Closed discrete trajectory: nodes n = 0..N with node N aliased to node 0.
struct Trajectory {
  std::vector<Placement3D> nodes;  // size N (free nodes); node(N) == node(0)
  const Placement3D& node(int n) const { return nodes[n % nodes.size()]; }
  int slots() const { return static_cast<int>(nodes.size()); }
  /// Slot n in 1..N is flown at node n mod N.
  const Placement3D& slot_position(int n) const { return node(n); }
};

/// Closure, altitude bounds, and speed limits; norms within 1e-9 relative.
bool trajectory_feasible(const Trajectory& t, const Scenario& s,
                         std::string* why = nullptr);

/// Circular-SAR initialization at H_min: radius z tan(alpha) shrunk until the
/// per-slot chord fits the horizontal speed limit.
Trajectory circular_init(const Scenario& s);

/// Phase/magnitude expansion of a^H W a: per-matrix value tr(W) + cosine sum.
double exact_quadratic_form(const Eigen::MatrixXcd& w, const Placement3D& p,
                            const GroundPoint& g);

struct RateTaylor {
  double constant = 0.0;       // c_k
  Eigen::Vector2d grad_h = Eigen::Vector2d::Zero();  // v_k
  double grad_z = 0.0;         // b_k
  double eta = 0.0, mu = 0.0;  // log arguments at the expansion point
};

/// First-order expansion of R_hat_k in (h, z) at the given point. The
/// vertical-term sign follows the analytic derivative (finite-difference
/// validated), not the transcribed one.
RateTaylor rate_taylor(const Placement3D& point, const SlotBeams& beams, int k,
                       const GroundPoint& user, double noise_power, double rho0);

struct BeampatternTaylor {
  double constant = 0.0;       // Xi, exact LHS at the point
  Eigen::Vector2d grad_h = Eigen::Vector2d::Zero();  // nu
  double grad_z = 0.0;         // zeta
};

BeampatternTaylor beampattern_taylor(const Placement3D& point,
                                     const Eigen::MatrixXcd& h_cov,
                                     const GroundPoint& target);

/// Trajectory subproblem in delta coordinates: variables [dx_i, dy_i, dz_i] for the N free
/// nodes; linear objective, linearized beampattern vs convex quadratic RHS,
/// trust regions, speed/altitude/energy/closure constraints.
conic::ConicProgram build_traj_subproblem(const Scenario& s,
                                          const BeamformingSolution& sol,
                                          const Trajectory& expansion,
                                          double radius);

struct TrajectoryStepTrace {
  struct Row {
    int iteration;
    double radius;
    bool accepted;
    double objective;  // true averaged weighted sum rate after the step
  };
  std::vector<Row> rows;
};

/// Trust-region loop: accept only steps that keep all true constraints and do
/// not decrease the true objective; halve the radius on rejection; stop when
/// the radius falls below eps.
Trajectory solve_trajectory(const Scenario& s, const BeamformingSolution& sol,
                            const Trajectory& init, double radius0, double eps,
                            TrajectoryStepTrace* trace = nullptr);

struct DynamicDesign {
  bool feasible = false;
  std::string detail;
  Trajectory trajectory;
  BeamformingSolution solution;
  double objective = 0.0;
  std::vector<double> outer_objectives;
  TrajectoryStepTrace traj_trace;
  EnergyLedger ledger;
};

/// LOS channels along a trajectory, indexed [slot 0..N-1][user] for slots 1..N.
std::vector<std::vector<Eigen::VectorXcd>> trajectory_channels(
    const Scenario& s, const Trajectory& t);

double dynamic_objective(const Scenario& s, const Trajectory& t,
                         const BeamformingSolution& sol);

/// Per-slot beamforming (warm-started) for a fixed trajectory.
BeamformResult beamforming_along(const Scenario& s, const Trajectory& t,
                                 BeamformingSolution& sol, int jobs,
                                 double eps, int max_iter);

/// Alternating optimization: per-slot SCA-SDR beamforming then trust-region
/// trajectory steps until the fractional objective increase drops below eps.
DynamicDesign solve_dynamic(const Scenario& s, double eps = 1e-3,
                            int max_outer = 10, int jobs = 1);

/// Energy ledger of a design re-verified with actual per-slot powers/speeds.
EnergyLedger design_ledger(const Scenario& s, const Trajectory& t,
                           const BeamformingSolution& sol);

}  // namespace haps
