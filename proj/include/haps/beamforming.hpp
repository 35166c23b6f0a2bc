#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "haps/comm.hpp"
#include "haps/conic.hpp"
#include "haps/geometry.hpp"
#include "haps/scenario.hpp"

namespace haps {

/// Linearization state for the concave surrogate of the interference log.
struct SurrogatePoint {
  std::vector<Eigen::MatrixXcd> w_cov;   // expansion covariances
  Eigen::MatrixXcd r_s;
  std::vector<double> a_bar;             // per user, log2 of denominator
  std::vector<Eigen::MatrixXcd> b_bar;   // per user, psd multiple of g g^H
};

struct ConvergenceTrace {
  struct Row {
    int iteration;
    double objective;
    conic::SolveStatus status;
    double seconds;
  };
  std::vector<Row> rows;
};

enum class BeamformStatus { ok, infeasible, solver_failure };

struct BeamformResult {
  BeamformStatus status = BeamformStatus::solver_failure;
  std::string detail;          // violated constraint class when infeasible
  SlotBeams beams;
  double objective = 0.0;      // true weighted sum rate at the final iterate
  ConvergenceTrace trace;
  bool rank1_randomized = false;
};

/// Per-slot constraint context: Gamma * d^2 right-hand sides and the power
/// floor implied by the SNR constraint (0 when snr_min = 0).
struct SlotConstraints {
  std::vector<double> bp_rhs;  // per target, W
  double power_floor = 0.0;    // W
  double power_max = 0.0;      // W
};

SlotConstraints static_constraints(const Scenario& s, const Placement3D& p);
/// Dynamic case pins the SNR floor at H_max and V_max for every slot.
SlotConstraints dynamic_constraints(const Scenario& s, const Placement3D& p);

SurrogatePoint build_surrogate(const std::vector<Eigen::VectorXcd>& channels,
                               const std::vector<Eigen::MatrixXcd>& w_cov,
                               const Eigen::MatrixXcd& r_s, double noise_power);

conic::ConicProgram build_sdr(const Scenario& s, const Placement3D& p,
                              const std::vector<Eigen::VectorXcd>& channels,
                              const std::vector<Eigen::VectorXcd>& target_steering,
                              const SlotConstraints& cons,
                              const SurrogatePoint& surrogate);

/// Strictly-PD feasible starting covariances (identity-loaded MRT split).
SlotBeams initial_beams(const Scenario& s,
                        const std::vector<Eigen::VectorXcd>& channels);

/// SCA over SDR subproblems at a fixed placement.
BeamformResult solve_beamforming(const Scenario& s, const Placement3D& p,
                                 const std::vector<Eigen::VectorXcd>& channels,
                                 const std::vector<Eigen::VectorXcd>& target_steering,
                                 const SlotConstraints& cons,
                                 const SlotBeams& init, double eps = 1e-3,
                                 int max_iter = 50, double solver_tol = -1.0);

/// Power-preserving rank-1 recovery; falls back to Gaussian randomization
/// (200 draws, power-rescaled, best objective kept) when the adjusted
/// sensing covariance loses PSD.
SlotBeams extract_rank_one(const SlotBeams& beams,
                           const std::vector<Eigen::VectorXcd>& channels,
                           const std::vector<double>& beta, double noise_power,
                           bool* randomized = nullptr,
                           std::uint64_t seed = 0);

}  // namespace haps
