#pragma once

#include <Eigen/Dense>
#include <vector>

#include "haps/radar.hpp"
#include "haps/scenario.hpp"

namespace haps {

/// Per-slot transmit design: user covariances, optional rank-1 vectors, and
/// the sensing covariance.
struct SlotBeams {
  std::vector<Eigen::MatrixXcd> w_cov;   // W_k, one per user
  std::vector<Eigen::VectorXcd> w_vec;   // rank-1 vectors when extracted
  Eigen::MatrixXcd r_s;                  // sensing covariance
  double total_power() const;
  Eigen::MatrixXcd total_covariance() const;  // H = sum W_k + R_s
};

struct BeamformingSolution {
  std::vector<SlotBeams> slots;
  std::vector<double> p_ave;  // per slot, W
};

/// SINR of user k from covariances (rates always evaluated on covariances so
/// pre/post rank-1 objectives share one code path).
double sinr(int k, const std::vector<Eigen::VectorXcd>& channels,
            const SlotBeams& beams, double noise_power);

double rate(int k, const std::vector<Eigen::VectorXcd>& channels,
            const SlotBeams& beams, double noise_power);

/// (1/N) sum_n sum_k beta_k R_k[n]; channels indexed [slot][user].
double weighted_sum_rate(const BeamformingSolution& sol,
                         const std::vector<std::vector<Eigen::VectorXcd>>& channels,
                         const std::vector<double>& beta, double noise_power);

}  // namespace haps
