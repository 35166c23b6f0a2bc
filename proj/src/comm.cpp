#include "haps/comm.hpp"

#include <cmath>
#include <stdexcept>

namespace haps {

double SlotBeams::total_power() const {
  double p = r_s.size() ? r_s.trace().real() : 0.0;
  for (const auto& w : w_cov) p += w.trace().real();
  return p;
}

Eigen::MatrixXcd SlotBeams::total_covariance() const {
  Eigen::MatrixXcd h = r_s;
  for (const auto& w : w_cov) h += w;
  return h;
}

namespace {

double quad_form(const Eigen::VectorXcd& g, const Eigen::MatrixXcd& w) {
  return (g.adjoint() * w * g).value().real();
}

}  // namespace

double sinr(int k, const std::vector<Eigen::VectorXcd>& channels,
            const SlotBeams& beams, double noise_power) {
  const Eigen::VectorXcd& g = channels.at(k);
  const double signal = quad_form(g, beams.w_cov.at(k));
  double interference = quad_form(g, beams.r_s);
  for (size_t p = 0; p < beams.w_cov.size(); ++p)
    if (static_cast<int>(p) != k) interference += quad_form(g, beams.w_cov[p]);
  return signal / (interference + noise_power);
}

double rate(int k, const std::vector<Eigen::VectorXcd>& channels,
            const SlotBeams& beams, double noise_power) {
  return std::log2(1.0 + sinr(k, channels, beams, noise_power));
}

double weighted_sum_rate(const BeamformingSolution& sol,
                         const std::vector<std::vector<Eigen::VectorXcd>>& channels,
                         const std::vector<double>& beta, double noise_power) {
  if (sol.slots.size() != channels.size())
    throw std::invalid_argument("weighted_sum_rate: slot count mismatch");
  double total = 0.0;
  for (size_t n = 0; n < sol.slots.size(); ++n)
    for (size_t k = 0; k < beta.size(); ++k)
      total += beta[k] * rate(static_cast<int>(k), channels[n], sol.slots[n],
                              noise_power);
  return total / static_cast<double>(sol.slots.size());
}

}  // namespace haps
