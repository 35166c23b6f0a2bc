#include <cmath>

#include "doctest.h"
#include "haps/beamforming.hpp"
#include "haps/placement.hpp"

using namespace haps;

namespace {

Scenario desk() {
  Scenario s;
  s.users = {{-15000, 3000}, {-14000, -2500}};
  s.targets = {{15000, 2800}, {14500, -3200}};
  s.weights = {1.0, 1.0};
  s.m_antennas = 4;
  s.ref_gain = 1000.0;
  s.noise_power = 1e-9;
  s.rician_k = std::numeric_limits<double>::infinity();
  s.power_max = 10.0;
  s.bp_threshold = 5e-8;
  s.snr_min = 2.0;
  return s;
}

double true_rate_sum(const Scenario& s,
                     const std::vector<Eigen::VectorXcd>& channels,
                     const SlotBeams& beams) {
  double acc = 0.0;
  for (int k = 0; k < s.num_users(); ++k)
    acc += s.weights[k] * rate(k, channels, beams, s.noise_power);
  return acc;
}

}  // namespace

TEST_CASE("surrogate is tight at the expansion point and a lower bound nearby") {
  const Scenario s = desk();
  const Placement3D p{0.0, 0.0, 20000.0};
  const auto channels = static_channels(s, p);
  const SlotBeams base = initial_beams(s, channels);
  const SurrogatePoint sp =
      build_surrogate(channels, base.w_cov, base.r_s, s.noise_power);

  const auto surrogate_rate = [&](const SlotBeams& b) {
    double acc = 0.0;
    for (int k = 0; k < s.num_users(); ++k) {
      const Eigen::MatrixXcd gk = channels[k] * channels[k].adjoint();
      double num = (gk.cwiseProduct(b.total_covariance().transpose())).sum().real() +
                   s.noise_power;
      double lin = sp.a_bar[k];
      for (int q = 0; q < s.num_users(); ++q) {
        if (q == k) continue;
        lin += (sp.b_bar[k].cwiseProduct((b.w_cov[q] - sp.w_cov[q]).transpose()))
                   .sum()
                   .real();
      }
      lin += (sp.b_bar[k].cwiseProduct((b.r_s - sp.r_s).transpose())).sum().real();
      acc += s.weights[k] * (std::log2(num) - lin);
    }
    return acc;
  };

  const double at_point = surrogate_rate(base);
  CHECK(at_point == doctest::Approx(true_rate_sum(s, channels, base)).epsilon(1e-10));

  // Lower bound at perturbed covariances.
  for (int trial = 0; trial < 10; ++trial) {
    SlotBeams perturbed = base;
    for (auto& w : perturbed.w_cov) {
      Eigen::MatrixXcd r = Eigen::MatrixXcd::Random(4, 4);
      w = w + 0.2 * (r * r.adjoint());
    }
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Random(4, 4);
    perturbed.r_s = perturbed.r_s + 0.2 * (r * r.adjoint());
    CHECK(surrogate_rate(perturbed) <=
          true_rate_sum(s, channels, perturbed) + 1e-9);
  }
}

TEST_CASE("initial beams: power split and strict positive definiteness") {
  const Scenario s = desk();
  const Placement3D p{0.0, 0.0, 20000.0};
  const auto channels = static_channels(s, p);
  const SlotBeams b = initial_beams(s, channels);
  CHECK(b.total_power() == doctest::Approx(s.power_max).epsilon(1e-9));
  for (const auto& w : b.w_cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("SCA trace is monotone and feasible on the desk instance") {
  const Scenario s = desk();
  const Placement3D p{0.0, 0.0, 20000.0};
  const auto channels = static_channels(s, p);
  std::vector<Eigen::VectorXcd> steer;
  for (const auto& t : s.targets)
    steer.push_back(steering_vector(p, t, s.m_antennas));
  const SlotConstraints cons = static_constraints(s, p);
  const BeamformResult res = solve_beamforming(
      s, p, channels, steer, cons, initial_beams(s, channels));
  REQUIRE(res.status == BeamformStatus::ok);
  REQUIRE(res.trace.rows.size() >= 2);
  for (size_t i = 1; i < res.trace.rows.size(); ++i)
    CHECK(res.trace.rows[i].objective >=
          res.trace.rows[i - 1].objective - 1e-6);

  CHECK(res.beams.total_power() <= s.power_max * (1.0 + 1e-7));
  const Eigen::MatrixXcd h = res.beams.total_covariance();
  for (const auto& t : s.targets)
    CHECK(bp_constraint_ok(p, t, h, s.bp_threshold));
  CHECK(res.beams.total_power() >= cons.power_floor * (1.0 - 1e-7));
}

TEST_CASE("infeasible sensing threshold is classified") {
  Scenario s = desk();
  s.bp_threshold = 1e-5;  // needs ~4000 W of beampattern, cap is 40
  const Placement3D p{0.0, 0.0, 20000.0};
  const auto channels = static_channels(s, p);
  std::vector<Eigen::VectorXcd> steer;
  for (const auto& t : s.targets)
    steer.push_back(steering_vector(p, t, s.m_antennas));
  const BeamformResult res =
      solve_beamforming(s, p, channels, steer, static_constraints(s, p),
                        initial_beams(s, channels));
  CHECK(res.status == BeamformStatus::infeasible);
  CHECK_FALSE(res.detail.empty());
}

TEST_CASE("rank-1 extraction: exact on rank-1 input, power preserving") {
  const Scenario s = desk();
  const Placement3D p{0.0, 0.0, 20000.0};
  const auto channels = static_channels(s, p);

  SlotBeams rank1;
  std::vector<Eigen::VectorXcd> truth;
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXcd w = channels[k].normalized() * std::sqrt(3.0);
    truth.push_back(w);
    rank1.w_cov.push_back(w * w.adjoint());
  }
  rank1.r_s = 0.5 * Eigen::MatrixXcd::Identity(4, 4);

  bool randomized = true;
  const SlotBeams out = extract_rank_one(rank1, channels, s.weights,
                                         s.noise_power, &randomized, 1);
  CHECK_FALSE(randomized);
  REQUIRE(out.w_vec.size() == 2);
  for (int k = 0; k < 2; ++k) {
    // Same covariance up to a global phase on the vector.
    CHECK((out.w_vec[k] * out.w_vec[k].adjoint() - rank1.w_cov[k]).norm() <
          1e-9);
  }
  CHECK(out.total_power() == doctest::Approx(rank1.total_power()).epsilon(1e-9));
  // Per-user received powers survive the extraction.
  for (int k = 0; k < 2; ++k)
    CHECK(sinr(k, channels, out, s.noise_power) ==
          doctest::Approx(sinr(k, channels, rank1, s.noise_power)).epsilon(1e-9));
}

TEST_CASE("dynamic constraints pin the power floor at the ceiling altitude") {
  const Scenario s = desk();
  const Placement3D low{0.0, 0.0, 20000.0};
  const SlotConstraints stat = static_constraints(s, low);
  const SlotConstraints dyn = dynamic_constraints(s, low);
  CHECK(dyn.power_floor > stat.power_floor);
  const double ratio = std::pow(s.flight.h_max / low.z, 3);
  CHECK(dyn.power_floor == doctest::Approx(stat.power_floor * ratio));
  CHECK(dyn.bp_rhs == stat.bp_rhs);
}
