#include <cmath>

#include "doctest.h"
#include "haps/baselines.hpp"

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
  s.bp_threshold = 1e-8;
  s.snr_min = 2.0;
  s.horizon = 80.0;
  s.slots = 8;
  return s;
}

GridSpec coarse() {
  GridSpec g;
  g.x_min = -15000;
  g.x_max = 15000;
  g.y_min = 0;
  g.y_max = 0;
  g.nx = 3;
  g.ny = 1;
  g.z_step = 10000.0;
  return g;
}

}  // namespace

TEST_CASE("baseline names round trip") {
  for (BaselineKind k :
       {BaselineKind::comm_only_static, BaselineKind::sar_only_static,
        BaselineKind::comm_only_dynamic, BaselineKind::sar_only_dynamic,
        BaselineKind::isotropic_dynamic, BaselineKind::circle_flight}) {
    BaselineKind back;
    REQUIRE(baseline_from_string(to_string(k), &back));
    CHECK(back == k);
  }
  BaselineKind ignored;
  CHECK_FALSE(baseline_from_string("no-such-baseline", &ignored));
}

TEST_CASE("sensing-only design reaches the steered optimum for one target") {
  Scenario s = desk();
  s.targets = {{0, 0}};
  GridSpec g;
  g.x_min = 0;
  g.x_max = 0;
  g.y_min = 0;
  g.y_max = 0;
  g.nx = 1;
  g.ny = 1;
  g.z_step = 20000.0;  // single candidate directly above the target
  const auto d = std::get<StaticDesign>(
      solve_baseline(BaselineKind::sar_only_static, s, g, 1));
  REQUIRE(d.feasible);
  // Fully steered: a^H H a / d^2 = M P_max / d^2.
  const double expect = s.m_antennas * s.power_max / (20000.0 * 20000.0);
  CHECK(d.objective == doctest::Approx(expect).epsilon(1e-3));
  CHECK(min_normalized_beampattern(s, d.placement, d.beams.r_s) ==
        doctest::Approx(d.objective));
  // All user covariances are idle.
  for (const auto& w : d.beams.w_cov) CHECK(w.norm() == 0.0);
}

TEST_CASE("comm-only static dominates the constrained design") {
  const Scenario s = desk();
  const GridSpec g = coarse();
  const auto unconstrained = std::get<StaticDesign>(
      solve_baseline(BaselineKind::comm_only_static, s, g, 1));
  const StaticDesign constrained = solve_static(s, g, 1);
  REQUIRE(unconstrained.feasible);
  REQUIRE(constrained.feasible);
  CHECK(unconstrained.objective >= constrained.objective - 1e-6);
}

TEST_CASE("isotropic sensing power is sized by the farthest target") {
  Scenario s = desk();
  s.slots = 4;
  const auto d = std::get<DynamicDesign>(
      solve_baseline(BaselineKind::isotropic_dynamic, s, GridSpec{}, 1));
  REQUIRE(d.feasible);
  for (int i = 0; i < 4; ++i) {
    const auto& r_s = d.solution.slots[i].r_s;
    // Isotropic block: multiple of the identity.
    const double p_s = r_s.trace().real();
    CHECK((r_s - (p_s / 4) * Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-12);
    const Placement3D& p = d.trajectory.slot_position(i + 1);
    double want = 0.0;
    for (const auto& t : s.targets) {
      const double dd = distance(p, t);
      want = std::max(want, s.bp_threshold * dd * dd);
    }
    CHECK(p_s == doctest::Approx(want).epsilon(1e-9));
    // The floors hold exactly at the sized power.
    const Eigen::MatrixXcd h = d.solution.slots[i].total_covariance();
    for (const auto& t : s.targets)
      CHECK(bp_constraint_ok(p, t, h, s.bp_threshold));
  }
}

TEST_CASE("circle flight is seed deterministic and seed sensitive") {
  Scenario s = desk();
  s.slots = 4;
  const DynamicDesign a = circle_flight_design(s, 5, 1);
  const DynamicDesign b = circle_flight_design(s, 5, 1);
  REQUIRE(a.feasible);
  CHECK(a.objective == b.objective);
  for (int i = 0; i < 4; ++i) {
    CHECK(a.trajectory.nodes[i].x == b.trajectory.nodes[i].x);
    CHECK(a.trajectory.nodes[i].z == b.trajectory.nodes[i].z);
  }
  const DynamicDesign c = circle_flight_design(s, 6, 1);
  bool same = true;
  for (int i = 0; i < 4; ++i)
    same = same && a.trajectory.nodes[i].x == c.trajectory.nodes[i].x &&
           a.trajectory.nodes[i].y == c.trajectory.nodes[i].y;
  CHECK_FALSE(same);
  // The random circle still respects the flight envelope.
  CHECK(trajectory_feasible(a.trajectory, s));
  CHECK(trajectory_feasible(c.trajectory, s));
}

TEST_CASE("sensing-only dynamic flies the canonical circle") {
  Scenario s = desk();
  s.slots = 4;
  const auto d = std::get<DynamicDesign>(
      solve_baseline(BaselineKind::sar_only_dynamic, s, GridSpec{}, 1));
  REQUIRE(d.feasible);
  const Trajectory ref = circular_init(s);
  for (int i = 0; i < 4; ++i) {
    CHECK(d.trajectory.nodes[i].x == doctest::Approx(ref.nodes[i].x));
    CHECK(d.trajectory.nodes[i].z == doctest::Approx(s.flight.h_min));
  }
  CHECK(d.objective > 0.0);  // min normalized sensing gain
}
