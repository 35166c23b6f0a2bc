#include "haps/placement.hpp"

#include <array>
#include <chrono>
#include <cmath>

#include "haps/runio.hpp"

namespace haps {

std::vector<Placement3D> enumerate_grid(const Scenario& s, const GridSpec& grid) {
  std::vector<double> xs, ys, zs;
  for (int i = 0; i < grid.nx; ++i)
    xs.push_back(grid.nx == 1 ? grid.x_min
                              : grid.x_min + i * (grid.x_max - grid.x_min) /
                                                 (grid.nx - 1));
  for (int j = 0; j < grid.ny; ++j)
    ys.push_back(grid.ny == 1 ? grid.y_min
                              : grid.y_min + j * (grid.y_max - grid.y_min) /
                                                 (grid.ny - 1));
  for (double z = s.flight.h_min; z <= s.flight.h_max + 1e-9; z += grid.z_step)
    zs.push_back(z);
  std::vector<Placement3D> out;
  out.reserve(zs.size() * xs.size() * ys.size());
  for (double z : zs)
    for (double x : xs)
      for (double y : ys) out.push_back({x, y, z});
  return out;
}

std::vector<Eigen::VectorXcd> static_channels(const Scenario& s,
                                              const Placement3D& p) {
  std::vector<Eigen::VectorXcd> g;
  // Slot index 0: one shared NLOS realization per user, identical at every
  // candidate point so the grid comparison is apples-to-apples.
  for (int k = 0; k < s.num_users(); ++k)
    g.push_back(rician_channel(p, s.users[k], s.m_antennas, s.rician_k,
                               s.ref_gain, s.rng_seed, k, 0)
                    .g);
  return g;
}

StaticDesign solve_static(const Scenario& s, const GridSpec& grid, int jobs) {
  using clock = std::chrono::steady_clock;
  const std::vector<Placement3D> points = enumerate_grid(s, grid);
  const int n = static_cast<int>(points.size());

  std::vector<GridPointResult> table(n);
  std::vector<BeamformResult> results(n);
  parallel_for_indexed(n, jobs, [&](int i) {
    const Placement3D& p = points[i];
    const auto t0 = clock::now();
    const auto channels = static_channels(s, p);
    std::vector<Eigen::VectorXcd> steer;
    for (const auto& t : s.targets)
      steer.push_back(steering_vector(p, t, s.m_antennas));
    const SlotConstraints cons = static_constraints(s, p);
    results[i] = solve_beamforming(s, p, channels, steer, cons,
                                   initial_beams(s, channels));
    table[i].placement = p;
    table[i].feasible = results[i].status == BeamformStatus::ok;
    table[i].objective = table[i].feasible ? results[i].objective : 0.0;
    table[i].iterations = static_cast<int>(results[i].trace.rows.size());
    table[i].seconds = std::chrono::duration<double>(clock::now() - t0).count();
  });

  StaticDesign design;
  design.table = table;
  int best = -1;
  for (int i = 0; i < n; ++i) {
    if (!table[i].feasible) continue;
    if (best < 0) {
      best = i;
      continue;
    }
    const GridPointResult& a = table[i];
    const GridPointResult& b = table[best];
    if (a.objective > b.objective + 1e-9 * std::max(1.0, std::abs(b.objective)))
      best = i;
    else if (a.objective >=
             b.objective - 1e-9 * std::max(1.0, std::abs(b.objective))) {
      // Tie: prefer lowest altitude, then lexicographic (x, y).
      const auto key = [](const Placement3D& p) {
        return std::array<double, 3>{p.z, p.x, p.y};
      };
      if (key(a.placement) < key(b.placement)) best = i;
    }
  }
  if (best < 0) return design;

  design.feasible = true;
  design.placement = points[best];
  const auto channels = static_channels(s, design.placement);
  bool randomized = false;
  design.beams = extract_rank_one(results[best].beams, channels, s.weights,
                                  s.noise_power, &randomized, s.rng_seed);
  design.objective = 0.0;
  for (int k = 0; k < s.num_users(); ++k)
    design.objective +=
        s.weights[k] * rate(k, channels, design.beams, s.noise_power);
  design.trace = results[best].trace;
  return design;
}

}  // namespace haps
