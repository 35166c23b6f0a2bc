#pragma once

#include <vector>

#include "haps/beamforming.hpp"
#include "haps/geometry.hpp"
#include "haps/scenario.hpp"

namespace haps {

struct GridSpec {
  double x_min, x_max;
  double y_min, y_max;
  int nx = 5, ny = 5;
  double z_step = 1000.0;  // m
};

std::vector<Placement3D> enumerate_grid(const Scenario& s, const GridSpec& grid);

struct GridPointResult {
  Placement3D placement;
  bool feasible = false;
  double objective = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

struct StaticDesign {
  bool feasible = false;
  Placement3D placement;
  SlotBeams beams;
  double objective = 0.0;
  std::vector<GridPointResult> table;
  ConvergenceTrace trace;  // at the selected point
};

/// Outer loop of the quasi-stationary design: per-point SCA solves in a
/// worker pool (merged by index), deterministic argmax with lowest-z then
/// lexicographic (x, y) tie-break. NLOS draws reuse one fixed realization
/// across grid points.
StaticDesign solve_static(const Scenario& s, const GridSpec& grid,
                          int jobs = 1);

std::vector<Eigen::VectorXcd> static_channels(const Scenario& s,
                                              const Placement3D& p);

}  // namespace haps
