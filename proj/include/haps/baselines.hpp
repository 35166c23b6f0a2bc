#pragma once

#include <string>
#include <variant>

#include "haps/placement.hpp"
#include "haps/trajectory.hpp"

namespace haps {

enum class BaselineKind {
  comm_only_static,
  sar_only_static,
  comm_only_dynamic,
  sar_only_dynamic,
  isotropic_dynamic,
  circle_flight,
};

const char* to_string(BaselineKind k);
bool baseline_from_string(const std::string& name, BaselineKind* out);

using BaselineDesign = std::variant<StaticDesign, DynamicDesign>;

BaselineDesign solve_baseline(BaselineKind kind, const Scenario& s,
                              const GridSpec& grid, int jobs = 1);

/// Random closed circular trajectory (seeded) with per-slot beamforming.
DynamicDesign circle_flight_design(const Scenario& s, std::uint64_t seed,
                                   int jobs = 1);

/// Min over targets of a^H R_s a / d^2 achieved by a design's sensing
/// covariance (the max-min baselines' reporting metric).
double min_normalized_beampattern(const Scenario& s, const Placement3D& p,
                                  const Eigen::MatrixXcd& r_s);

}  // namespace haps
