#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "haps/scenario.hpp"

namespace haps {

/// Platform position: horizontal (x, y) plus altitude, meters.
struct Placement3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Complex channel (or steering) gains, one per antenna.
struct ChannelVector {
  Eigen::VectorXcd g;
  bool los_only = false;
};

double distance(const Placement3D& p, const GroundPoint& g);
double aod_cosine(const Placement3D& p, const GroundPoint& g);

/// Half-wavelength ULA phase ramp e^{j pi (m-1) cos(theta)}, first entry 1.
Eigen::VectorXcd steering_vector(const Placement3D& p, const GroundPoint& g, int m);

/// Free-space power gain rho0 / d^2.
double path_gain(double d, double rho0);

/// Counter-based normal draws keyed by (seed, user, slot): identical results
/// regardless of evaluation order.
std::complex<double> cn_unit_draw(std::uint64_t seed, std::uint64_t user,
                                  std::uint64_t slot, std::uint64_t idx);

/// Rician mixture channel. rician_k >= 1e12 (or infinity) yields the exact
/// LOS channel l^{-1/2} a.
ChannelVector rician_channel(const Placement3D& p, const GroundPoint& g, int m,
                             double rician_k, double rho0, std::uint64_t seed,
                             std::uint64_t user, std::uint64_t slot);

}  // namespace haps
