#include "haps/geometry.hpp"

#include <cmath>
#include <numbers>

namespace haps {

double distance(const Placement3D& p, const GroundPoint& g) {
  const double dx = p.x - g.x;
  const double dy = p.y - g.y;
  return std::sqrt(dx * dx + dy * dy + p.z * p.z);
}

double aod_cosine(const Placement3D& p, const GroundPoint& g) {
  return p.z / distance(p, g);
}

Eigen::VectorXcd steering_vector(const Placement3D& p, const GroundPoint& g, int m) {
  const double ct = aod_cosine(p, g);
  Eigen::VectorXcd a(m);
  for (int i = 0; i < m; ++i) {
    const double phase = std::numbers::pi * i * ct;
    a(i) = std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return a;
}

double path_gain(double d, double rho0) { return rho0 / (d * d); }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_open(std::uint64_t bits) {
  // (0, 1): never exactly 0 so the Box-Muller log stays finite.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::complex<double> cn_unit_draw(std::uint64_t seed, std::uint64_t user,
                                  std::uint64_t slot, std::uint64_t idx) {
  std::uint64_t key = splitmix64(seed ^ 0x8e2fca9d0b4f1a37ULL);
  key = splitmix64(key ^ user);
  key = splitmix64(key ^ (slot << 20));
  key = splitmix64(key ^ (idx << 40));
  const double u1 = unit_open(key);
  const double u2 = unit_open(splitmix64(key));
  const double r = std::sqrt(-std::log(u1));  // CN(0,1): each part N(0, 1/2)
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

ChannelVector rician_channel(const Placement3D& p, const GroundPoint& g, int m,
                             double rician_k, double rho0, std::uint64_t seed,
                             std::uint64_t user, std::uint64_t slot) {
  ChannelVector out;
  const double d = distance(p, g);
  const double amp = std::sqrt(path_gain(d, rho0));
  const Eigen::VectorXcd a = steering_vector(p, g, m);
  const bool los = !(rician_k < 1e12);
  out.los_only = los;
  if (los) {
    out.g = amp * a;
    return out;
  }
  const double w_los = std::sqrt(rician_k / (rician_k + 1.0));
  const double w_nlos = std::sqrt(1.0 / (rician_k + 1.0));
  Eigen::VectorXcd nlos(m);
  for (int i = 0; i < m; ++i)
    nlos(i) = cn_unit_draw(seed, user, slot, static_cast<std::uint64_t>(i));
  out.g = amp * (w_los * a + w_nlos * nlos);
  return out;
}

}  // namespace haps
