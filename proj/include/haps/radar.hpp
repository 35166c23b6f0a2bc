#pragma once

#include <Eigen/Dense>

#include "haps/geometry.hpp"
#include "haps/scenario.hpp"

namespace haps {

/// Complex Hermitian matrix with a PSD marker. Construction validates
/// hermiticity (1e-12) and, when flagged, min eigenvalue >= -1e-9 * trace.
struct HermitianMatrix {
  Eigen::MatrixXcd mat;
  bool psd = false;

  static HermitianMatrix from(const Eigen::MatrixXcd& m, bool expect_psd);
  int dim() const { return static_cast<int>(mat.rows()); }
  double trace_real() const { return mat.trace().real(); }
};

/// Transmit beampattern gain a^H H a toward a ground point.
double beampattern_gain(const Placement3D& p, const GroundPoint& t,
                        const Eigen::MatrixXcd& h_cov);

/// Sensing floor B >= Gamma d^2, boundary inclusive, 1e-7 relative slack.
bool bp_constraint_ok(const Placement3D& p, const GroundPoint& t,
                      const Eigen::MatrixXcd& h_cov, double gamma);

/// Constant c0 such that SNR = c0 * P_total / (z^3 * V).
double sar_snr_coeff(const SarParams& sar, double wavelength, double obs_angle);

double sar_snr(double z, double v, double p_total, const SarParams& sar,
               double wavelength, double obs_angle);

}  // namespace haps
