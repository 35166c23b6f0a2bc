#include "haps/radar.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace haps {

HermitianMatrix HermitianMatrix::from(const Eigen::MatrixXcd& m, bool expect_psd) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("HermitianMatrix: matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("HermitianMatrix: A != A^H beyond 1e-12");
  HermitianMatrix h;
  h.mat = 0.5 * (m + m.adjoint());
  h.psd = expect_psd;
  if (expect_psd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.mat,
                                                       Eigen::EigenvaluesOnly);
    const double tr = h.mat.trace().real();
    if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, tr))
      throw std::invalid_argument("HermitianMatrix: not PSD within tolerance");
  }
  return h;
}

double beampattern_gain(const Placement3D& p, const GroundPoint& t,
                        const Eigen::MatrixXcd& h_cov) {
  const Eigen::VectorXcd a = steering_vector(p, t, static_cast<int>(h_cov.rows()));
  return (a.adjoint() * h_cov * a).value().real();
}

bool bp_constraint_ok(const Placement3D& p, const GroundPoint& t,
                      const Eigen::MatrixXcd& h_cov, double gamma) {
  const double d = distance(p, t);
  const double rhs = gamma * d * d;
  const double lhs = beampattern_gain(p, t, h_cov);
  return lhs >= rhs - 1e-7 * std::max(1.0, rhs);
}

double sar_snr_coeff(const SarParams& sar, double wavelength, double obs_angle) {
  const double sa = std::sin(obs_angle);
  const double l3 = wavelength * wavelength * wavelength;
  const double num = sar.g_t * sar.g_r * l3 * sar.sigma0 * sar.c * sar.tau_p *
                     sar.prf * sa * sa;
  const double pi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;
  const double den =
      256.0 * pi3 * sar.kappa * sar.t_o * sar.nf * sar.b_r * sar.l_tot;
  return num / den;
}

double sar_snr(double z, double v, double p_total, const SarParams& sar,
               double wavelength, double obs_angle) {
  if (z <= 0 || v <= 0 || p_total <= 0)
    throw std::invalid_argument("sar_snr: z, V, P must be > 0");
  return sar_snr_coeff(sar, wavelength, obs_angle) * p_total / (z * z * z * v);
}

}  // namespace haps
