#include "ncr/bcm.hpp"

#include <cmath>
#include <string>
#include <Eigen/LU>

#include "ncr/errors.hpp"

namespace ncr {

namespace bcm {

const Eigen::Matrix2d& stiffness() {
  static const Eigen::Matrix2d m = (Eigen::Matrix2d() << 12.0, -6.0, -6.0, 4.0).finished();
  return m;
}

const Eigen::Matrix2d& load_stiffening() {
  static const Eigen::Matrix2d m = (Eigen::Matrix2d() << 1.2, -0.1, -0.1, 0.13).finished();
  return m;
}

const Eigen::Matrix2d& kinematic() {
  static const Eigen::Matrix2d m = (Eigen::Matrix2d() << -0.6, 0.05, 0.05, -0.067).finished();
  return m;
}

const Eigen::Matrix2d& elastokinematic() {
  static const Eigen::Matrix2d m =
      (Eigen::Matrix2d() << 1.0 / 700.0, -1.0 / 1400.0, -1.0 / 1400.0, 11.0 / 6300.0).finished();
  return m;
}

}  // namespace bcm

namespace {

// det(A + pB) = 12 + 5.16 p + 0.146 p^2 vanishes first at p ~ -2.503.
constexpr double kMinDeterminant = 1e-6;
constexpr double kCriticalAxial = -2.6;

}  // namespace

NormalizedLoads normalize(const BeamLoads& loads, double length, const RobotParams& params) {
  const double ei = params.bending_stiffness(loads.e_eff);
  const double l2 = length * length / ei;
  return {loads.f_r * l2, loads.f_z * l2, loads.m_y * length / ei};
}

BeamTip bcm_deflection(const BeamLoads& loads, double length, const RobotParams& params) {
  const NormalizedLoads n = normalize(loads, length, params);
  const double p = n.axial;
  const Eigen::Matrix2d k = bcm::stiffness() + p * bcm::load_stiffening();
  const double det = k.determinant();
  if (!(det > kMinDeterminant) || p < kCriticalAxial)
    throw NonPhysicalLoad("beam-constraint system singular at normalized axial load " +
                              std::to_string(p),
                          p);
  const Eigen::Vector2d q = k.inverse() * Eigen::Vector2d(n.transverse, n.moment);
  const double z_hat = 1.0 + params.axial_compliance * p + q.dot(bcm::kinematic() * q) +
                       p * q.dot(bcm::elastokinematic() * q);
  return {q.x() * length, z_hat * length, q.y()};
}

double effective_modulus(double theta, const RobotParams& params) {
  const double xi = params.xi_curve ? (*params.xi_curve)(theta) : 1.0;
  return params.austenite_modulus * xi + params.martensite_modulus * (1.0 - xi);
}

}  // namespace ncr
