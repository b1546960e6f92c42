#pragma once

#include <Eigen/Core>

#include "ncr/params.hpp"
#include "ncr/state.hpp"

namespace ncr {

/// Fixed coefficient matrices of the beam-constraint model.
namespace bcm {
const Eigen::Matrix2d& stiffness();       // A
const Eigen::Matrix2d& load_stiffening(); // B
const Eigen::Matrix2d& kinematic();       // C
const Eigen::Matrix2d& elastokinematic(); // D
}  // namespace bcm

/// Normalized tip loads f = L^2 F_r/(EI), p = L^2 F_z/(EI), m = M L/(EI).
struct NormalizedLoads {
  double transverse = 0.0;
  double axial = 0.0;
  double moment = 0.0;
};

NormalizedLoads normalize(const BeamLoads& loads, double length, const RobotParams& params);

/// Closed-form intermediate-deflection tip displacement of a flexure of
/// `length` under `loads` (loads.e_eff is used as the modulus).
/// Throws NonPhysicalLoad when A + p B is singular or past the first
/// critical compressive load.
BeamTip bcm_deflection(const BeamLoads& loads, double length, const RobotParams& params);

/// E = E_A xi(theta) + E_M (1 - xi(theta)); xi = 1 without a calibration curve.
double effective_modulus(double theta, const RobotParams& params);

}  // namespace ncr
