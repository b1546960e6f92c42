#pragma once

#include "ncr/params.hpp"
#include "ncr/state.hpp"

namespace ncr {

struct ShootingOptions {
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  double angle_tolerance = 1e-11;  // on theta'(L) - M/EI, scaled by 1/L
  int max_iterations = 200;
};

/// Large-deflection Euler-Bernoulli cantilever under tip loads, solved by
/// shooting on the root curvature:
///   EI theta'' = F_z sin(theta) - F_r cos(theta), theta(0) = 0,
///   theta'(L) = M / EI.
/// Throws OracleFailure when no root is bracketed or the iteration stalls.
BeamTip ode_shooting_deflection(const BeamLoads& loads, double length, const RobotParams& params,
                                const ShootingOptions& options = {});

}  // namespace ncr
