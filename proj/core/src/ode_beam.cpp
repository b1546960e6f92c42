#include "ncr/ode_beam.hpp"

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "ncr/errors.hpp"

namespace ncr {

namespace {

using OdeState = std::array<double, 4>;  // theta, theta', x, z

OdeState integrate(double kappa0, double fr, double fz, double ei, double length,
                   const ShootingOptions& options) {
  namespace odeint = boost::numeric::odeint;
  auto rhs = [fr, fz, ei](const OdeState& y, OdeState& dy, double) {
    dy[0] = y[1];
    dy[1] = (fz * std::sin(y[0]) - fr * std::cos(y[0])) / ei;
    dy[2] = std::sin(y[0]);
    dy[3] = std::cos(y[0]);
  };
  OdeState y{0.0, kappa0, 0.0, 0.0};
  auto stepper = odeint::make_controlled(options.absolute_tolerance, options.relative_tolerance,
                                         odeint::runge_kutta_dopri5<OdeState>());
  odeint::integrate_adaptive(stepper, rhs, y, 0.0, length, length / 64.0);
  return y;
}

}  // namespace

BeamTip ode_shooting_deflection(const BeamLoads& loads, double length, const RobotParams& params,
                                const ShootingOptions& options) {
  if (!std::isfinite(loads.f_r) || !std::isfinite(loads.f_z) || !std::isfinite(loads.m_y))
    throw OracleFailure("non-finite beam loads");
  const double ei = params.bending_stiffness(loads.e_eff);
  const double target = loads.m_y / ei;
  auto miss = [&](double k) {
    return integrate(k, loads.f_r, loads.f_z, ei, length, options)[1] - target;
  };

  // Linear estimate of the root curvature, then expand a bracket around it.
  const double guess = (loads.m_y + loads.f_r * length) / ei;
  double span = 0.25 * std::max(std::abs(guess), 1.0 / length);
  double lo = guess - span, hi = guess + span;
  double f_lo = miss(lo), f_hi = miss(hi);
  for (int k = 0; f_lo * f_hi > 0.0; ++k) {
    if (k >= 60) throw OracleFailure("shooting could not bracket the root curvature");
    span *= 2.0;
    lo = guess - span;
    hi = guess + span;
    f_lo = miss(lo);
    f_hi = miss(hi);
  }

  const double tol = options.angle_tolerance / length;
  double k = 0.5 * (lo + hi);
  for (int it = 0;; ++it) {
    if (it >= options.max_iterations) throw OracleFailure("shooting iteration stalled");
    // Secant through the bracket ends; bisect when it leaves the inner half.
    double trial = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    const double quarter = 0.25 * (hi - lo);
    if (!(trial > lo + 0.01 * quarter && trial < hi - 0.01 * quarter)) trial = 0.5 * (lo + hi);
    const double f = miss(trial);
    k = trial;
    if (std::abs(f) <= tol || hi - lo <= 1e-15 * std::max(1.0, std::abs(k))) break;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = trial;
      f_lo = f;
    } else {
      hi = trial;
      f_hi = f;
    }
    // Guard against one-sided secant creep.
    if (it % 3 == 2) {
      const double mid = 0.5 * (lo + hi);
      const double fm = miss(mid);
      if ((fm < 0.0) == (f_lo < 0.0)) {
        lo = mid;
        f_lo = fm;
      } else {
        hi = mid;
        f_hi = fm;
      }
    }
  }
  const OdeState tip = integrate(k, loads.f_r, loads.f_z, ei, length, options);
  return {tip[2], tip[3], tip[0]};
}

}  // namespace ncr
