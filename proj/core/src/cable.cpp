#include "ncr/cable.hpp"

#include <cmath>
#include <tuple>

#include "ncr/errors.hpp"

namespace ncr {

Vec2 cable_attach_point(const BeamTip& tip, int side, const RobotParams& params) {
  const double half = 0.5 * params.cable_pitch_diameter * side;
  return {tip.r + std::cos(tip.theta) * half, tip.z - std::sin(tip.theta) * half};
}

std::pair<double, double> cable_wrap_angles(const Vec2& attach, double theta, int side,
                                            const RobotParams& params) {
  if (!(attach.y() > 0.0))
    throw InvalidConfiguration("state", "cable attach point at or below the joint base plane");
  const double phi_a = std::atan((attach.x() - 0.5 * params.cable_pitch_diameter * side) / attach.y());
  return {phi_a, theta - phi_a};
}

double cable_segment_length(const Vec2& attach, int side, const RobotParams& params) {
  return std::hypot(attach.x() - 0.5 * params.cable_pitch_diameter * side, attach.y());
}

std::array<CableGeometry, kCableCount> cable_geometry(const BeamTip& tip, const RobotParams& params) {
  std::array<CableGeometry, kCableCount> out;
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const int side = cable_side(c);
    auto& g = out[c];
    g.attach_point = cable_attach_point(tip, side, params);
    g.segment_length = cable_segment_length(g.attach_point, side, params);
    std::tie(g.wrap_a, g.wrap_b) = cable_wrap_angles(g.attach_point, tip.theta, side, params);
  }
  return out;
}

double friction_sign_update(double prev_sign, double l_now, double l_prev, double tension,
                            const RobotParams& params, double tolerance) {
  if (!(tension > 0.0)) return 0.0;
  if (std::abs(l_now - l_prev) <= tolerance) return prev_sign;
  return l_now < l_prev ? params.friction_coeff : -params.friction_coeff;
}

double capstan_propagate(double tension_in, std::span<const Wrap> wraps) {
  double exponent = 0.0;
  for (const Wrap& w : wraps) exponent += w.sign * w.angle;
  return tension_in * std::exp(exponent);
}

std::vector<CableArray> tensions_at_attach(
    const CableArray& input_tensions,
    const std::vector<std::array<CableGeometry, kCableCount>>& geometry,
    const FrictionSigns& friction) {
  std::vector<CableArray> out(geometry.size());
  for (std::size_t c = 0; c < kCableCount; ++c) {
    std::vector<Wrap> wraps;
    wraps.reserve(2 * geometry.size());
    for (std::size_t i = 0; i < geometry.size(); ++i) {
      const double u = friction.at(i, c);
      wraps.push_back({std::abs(geometry[i][c].wrap_a), u});
      out[i][c] = capstan_propagate(input_tensions[c], wraps);
      wraps.push_back({std::abs(geometry[i][c].wrap_b), u});
    }
  }
  return out;
}

double total_cable_length(const JointState& state, std::size_t cable, double input_tension,
                          const RobotParams& params) {
  const int side = cable_side(cable);
  double path = 0.0;
  for (const BeamTip& tip : state.tips)
    path += cable_segment_length(cable_attach_point(tip, side, params), side, params) +
            params.channel_length;
  return path - input_tension * params.unloaded_cable_length / params.cable_axial_stiffness;
}

}  // namespace ncr
