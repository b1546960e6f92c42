#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ncr/params.hpp"
#include "ncr/state.hpp"

namespace ncr {

/// Default length tolerance below which a segment counts as unchanged.
inline constexpr double kFrictionLengthTolerance = 1e-6;  // mm

/// Hole B of the cable on `side` at the flexure tip, in the joint base frame.
Vec2 cable_attach_point(const BeamTip& tip, int side, const RobotParams& params);

/// Deflection angles (phi_A, phi_B) of the cable at holes A and B.
/// phi_A + phi_B == theta holds exactly. Throws InvalidConfiguration when
/// the attach point lies at or below the base plane.
std::pair<double, double> cable_wrap_angles(const Vec2& attach, double theta, int side,
                                            const RobotParams& params);

/// Straight-segment length from hole A at (side*d_c/2, 0) to B.
double cable_segment_length(const Vec2& attach, int side, const RobotParams& params);

/// Geometry of both cables of one joint.
std::array<CableGeometry, kCableCount> cable_geometry(const BeamTip& tip, const RobotParams& params);

/// Quasi-static friction coefficient after a length change: +u when the
/// segment shortens, -u when it lengthens, the previous value while the
/// change is within `tolerance`, and 0 for a slack cable.
double friction_sign_update(double prev_sign, double l_now, double l_prev, double tension,
                            const RobotParams& params,
                            double tolerance = kFrictionLengthTolerance);

struct Wrap {
  double angle = 0.0;  // >= 0
  double sign = 0.0;   // in [-u, u]
};

/// Capstan transmission across a sequence of wraps:
/// T_in * exp(sum sign_k * angle_k).
double capstan_propagate(double tension_in, std::span<const Wrap> wraps);

/// Cable tension on the A-B segment of every joint, for each cable, given
/// the proximal input tensions.
std::vector<CableArray> tensions_at_attach(const CableArray& input_tensions,
                                           const std::vector<std::array<CableGeometry, kCableCount>>& geometry,
                                           const FrictionSigns& friction);

/// Unstretched cable length the path requires at input tension F_in:
/// L^c = sum_i (l_i + L_c) - F_in * L_os / k_cable. This is the quantity a
/// set length commands.
double total_cable_length(const JointState& state, std::size_t cable, double input_tension,
                          const RobotParams& params);

}  // namespace ncr
