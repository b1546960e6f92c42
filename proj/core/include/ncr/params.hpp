#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace ncr {

/// Number of cables of the planar antagonistic pair. Cable 0 runs at +x
/// (side +1), cable 1 at -x (side -1).
inline constexpr std::size_t kCableCount = 2;

constexpr int cable_side(std::size_t cable) { return cable == 0 ? +1 : -1; }

/// Monotone piecewise-linear austenite-fraction curve xi(|theta|), clamped
/// outside its knot range.
class XiCurve {
 public:
  XiCurve() = default;
  /// Knots are (theta [rad], xi) pairs; theta strictly increasing, xi in
  /// [0, 1] and monotone. Throws InvalidConfiguration otherwise.
  explicit XiCurve(std::vector<std::pair<double, double>> knots);

  double operator()(double theta) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  bool operator==(const XiCurve&) const = default;

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// Geometry, stiffness and friction constants of the notched joint chain.
/// Lengths in mm, moduli in GPa, stiffness in N.
struct RobotParams {
  double outer_diameter = 3.5;
  double inner_diameter = 3.2;
  double cable_pitch_diameter = 2.6;
  double beam_width = 0.4;
  double notch_height = 2.5;
  double beam_length = 2.1;     // flexure length per joint
  double channel_length = 0.9;  // rigid channel preceding each flexure
  std::size_t joint_count = 7;
  double austenite_modulus = 47.05;  // GPa
  double martensite_modulus = 0.08;  // GPa
  double friction_coeff = 0.33;
  double second_moment = 0.0016;           // mm^4
  double cable_axial_stiffness = 5000.0;   // N
  double unloaded_cable_length = 300.0;    // mm
  std::size_t cable_count = kCableCount;
  /// Coefficient of the axial-compliance term L^2 F_z / (E I) of the
  /// beam-constraint model; 0 treats the centroidal axis as inextensible.
  double axial_compliance = 0.0;
  std::optional<XiCurve> xi_curve;

  bool operator==(const RobotParams&) const = default;

  /// Arc length of one joint (channel + flexure).
  double joint_pitch() const { return channel_length + beam_length; }
  double backbone_length() const { return static_cast<double>(joint_count) * joint_pitch(); }
  /// Bending stiffness of a flexure at modulus `e_gpa`, in N*mm^2.
  double bending_stiffness(double e_gpa) const;
  /// Small-deflection change of cable path plus stretch per newton of
  /// tension on a straight robot (mm/N).
  double cable_compliance() const;
};

/// The four-NCR prototype parameters with the library's defaults for the
/// quantities the prototype table leaves open.
RobotParams prototype_params();

/// Second moment of the two tube-wall ribs left by symmetric notches: each
/// rib is `beam_width` wide in the bending direction and (D_o - D_i)/2 thick.
double rectangular_segment_inertia(double beam_width, double outer_diameter, double inner_diameter);

/// Throws InvalidConfiguration naming the first offending field.
void validate(const RobotParams& params);

}  // namespace ncr
