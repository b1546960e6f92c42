#include "ncr/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ncr/errors.hpp"
#include "ncr/units.hpp"

namespace ncr {

XiCurve::XiCurve(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw InvalidConfiguration("xi_curve", "needs at least one knot");
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    const auto [theta, xi] = knots_[k];
    if (!std::isfinite(theta) || !std::isfinite(xi) || xi < 0.0 || xi > 1.0)
      throw InvalidConfiguration("xi_curve", "xi must lie in [0, 1]");
    if (k > 0 && !(theta > knots_[k - 1].first))
      throw InvalidConfiguration("xi_curve", "theta knots must increase strictly");
  }
  const bool up = knots_.back().second >= knots_.front().second;
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    const double d = knots_[k].second - knots_[k - 1].second;
    if ((up && d < 0.0) || (!up && d > 0.0))
      throw InvalidConfiguration("xi_curve", "xi must be monotone");
  }
}

double XiCurve::operator()(double theta) const {
  if (knots_.empty()) return 1.0;
  const double a = std::abs(theta);
  if (a <= knots_.front().first) return knots_.front().second;
  if (a >= knots_.back().first) return knots_.back().second;
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), a,
                                   [](double v, const auto& k) { return v < k.first; });
  const auto lo = hi - 1;
  const double w = (a - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

double RobotParams::bending_stiffness(double e_gpa) const {
  return e_gpa * units::kMpaPerGpa * second_moment;
}

double rectangular_segment_inertia(double beam_width, double outer_diameter, double inner_diameter) {
  const double thickness = 0.5 * (outer_diameter - inner_diameter);
  return 2.0 * thickness * beam_width * beam_width * beam_width / 12.0;
}

RobotParams prototype_params() {
  RobotParams p;
  p.second_moment = rectangular_segment_inertia(p.beam_width, p.outer_diameter, p.inner_diameter);
  return p;
}

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw InvalidConfiguration(field, what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void validate(const RobotParams& p) {
  require(finite(p.outer_diameter) && p.outer_diameter > 0.0, "outer_diameter", "must be positive");
  require(finite(p.inner_diameter) && p.inner_diameter > 0.0, "inner_diameter", "must be positive");
  require(p.inner_diameter < p.outer_diameter, "inner_diameter", "must be smaller than outer_diameter");
  require(finite(p.cable_pitch_diameter) && p.cable_pitch_diameter > 0.0, "cable_pitch_diameter",
          "must be positive");
  require(p.cable_pitch_diameter < p.inner_diameter, "cable_pitch_diameter",
          "must be smaller than inner_diameter");
  require(finite(p.beam_width) && p.beam_width > 0.0, "beam_width", "must be positive");
  require(finite(p.notch_height) && p.notch_height >= 0.0, "notch_height", "must be non-negative");
  require(finite(p.beam_length) && p.beam_length > 0.0, "beam_length", "must be positive");
  require(finite(p.channel_length) && p.channel_length >= 0.0, "channel_length",
          "must be non-negative");
  require(p.joint_count >= 1, "joint_count", "must be at least 1");
  require(finite(p.martensite_modulus) && p.martensite_modulus > 0.0, "martensite_modulus",
          "must be positive");
  require(finite(p.austenite_modulus) && p.austenite_modulus >= p.martensite_modulus,
          "austenite_modulus", "must be at least martensite_modulus");
  require(finite(p.friction_coeff) && p.friction_coeff >= 0.0, "friction_coeff",
          "must be non-negative");
  require(finite(p.second_moment) && p.second_moment > 0.0, "second_moment", "must be positive");
  require(finite(p.cable_axial_stiffness) && p.cable_axial_stiffness > 0.0, "cable_axial_stiffness",
          "must be positive");
  require(finite(p.unloaded_cable_length) && p.unloaded_cable_length >= 0.0,
          "unloaded_cable_length", "must be non-negative");
  require(p.cable_count == kCableCount, "cable_count", "only the planar antagonistic pair (2) is supported");
  require(finite(p.axial_compliance) && p.axial_compliance >= 0.0, "axial_compliance",
          "must be non-negative");
}

double RobotParams::cable_compliance() const {
  const double half = 0.5 * cable_pitch_diameter;
  return static_cast<double>(joint_count) * half * half * beam_length /
             bending_stiffness(austenite_modulus) +
         unloaded_cable_length / cable_axial_stiffness;
}

}  // namespace ncr
