#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ncr/params.hpp"
#include "ncr/simulator.hpp"

namespace ncr {

/// Contents of a robot configuration file.
struct RobotConfig {
  RobotParams params;
  std::optional<NoiseModel> noise;

  bool operator==(const RobotConfig&) const = default;
};

/// Parses a YAML robot document. Every quantity carries a unit, e.g.
/// `outer_diameter: 3.5 mm`; missing keys keep their defaults and unknown
/// keys are rejected. Throws ParseError (syntax, units, unknown keys) or
/// InvalidConfiguration (values violating invariants).
RobotConfig parse_robot_config(std::string_view text);
RobotConfig load_robot_config(const std::filesystem::path& path);

/// Emits every field; parse_robot_config(format_robot_config(c)) == c.
std::string format_robot_config(const RobotConfig& config);

/// Parses "<number> <unit>" and converts to the internal unit of `dimension`
/// ("length", "modulus", "force", "torque", "angle", "mass", "time",
/// "frequency", "inertia", "none"). Throws ParseError.
double parse_quantity(std::string_view text, std::string_view dimension);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_number(double value);

}  // namespace ncr
