#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ncr/simulator.hpp"

namespace ncr {

/// Parses a YAML scenario. Example:
///
///   duration: 2 s
///   sample_rate: 10 Hz
///   seed: 7
///   actuation:
///     cable_1: [[0 s, 0 mm], [1 s, 2.5 mm]]
///   contacts:
///     - {start: 1 s, end: 2 s, arc_length: 12 mm, force: [-0.196 N, 0 N, 0 N]}
///     - {start: 1 s, end: 2 s, tip: true, mass: 20 g}
///   noise: {force: 0.003125 N, torque: 0.015625 N*mm, tension: 0.0444822 N}
///
/// Throws ParseError or InvalidConfiguration.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string format_scenario(const Scenario& scenario);

}  // namespace ncr
