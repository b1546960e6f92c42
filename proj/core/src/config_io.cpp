#include "ncr/config_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ncr/errors.hpp"
#include "ncr/units.hpp"
#include "yaml_util.hpp"

namespace ncr {

namespace {

struct UnitEntry {
  std::string_view dimension;
  std::string_view unit;
  double factor;  // to the internal unit
};

constexpr std::array kUnits = {
    UnitEntry{"length", "mm", 1.0},       UnitEntry{"length", "m", 1e3},
    UnitEntry{"length", "cm", 10.0},      UnitEntry{"length", "um", 1e-3},
    UnitEntry{"modulus", "GPa", 1.0},     UnitEntry{"modulus", "MPa", 1e-3},
    UnitEntry{"modulus", "Pa", 1e-9},     UnitEntry{"force", "N", 1.0},
    UnitEntry{"force", "mN", 1e-3},       UnitEntry{"force", "gf", units::kNewtonPerGramForce},
    UnitEntry{"force", "lbf", units::kNewtonPerPoundForce},
    UnitEntry{"torque", "N*mm", 1.0},     UnitEntry{"torque", "Nmm", 1.0},
    UnitEntry{"torque", "N*m", 1e3},      UnitEntry{"torque", "mN*m", 1.0},
    UnitEntry{"angle", "rad", 1.0},       UnitEntry{"angle", "deg", 0.017453292519943295},
    UnitEntry{"mass", "g", 1.0},          UnitEntry{"mass", "kg", 1e3},
    UnitEntry{"time", "s", 1.0},          UnitEntry{"time", "ms", 1e-3},
    UnitEntry{"frequency", "Hz", 1.0},    UnitEntry{"frequency", "kHz", 1e3},
    UnitEntry{"inertia", "mm^4", 1.0},    UnitEntry{"stiffness", "N", 1.0},
};

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

double parse_number(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw ParseError("'" + std::string(text) + "' is not a number");
  return v;
}

double parse_quantity(std::string_view text, std::string_view dimension) {
  const auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  };
  text = trim(text);
  const auto split = text.find_first_of(" \t");
  const std::string_view number = text.substr(0, split);
  const std::string_view unit = split == std::string_view::npos ? std::string_view{} : trim(text.substr(split));
  const double v = parse_number(number);
  if (dimension == "none") {
    if (!unit.empty()) throw ParseError("'" + std::string(text) + "' must be a plain number");
    return v;
  }
  if (unit.empty())
    throw ParseError("'" + std::string(text) + "' needs a " + std::string(dimension) + " unit");
  for (const UnitEntry& u : kUnits)
    if (u.dimension == dimension && u.unit == unit) return v * u.factor;
  throw ParseError("unit '" + std::string(unit) + "' is not a " + std::string(dimension) + " unit");
}

namespace {

struct Field {
  const char* key;
  const char* dimension;
  const char* unit;  // emitted unit
  double RobotParams::*member;
};

constexpr std::array kFields = {
    Field{"outer_diameter", "length", "mm", &RobotParams::outer_diameter},
    Field{"inner_diameter", "length", "mm", &RobotParams::inner_diameter},
    Field{"cable_pitch_diameter", "length", "mm", &RobotParams::cable_pitch_diameter},
    Field{"beam_width", "length", "mm", &RobotParams::beam_width},
    Field{"notch_height", "length", "mm", &RobotParams::notch_height},
    Field{"beam_length", "length", "mm", &RobotParams::beam_length},
    Field{"channel_length", "length", "mm", &RobotParams::channel_length},
    Field{"austenite_modulus", "modulus", "GPa", &RobotParams::austenite_modulus},
    Field{"martensite_modulus", "modulus", "GPa", &RobotParams::martensite_modulus},
    Field{"friction_coeff", "none", "", &RobotParams::friction_coeff},
    Field{"second_moment", "inertia", "mm^4", &RobotParams::second_moment},
    Field{"cable_axial_stiffness", "stiffness", "N", &RobotParams::cable_axial_stiffness},
    Field{"unloaded_cable_length", "length", "mm", &RobotParams::unloaded_cable_length},
    Field{"axial_compliance", "none", "", &RobotParams::axial_compliance},
};

std::string quantity(double v, const char* unit) {
  std::string s = format_number(v);
  if (*unit) s += std::string(" ") + unit;
  return s;
}

}  // namespace

RobotConfig parse_robot_config(std::string_view text) {
  const YAML::Node root = yaml::load(text);
  yaml::require_map(root, "document");
  yaml::allow_keys(root, {"robot", "noise"});
  RobotConfig config;
  if (const YAML::Node robot = root["robot"]) {
    yaml::require_map(robot, "robot");
    std::set<std::string> keys = {"joint_count", "cable_count", "xi_curve"};
    for (const Field& f : kFields) keys.insert(f.key);
    yaml::allow_keys(robot, keys);
    RobotParams& p = config.params;
    for (const Field& f : kFields)
      if (const YAML::Node n = robot[f.key]) p.*f.member = yaml::quantity(n, f.dimension);
    if (const YAML::Node n = robot["joint_count"]) p.joint_count = yaml::count(n);
    if (const YAML::Node n = robot["cable_count"]) p.cable_count = yaml::count(n);
    if (const YAML::Node n = robot["xi_curve"]) {
      if (!n.IsSequence()) throw yaml::error(n, "xi_curve must be a list of [angle, xi] pairs");
      std::vector<std::pair<double, double>> knots;
      for (const YAML::Node& k : n) {
        if (!k.IsSequence() || k.size() != 2) throw yaml::error(k, "xi_curve entries are [angle, xi]");
        knots.emplace_back(yaml::quantity(k[0], "angle"), yaml::quantity(k[1], "none"));
      }
      p.xi_curve = XiCurve(std::move(knots));
    }
  }
  if (const YAML::Node n = root["noise"]) config.noise = yaml::noise(n);
  try {
    validate(config.params);
  } catch (const InvalidConfiguration& e) {
    const YAML::Node robot = root["robot"];
    if (robot && robot[e.field()]) throw yaml::error(robot[e.field()], e.what());
    throw;
  }
  return config;
}

RobotConfig load_robot_config(const std::filesystem::path& path) {
  return parse_robot_config(yaml::read_file(path));
}

std::string format_robot_config(const RobotConfig& config) {
  std::ostringstream out;
  const RobotParams& p = config.params;
  out << "robot:\n";
  for (const Field& f : kFields) out << "  " << f.key << ": " << quantity(p.*f.member, f.unit) << "\n";
  out << "  joint_count: " << p.joint_count << "\n";
  out << "  cable_count: " << p.cable_count << "\n";
  if (p.xi_curve) {
    out << "  xi_curve:\n";
    for (const auto& [theta, xi] : p.xi_curve->knots())
      out << "    - [" << quantity(theta, "rad") << ", " << format_number(xi) << "]\n";
  }
  if (config.noise) {
    out << "noise:\n";
    out << "  force: " << quantity(config.noise->force, "N") << "\n";
    out << "  torque: " << quantity(config.noise->torque, "N*mm") << "\n";
    out << "  tension: " << quantity(config.noise->tension, "N") << "\n";
  }
  return out.str();
}

}  // namespace ncr
