#include "ncr/scenario_io.hpp"

#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ncr/config_io.hpp"
#include "ncr/errors.hpp"
#include "yaml_util.hpp"

namespace ncr {

namespace {

std::vector<PullKnot> parse_knots(const YAML::Node& node) {
  if (!node.IsSequence()) throw yaml::error(node, "actuation profile must be a list of [time, pull]");
  std::vector<PullKnot> knots;
  for (const YAML::Node& k : node) {
    if (!k.IsSequence() || k.size() != 2) throw yaml::error(k, "actuation knots are [time, pull]");
    knots.push_back({yaml::quantity(k[0], "time"), yaml::quantity(k[1], "length")});
  }
  return knots;
}

ContactEvent parse_event(const YAML::Node& node) {
  yaml::require_map(node, "contact");
  yaml::allow_keys(node, {"start", "end", "tip", "arc_length", "force", "mass"});
  ContactEvent e;
  if (!node["start"] || !node["end"]) throw yaml::error(node, "contact needs start and end");
  e.start = yaml::quantity(node["start"], "time");
  e.end = yaml::quantity(node["end"], "time");
  if (node["tip"]) e.at_tip = yaml::boolean(node["tip"]);
  if (node["arc_length"]) {
    if (e.at_tip) throw yaml::error(node["arc_length"], "a tip contact takes no arc_length");
    e.arc_length = yaml::quantity(node["arc_length"], "length");
  } else if (!e.at_tip) {
    throw yaml::error(node, "contact needs arc_length or tip: true");
  }
  if (const YAML::Node f = node["force"]) {
    if (!f.IsSequence() || f.size() != 3) throw yaml::error(f, "force is a list of three quantities");
    e.force = Vec3(yaml::quantity(f[0], "force"), yaml::quantity(f[1], "force"),
                   yaml::quantity(f[2], "force"));
  }
  if (const YAML::Node m = node["mass"]) e.mass_grams = yaml::quantity(m, "mass");
  if (e.force.has_value() == e.mass_grams.has_value())
    throw yaml::error(node, "contact needs exactly one of force and mass");
  return e;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  const YAML::Node root = yaml::load(text);
  yaml::require_map(root, "scenario");
  yaml::allow_keys(root, {"duration", "sample_rate", "seed", "actuation", "contacts", "noise"});
  Scenario sc;
  if (!root["duration"] || !root["sample_rate"])
    throw yaml::error(root, "scenario needs duration and sample_rate");
  sc.duration = yaml::quantity(root["duration"], "time");
  sc.sample_rate = yaml::quantity(root["sample_rate"], "frequency");
  if (const YAML::Node n = root["seed"]) sc.seed = yaml::count(n);
  if (const YAML::Node a = root["actuation"]) {
    yaml::require_map(a, "actuation");
    yaml::allow_keys(a, {"cable_1", "cable_2"});
    if (a["cable_1"]) sc.pulls[0] = parse_knots(a["cable_1"]);
    if (a["cable_2"]) sc.pulls[1] = parse_knots(a["cable_2"]);
  }
  if (const YAML::Node c = root["contacts"]) {
    if (!c.IsSequence()) throw yaml::error(c, "contacts must be a list");
    for (const YAML::Node& e : c) sc.contacts.push_back(parse_event(e));
  }
  if (const YAML::Node n = root["noise"]) sc.noise = yaml::noise(n);
  try {
    sc.validate();
  } catch (const InvalidConfiguration& e) {
    throw yaml::error(root, e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(yaml::read_file(path));
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream out;
  out << "duration: " << format_number(sc.duration) << " s\n";
  out << "sample_rate: " << format_number(sc.sample_rate) << " Hz\n";
  out << "seed: " << sc.seed << "\n";
  out << "actuation:\n";
  for (std::size_t c = 0; c < kCableCount; ++c) {
    out << "  cable_" << c + 1 << ": [";
    for (std::size_t k = 0; k < sc.pulls[c].size(); ++k)
      out << (k ? ", " : "") << "[" << format_number(sc.pulls[c][k].t) << " s, "
          << format_number(sc.pulls[c][k].pull) << " mm]";
    out << "]\n";
  }
  if (!sc.contacts.empty()) {
    out << "contacts:\n";
    for (const ContactEvent& e : sc.contacts) {
      out << "  - start: " << format_number(e.start) << " s\n";
      out << "    end: " << format_number(e.end) << " s\n";
      if (e.at_tip)
        out << "    tip: true\n";
      else
        out << "    arc_length: " << format_number(e.arc_length) << " mm\n";
      if (e.force)
        out << "    force: [" << format_number(e.force->x()) << " N, " << format_number(e.force->y())
            << " N, " << format_number(e.force->z()) << " N]\n";
      if (e.mass_grams) out << "    mass: " << format_number(*e.mass_grams) << " g\n";
    }
  }
  out << "noise:\n";
  out << "  force: " << format_number(sc.noise.force) << " N\n";
  out << "  torque: " << format_number(sc.noise.torque) << " N*mm\n";
  out << "  tension: " << format_number(sc.noise.tension) << " N\n";
  return out.str();
}

}  // namespace ncr
