#include "yaml_util.hpp"

#include <fstream>
#include <sstream>

#include "ncr/config_io.hpp"

namespace ncr::yaml {

ParseError error(const YAML::Node& node, const std::string& what) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return ParseError(what);
  return ParseError(what, static_cast<std::size_t>(m.line) + 1, static_cast<std::size_t>(m.column) + 1);
}

YAML::Node load(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, static_cast<std::size_t>(e.mark.line) + 1,
                     static_cast<std::size_t>(e.mark.column) + 1);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void require_map(const YAML::Node& node, const std::string& what) {
  if (!node.IsMap()) throw error(node, what + " must be a mapping");
}

void allow_keys(const YAML::Node& node, const std::set<std::string>& keys) {
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!keys.count(key)) throw error(kv.first, "unknown key '" + key + "'");
  }
}

void allow_keys(const YAML::Node& node, std::initializer_list<const char*> keys) {
  allow_keys(node, std::set<std::string>(keys.begin(), keys.end()));
}

double quantity(const YAML::Node& node, std::string_view dimension) {
  if (!node.IsScalar()) throw error(node, "expected a scalar quantity");
  try {
    return parse_quantity(node.Scalar(), dimension);
  } catch (const ParseError& e) {
    throw error(node, e.what());
  }
}

std::size_t count(const YAML::Node& node) {
  const double v = quantity(node, "none");
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw error(node, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool boolean(const YAML::Node& node) {
  if (node.IsScalar()) {
    if (node.Scalar() == "true") return true;
    if (node.Scalar() == "false") return false;
  }
  throw error(node, "expected true or false");
}

NoiseModel noise(const YAML::Node& node) {
  if (node.IsScalar()) {
    if (node.Scalar() == "sensor_resolution") return NoiseModel::sensor_resolution();
    if (node.Scalar() == "none") return {};
    throw error(node, "noise must be a mapping, 'sensor_resolution' or 'none'");
  }
  require_map(node, "noise");
  allow_keys(node, {"force", "torque", "tension"});
  NoiseModel n;
  if (node["force"]) n.force = quantity(node["force"], "force");
  if (node["torque"]) n.torque = quantity(node["torque"], "torque");
  if (node["tension"]) n.tension = quantity(node["tension"], "force");
  if (!(n.force >= 0.0) || !(n.tension >= 0.0) || !(n.torque >= 0.0))
    throw error(node, "noise standard deviations must be non-negative");
  return n;
}

}  // namespace ncr::yaml
