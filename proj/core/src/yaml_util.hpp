#pragma once

// YAML helpers shared by the config and scenario readers.

#include <filesystem>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>

#include <yaml-cpp/yaml.h>

#include "ncr/errors.hpp"
#include "ncr/simulator.hpp"

namespace ncr {

double parse_number(std::string_view text);

namespace yaml {

ParseError error(const YAML::Node& node, const std::string& what);
YAML::Node load(std::string_view text);
std::string read_file(const std::filesystem::path& path);
void require_map(const YAML::Node& node, const std::string& what);
void allow_keys(const YAML::Node& node, const std::set<std::string>& keys);
void allow_keys(const YAML::Node& node, std::initializer_list<const char*> keys);
double quantity(const YAML::Node& node, std::string_view dimension);
std::size_t count(const YAML::Node& node);
bool boolean(const YAML::Node& node);
NoiseModel noise(const YAML::Node& node);

}  // namespace yaml
}  // namespace ncr
