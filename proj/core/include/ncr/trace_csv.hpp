#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncr/simulator.hpp"

namespace ncr {

/// Fixed column order of a trace file.
const std::vector<std::string>& trace_columns();
const std::vector<std::string>& trace_truth_columns();

/// Writes one row per frame; ground-truth columns follow when present.
void write_trace(std::ostream& out, const SensorTrace& trace);
void write_trace(const std::filesystem::path& path, const SensorTrace& trace);

/// Reads a trace written by write_trace. Ground-truth columns are optional
/// as a block. Throws ParseError with the offending line and column.
SensorTrace read_trace(std::istream& in);
SensorTrace read_trace(const std::filesystem::path& path);

}  // namespace ncr
