#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ncr/config_io.hpp"
#include "ncr/perception.hpp"

namespace ncr::tools {

/// Process exit codes of ncr-proprio.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kInfeasible = 3,
  kAllFramesFailed = 4,
  kValidationFailed = 5,
};

struct SimulateArgs {
  std::filesystem::path scenario;
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};

struct EstimateArgs {
  std::filesystem::path trace;
  std::filesystem::path config;
  std::filesystem::path out;
  ContactEstimator::Mode mode = ContactEstimator::Mode::automatic;
  bool recalibrate = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool timing = false;
};

struct ShapeArgs {
  std::filesystem::path trace;
  std::filesystem::path config;
  std::filesystem::path out;
  std::size_t threads = 1;
};

struct BenchArgs {
  std::optional<std::filesystem::path> config;
  std::size_t frames = 200;
  std::size_t threads = 1;
};

struct BenchReport {
  double estimate_median_ms = 0.0;
  double shape_median_ms = 0.0;
  double estimate_rate() const { return 1e3 / estimate_median_ms; }
  double shape_rate() const { return 1e3 / shape_median_ms; }
};

/// Each command reports progress and summaries on `log` and returns an ExitCode.
int cmd_simulate(const SimulateArgs& args, std::ostream& log);
int cmd_estimate(const EstimateArgs& args, std::ostream& log);
int cmd_shape(const ShapeArgs& args, std::ostream& log);
int cmd_validate(const std::filesystem::path& config, std::ostream& log);
int cmd_bench(const BenchArgs& args, std::ostream& log);

/// Robot config from a file, or the prototype defaults for an empty path.
RobotConfig load_config_or_default(const std::filesystem::path& path);

/// Timing run behind `bench`: median warm-started contact estimate and
/// shape-only solve on a synthetic moving-contact trace.
BenchReport run_bench(const RobotParams& params, std::size_t frames, std::size_t threads);

/// Result of the validation suite; `passed` is false when any group fails.
struct ValidationReport {
  bool passed = true;
  std::string text;
};
ValidationReport run_validation(const RobotParams& params);

/// Column names of the estimates CSV.
std::string estimate_header(bool timing);

}  // namespace ncr::tools
