#pragma once

// Experiment front end: JSON configs in, deterministic CSV/JSON tables out.
//
//   antiito <simulate|stationary|sweep|classify|fpe|compare> --config PATH
//           [--q --r --v --c --sigma --seed --out]
//
// Exit codes: 0 success, 2 configuration or domain error, 3 numerical failure.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "antiito/fpe.hpp"
#include "antiito/model.hpp"
#include "antiito/simulate.hpp"

namespace antiito::cli {

inline constexpr const char* kToolVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

enum class Command { Simulate, Stationary, Sweep, Classify, Fpe, Compare };
enum class Format { Csv, Json };

const char* to_string(Command c) noexcept;
/// Throws ConfigError on an unknown name.
Command parse_command(const std::string& name);

struct SweepAxis {
  std::string parameter;  ///< one of q, r, v, c, sigma
  std::vector<double> values;
  /// Values are sigma^2 rather than sigma (parameter "sigma" only).
  bool values_are_squared = false;
  /// Run a short ensemble per value and report its extinct fraction.
  bool monte_carlo = false;
};

struct StationaryOptions {
  std::size_t points = 200;
  std::optional<double> x_max;
};

struct FpeOptions {
  std::optional<double> x_max;
  std::size_t n_cells = 512;
  double t_final = 10.0;
  std::optional<double> dt;
  BoundaryMode boundary = BoundaryMode::ZeroFlux;
  std::optional<double> x0;
  std::vector<double> snapshots;
};

struct ExperimentConfig {
  Command command = Command::Stationary;
  ModelParams params;
  SimulationConfig sim;
  std::optional<SweepAxis> sweep;
  StationaryOptions stationary;
  FpeOptions fpe;
  std::string output_path;  ///< empty writes to stdout
  Format format = Format::Csv;
  std::optional<std::string> samples_path;
  /// The configuration document after overrides; hashed into every header.
  nlohmann::json effective;
};

/// Builds a config from a JSON document. Unknown keys, wrong types and
/// missing parameters throw ConfigError.
ExperimentConfig parse_config(Command command, const nlohmann::json& doc);

/// Git-style blob SHA-1 of the canonical (sorted, compact) dump of `doc`.
std::string config_hash(const nlohmann::json& doc);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// 17 significant digits in scientific notation; "nan", "inf", "-inf" otherwise.
std::string format_number(double x);

Table run_simulate(const ExperimentConfig& cfg);
Table run_stationary(const ExperimentConfig& cfg);
Table run_sweep(const ExperimentConfig& cfg);
Table run_classify(const ExperimentConfig& cfg);
Table run_fpe(const ExperimentConfig& cfg);
Table run_compare(const ExperimentConfig& cfg);

/// Dispatches on cfg.command and prepends the common header block.
Table run_command(const ExperimentConfig& cfg);

std::string render(const Table& table, Format format);

/// Entry point of the executable; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace antiito::cli
