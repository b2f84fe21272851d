#pragma once

#include <optional>
#include <string>

#include "dynsq/core.hpp"
#include "dynsq/engine.hpp"

namespace dynsq {

/// Parsed run description for any of the four run modes. Configs are flat
/// JSON objects; a "preset" key loads a named built-in first, then the
/// file's own keys override it.
struct RunConfig {
  enum class Mode { Simulate, Fluid, Baseline, PowerOfD };

  Mode mode = Mode::Simulate;
  std::uint64_t seed = 1;
  double horizon = 0.0;
  double record_interval = 0.0;  // 0 picks horizon / 1000
  std::optional<std::pair<double, double>> average_window;

  // simulate / baseline / power-of-d
  std::uint32_t n = 0;
  double lambda_n = 0.0;
  // simulate only
  GraphLaw graph_law;
  std::optional<ResamplingSchedule> schedule;  // nullopt = static
  std::vector<std::uint32_t> initial_queues;
  std::vector<std::uint32_t> track_servers;
  bool track_central = false;
  TieBreak tie_break = TieBreak::SmallestIndex;

  // fluid / power-of-d: degree distribution; fluid: normalized load and step
  std::optional<DegreeDistribution> dist;
  std::string dist_text;  // original "d:mass" list, kept for the echo
  double lambda = 0.0;
  double step = 1e-3;
  std::vector<double> initial_occupancy;  // fluid; empty = empty start

  SimConfig to_sim_config() const;
};

/// Parses "d:mass" comma lists, e.g. "3:1" or "0:1/3,3:1/3,6:1/3"; the key
/// "inf" places mass at infinity. Throws ConfigInvalid on malformed text
/// (mass errors surface as NegativeMass / NotAProbability).
DegreeDistribution parse_degree_distribution(const std::string& text);

/// Canonical text form of a distribution, re-parseable by the function above.
std::string format_degree_distribution(const DegreeDistribution& dist);

/// Parses a flat JSON config for the given mode (a "mode" key in the file
/// must agree). Applies presets, validates keys strictly, and checks
/// mode-specific requirements. Throws ConfigInvalid on any problem.
RunConfig parse_run_config(const std::string& json_text, RunConfig::Mode mode);

/// Canonical JSON echo; parsing it again yields an identical config.
std::string config_echo_json(const RunConfig& config);

/// Names of the built-in presets.
std::vector<std::string> preset_names();

const char* mode_name(RunConfig::Mode mode);

}  // namespace dynsq
