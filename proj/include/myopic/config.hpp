#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "myopic/dynamics.hpp"
#include "myopic/sim.hpp"

namespace myopic {

struct OutputPaths {
  std::string dir = ".";
  std::string trajectories = "trajectories.csv";
  std::string summary = "summary.json";
  std::string manifest = "manifest.json";
  // Also write posteriors_agent<i>.csv replay streams.
  bool posteriors = false;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<AggregationRule> rule;
  std::optional<std::string> out_dir;
  std::optional<bool> local_only;
};

struct LoadedConfig {
  ExperimentConfig experiment;
  OutputPaths output;
};

// Relative file references resolve against base_dir. Throws kConfigError
// (or the error of the failing sub-loader).
LoadedConfig parse_config(const nlohmann::json& doc, const std::string& base_dir,
                          const Overrides& overrides = {});
LoadedConfig load_config(const std::string& path, const Overrides& overrides = {});

// Self-contained config equivalent to `config`: world and graph inlined,
// priors explicit, replay paths absolute, output directory omitted. Feeding
// it back to parse_config reproduces the experiment exactly.
nlohmann::json resolved_config(const LoadedConfig& config);

struct WrittenOutputs {
  std::string trajectories;
  std::string summary;
  std::string manifest;
  std::vector<std::string> posteriors;
};

// Runs nothing: writes the log, its summary, the manifest and optionally the
// posterior streams under config.output.dir. Throws kIoError.
WrittenOutputs write_outputs(const LoadedConfig& config, const TrajectoryLog& log,
                             const ExperimentSummary& summary);

}  // namespace myopic
