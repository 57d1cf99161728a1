#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "ridesim/config.hpp"

namespace ridesim {

struct CommandOptions {
  std::optional<std::uint64_t> seed;  // overrides master_seed
  std::filesystem::path out = "out";
  std::optional<int> jobs;  // overrides the config's jobs
  bool plots = false;
};

// One simulation run: trips.csv, drivers.csv, offers.csv. Calibrates the
// random class first when the scenario needs it and no probability is set.
int cmd_run(const RunConfig& config, const CommandOptions& options);

// Calibration only: calibration.csv plus the pooled rate on stdout.
int cmd_calibrate(const RunConfig& config, const CommandOptions& options);

// Full share x replication sweep: summary.csv, trend.csv (when the plan
// supports trend statistics), driver_distributions.csv for the share closest
// to 0.5, calibration.csv when calibration ran implicitly, and optional SVG
// charts.
int cmd_sweep(const RunConfig& config, const CommandOptions& options);

// One-at-a-time acceptance probability curves plus a Delta-P ranking.
int cmd_sensitivity(const RunConfig& config, const CommandOptions& options);

// Builds and validates the configured graph, prints a short report.
int cmd_validate_graph(const RunConfig& config);

}  // namespace ridesim
