#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ridesim/netgraph.hpp"
#include "ridesim/scenario.hpp"

namespace ridesim {

enum class GraphSource { Grid, Files };

// Fully resolved tool configuration: graph construction, scenario, sweep
// plan and sensitivity grids. Every run embeds the digest of the effective
// values into its outputs.
struct RunConfig {
  GraphSource graph_source = GraphSource::Grid;
  std::size_t grid_rows = 20;
  std::size_t grid_cols = 20;
  double grid_edge_len_m = 300.0;
  std::filesystem::path nodes_file;
  std::filesystem::path edges_file;
  std::size_t route_cache_max_nodes = RoadGraph::kDefaultRouteCacheLimit;

  ScenarioConfig scenario;

  std::vector<double> shares;  // sweep; defaults to 0, 0.1, ..., 1.0
  int replications = 10;
  int jobs = 1;
  int calibration_runs = 10;

  std::vector<double> pickup_grid;   // defaults to 0..30 min step 1
  std::vector<double> waiting_grid;  // defaults to 0..60 min step 1
  std::vector<double> rlrd_grid;     // defaults to 0..5 step 0.1

  std::string digest;  // FNV-1a over the canonical key=value serialization
};

// Defaults only, lists filled, digest computed. No file, no environment.
RunConfig default_config();

// Parses the flat key = value format (#/; comments, [section] headers for
// grouping). Unknown keys and sections are rejected with file:line
// diagnostics. Does not apply environment overrides.
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// File (optional) then RIDESIM_* environment overrides, then validation.
RunConfig load_config(const std::optional<std::filesystem::path>& path);

// Canonical serialization of the effective configuration, one key=value per
// line, sorted by key. The digest hashes exactly this.
std::string canonical_config(const RunConfig& config);
std::string config_digest(const RunConfig& config);

// Constructs the configured graph, applies the speed zones (auto centre =
// bounding-box centre) and builds the route cache.
RoadGraph build_graph(const RunConfig& config);

}  // namespace ridesim
