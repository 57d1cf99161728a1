#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ridesim/engine.hpp"
#include "ridesim/metrics.hpp"

namespace ridesim {

struct RatingSpec {
  double min = 3.0;
  double max = 5.0;
};

enum class ArrivalProcess { Uniform, Poisson };

// One simulated market. Defaults give the desk-scale reference setup: a 5 h
// day, 20 drivers, 500 travellers, an 18 km/h inner zone in a 36 km/h city.
struct ScenarioConfig {
  double horizon_s = 18000.0;
  int n_drivers = 20;
  int n_travellers = 500;
  double behavioural_share = 0.5;
  double fare_per_km_eur = 2.0;
  std::optional<double> central_x_m;  // unset: centre of the node bounding box
  std::optional<double> central_y_m;
  double central_radius_m = 1500.0;
  double central_speed_kmh = 18.0;
  double outer_speed_kmh = 36.0;
  RatingSpec rating;
  int max_offer_rounds = 5;
  double max_wait_s = 0.0;  // 0 disables traveller patience
  double min_trip_m = 500.0;
  ArrivalProcess arrivals = ArrivalProcess::Uniform;
  ChoiceModel model;
  std::optional<double> random_accept_prob;  // unset: needs calibration
  std::uint64_t master_seed = 42;

  // Sweep orchestration pins these per replication so demand and starting
  // positions pair across shares. Unset: derived from the run seed.
  std::optional<std::uint64_t> demand_seed;
  std::optional<std::uint64_t> supply_seed;
};

// Share x replication factorial design with derived per-cell seeds.
struct ExperimentPlan {
  std::vector<double> shares;
  int replications = 10;
  std::uint64_t master_seed = 42;

  struct Cell {
    int share_index;
    int replication;
    double share;
    std::uint64_t seed;
  };

  std::vector<Cell> cells() const;
  static ExperimentPlan defaults(std::uint64_t master_seed);
};

// Scenario for one sweep cell: the cell's share plus pinned per-replication
// demand and supply streams.
ScenarioConfig cell_config(const ScenarioConfig& base, const ExperimentPlan& plan,
                           const ExperimentPlan::Cell& cell);

// Uniformly random OD requests. Destinations are redrawn until the
// time-shortest route is at least min_trip_m long; ratings are uniform on
// [rating.min, rating.max). Request ids are 0..n-1 in draw order.
std::vector<TripRequest> generate_demand(const ScenarioConfig& config, const RoadGraph& graph,
                                         Rng& rng);

// round(share * n_drivers) behavioural drivers, the rest random with the
// calibrated probability; start nodes uniform; shifts span the full horizon.
// Start positions are drawn before classes so they pair across shares.
std::vector<DriverAgent> generate_supply(const ScenarioConfig& config, const RoadGraph& graph,
                                         Rng& rng, double calibrated_p);

// Nearest-rank 80th percentile of trip distances over the full demand set.
// Trips strictly longer than this count as long trips.
double long_trip_threshold(std::span<const TripRequest> requests);

std::vector<std::uint64_t> calibration_seeds(std::uint64_t master_seed, int runs);

struct CalibrationRun {
  std::uint64_t seed = 0;
  long offers = 0;
  long accepts = 0;
};

struct CalibrationResult {
  std::vector<CalibrationRun> runs;
  long total_offers = 0;
  long total_accepts = 0;
  double pooled = 0.0;
};

// Runs the scenario with 100% behavioural drivers once per seed and pools
// accepted offers over all offers. The pooled rate is the acceptance
// probability that makes the random class equally selective on average.
CalibrationResult calibrate(const ScenarioConfig& config, const RoadGraph& graph,
                            std::span<const std::uint64_t> seeds);

double calibrate_random_probability(const ScenarioConfig& config, const RoadGraph& graph,
                                    std::span<const std::uint64_t> seeds);

struct SweepResult {
  std::vector<KpiSummary> summaries;  // cell order: share-major, replication-minor
  int mid_share_index = -1;           // share closest to 0.5
  std::vector<SimOutput> mid_outputs; // full outputs of that share, by replication
};

// Executes every cell of the plan. jobs > 1 distributes cells over threads;
// results are identical to the serial order either way.
SweepResult run_sweep(const ExperimentPlan& plan, const ScenarioConfig& base,
                      const RoadGraph& graph, int jobs = 1);

}  // namespace ridesim
