#include "ridesim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>

#include "ridesim/errors.hpp"

namespace ridesim {

std::vector<ExperimentPlan::Cell> ExperimentPlan::cells() const {
  if (shares.empty()) throw ConfigError("experiment plan has no shares");
  for (double s : shares)
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("shares must lie in [0, 1]");
  if (replications < 1) throw ConfigError("replications must be >= 1");

  std::vector<Cell> out;
  out.reserve(shares.size() * static_cast<std::size_t>(replications));
  for (std::size_t si = 0; si < shares.size(); ++si) {
    for (int rep = 0; rep < replications; ++rep) {
      Cell c;
      c.share_index = static_cast<int>(si);
      c.replication = rep;
      c.share = shares[si];
      c.seed = derive_seed(master_seed, {seed_tag::kCell, static_cast<std::uint64_t>(si),
                                         static_cast<std::uint64_t>(rep)});
      out.push_back(c);
    }
  }
  return out;
}

ExperimentPlan ExperimentPlan::defaults(std::uint64_t master_seed) {
  ExperimentPlan plan;
  plan.shares.reserve(11);
  for (int i = 0; i <= 10; ++i) plan.shares.push_back(static_cast<double>(i) / 10.0);
  plan.replications = 10;
  plan.master_seed = master_seed;
  return plan;
}

ScenarioConfig cell_config(const ScenarioConfig& base, const ExperimentPlan& plan,
                           const ExperimentPlan::Cell& cell) {
  ScenarioConfig cfg = base;
  cfg.behavioural_share = cell.share;
  // demand and supply depend on the replication only, so cells at the same
  // replication see the same travellers and the same start positions no
  // matter the share (paired comparison across shares)
  cfg.demand_seed = derive_seed(plan.master_seed,
                                {seed_tag::kDemand, static_cast<std::uint64_t>(cell.replication)});
  cfg.supply_seed = derive_seed(plan.master_seed,
                                {seed_tag::kSupply, static_cast<std::uint64_t>(cell.replication)});
  return cfg;
}

std::vector<TripRequest> generate_demand(const ScenarioConfig& config, const RoadGraph& graph,
                                         Rng& rng) {
  if (config.n_travellers < 0) throw ConfigError("n_travellers must be >= 0");
  if (!(config.horizon_s > 0.0)) throw ConfigError("horizon must be positive");
  if (config.min_trip_m < 0.0) throw ConfigError("min_trip_m must be >= 0");
  if (!(config.rating.min >= 0.0 && config.rating.min <= config.rating.max &&
        config.rating.max <= 5.0))
    throw ConfigError("rating bounds must satisfy 0 <= min <= max <= 5");

  std::vector<double> times;
  if (config.arrivals == ArrivalProcess::Uniform) {
    times.reserve(static_cast<std::size_t>(config.n_travellers));
    for (int i = 0; i < config.n_travellers; ++i)
      times.push_back(rng.next_range(0.0, config.horizon_s));
  } else {
    // Poisson process with the equivalent mean rate; the count then varies
    // around n_travellers instead of matching it exactly
    if (config.n_travellers > 0) {
      const double rate = static_cast<double>(config.n_travellers) / config.horizon_s;
      double t = -std::log(1.0 - rng.next_double()) / rate;
      while (t < config.horizon_s) {
        times.push_back(t);
        t += -std::log(1.0 - rng.next_double()) / rate;
      }
    }
  }

  const auto n_nodes = static_cast<std::uint64_t>(graph.node_count());
  constexpr int kMaxDestinationDraws = 1000;

  std::vector<TripRequest> requests;
  requests.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    TripRequest req;
    req.id = static_cast<int>(i);
    req.traveller_id = static_cast<int>(i);
    req.request_time_s = times[i];
    req.origin = static_cast<std::uint32_t>(rng.next_below(n_nodes));

    bool found = false;
    for (int attempt = 0; attempt < kMaxDestinationDraws; ++attempt) {
      const auto dest = static_cast<std::uint32_t>(rng.next_below(n_nodes));
      if (dest == req.origin) continue;
      const Route route = graph.shortest_route_ix(req.origin, dest);
      if (route.distance_m >= config.min_trip_m) {
        req.dest = dest;
        req.distance_m = route.distance_m;
        found = true;
        break;
      }
    }
    if (!found)
      throw GenerationError("could not draw a destination at least " +
                            std::to_string(config.min_trip_m) + " m from node " +
                            std::to_string(graph.id_of(req.origin)));

    req.rating = rng.next_range(config.rating.min, config.rating.max);
    requests.push_back(std::move(req));
  }
  return requests;
}

std::vector<DriverAgent> generate_supply(const ScenarioConfig& config, const RoadGraph& graph,
                                         Rng& rng, double calibrated_p) {
  if (config.n_drivers < 1) throw ConfigError("n_drivers must be >= 1");
  if (!(config.behavioural_share >= 0.0 && config.behavioural_share <= 1.0))
    throw ConfigError("behavioural_share must lie in [0, 1]");

  const long n_behavioural = std::lround(config.behavioural_share * config.n_drivers);
  const bool any_random = n_behavioural < config.n_drivers;
  if (any_random && !(calibrated_p >= 0.0 && calibrated_p <= 1.0))
    throw ConfigError("random driver class requires a calibrated acceptance probability");

  // positions first, from the shared stream, so they are identical across
  // shares at the same supply seed
  std::vector<std::uint32_t> start_nodes;
  start_nodes.reserve(static_cast<std::size_t>(config.n_drivers));
  const auto n_nodes = static_cast<std::uint64_t>(graph.node_count());
  for (int i = 0; i < config.n_drivers; ++i)
    start_nodes.push_back(static_cast<std::uint32_t>(rng.next_below(n_nodes)));

  std::vector<DriverAgent> drivers;
  drivers.reserve(static_cast<std::size_t>(config.n_drivers));
  for (int i = 0; i < config.n_drivers; ++i) {
    DriverAgent d;
    d.id = i;
    d.policy = i < n_behavioural ? AcceptancePolicy{BehaviouralPolicy{config.model}}
                                 : AcceptancePolicy{RandomPolicy{calibrated_p}};
    d.node = start_nodes[static_cast<std::size_t>(i)];
    d.shift_start_s = 0.0;
    d.shift_length_s = config.horizon_s;
    d.last_dropoff_s = 0.0;
    drivers.push_back(std::move(d));
  }
  return drivers;
}

double long_trip_threshold(std::span<const TripRequest> requests) {
  if (requests.empty()) throw InputError("long-trip threshold of an empty demand set");
  std::vector<double> dist;
  dist.reserve(requests.size());
  for (const auto& r : requests) dist.push_back(r.distance_m);
  std::sort(dist.begin(), dist.end());
  // nearest-rank 80th percentile, integer arithmetic so no float boundary on n
  const std::size_t n = dist.size();
  const std::size_t rank = (8 * n + 9) / 10;  // ceil(0.8 n)
  return dist[rank - 1];
}

std::vector<std::uint64_t> calibration_seeds(std::uint64_t master_seed, int runs) {
  if (runs < 1) throw ConfigError("calibration needs at least 1 run");
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i)
    seeds.push_back(derive_seed(master_seed, {seed_tag::kCalibration, static_cast<std::uint64_t>(i)}));
  return seeds;
}

CalibrationResult calibrate(const ScenarioConfig& config, const RoadGraph& graph,
                            std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("calibration needs at least 1 seed");
  ScenarioConfig cfg = config;
  cfg.behavioural_share = 1.0;
  cfg.demand_seed.reset();  // calibration runs own their streams
  cfg.supply_seed.reset();

  CalibrationResult result;
  for (std::uint64_t seed : seeds) {
    const SimOutput out = run(cfg, graph, seed);
    CalibrationRun r;
    r.seed = seed;
    r.offers = static_cast<long>(out.offers.size());
    for (const auto& o : out.offers)
      if (o.decision == Decision::Accept) r.accepts += 1;
    result.total_offers += r.offers;
    result.total_accepts += r.accepts;
    result.runs.push_back(r);
  }
  if (result.total_offers == 0)
    throw CalibrationError("calibration runs generated no offers to pool");
  result.pooled =
      static_cast<double>(result.total_accepts) / static_cast<double>(result.total_offers);
  return result;
}

double calibrate_random_probability(const ScenarioConfig& config, const RoadGraph& graph,
                                    std::span<const std::uint64_t> seeds) {
  return calibrate(config, graph, seeds).pooled;
}

SweepResult run_sweep(const ExperimentPlan& plan, const ScenarioConfig& base,
                      const RoadGraph& graph, int jobs) {
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  const auto cells = plan.cells();

  bool any_random_cell = false;
  for (const auto& c : cells)
    if (std::lround(c.share * base.n_drivers) < base.n_drivers) any_random_cell = true;
  if (any_random_cell && !base.random_accept_prob)
    throw ConfigError("sweep contains random drivers; calibrate random_accept_prob first");

  SweepResult result;
  result.summaries.resize(cells.size());

  // share closest to 0.5 hosts the distribution snapshot
  for (std::size_t si = 0; si < plan.shares.size(); ++si) {
    if (result.mid_share_index < 0 ||
        std::abs(plan.shares[si] - 0.5) <
            std::abs(plan.shares[static_cast<std::size_t>(result.mid_share_index)] - 0.5))
      result.mid_share_index = static_cast<int>(si);
  }
  result.mid_outputs.resize(static_cast<std::size_t>(plan.replications));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        const auto& cell = cells[i];
        const ScenarioConfig cfg = cell_config(base, plan, cell);
        SimOutput out = run(cfg, graph, cell.seed);
        KpiSummary s = summarize(out);
        s.share_index = cell.share_index;
        s.behavioural_share = cell.share;
        s.replication = cell.replication;
        result.summaries[i] = std::move(s);
        if (cell.share_index == result.mid_share_index)
          result.mid_outputs[static_cast<std::size_t>(cell.replication)] = std::move(out);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::min<int>(jobs, static_cast<int>(cells.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

}  // namespace ridesim
