#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "ridesim/engine.hpp"
#include "ridesim/errors.hpp"
#include "ridesim/netgraph.hpp"
#include "ridesim/rng.hpp"
#include "ridesim/scenario.hpp"

using namespace ridesim;

namespace {

RoadGraph test_city() {
  RoadGraph g = generate_grid(8, 8, 300.0);
  g.classify_speeds(1050.0, 1050.0, 600.0, 18.0, 36.0);
  g.build_route_cache();
  return g;
}

ScenarioConfig small_scenario() {
  ScenarioConfig cfg;
  cfg.horizon_s = 4000.0;
  cfg.n_drivers = 5;
  cfg.n_travellers = 40;
  cfg.behavioural_share = 0.5;
  cfg.min_trip_m = 500.0;
  cfg.random_accept_prob = 0.7;
  return cfg;
}

}  // namespace

TEST_CASE("demand draws valid requests") {
  const RoadGraph g = test_city();
  ScenarioConfig cfg = small_scenario();
  cfg.n_travellers = 50;
  Rng rng(404);
  const auto requests = generate_demand(cfg, g, rng);

  REQUIRE(requests.size() == 50);
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    CHECK(r.id == static_cast<int>(i));
    CHECK(r.request_time_s >= 0.0);
    CHECK(r.request_time_s < cfg.horizon_s);
    CHECK(r.origin < g.node_count());
    CHECK(r.dest < g.node_count());
    CHECK(r.origin != r.dest);
    CHECK(r.distance_m >= cfg.min_trip_m);
    CHECK(r.distance_m == g.shortest_route_ix(r.origin, r.dest).distance_m);
    CHECK(r.rating >= cfg.rating.min);
    CHECK(r.rating < cfg.rating.max);
    CHECK(r.status == RequestStatus::Pending);
  }
}

TEST_CASE("demand is deterministic in the stream seed") {
  const RoadGraph g = test_city();
  const ScenarioConfig cfg = small_scenario();
  Rng a(7171);
  Rng b(7171);
  const auto ra = generate_demand(cfg, g, a);
  const auto rb = generate_demand(cfg, g, b);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].request_time_s == rb[i].request_time_s);
    CHECK(ra[i].origin == rb[i].origin);
    CHECK(ra[i].dest == rb[i].dest);
    CHECK(ra[i].rating == rb[i].rating);
  }
}

TEST_CASE("impossible trip length requirements fail loudly") {
  const RoadGraph g = test_city();
  ScenarioConfig cfg = small_scenario();
  cfg.min_trip_m = 1e7;  // longer than any route in the city
  Rng rng(1);
  CHECK_THROWS_AS(generate_demand(cfg, g, rng), GenerationError);
}

TEST_CASE("poisson arrivals vary the count around the target") {
  const RoadGraph g = test_city();
  ScenarioConfig cfg = small_scenario();
  cfg.arrivals = ArrivalProcess::Poisson;
  cfg.n_travellers = 200;
  cfg.horizon_s = 10000.0;
  Rng rng(88);
  const auto requests = generate_demand(cfg, g, rng);
  CHECK(requests.size() > 120);
  CHECK(requests.size() < 280);
  for (std::size_t i = 1; i < requests.size(); ++i)
    CHECK(requests[i].request_time_s > requests[i - 1].request_time_s);
  CHECK(requests.back().request_time_s < cfg.horizon_s);
}

TEST_CASE("degenerate rating interval pins every rating") {
  const RoadGraph g = test_city();
  ScenarioConfig cfg = small_scenario();
  cfg.rating.min = 4.0;
  cfg.rating.max = 4.0;
  Rng rng(5);
  for (const auto& r : generate_demand(cfg, g, rng)) CHECK(r.rating == 4.0);
}

TEST_CASE("supply splits the fleet by rounded share") {
  const RoadGraph g = test_city();
  ScenarioConfig cfg = small_scenario();

  auto count_behavioural = [](const std::vector<DriverAgent>& drivers) {
    return std::count_if(drivers.begin(), drivers.end(),
                         [](const DriverAgent& d) { return is_behavioural(d.policy); });
  };

  Rng rng(12);
  cfg.behavioural_share = 0.5;  // 2.5 drivers round to 3
  auto drivers = generate_supply(cfg, g, rng, 0.6);
  REQUIRE(drivers.size() == 5);
  CHECK(count_behavioural(drivers) == 3);
  for (const auto& d : drivers) {
    CHECK(d.shift_start_s == 0.0);
    CHECK(d.shift_length_s == cfg.horizon_s);
    CHECK(d.state == DriverState::Idle);
    CHECK(d.node < g.node_count());
    if (!is_behavioural(d.policy)) CHECK(std::get<RandomPolicy>(d.policy).accept_prob == 0.6);
  }

  cfg.behavioural_share = 0.0;
  CHECK(count_behavioural(generate_supply(cfg, g, rng, 0.6)) == 0);

  cfg.behavioural_share = 1.0;
  // no random drivers, so no calibrated probability is needed
  CHECK(count_behavioural(generate_supply(cfg, g, rng, -1.0)) == 5);

  cfg.behavioural_share = 0.5;
  CHECK_THROWS_AS(generate_supply(cfg, g, rng, -1.0), ConfigError);
  CHECK_THROWS_AS(generate_supply(cfg, g, rng, 1.5), ConfigError);

  cfg.n_drivers = 0;
  CHECK_THROWS_AS(generate_supply(cfg, g, rng, 0.6), ConfigError);
}

TEST_CASE("start positions pair across shares on the same stream") {
  const RoadGraph g = test_city();
  ScenarioConfig lo = small_scenario();
  lo.behavioural_share = 0.2;
  ScenarioConfig hi = small_scenario();
  hi.behavioural_share = 0.8;

  Rng ra(999);
  Rng rb(999);
  const auto da = generate_supply(lo, g, ra, 0.7);
  const auto db = generate_supply(hi, g, rb, 0.7);
  REQUIRE(da.size() == db.size());
  for (std::size_t i = 0; i < da.size(); ++i) CHECK(da[i].node == db[i].node);
}

TEST_CASE("long trip threshold uses the nearest-rank percentile") {
  auto with_distances = [](std::vector<double> d) {
    std::vector<TripRequest> reqs;
    for (double v : d) {
      TripRequest r;
      r.distance_m = v;
      reqs.push_back(r);
    }
    return reqs;
  };

  CHECK(long_trip_threshold(with_distances({1, 2, 3, 4, 5, 6, 7, 8, 9, 10})) == 8.0);
  CHECK(long_trip_threshold(with_distances({10, 9, 8, 7, 6, 5, 4, 3, 2, 1})) == 8.0);
  CHECK(long_trip_threshold(with_distances({5})) == 5.0);
  CHECK(long_trip_threshold(with_distances({1, 2, 3, 4, 5})) == 4.0);
  CHECK(long_trip_threshold(with_distances({3, 1, 4, 1.5})) == 4.0);  // rank ceil(3.2) = 4
  CHECK_THROWS_AS(long_trip_threshold(std::vector<TripRequest>{}), InputError);
}

TEST_CASE("experiment plan spans the factorial design with distinct seeds") {
  const ExperimentPlan plan = ExperimentPlan::defaults(7);
  CHECK(plan.shares.size() == 11);
  CHECK(plan.shares.front() == 0.0);
  CHECK(plan.shares.back() == 1.0);
  CHECK(plan.replications == 10);

  const auto cells = plan.cells();
  REQUIRE(cells.size() == 110);
  std::set<std::uint64_t> seeds;
  for (const auto& c : cells) {
    CHECK(c.share == plan.shares[static_cast<std::size_t>(c.share_index)]);
    CHECK(c.replication >= 0);
    CHECK(c.replication < plan.replications);
    seeds.insert(c.seed);
  }
  CHECK(seeds.size() == 110);  // every cell gets its own decision seed

  ExperimentPlan bad = plan;
  bad.shares.clear();
  CHECK_THROWS_AS(bad.cells(), ConfigError);
  bad = plan;
  bad.shares.push_back(1.5);
  CHECK_THROWS_AS(bad.cells(), ConfigError);
  bad = plan;
  bad.replications = 0;
  CHECK_THROWS_AS(bad.cells(), ConfigError);
}

TEST_CASE("cell configs pair demand by replication, not by share") {
  const ScenarioConfig base = small_scenario();
  ExperimentPlan plan;
  plan.shares = {0.0, 0.5, 1.0};
  plan.replications = 2;
  plan.master_seed = 77;
  const auto cells = plan.cells();
  REQUIRE(cells.size() == 6);

  const auto c_share0_rep0 = cell_config(base, plan, cells[0]);
  const auto c_share1_rep0 = cell_config(base, plan, cells[4]);
  const auto c_share0_rep1 = cell_config(base, plan, cells[1]);

  CHECK(c_share0_rep0.behavioural_share == 0.0);
  CHECK(c_share1_rep0.behavioural_share == 1.0);
  CHECK(c_share0_rep0.demand_seed == c_share1_rep0.demand_seed);
  CHECK(c_share0_rep0.supply_seed == c_share1_rep0.supply_seed);
  CHECK(c_share0_rep0.demand_seed != c_share0_rep1.demand_seed);
}

TEST_CASE("runs at different shares see identical demand within a replication") {
  const RoadGraph g = test_city();
  const ScenarioConfig base = small_scenario();
  ExperimentPlan plan;
  plan.shares = {0.0, 0.5, 1.0};
  plan.replications = 2;
  plan.master_seed = 31;
  const auto cells = plan.cells();

  const SimOutput lo = run(cell_config(base, plan, cells[0]), g, cells[0].seed);
  const SimOutput hi = run(cell_config(base, plan, cells[4]), g, cells[4].seed);
  REQUIRE(lo.trips.size() == hi.trips.size());
  for (std::size_t i = 0; i < lo.trips.size(); ++i) {
    CHECK(lo.trips[i].request_time_s == hi.trips[i].request_time_s);
    CHECK(lo.trips[i].origin == hi.trips[i].origin);
    CHECK(lo.trips[i].dest == hi.trips[i].dest);
    CHECK(lo.trips[i].rating == hi.trips[i].rating);
    CHECK(lo.trips[i].distance_m == hi.trips[i].distance_m);
  }
}

TEST_CASE("scenario run is reproducible and validates the random class") {
  const RoadGraph g = test_city();
  ScenarioConfig cfg = small_scenario();
  const SimOutput a = run(cfg, g, 1234);
  const SimOutput b = run(cfg, g, 1234);
  CHECK(a.offers_csv() == b.offers_csv());
  CHECK(a.trips_csv() == b.trips_csv());

  cfg.random_accept_prob.reset();
  CHECK_THROWS_AS(run(cfg, g, 1234), ConfigError);
}

TEST_CASE("calibration seeds are distinct and validated") {
  const auto seeds = calibration_seeds(42, 10);
  CHECK(seeds.size() == 10);
  CHECK(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == 10);
  CHECK_THROWS_AS(calibration_seeds(42, 0), ConfigError);
}

TEST_CASE("calibration pools the behavioural acceptance rate") {
  const RoadGraph g = test_city();
  ScenarioConfig cfg = small_scenario();
  cfg.n_travellers = 150;
  cfg.n_drivers = 10;
  cfg.behavioural_share = 0.3;    // forced to 1.0 internally
  cfg.random_accept_prob.reset(); // not needed for an all-behavioural fleet

  SUBCASE("a zeroed model accepts half of everything") {
    cfg.model = ChoiceModel{0.0, 0.0, 0.0, 0.0, 0.0};
    const auto seeds = calibration_seeds(cfg.master_seed, 3);
    const CalibrationResult result = calibrate(cfg, g, seeds);
    REQUIRE(result.runs.size() == 3);
    long offers = 0, accepts = 0;
    for (const auto& r : result.runs) {
      CHECK(r.offers > 0);
      offers += r.offers;
      accepts += r.accepts;
    }
    CHECK(offers == result.total_offers);
    CHECK(accepts == result.total_accepts);
    CHECK(std::abs(result.pooled - 0.5) < 0.05);
  }

  SUBCASE("an overwhelming constant accepts everything") {
    cfg.model = ChoiceModel{50.0, 0.0, 0.0, 0.0, 0.0};
    const auto seeds = calibration_seeds(cfg.master_seed, 2);
    CHECK(calibrate_random_probability(cfg, g, seeds) == 1.0);
  }

  SUBCASE("calibration is deterministic") {
    const auto seeds = calibration_seeds(cfg.master_seed, 2);
    const double p1 = calibrate_random_probability(cfg, g, seeds);
    const double p2 = calibrate_random_probability(cfg, g, seeds);
    CHECK(p1 == p2);
    CHECK(p1 > 0.0);
    CHECK(p1 < 1.0);
  }

  SUBCASE("no offers means no calibration") {
    cfg.n_travellers = 0;
    const auto seeds = calibration_seeds(cfg.master_seed, 2);
    CHECK_THROWS_AS(calibrate(cfg, g, seeds), CalibrationError);
  }
}

TEST_CASE("sweep covers every cell and is thread-count invariant") {
  const RoadGraph g = test_city();
  ScenarioConfig base = small_scenario();
  base.n_travellers = 30;
  base.n_drivers = 4;
  base.horizon_s = 3000.0;

  ExperimentPlan plan;
  plan.shares = {0.0, 0.5, 1.0};
  plan.replications = 2;
  plan.master_seed = 2026;

  const SweepResult serial = run_sweep(plan, base, g, 1);
  REQUIRE(serial.summaries.size() == 6);
  CHECK(serial.mid_share_index == 1);
  REQUIRE(serial.mid_outputs.size() == 2);
  for (std::size_t i = 0; i < serial.summaries.size(); ++i) {
    CHECK(serial.summaries[i].share_index == static_cast<int>(i / 2));
    CHECK(serial.summaries[i].replication == static_cast<int>(i % 2));
  }
  for (const auto& out : serial.mid_outputs) {
    CHECK(out.drivers.size() == 4);
    CHECK(out.trips.size() == 30);
  }

  const SweepResult threaded = run_sweep(plan, base, g, 4);
  CHECK(summary_csv(serial.summaries, "d", 1) == summary_csv(threaded.summaries, "d", 1));
  for (std::size_t i = 0; i < serial.mid_outputs.size(); ++i) {
    CHECK(serial.mid_outputs[i].offers_csv() == threaded.mid_outputs[i].offers_csv());
    CHECK(serial.mid_outputs[i].trips_csv() == threaded.mid_outputs[i].trips_csv());
  }

  base.random_accept_prob.reset();
  CHECK_THROWS_AS(run_sweep(plan, base, g, 1), ConfigError);
  base.random_accept_prob = 0.7;
  CHECK_THROWS_AS(run_sweep(plan, base, g, 0), ConfigError);
}
