#include "ridesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <unordered_map>

#include "ridesim/csv.hpp"
#include "ridesim/errors.hpp"
#include "ridesim/scenario.hpp"

namespace ridesim {

const char* driver_state_name(DriverState state) {
  switch (state) {
    case DriverState::Idle: return "idle";
    case DriverState::EnRoutePickup: return "enroute_pickup";
    case DriverState::InService: return "in_service";
  }
  throw InternalError("unhandled driver state");
}

const char* request_status_name(RequestStatus status) {
  switch (status) {
    case RequestStatus::Pending: return "pending";
    case RequestStatus::Offered: return "offered";
    case RequestStatus::Assigned: return "assigned";
    case RequestStatus::PickedUp: return "picked_up";
    case RequestStatus::Completed: return "completed";
    case RequestStatus::Abandoned: return "abandoned";
  }
  throw InternalError("unhandled request status");
}

int select_driver(const RoadGraph& graph, const std::vector<DriverAgent>& drivers,
                  const TripRequest& request) {
  int best = -1;
  double best_time = 0.0;
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    const auto& d = drivers[i];
    if (d.state != DriverState::Idle) continue;
    if (std::find(request.declined_by.begin(), request.declined_by.end(), d.id) !=
        request.declined_by.end())
      continue;
    const double t = graph.route_time_ix(d.node, request.origin);
    if (best < 0 || t < best_time || (t == best_time && d.id < drivers[best].id)) {
      best = static_cast<int>(i);
      best_time = t;
    }
  }
  return best;
}

namespace {

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time_s != b.time_s) return a.time_s > b.time_s;
    return a.seq > b.seq;
  }
};

class Simulation {
 public:
  Simulation(const RoadGraph& graph, const EngineParams& params,
             std::vector<DriverAgent> drivers, std::vector<TripRequest> requests,
             std::uint64_t seed, std::string config_digest)
      : graph_(graph),
        params_(params),
        drivers_(std::move(drivers)),
        requests_(std::move(requests)),
        seed_(seed),
        digest_(std::move(config_digest)) {
    if (!(params_.horizon_s > 0.0)) throw ConfigError("horizon must be positive");
    if (params_.max_offer_rounds < 1) throw ConfigError("max_offer_rounds must be >= 1");

    driver_pos_.reserve(drivers_.size());
    for (std::size_t i = 0; i < drivers_.size(); ++i) {
      auto [it, inserted] = driver_pos_.emplace(drivers_[i].id, i);
      if (!inserted) throw InternalError("duplicate driver id");
      decision_rngs_.emplace_back(derive_seed(seed_, {seed_tag::kDecision,
                                                      static_cast<std::uint64_t>(drivers_[i].id)}));
    }
    request_pos_.reserve(requests_.size());
    for (std::size_t i = 0; i < requests_.size(); ++i) {
      auto [it, inserted] = request_pos_.emplace(requests_[i].id, i);
      if (!inserted) throw InternalError("duplicate request id");
      if (requests_[i].origin == requests_[i].dest)
        throw InternalError("request with identical origin and destination");
    }
  }

  SimOutput run_all() {
    for (auto& req : requests_) {
      schedule(req.request_time_s, EventKind::RequestArrival, req.id, -1);
      if (params_.max_wait_s > 0.0)
        schedule(req.request_time_s + params_.max_wait_s, EventKind::AbandonCheck, req.id, -1);
    }

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      if (ev.time_s < clock_) throw InternalError("event scheduled in the past");
      clock_ = ev.time_s;
      switch (ev.kind) {
        case EventKind::RequestArrival: on_request_arrival(ev); break;
        case EventKind::PickupArrival: on_pickup(ev); break;
        case EventKind::DropoffArrival: on_dropoff(ev); break;
        case EventKind::AbandonCheck: on_abandon_check(ev); break;
      }
    }

    // nobody left to serve them: every request still open is abandoned
    for (auto& req : requests_) {
      if (req.status == RequestStatus::Pending || req.status == RequestStatus::Offered) {
        if (req.driver_id >= 0) throw InternalError("assigned request left unresolved");
        req.status = RequestStatus::Abandoned;
      } else if (req.status != RequestStatus::Completed && req.status != RequestStatus::Abandoned) {
        throw InternalError("request left in transient state after the event queue drained");
      }
    }

    SimOutput out;
    out.seed = seed_;
    out.config_digest = digest_;
    out.horizon_s = params_.horizon_s;
    for (auto& d : drivers_) {
      const double shift_end = d.shift_start_s + d.shift_length_s;
      const double end = std::max(shift_end, d.activity_end_s);
      d.overtime_s = end - shift_end;
      d.idle_s = end - d.shift_start_s - d.enroute_s - d.inservice_s;
      out.overtime_s = std::max(out.overtime_s, d.overtime_s);
    }
    out.trips = std::move(requests_);
    out.drivers = std::move(drivers_);
    out.offers = std::move(offers_);
    check_output_invariants(out, params_);
    return out;
  }

 private:
  void schedule(double time_s, EventKind kind, int request_id, int driver_id) {
    queue_.push(Event{time_s, next_seq_++, kind, request_id, driver_id});
  }

  TripRequest& request_by_id(int id) { return requests_[request_pos_.at(id)]; }
  DriverAgent& driver_by_id(int id) { return drivers_[driver_pos_.at(id)]; }

  void on_request_arrival(const Event& ev) {
    TripRequest& req = request_by_id(ev.request_id);
    if (req.status != RequestStatus::Pending)
      throw InternalError("request arrived twice");
    try_dispatch(req);
    if (open_for_offers(req)) pending_.push_back(req.id);
  }

  void on_pickup(const Event& ev) {
    DriverAgent& drv = driver_by_id(ev.driver_id);
    TripRequest& req = request_by_id(ev.request_id);
    if (drv.state != DriverState::EnRoutePickup || drv.active_request != req.id ||
        req.status != RequestStatus::Assigned || req.driver_id != drv.id)
      throw InternalError("pickup event does not match agent state");
    drv.enroute_s += clock_ - drv.leg_start_s;
    drv.leg_start_s = clock_;
    drv.node = req.origin;
    drv.state = DriverState::InService;
    req.status = RequestStatus::PickedUp;
    req.pickup_time_s = clock_;
    schedule(clock_ + graph_.route_time_ix(req.origin, req.dest), EventKind::DropoffArrival,
             req.id, drv.id);
  }

  void on_dropoff(const Event& ev) {
    DriverAgent& drv = driver_by_id(ev.driver_id);
    TripRequest& req = request_by_id(ev.request_id);
    if (drv.state != DriverState::InService || drv.active_request != req.id ||
        req.status != RequestStatus::PickedUp || req.driver_id != drv.id)
      throw InternalError("dropoff event does not match agent state");
    drv.inservice_s += clock_ - drv.leg_start_s;
    drv.node = req.dest;
    drv.state = DriverState::Idle;
    drv.last_dropoff_s = clock_;
    drv.activity_end_s = clock_;
    drv.active_request = -1;
    drv.income_eur += params_.fare_per_km_eur * req.distance_m / 1000.0;
    drv.n_trips += 1;
    drv.trip_log.push_back(req.id);
    req.status = RequestStatus::Completed;
    req.completion_time_s = clock_;
    rescan_pending();
  }

  void on_abandon_check(const Event& ev) {
    TripRequest& req = request_by_id(ev.request_id);
    if (open_for_offers(req)) req.status = RequestStatus::Abandoned;
  }

  static bool open_for_offers(const TripRequest& req) {
    return (req.status == RequestStatus::Pending || req.status == RequestStatus::Offered) &&
           req.driver_id < 0;
  }

  // A driver became idle: give queued requests another chance, oldest first.
  void rescan_pending() {
    std::deque<int> keep;
    while (!pending_.empty()) {
      const int rid = pending_.front();
      pending_.pop_front();
      TripRequest& req = request_by_id(rid);
      if (!open_for_offers(req)) continue;
      try_dispatch(req);
      if (open_for_offers(req)) keep.push_back(rid);
    }
    pending_ = std::move(keep);
  }

  // Offer loop for one request. Offers resolve synchronously: drivers answer
  // with zero latency, a rejection immediately triggers the next-nearest
  // eligible driver. Stops when someone accepts, the request runs out of
  // offer rounds or decliners, or no idle driver is eligible right now.
  void try_dispatch(TripRequest& req) {
    while (true) {
      const int di = select_driver(graph_, drivers_, req);
      if (di < 0) {
        // nobody eligible; hopeless only once every driver has declined
        if (req.declined_by.size() >= drivers_.size()) req.status = RequestStatus::Abandoned;
        return;
      }
      DriverAgent& drv = drivers_[di];
      req.status = RequestStatus::Offered;
      const DecisionContext ctx =
          build_context(drv, req, clock_, graph_, params_.long_trip_threshold_m);

      std::optional<double> utility;
      double probability;
      if (const auto* b = std::get_if<BehaviouralPolicy>(&drv.policy)) {
        utility = systematic_utility(b->model, ctx);
        probability = acceptance_probability(*utility);
      } else {
        probability = std::get<RandomPolicy>(drv.policy).accept_prob;
      }
      const Decision decision =
          decide(drv.policy, ctx, decision_rngs_[static_cast<std::size_t>(di)]);

      drv.n_offers += 1;
      drv.prev_request_declined = decision == Decision::Reject;
      offers_.push_back(OfferRecord{next_offer_id_++, req.id, drv.id, ctx.pickup_time_min,
                                    ctx.waiting_time_min, ctx.time1_loc, ctx.rlrd, utility,
                                    probability, decision});

      if (decision == Decision::Accept) {
        drv.n_accepts += 1;
        accept(req, drv);
        return;
      }
      req.declined_by.push_back(drv.id);
      if (req.declined_by.size() >= static_cast<std::size_t>(params_.max_offer_rounds)) {
        req.status = RequestStatus::Abandoned;
        return;
      }
    }
  }

  void accept(TripRequest& req, DriverAgent& drv) {
    req.status = RequestStatus::Assigned;
    req.driver_id = drv.id;
    drv.state = DriverState::EnRoutePickup;
    drv.leg_start_s = clock_;
    drv.active_request = req.id;
    schedule(clock_ + graph_.route_time_ix(drv.node, req.origin), EventKind::PickupArrival,
             req.id, drv.id);
  }

  const RoadGraph& graph_;
  EngineParams params_;
  std::vector<DriverAgent> drivers_;
  std::vector<TripRequest> requests_;
  std::uint64_t seed_;
  std::string digest_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::deque<int> pending_;
  std::vector<OfferRecord> offers_;
  std::vector<Rng> decision_rngs_;
  std::unordered_map<int, std::size_t> driver_pos_;
  std::unordered_map<int, std::size_t> request_pos_;
  double clock_ = 0.0;
  std::uint64_t next_seq_ = 0;
  long next_offer_id_ = 0;
};

}  // namespace

SimOutput run_prepared(const RoadGraph& graph, const EngineParams& params,
                       std::vector<DriverAgent> drivers, std::vector<TripRequest> requests,
                       std::uint64_t seed, const std::string& config_digest) {
  Simulation sim(graph, params, std::move(drivers), std::move(requests), seed, config_digest);
  return sim.run_all();
}

SimOutput run(const ScenarioConfig& scenario, const RoadGraph& graph, std::uint64_t seed) {
  Rng demand_rng(scenario.demand_seed.value_or(derive_seed(seed, {seed_tag::kDemand})));
  Rng supply_rng(scenario.supply_seed.value_or(derive_seed(seed, {seed_tag::kSupply})));

  std::vector<TripRequest> requests = generate_demand(scenario, graph, demand_rng);

  double calibrated_p = scenario.random_accept_prob.value_or(-1.0);
  std::vector<DriverAgent> drivers = generate_supply(scenario, graph, supply_rng, calibrated_p);

  EngineParams params;
  params.horizon_s = scenario.horizon_s;
  params.fare_per_km_eur = scenario.fare_per_km_eur;
  params.max_offer_rounds = scenario.max_offer_rounds;
  params.max_wait_s = scenario.max_wait_s;
  params.long_trip_threshold_m = requests.empty() ? 0.0 : long_trip_threshold(requests);

  return run_prepared(graph, params, std::move(drivers), std::move(requests), seed);
}

void check_output_invariants(const SimOutput& output, const EngineParams& params) {
  long completed = 0;
  long abandoned = 0;
  double completed_km = 0.0;
  for (const auto& t : output.trips) {
    if (t.status == RequestStatus::Completed) {
      ++completed;
      completed_km += t.distance_m / 1000.0;
      if (t.pickup_time_s < t.request_time_s || t.completion_time_s < t.pickup_time_s)
        throw InternalError("trip timestamps out of order");
    } else if (t.status == RequestStatus::Abandoned) {
      ++abandoned;
    } else {
      throw InternalError("non-terminal trip in output");
    }
  }
  if (completed + abandoned != static_cast<long>(output.trips.size()))
    throw InternalError("request conservation violated");

  double income = 0.0;
  for (const auto& d : output.drivers) income += d.income_eur;
  const double expected = params.fare_per_km_eur * completed_km;
  if (std::abs(income - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
    throw InternalError("income does not reconcile with completed distance");

  for (const auto& d : output.drivers) {
    const double span = d.shift_length_s + d.overtime_s;
    if (std::abs(d.idle_s + d.enroute_s + d.inservice_s - span) >
        1e-9 * std::max(1.0, span))
      throw InternalError("driver timeline does not partition the shift");
    if (d.idle_s < -1e-9 || d.enroute_s < 0.0 || d.inservice_s < 0.0 || d.overtime_s < 0.0)
      throw InternalError("negative time bucket");
    if (d.n_accepts > d.n_offers || static_cast<int>(d.trip_log.size()) != d.n_trips)
      throw InternalError("driver counters inconsistent");
  }

  for (const auto& o : output.offers) {
    if (!(o.probability >= 0.0 && o.probability <= 1.0))
      throw InternalError("offer probability outside [0, 1]");
    if (o.pickup_min < 0.0 || o.waiting_min < 0.0)
      throw InternalError("negative offer attribute");
  }
}

namespace {

void append_header_comment(std::string& s, const SimOutput& out) {
  s += "# config_digest=";
  s += out.config_digest.empty() ? "none" : out.config_digest;
  s += " seed=";
  s += std::to_string(out.seed);
  s += '\n';
}

}  // namespace

std::string SimOutput::trips_csv() const {
  std::string s;
  append_header_comment(s, *this);
  s += "request_id,traveller_id,driver_id,request_time_s,pickup_time_s,completion_time_s,distance_m,status\n";
  for (const auto& t : trips) {
    s += std::to_string(t.id);
    s += ',';
    s += std::to_string(t.traveller_id);
    s += ',';
    if (t.driver_id >= 0) s += std::to_string(t.driver_id);
    s += ',';
    s += fmt_double(t.request_time_s);
    s += ',';
    if (t.status == RequestStatus::Completed) s += fmt_double(t.pickup_time_s);
    s += ',';
    if (t.status == RequestStatus::Completed) s += fmt_double(t.completion_time_s);
    s += ',';
    s += fmt_double(t.distance_m);
    s += ',';
    s += request_status_name(t.status);
    s += '\n';
  }
  return s;
}

std::string SimOutput::drivers_csv() const {
  std::string s;
  append_header_comment(s, *this);
  s += "driver_id,policy,income_eur,idle_s,enroute_s,inservice_s,n_trips,n_offers,n_accepts\n";
  for (const auto& d : drivers) {
    s += std::to_string(d.id);
    s += ',';
    s += policy_name(d.policy);
    s += ',';
    s += fmt_double(d.income_eur);
    s += ',';
    s += fmt_double(d.idle_s);
    s += ',';
    s += fmt_double(d.enroute_s);
    s += ',';
    s += fmt_double(d.inservice_s);
    s += ',';
    s += std::to_string(d.n_trips);
    s += ',';
    s += std::to_string(d.n_offers);
    s += ',';
    s += std::to_string(d.n_accepts);
    s += '\n';
  }
  return s;
}

std::string SimOutput::offers_csv() const {
  std::string s;
  append_header_comment(s, *this);
  s += "offer_id,request_id,driver_id,pickup_min,waiting_min,time1loc,rlrd,utility,probability,decision\n";
  for (const auto& o : offers) {
    s += std::to_string(o.offer_id);
    s += ',';
    s += std::to_string(o.request_id);
    s += ',';
    s += std::to_string(o.driver_id);
    s += ',';
    s += fmt_double(o.pickup_min);
    s += ',';
    s += fmt_double(o.waiting_min);
    s += ',';
    s += o.time1loc ? '1' : '0';
    s += ',';
    s += fmt_double(o.rlrd);
    s += ',';
    if (o.utility) s += fmt_double(*o.utility);
    s += ',';
    s += fmt_double(o.probability);
    s += ',';
    s += o.decision == Decision::Accept ? "accept" : "reject";
    s += '\n';
  }
  return s;
}

}  // namespace ridesim
