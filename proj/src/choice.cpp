#include "ridesim/choice.hpp"

#include <cmath>

#include "ridesim/engine.hpp"
#include "ridesim/errors.hpp"
#include "ridesim/netgraph.hpp"

namespace ridesim {

bool is_behavioural(const AcceptancePolicy& policy) {
  return std::holds_alternative<BehaviouralPolicy>(policy);
}

const char* policy_name(const AcceptancePolicy& policy) {
  return is_behavioural(policy) ? "behavioural" : "random";
}

double systematic_utility(const ChoiceModel& model, const DecisionContext& ctx) {
  if (!std::isfinite(ctx.pickup_time_min) || !std::isfinite(ctx.waiting_time_min) ||
      !std::isfinite(ctx.rlrd))
    throw ComputationError("non-finite attribute in decision context");
  return model.beta_asc + model.beta_pickup_min * ctx.pickup_time_min +
         model.beta_waiting_min * ctx.waiting_time_min +
         model.beta_time1loc * (ctx.time1_loc ? 1.0 : 0.0) + model.beta_rlrd * ctx.rlrd;
}

double acceptance_probability(double utility) {
  if (!std::isfinite(utility)) throw ComputationError("non-finite utility");
  // two algebraically equal forms, each evaluated only where exp cannot overflow
  if (utility >= 0.0) return 1.0 / (1.0 + std::exp(-utility));
  const double e = std::exp(utility);
  return e / (1.0 + e);
}

Decision decide(const AcceptancePolicy& policy, const DecisionContext& ctx, Rng& rng) {
  const double u = rng.next_double();
  double p = 0.0;
  if (const auto* b = std::get_if<BehaviouralPolicy>(&policy)) {
    p = acceptance_probability(systematic_utility(b->model, ctx));
  } else {
    p = std::get<RandomPolicy>(policy).accept_prob;
  }
  return u < p ? Decision::Accept : Decision::Reject;
}

DecisionContext build_context(const DriverAgent& driver, const TripRequest& request,
                              double now_s, const RoadGraph& graph,
                              double long_trip_threshold_m) {
  if (driver.state != DriverState::Idle)
    throw StateError("driver " + std::to_string(driver.id) + " is not idle");
  if (request.driver_id >= 0)
    throw StateError("request " + std::to_string(request.id) + " is already assigned");

  DecisionContext ctx;
  ctx.pickup_time_min = graph.route_time_ix(driver.node, request.origin) / 60.0;
  ctx.waiting_time_min = (now_s - driver.last_dropoff_s) / 60.0;

  const bool early_shift = now_s - driver.shift_start_s < driver.shift_length_s / 3.0;
  ctx.time1_loc = early_shift && graph.in_central_zone(driver.node);

  // all simulated rides are solo, so the non-shared flag is identically 1
  const double long_flag = request.distance_m > long_trip_threshold_m ? 1.0 : 0.0;
  const double declined_flag = driver.prev_request_declined ? 1.0 : 0.0;
  ctx.rlrd = 1.0 * long_flag * request.rating * declined_flag;
  return ctx;
}

ChoiceAttribute parse_attribute(const std::string& name) {
  if (name == "pickup_time") return ChoiceAttribute::PickupTime;
  if (name == "waiting_time") return ChoiceAttribute::WaitingTime;
  if (name == "time1_loc") return ChoiceAttribute::Time1Loc;
  if (name == "rlrd") return ChoiceAttribute::Rlrd;
  throw ConfigError("unknown attribute '" + name +
                    "' (expected pickup_time, waiting_time, time1_loc or rlrd)");
}

const char* attribute_name(ChoiceAttribute attribute) {
  switch (attribute) {
    case ChoiceAttribute::PickupTime: return "pickup_time";
    case ChoiceAttribute::WaitingTime: return "waiting_time";
    case ChoiceAttribute::Time1Loc: return "time1_loc";
    case ChoiceAttribute::Rlrd: return "rlrd";
  }
  throw InternalError("unhandled attribute");
}

std::vector<SweepPoint> sensitivity_sweep(const ChoiceModel& model, ChoiceAttribute attribute,
                                          std::span<const double> grid,
                                          const DecisionContext& reference) {
  if (grid.empty()) throw ConfigError("sensitivity grid is empty");
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (double v : grid) {
    if (!std::isfinite(v)) throw ConfigError("sensitivity grid contains a non-finite value");
    DecisionContext ctx = reference;
    switch (attribute) {
      case ChoiceAttribute::PickupTime:
        if (v < 0.0) throw ConfigError("pickup_time grid values must be >= 0");
        ctx.pickup_time_min = v;
        break;
      case ChoiceAttribute::WaitingTime:
        if (v < 0.0) throw ConfigError("waiting_time grid values must be >= 0");
        ctx.waiting_time_min = v;
        break;
      case ChoiceAttribute::Time1Loc:
        if (v != 0.0 && v != 1.0) throw ConfigError("time1_loc grid values must be 0 or 1");
        ctx.time1_loc = v != 0.0;
        break;
      case ChoiceAttribute::Rlrd:
        if (v < 0.0 || v > 5.0) throw ConfigError("rlrd grid values must lie in [0, 5]");
        ctx.rlrd = v;
        break;
    }
    points.push_back(SweepPoint{v, acceptance_probability(systematic_utility(model, ctx))});
  }
  return points;
}

}  // namespace ridesim
