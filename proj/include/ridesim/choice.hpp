#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ridesim/rng.hpp"

namespace ridesim {

class RoadGraph;
struct DriverAgent;
struct TripRequest;

// Binary logit coefficients of the accept alternative; rejection utility is
// normalized to zero. Defaults are the estimated values used throughout.
struct ChoiceModel {
  double beta_asc = 1.5;
  double beta_pickup_min = -0.0491;
  double beta_waiting_min = -0.0173;
  double beta_time1loc = -0.265;
  double beta_rlrd = 0.0909;
};

// Attribute values for one offer. Time attributes are minutes.
struct DecisionContext {
  double pickup_time_min = 0.0;
  double waiting_time_min = 0.0;
  // driver is in the first third of the shift and inside the central zone
  bool time1_loc = false;
  // non-shared flag x long-trip flag x traveller rating x previous-request-declined flag
  double rlrd = 0.0;
};

enum class Decision { Accept, Reject };

struct BehaviouralPolicy {
  ChoiceModel model;
};

// Calibrated coin flip used as the baseline driver class.
struct RandomPolicy {
  double accept_prob = 0.5;
};

using AcceptancePolicy = std::variant<BehaviouralPolicy, RandomPolicy>;

bool is_behavioural(const AcceptancePolicy& policy);
const char* policy_name(const AcceptancePolicy& policy);  // "behavioural" or "random"

// V = asc + b_pickup*pickup + b_waiting*waiting + b_time1loc*time1loc + b_rlrd*rlrd
double systematic_utility(const ChoiceModel& model, const DecisionContext& ctx);

// P(accept) = exp(V) / (1 + exp(V)), evaluated in overflow-safe form.
// P(reject) is always formed as 1 - P(accept), never re-derived.
double acceptance_probability(double utility);

// Draws exactly one uniform number from rng and compares it against the
// policy's acceptance probability.
Decision decide(const AcceptancePolicy& policy, const DecisionContext& ctx, Rng& rng);

// Assembles the context a driver faces for a concrete offer. The driver must
// be idle and the request unassigned.
DecisionContext build_context(const DriverAgent& driver, const TripRequest& request,
                              double now_s, const RoadGraph& graph,
                              double long_trip_threshold_m);

enum class ChoiceAttribute { PickupTime, WaitingTime, Time1Loc, Rlrd };

ChoiceAttribute parse_attribute(const std::string& name);  // ConfigError on unknown names
const char* attribute_name(ChoiceAttribute attribute);

struct SweepPoint {
  double value;
  double probability;
};

// Acceptance probability along a grid of values for one attribute, all other
// attributes held at the reference context. Grid values must lie in the
// attribute's legal range (times >= 0, time1_loc in {0,1}, rlrd in [0,5]).
std::vector<SweepPoint> sensitivity_sweep(const ChoiceModel& model, ChoiceAttribute attribute,
                                          std::span<const double> grid,
                                          const DecisionContext& reference);

}  // namespace ridesim
