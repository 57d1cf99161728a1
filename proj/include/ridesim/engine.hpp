#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ridesim/choice.hpp"
#include "ridesim/netgraph.hpp"

namespace ridesim {

struct ScenarioConfig;

enum class DriverState { Idle, EnRoutePickup, InService };

const char* driver_state_name(DriverState state);

struct DriverAgent {
  int id = 0;
  AcceptancePolicy policy = RandomPolicy{};
  std::uint32_t node = 0;  // current node index
  DriverState state = DriverState::Idle;
  double shift_start_s = 0.0;
  double shift_length_s = 0.0;
  // shift start until the first drop-off, then the last drop-off time
  double last_dropoff_s = 0.0;
  bool prev_request_declined = false;
  double income_eur = 0.0;
  double enroute_s = 0.0;    // cumulative time driving to pickups
  double inservice_s = 0.0;  // cumulative time driving travellers
  double idle_s = 0.0;       // filled when the run ends
  double overtime_s = 0.0;   // activity past shift end, filled when the run ends
  int n_trips = 0;
  int n_offers = 0;
  int n_accepts = 0;
  std::vector<int> trip_log;  // completed request ids in completion order

  // engine bookkeeping for the active assignment
  double leg_start_s = 0.0;
  double activity_end_s = 0.0;
  int active_request = -1;
};

enum class RequestStatus { Pending, Offered, Assigned, PickedUp, Completed, Abandoned };

const char* request_status_name(RequestStatus status);

struct TripRequest {
  int id = 0;
  int traveller_id = 0;
  std::uint32_t origin = 0;  // node index
  std::uint32_t dest = 0;    // node index
  double request_time_s = 0.0;
  double rating = 5.0;
  double distance_m = 0.0;  // length of the time-shortest route, fixed at generation
  RequestStatus status = RequestStatus::Pending;
  std::vector<int> declined_by;  // driver ids, offer order
  double pickup_time_s = -1.0;
  double completion_time_s = -1.0;
  int driver_id = -1;
};

enum class EventKind { RequestArrival, PickupArrival, DropoffArrival, AbandonCheck };

// Queue entries, ordered by (time_s, seq). seq is the global scheduling
// counter, so simultaneous events resolve in scheduling order.
struct Event {
  double time_s;
  std::uint64_t seq;
  EventKind kind;
  int request_id;
  int driver_id;
};

struct OfferRecord {
  long offer_id = 0;
  int request_id = 0;
  int driver_id = 0;
  double pickup_min = 0.0;
  double waiting_min = 0.0;
  bool time1loc = false;
  double rlrd = 0.0;
  std::optional<double> utility;  // empty for random-class drivers
  double probability = 0.0;
  Decision decision = Decision::Reject;
};

struct EngineParams {
  double horizon_s = 0.0;
  double fare_per_km_eur = 2.0;
  int max_offer_rounds = 5;
  double max_wait_s = 0.0;  // 0 disables the traveller patience timer
  double long_trip_threshold_m = 0.0;
};

struct SimOutput {
  std::vector<TripRequest> trips;    // by request id, terminal statuses only
  std::vector<DriverAgent> drivers;  // final driver states, by driver id
  std::vector<OfferRecord> offers;   // chronological
  std::uint64_t seed = 0;
  std::string config_digest;
  double horizon_s = 0.0;
  double overtime_s = 0.0;  // max driver overtime in this run

  std::string trips_csv() const;
  std::string drivers_csv() const;
  std::string offers_csv() const;
};

// Nearest idle driver by route time to the request origin, excluding drivers
// that already declined this request. Ties break on the lower driver id.
// Returns the index into drivers, or -1 when nobody is eligible.
int select_driver(const RoadGraph& graph, const std::vector<DriverAgent>& drivers,
                  const TripRequest& request);

// Full scenario run: generates demand and supply from the scenario streams,
// then simulates. Identical (scenario, graph, seed) give bit-identical output.
SimOutput run(const ScenarioConfig& scenario, const RoadGraph& graph, std::uint64_t seed);

// Simulates prebuilt agents. Driver decision streams are derived from seed
// and the driver id. Ids must be unique; request origin != dest.
SimOutput run_prepared(const RoadGraph& graph, const EngineParams& params,
                       std::vector<DriverAgent> drivers, std::vector<TripRequest> requests,
                       std::uint64_t seed, const std::string& config_digest = "");

// Conservation and accounting checks, run at the end of every simulation.
// Throws InternalError on any violation.
void check_output_invariants(const SimOutput& output, const EngineParams& params);

}  // namespace ridesim
