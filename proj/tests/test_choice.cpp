#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ridesim/choice.hpp"
#include "ridesim/engine.hpp"
#include "ridesim/errors.hpp"
#include "ridesim/netgraph.hpp"
#include "ridesim/rng.hpp"

using namespace ridesim;

namespace {

DecisionContext make_ctx(double pickup, double waiting, bool t1l, double rlrd) {
  DecisionContext ctx;
  ctx.pickup_time_min = pickup;
  ctx.waiting_time_min = waiting;
  ctx.time1_loc = t1l;
  ctx.rlrd = rlrd;
  return ctx;
}

}  // namespace

TEST_CASE("utility hand calculations") {
  const ChoiceModel m;
  CHECK(systematic_utility(m, make_ctx(0, 0, false, 0)) == 1.5);
  CHECK(systematic_utility(m, make_ctx(10, 5, false, 0)) ==
        doctest::Approx(0.9225).epsilon(1e-12));
  CHECK(systematic_utility(m, make_ctx(10, 5, true, 4)) ==
        doctest::Approx(1.0211).epsilon(1e-12));
}

TEST_CASE("utility is linear in every attribute") {
  ChoiceModel m;
  m.beta_asc = 0.7;
  m.beta_pickup_min = -0.11;
  m.beta_waiting_min = -0.031;
  m.beta_time1loc = -0.42;
  m.beta_rlrd = 0.2;
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto ctx = make_ctx(rng.next_range(0, 40), rng.next_range(0, 90), rng.next_u64() & 1,
                              rng.next_range(0, 5));
    const double expected = m.beta_asc + m.beta_pickup_min * ctx.pickup_time_min +
                            m.beta_waiting_min * ctx.waiting_time_min +
                            m.beta_time1loc * (ctx.time1_loc ? 1.0 : 0.0) +
                            m.beta_rlrd * ctx.rlrd;
    CHECK(systematic_utility(m, ctx) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("utility rejects non-finite attributes") {
  const ChoiceModel m;
  auto ctx = make_ctx(1, 1, false, 1);
  ctx.pickup_time_min = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(systematic_utility(m, ctx), ComputationError);
  ctx = make_ctx(1, 1, false, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(systematic_utility(m, ctx), ComputationError);
}

TEST_CASE("acceptance probability reference values") {
  CHECK(acceptance_probability(0.0) == 0.5);
  CHECK(acceptance_probability(1.5) == doctest::Approx(0.8175744761936437).epsilon(1e-12));
  CHECK(acceptance_probability(0.9225) == doctest::Approx(0.7155512239631054).epsilon(1e-12));
}

TEST_CASE("acceptance probability is a proper monotone cdf shape") {
  // strictly inside (0, 1) and strictly increasing while 1 + exp(-v) is still
  // resolvable in double precision; past |v| ~ 36 the curve sits on 0 or 1
  double prev = -1.0;
  for (double v = -34.0; v <= 34.0; v += 0.25) {
    const double p = acceptance_probability(v);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(p > prev);
    prev = p;
  }
  for (double v = 34.25; v <= 80.0; v += 0.25) {
    const double p = acceptance_probability(v);
    CHECK(p >= prev);
    CHECK(p <= 1.0);
    prev = p;
  }
  // symmetric around zero
  for (double v : {0.3, 1.7, 4.0, 12.0})
    CHECK(acceptance_probability(v) + acceptance_probability(-v) ==
          doctest::Approx(1.0).epsilon(1e-15));
  // extreme utilities saturate cleanly instead of overflowing
  CHECK(acceptance_probability(1000.0) == 1.0);
  CHECK(acceptance_probability(-1000.0) == 0.0);
  CHECK_THROWS_AS(acceptance_probability(std::numeric_limits<double>::quiet_NaN()),
                  ComputationError);
  CHECK_THROWS_AS(acceptance_probability(std::numeric_limits<double>::infinity()),
                  ComputationError);
}

TEST_CASE("reject probability is the exact complement") {
  // p + (1 - p) == 1.0 must hold bit-exactly so the two-alternative model
  // never leaks probability mass
  for (double v = -30.0; v <= 30.0; v += 0.0625) {
    const double p = acceptance_probability(v);
    const double q = 1.0 - p;
    CHECK(p + q == 1.0);
  }
}

TEST_CASE("degenerate random policies are deterministic") {
  Rng rng(123);
  const DecisionContext ctx;
  const AcceptancePolicy never = RandomPolicy{0.0};
  const AcceptancePolicy always = RandomPolicy{1.0};
  for (int i = 0; i < 200; ++i) {
    CHECK(decide(never, ctx, rng) == Decision::Reject);
    CHECK(decide(always, ctx, rng) == Decision::Accept);
  }
}

TEST_CASE("behavioural decide matches its stated probability in frequency") {
  const AcceptancePolicy policy = BehaviouralPolicy{ChoiceModel{}};
  const auto ctx = make_ctx(10, 5, false, 0);
  const double p = 0.7155512239631054;
  Rng rng(2026);
  int accepts = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    if (decide(policy, ctx, rng) == Decision::Accept) ++accepts;
  CHECK(std::abs(static_cast<double>(accepts) / n - p) < 0.015);
}

TEST_CASE("decide consumes exactly one draw") {
  const AcceptancePolicy policy = BehaviouralPolicy{ChoiceModel{}};
  const auto ctx = make_ctx(3, 2, true, 1);
  Rng a(555);
  Rng b(555);
  for (int i = 0; i < 17; ++i) {
    decide(policy, ctx, a);
    b.next_double();
  }
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("offer context from a concrete driver and request") {
  RoadGraph g = generate_grid(3, 3, 600.0);
  g.classify_speeds(600.0, 600.0, 400.0, 18.0, 36.0);  // only the centre node is inside
  g.build_route_cache();

  DriverAgent d;
  d.id = 7;
  d.node = g.index_of(0);
  d.state = DriverState::Idle;
  d.shift_start_s = 0.0;
  d.shift_length_s = 18000.0;
  d.last_dropoff_s = 3300.0;
  d.prev_request_declined = true;

  TripRequest r;
  r.id = 11;
  r.origin = g.index_of(1);
  r.dest = g.index_of(2);
  r.request_time_s = 3500.0;
  r.rating = 4.0;
  r.distance_m = 1200.0;

  const double now = 3600.0;
  auto ctx = build_context(d, r, now, g, 1000.0);
  CHECK(ctx.pickup_time_min == doctest::Approx(1.0).epsilon(1e-12));  // 600 m at 36 km/h
  CHECK(ctx.waiting_time_min == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_FALSE(ctx.time1_loc);   // outer node
  CHECK(ctx.rlrd == 4.0);       // long trip, rating 4, previous decline

  SUBCASE("central node early in the shift sets the shift flag") {
    d.node = g.index_of(4);
    ctx = build_context(d, r, now, g, 1000.0);
    CHECK(ctx.time1_loc);
  }

  SUBCASE("first-third boundary is strict") {
    d.node = g.index_of(4);
    ctx = build_context(d, r, 5999.0, g, 1000.0);
    CHECK(ctx.time1_loc);
    ctx = build_context(d, r, 6000.0, g, 1000.0);  // exactly one third into the shift
    CHECK_FALSE(ctx.time1_loc);
  }

  SUBCASE("rating interaction needs all three flags") {
    // trip not strictly longer than the threshold
    ctx = build_context(d, r, now, g, 1200.0);
    CHECK(ctx.rlrd == 0.0);
    // no previous decline
    d.prev_request_declined = false;
    ctx = build_context(d, r, now, g, 1000.0);
    CHECK(ctx.rlrd == 0.0);
    // rating scales the interaction
    d.prev_request_declined = true;
    r.rating = 3.25;
    ctx = build_context(d, r, now, g, 1000.0);
    CHECK(ctx.rlrd == 3.25);
  }

  SUBCASE("busy drivers and taken requests are rejected") {
    d.state = DriverState::EnRoutePickup;
    CHECK_THROWS_AS(build_context(d, r, now, g, 1000.0), StateError);
    d.state = DriverState::Idle;
    r.driver_id = 3;
    CHECK_THROWS_AS(build_context(d, r, now, g, 1000.0), StateError);
  }
}

TEST_CASE("attribute names round-trip") {
  for (const char* name : {"pickup_time", "waiting_time", "time1_loc", "rlrd"})
    CHECK(attribute_name(parse_attribute(name)) == std::string(name));
  CHECK_THROWS_AS(parse_attribute("fare"), ConfigError);
  CHECK_THROWS_AS(parse_attribute(""), ConfigError);
}

TEST_CASE("sensitivity sweep endpoints and ordering") {
  const ChoiceModel m;
  const DecisionContext ref;  // all attributes at zero

  const std::vector<double> pickup_grid{0.0, 30.0};
  const auto pickup = sensitivity_sweep(m, ChoiceAttribute::PickupTime, pickup_grid, ref);
  REQUIRE(pickup.size() == 2);
  CHECK(pickup[0].probability == doctest::Approx(0.8175744761936437).epsilon(1e-12));
  CHECK(pickup[1].probability == doctest::Approx(0.5067495899673915).epsilon(1e-12));

  const std::vector<double> waiting_grid{0.0, 60.0};
  const auto waiting = sensitivity_sweep(m, ChoiceAttribute::WaitingTime, waiting_grid, ref);
  CHECK(waiting[1].probability == doctest::Approx(0.6134885243570564).epsilon(1e-12));

  const std::vector<double> flag_grid{0.0, 1.0};
  const auto t1l = sensitivity_sweep(m, ChoiceAttribute::Time1Loc, flag_grid, ref);
  CHECK(t1l[1].probability == doctest::Approx(0.7746924929149284).epsilon(1e-12));

  const std::vector<double> rlrd_grid{0.0, 5.0};
  const auto rlrd = sensitivity_sweep(m, ChoiceAttribute::Rlrd, rlrd_grid, ref);
  CHECK(rlrd[1].probability == doctest::Approx(0.8759364925644542).epsilon(1e-12));

  const double d_pickup = std::abs(pickup.front().probability - pickup.back().probability);
  const double d_waiting = std::abs(waiting.front().probability - waiting.back().probability);
  const double d_t1l = std::abs(t1l.front().probability - t1l.back().probability);
  const double d_rlrd = std::abs(rlrd.front().probability - rlrd.back().probability);
  CHECK(d_pickup == doctest::Approx(0.31082488622625215).epsilon(1e-12));
  CHECK(d_waiting == doctest::Approx(0.2040859518365873).epsilon(1e-12));
  CHECK(d_t1l == doctest::Approx(0.042881983278715285).epsilon(1e-12));
  CHECK(d_rlrd == doctest::Approx(0.05836201637081051).epsilon(1e-12));

  // over their observed ranges the travel-time attributes dominate
  CHECK(d_pickup > d_waiting);
  CHECK(d_waiting > d_rlrd);
  CHECK(d_rlrd > d_t1l);
}

TEST_CASE("sensitivity sweep validates its grid") {
  const ChoiceModel m;
  const DecisionContext ref;
  const std::vector<double> neg{-1.0};
  CHECK_THROWS_AS(sensitivity_sweep(m, ChoiceAttribute::PickupTime, neg, ref), ConfigError);
  CHECK_THROWS_AS(sensitivity_sweep(m, ChoiceAttribute::WaitingTime, neg, ref), ConfigError);
  const std::vector<double> half{0.5};
  CHECK_THROWS_AS(sensitivity_sweep(m, ChoiceAttribute::Time1Loc, half, ref), ConfigError);
  const std::vector<double> six{6.0};
  CHECK_THROWS_AS(sensitivity_sweep(m, ChoiceAttribute::Rlrd, six, ref), ConfigError);
  const std::vector<double> empty;
  CHECK_THROWS_AS(sensitivity_sweep(m, ChoiceAttribute::PickupTime, empty, ref), ConfigError);
  const std::vector<double> nan{std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(sensitivity_sweep(m, ChoiceAttribute::PickupTime, nan, ref), ConfigError);
}
