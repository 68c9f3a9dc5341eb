#include <doctest.h>

#include "doateleop/pilot.hpp"
#include "doateleop/trial.hpp"
#include "support.hpp"

using namespace doateleop;
using nlohmann::json;

TEST_CASE("pilot json parsing") {
  const PilotPolicy p = parse_pilot(json{{"kind", "waypoint"},
                                         {"speed", 0.4},
                                         {"waypoints", {{1.0, 2.0}, {3.0, 4.0}}},
                                         {"loop", true},
                                         {"dwell", 1.5},
                                         {"hold_rss", -50.0}});
  CHECK(p.kind == PilotKind::Waypoint);
  CHECK(p.speed == 0.4);
  REQUIRE(p.waypoints.size() == 2);
  CHECK(p.waypoints[1] == Vec2(3.0, 4.0));
  CHECK(p.loop);
  CHECK(p.dwell == 1.5);
  CHECK(*p.hold_rss == -50.0);

  const PilotPolicy back = parse_pilot(pilot_to_json(p));
  CHECK(pilot_to_json(back) == pilot_to_json(p));

  CHECK_THROWS_AS(parse_pilot(json{{"kind", "hovercraft"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_pilot(json{{"kind", "idle"}, {"sped", 0.1}}), std::invalid_argument);
  CHECK(load_pilot("random-walk").kind == PilotKind::RandomWalk);
  CHECK_THROWS_AS(load_pilot("no-such-pilot"), std::invalid_argument);
}

TEST_CASE("pilot validation against the scenario") {
  const Scenario sc = testing_support::default_scenario();
  PilotPolicy p;
  p.speed = 0.8;
  CHECK_THROWS_AS(p.validate(sc), std::invalid_argument);
  p = PilotPolicy{};
  p.kind = PilotKind::Waypoint;
  CHECK_THROWS_AS(p.validate(sc), std::invalid_argument);
  p.waypoints = {Vec2(20.0, 1.0)};
  CHECK_THROWS_AS(p.validate(sc), std::invalid_argument);
  p.waypoints = {Vec2(6.0, 1.0)};
  CHECK_NOTHROW(p.validate(sc));
  p.dwell = -1.0;
  CHECK_THROWS_AS(p.validate(sc), std::invalid_argument);
}

TEST_CASE("waypoint pilot retracing a square travels its perimeter") {
  Scenario sc = testing_support::open_room();
  sc.time_limit = 40.0;
  PilotPolicy p;
  p.kind = PilotKind::Waypoint;
  p.speed = 0.4;
  p.waypoint_tolerance = 0.01;
  p.waypoints = {Vec2(14.0, 10.0), Vec2(14.0, 12.0), Vec2(12.0, 12.0), Vec2(12.0, 10.0)};
  const TrialResult r = run_trial(sc, p, 1);
  CHECK(r.report.status == SessionStatus::Timeout);
  CHECK(r.report.distance == doctest::Approx(8.0).epsilon(0.02));
  CHECK((r.log.records.back().true_position - Vec2(12.0, 10.0)).norm() < p.waypoint_tolerance);
}

TEST_CASE("dwell holds the robot still at each waypoint") {
  Scenario sc = testing_support::open_room();
  sc.time_limit = 20.0;
  PilotPolicy p;
  p.kind = PilotKind::Waypoint;
  p.speed = 0.5;
  p.dwell = 2.0;
  p.waypoint_tolerance = 0.01;
  p.waypoints = {Vec2(13.0, 10.0), Vec2(14.0, 10.0)};
  const TrialResult r = run_trial(sc, p, 1);
  // 1 m at 0.5 m/s, 2 s stop, 1 m more: x must stay at 13 for about 2 s.
  int still = 0;
  for (const auto& rec : r.log.records) {
    if (std::abs(rec.true_position.x() - 13.0) < p.waypoint_tolerance && rec.command.v_forward == 0.0 &&
        rec.command.v_lateral == 0.0) {
      ++still;
    }
  }
  CHECK(still >= 38);
  CHECK(still <= 42);
  CHECK(r.report.distance == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("gradient follower climbs the noise-free field") {
  const Scenario sc = apply_noise_profile(testing_support::default_scenario(), "off");
  PilotPolicy p;
  p.kind = PilotKind::GradientFollower;
  p.speed = 0.3;
  for (std::uint64_t seed : {1, 2, 3}) {
    const TrialResult r = run_trial(sc, p, seed);
    CHECK(r.report.rss_gain > 0.0);
    CHECK(r.report.status == SessionStatus::Timeout);
  }
}

TEST_CASE("random walk and idle pilots are deterministic per seed") {
  Scenario sc = testing_support::default_scenario();
  sc.time_limit = 20.0;
  PilotPolicy p;
  p.kind = PilotKind::RandomWalk;
  const auto a = run_trial(sc, p, 7);
  const auto b = run_trial(sc, p, 7);
  CHECK(serialize_log(a.log) == serialize_log(b.log));
  CHECK(a.report.distance > 1.0);
  p.kind = PilotKind::Idle;
  CHECK(run_trial(sc, p, 7).report.distance == 0.0);
}
