#include <doctest.h>

#include <cmath>
#include <numbers>

#include "doateleop/vehicle.hpp"

using namespace doateleop;
using std::numbers::pi;

namespace {

FloorPlan open_plan(double size = 50.0) {
  FloorPlan p;
  p.bounds = Bounds{Vec2(0.0, 0.0), Vec2(size, size)};
  return p;
}

}  // namespace

TEST_CASE("camera-frame command moves along the camera axis") {
  VehicleLimits lim;
  lim.max_dt = 1.0;
  VehicleState s;
  s.position = Vec2(10.0, 10.0);
  s.heading = 0.0;
  s.camera_yaw = pi / 2.0;
  const VehicleState n = step(s, FlcCommand{0.1, 0.0, 0.0}, 1.0, lim, open_plan());
  // Oracle: R(heading + yaw) * (v_lat, v_fwd).
  const Eigen::Matrix2d r = rotation(s.heading + s.camera_yaw);
  const Vec2 expected = s.position + r * Vec2(0.0, 0.1);
  CHECK(n.position.x() == doctest::Approx(expected.x()));
  CHECK(n.position.y() == doctest::Approx(expected.y()));
  CHECK(n.position.x() == doctest::Approx(9.9));
  CHECK(n.position.y() == doctest::Approx(10.0));
  CHECK_FALSE(n.collided);
  // The chassis slews toward the camera while the camera holds its world bearing.
  CHECK(n.heading == doctest::Approx(1.5));
  CHECK(n.heading + n.camera_yaw == doctest::Approx(pi / 2.0));
  CHECK(n.time == doctest::Approx(1.0));
}

TEST_CASE("antenna offsets rotate with the heading") {
  AntennaArray arr;
  VehicleState s;
  s.position = Vec2(3.0, 4.0);
  s.heading = pi / 2.0;
  const auto pos = antenna_positions(s, arr);
  const auto off = arr.offsets();
  for (int i = 0; i < kReceiverCount; ++i) {
    // 90 degrees CCW: (x, y) -> (-y, x).
    CHECK(pos[i].x() == doctest::Approx(3.0 - off[i].y()));
    CHECK(pos[i].y() == doctest::Approx(4.0 + off[i].x()));
  }
  CHECK(off[static_cast<int>(Receiver::FR)].x() == doctest::Approx(0.2));
  CHECK(off[static_cast<int>(Receiver::FR)].y() == doctest::Approx(0.25));
  CHECK(off[static_cast<int>(Receiver::C)].norm() == 0.0);
}

TEST_CASE("command clamping preserves direction") {
  VehicleLimits lim;
  const FlcCommand c = clamp_command(FlcCommand{3.0, 4.0, 9.0}, lim);
  CHECK(std::hypot(c.v_forward, c.v_lateral) == doctest::Approx(lim.max_speed));
  CHECK(c.v_lateral / c.v_forward == doctest::Approx(4.0 / 3.0));
  CHECK(c.camera_yaw_rate == lim.max_camera_rate);
  const FlcCommand z = clamp_command(FlcCommand{std::nan(""), INFINITY, 0.1}, lim);
  CHECK(z.v_forward == 0.0);
  CHECK(z.v_lateral == lim.max_speed);
  CHECK(z.camera_yaw_rate == doctest::Approx(0.1));
}

TEST_CASE("walls stop the body short of penetration") {
  FloorPlan plan = open_plan(10.0);
  plan.walls.push_back(WallSegment{Vec2(5.0, 0.0), Vec2(5.0, 10.0), 10.0});
  VehicleLimits lim;
  VehicleState s;
  s.position = Vec2(3.0, 5.0);
  s.heading = -pi / 2.0;  // body forward = world +x
  bool hit = false;
  for (int i = 0; i < 200; ++i) {
    s = step(s, FlcCommand{0.5, 0.0, 0.0}, 0.05, lim, plan);
    hit = hit || s.collided;
    CHECK(s.position.x() <= 5.0 - lim.body_radius + 1e-9);
  }
  CHECK(hit);
  CHECK(s.position.x() == doctest::Approx(5.0 - lim.body_radius).epsilon(1e-6));
  CHECK(s.position.y() == doctest::Approx(5.0));
}

TEST_CASE("oblique contact slides along the wall") {
  FloorPlan plan = open_plan(10.0);
  plan.walls.push_back(WallSegment{Vec2(5.0, 0.0), Vec2(5.0, 10.0), 10.0});
  VehicleLimits lim;
  VehicleState s;
  s.position = Vec2(5.0 - lim.body_radius, 3.0);
  s.heading = -pi / 4.0;  // forward = (+x, +y) diagonal
  const VehicleState n = step(s, FlcCommand{0.5, 0.0, 0.0}, 0.2, lim, plan);
  CHECK(n.collided);
  CHECK(n.position.x() <= 5.0 - lim.body_radius + 1e-9);
  // Tangential component of the motion survives.
  CHECK(n.position.y() - 3.0 == doctest::Approx(0.5 * 0.2 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("step rejects dt outside (0, max_dt]") {
  VehicleLimits lim;
  const FloorPlan plan = open_plan();
  VehicleState s;
  s.position = Vec2(5.0, 5.0);
  CHECK_THROWS_AS(step(s, {}, 0.0, lim, plan), std::invalid_argument);
  CHECK_THROWS_AS(step(s, {}, -0.1, lim, plan), std::invalid_argument);
  CHECK_THROWS_AS(step(s, {}, 0.21, lim, plan), std::invalid_argument);
  CHECK_THROWS_AS(step(s, {}, std::nan(""), lim, plan), std::invalid_argument);
  CHECK_NOTHROW(step(s, {}, 0.2, lim, plan));
}

TEST_CASE("exact odometry reproduces the true pose") {
  VehicleLimits lim;
  const FloorPlan plan = open_plan();
  VehicleState s;
  s.position = Vec2(20.0, 20.0);
  Odometer odo(s, OdometryConfig{}, 1);
  for (int i = 0; i < 50; ++i) {
    s = step(s, FlcCommand{0.4, 0.1, 0.3}, 0.1, lim, plan);
    const auto r = odo.read(s, 0.1);
    CHECK(r.position == s.position);
    CHECK(r.heading == s.heading);
    CHECK((r.body_velocity - s.body_velocity()).norm() < 1e-12);
  }
}

TEST_CASE("per-run velocity scale error: position spread grows like sigma * distance") {
  VehicleLimits lim;
  const FloorPlan plan = open_plan(30.0);
  OdometryConfig cfg;
  cfg.velocity_scale_sigma = 0.01;
  const int runs = 1000;
  double sum = 0.0, sq = 0.0;
  for (int seed = 0; seed < runs; ++seed) {
    VehicleState s;
    s.position = Vec2(15.0, 5.0);
    Odometer odo(s, cfg, static_cast<std::uint64_t>(seed));
    OdometryReading r;
    for (int i = 0; i < 100; ++i) {
      s = step(s, FlcCommand{0.5, 0.0, 0.0}, 0.2, lim, plan);
      r = odo.read(s, 0.2);
    }
    REQUIRE(s.position.y() == doctest::Approx(15.0));
    const double err = r.position.y() - s.position.y();
    sum += err;
    sq += err * err;
  }
  const double mean = sum / runs;
  const double sd = std::sqrt(sq / runs - mean * mean);
  // 10 m at 1 % scale error.
  CHECK(sd == doctest::Approx(0.1).epsilon(0.1));
  CHECK(std::abs(mean) < 0.02);
}
