#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "doateleop/random.hpp"
#include "doateleop/scenario.hpp"
#include "doateleop/session.hpp"

namespace doateleop {

enum class PilotKind { GradientFollower, Waypoint, RandomWalk, Idle };

const char* to_string(PilotKind k);
PilotKind pilot_kind_from_string(const std::string& s);

struct PilotPolicy {
  PilotKind kind = PilotKind::GradientFollower;
  double speed = 0.3;  // m/s
  double jitter = 0.1;  // rad, std of the heading perturbation per sample
  double turn_noise = 0.6;  // rad / sqrt(s), random-walk heading diffusion
  std::optional<double> hold_rss;  // gradient follower stops once R_C reaches this (dBm)
  double escape_time = 1.5;  // s spent sliding sideways after a collision
  // For the gradient follower: once hold_rss is reached, drive out through
  // these waypoints and then follow the DoA back again.
  std::vector<Vec2> waypoints;
  double waypoint_tolerance = 0.08;  // m
  bool loop = false;
  double dwell = 0.0;  // s stopped at each reached waypoint
  bool turn_camera = false;  // keep the camera aimed along the direction of travel
  double camera_gain = 2.0;  // 1/s
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument if parameters are out of range or a
  /// waypoint lies outside the scenario bounds.
  void validate(const Scenario& scenario) const;
};

PilotPolicy parse_pilot(const nlohmann::json& j);
nlohmann::json pilot_to_json(const PilotPolicy& p);
/// A bare kind name ("gradient-follower", ...) or a path to a JSON pilot file.
PilotPolicy load_pilot(const std::string& name_or_path);

/// Scripted operator. Sees the same telemetry as a human would, except that the
/// waypoint pilot steers on the true pose.
class Pilot {
 public:
  Pilot(PilotPolicy policy, const Scenario& scenario, std::uint64_t seed);

  FlcCommand next(const TelemetryFrame& frame);
  const PilotPolicy& policy() const { return policy_; }

 private:
  FlcCommand gradient_follower(const TelemetryFrame& frame);
  FlcCommand waypoint(const TelemetryFrame& frame);
  FlcCommand route(const TelemetryFrame& frame, bool loop, bool& finished);
  FlcCommand random_walk(const TelemetryFrame& frame);
  FlcCommand world_direction(const TelemetryFrame& frame, double direction, double speed) const;

  PilotPolicy policy_;
  VehicleLimits limits_;
  double dt_;
  Rng rng_;
  double jitter_ = 0.0;
  double escape_left_ = 0.0;
  double escape_offset_ = 0.0;
  std::size_t target_ = 0;
  double dwell_left_ = 0.0;
  double walk_direction_ = 0.0;
  bool holding_ = false;
  bool excursion_ = false;
};

}  // namespace doateleop
