#include "doateleop/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "json_util.hpp"

namespace doateleop {

using nlohmann::json;

const char* to_string(PilotKind k) {
  switch (k) {
    case PilotKind::GradientFollower:
      return "gradient-follower";
    case PilotKind::Waypoint:
      return "waypoint";
    case PilotKind::RandomWalk:
      return "random-walk";
    case PilotKind::Idle:
      return "idle";
  }
  return "?";
}

PilotKind pilot_kind_from_string(const std::string& s) {
  if (s == "gradient-follower") return PilotKind::GradientFollower;
  if (s == "waypoint") return PilotKind::Waypoint;
  if (s == "random-walk") return PilotKind::RandomWalk;
  if (s == "idle") return PilotKind::Idle;
  throw std::invalid_argument("unknown pilot kind '" + s + "'");
}

void PilotPolicy::validate(const Scenario& scenario) const {
  if (!(speed >= 0.0) || !std::isfinite(speed)) throw std::invalid_argument("pilot speed must be >= 0");
  if (speed > scenario.limits.max_speed + 1e-12) {
    throw std::invalid_argument("pilot speed exceeds the vehicle speed limit");
  }
  if (!(jitter >= 0.0) || !(turn_noise >= 0.0) || !(escape_time >= 0.0)) {
    throw std::invalid_argument("pilot noise parameters must be >= 0");
  }
  if (!(waypoint_tolerance > 0.0)) throw std::invalid_argument("waypoint tolerance must be > 0");
  if (!(dwell >= 0.0) || !std::isfinite(dwell)) throw std::invalid_argument("pilot dwell must be >= 0");
  if (!(camera_gain >= 0.0)) throw std::invalid_argument("camera gain must be >= 0");
  if (kind == PilotKind::Waypoint && waypoints.empty()) {
    throw std::invalid_argument("waypoint pilot needs at least one waypoint");
  }
  for (const auto& w : waypoints) {
    if (!scenario.map.plan.bounds.contains(w)) {
      throw std::invalid_argument("waypoint (" + std::to_string(w.x()) + ", " + std::to_string(w.y()) +
                                  ") lies outside the map");
    }
  }
}

PilotPolicy parse_pilot(const json& j) {
  detail::reject_unknown(j,
                         {"kind", "speed", "jitter", "turn_noise", "hold_rss", "escape_time", "waypoints",
                          "waypoint_tolerance", "loop", "dwell", "turn_camera", "camera_gain", "seed"},
                         "pilot");
  PilotPolicy p;
  p.kind = pilot_kind_from_string(j.at("kind").get<std::string>());
  detail::read_opt(j, "speed", p.speed);
  detail::read_opt(j, "jitter", p.jitter);
  detail::read_opt(j, "turn_noise", p.turn_noise);
  if (auto it = j.find("hold_rss"); it != j.end() && !it->is_null()) p.hold_rss = it->get<double>();
  detail::read_opt(j, "escape_time", p.escape_time);
  if (auto it = j.find("waypoints"); it != j.end()) {
    for (const auto& w : *it) p.waypoints.push_back(detail::vec_from(w, "pilot.waypoints"));
  }
  detail::read_opt(j, "waypoint_tolerance", p.waypoint_tolerance);
  detail::read_opt(j, "loop", p.loop);
  detail::read_opt(j, "dwell", p.dwell);
  detail::read_opt(j, "turn_camera", p.turn_camera);
  detail::read_opt(j, "camera_gain", p.camera_gain);
  detail::read_opt(j, "seed", p.seed);
  return p;
}

json pilot_to_json(const PilotPolicy& p) {
  json j{{"kind", to_string(p.kind)},
         {"speed", p.speed},
         {"jitter", p.jitter},
         {"turn_noise", p.turn_noise},
         {"escape_time", p.escape_time},
         {"waypoint_tolerance", p.waypoint_tolerance},
         {"loop", p.loop},
         {"dwell", p.dwell},
         {"turn_camera", p.turn_camera},
         {"camera_gain", p.camera_gain},
         {"seed", p.seed}};
  j["hold_rss"] = p.hold_rss ? json(*p.hold_rss) : json(nullptr);
  j["waypoints"] = json::array();
  for (const auto& w : p.waypoints) j["waypoints"].push_back(detail::vec_to(w));
  return j;
}

PilotPolicy load_pilot(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path)) {
    return parse_pilot(detail::read_json_file(name_or_path));
  }
  PilotPolicy p;
  p.kind = pilot_kind_from_string(name_or_path);
  return p;
}

Pilot::Pilot(PilotPolicy policy, const Scenario& scenario, std::uint64_t seed)
    : policy_(std::move(policy)),
      limits_(scenario.limits),
      dt_(scenario.timing.dt()),
      rng_(hash_combine(seed, policy_.seed)) {
  policy_.validate(scenario);
  walk_direction_ = scenario.spawn.camera_direction();
}

FlcCommand Pilot::next(const TelemetryFrame& frame) {
  FlcCommand cmd;
  switch (policy_.kind) {
    case PilotKind::GradientFollower:
      cmd = gradient_follower(frame);
      break;
    case PilotKind::Waypoint:
      cmd = waypoint(frame);
      break;
    case PilotKind::RandomWalk:
      cmd = random_walk(frame);
      break;
    case PilotKind::Idle:
      break;
  }
  return clamp_command(cmd, limits_);
}

FlcCommand Pilot::world_direction(const TelemetryFrame& frame, double direction, double speed) const {
  const double camera = frame.true_heading + frame.camera_yaw + std::numbers::pi / 2.0;
  const double beta = wrap_angle(direction - camera);
  FlcCommand cmd;
  cmd.v_forward = speed * std::cos(beta);
  cmd.v_lateral = -speed * std::sin(beta);
  if (policy_.turn_camera) {
    cmd.camera_yaw_rate = std::clamp(policy_.camera_gain * beta, -limits_.max_camera_rate, limits_.max_camera_rate);
  }
  return cmd;
}

FlcCommand Pilot::gradient_follower(const TelemetryFrame& frame) {
  if (excursion_) {
    bool finished = false;
    const FlcCommand cmd = route(frame, false, finished);
    if (!finished) return cmd;
    excursion_ = false;
    holding_ = false;
    target_ = 0;
  }
  if (frame.sampled) {
    jitter_ = policy_.jitter > 0.0 ? rng_.normal(0.0, policy_.jitter) : 0.0;
    if (policy_.hold_rss) {
      holding_ = frame.rc_ewma >= *policy_.hold_rss;
      if (holding_ && !policy_.waypoints.empty()) {
        excursion_ = true;
        dwell_left_ = policy_.dwell;
        return {};
      }
    }
  }
  if (frame.collision && escape_left_ <= 0.0) {
    escape_left_ = policy_.escape_time;
    escape_offset_ = rng_.uniform() < 0.5 ? std::numbers::pi / 2.0 : -std::numbers::pi / 2.0;
  }
  if (!frame.doa_camera || (holding_ && escape_left_ <= 0.0)) {
    return {};
  }
  double theta = frame.doa_camera->theta + jitter_;
  if (escape_left_ > 0.0) {
    theta += escape_offset_;
    escape_left_ -= dt_;
  }
  FlcCommand cmd;
  cmd.v_lateral = policy_.speed * std::cos(theta);
  cmd.v_forward = policy_.speed * std::sin(theta);
  if (policy_.turn_camera) {
    const double beta = wrap_angle(frame.doa_camera->theta - std::numbers::pi / 2.0);
    cmd.camera_yaw_rate = std::clamp(policy_.camera_gain * beta, -limits_.max_camera_rate, limits_.max_camera_rate);
  }
  return cmd;
}

FlcCommand Pilot::waypoint(const TelemetryFrame& frame) {
  bool finished = false;
  return route(frame, policy_.loop, finished);
}

FlcCommand Pilot::route(const TelemetryFrame& frame, bool loop, bool& finished) {
  const auto& wps = policy_.waypoints;
  finished = false;
  if (dwell_left_ > 0.0) {
    dwell_left_ -= dt_;
    return {};
  }
  bool reached = false;
  while (target_ < wps.size() && (wps[target_] - frame.true_position).norm() < policy_.waypoint_tolerance) {
    ++target_;
    reached = true;
    if (target_ == wps.size() && loop) target_ = 0;
  }
  if (target_ >= wps.size()) {
    finished = true;
    return {};
  }
  if (reached && policy_.dwell > 0.0) {
    dwell_left_ = policy_.dwell - dt_;
    return {};
  }
  const Vec2 to_target = wps[target_] - frame.true_position;
  // Slow down on approach so the last step does not overshoot the tolerance.
  const double speed = std::min(policy_.speed, to_target.norm() / dt_);
  return world_direction(frame, bearing<double>(to_target), speed);
}

FlcCommand Pilot::random_walk(const TelemetryFrame& frame) {
  if (frame.collision) {
    walk_direction_ = rng_.uniform(-std::numbers::pi, std::numbers::pi);
  } else if (policy_.turn_noise > 0.0) {
    walk_direction_ = wrap_angle(walk_direction_ + rng_.normal(0.0, policy_.turn_noise * std::sqrt(dt_)));
  }
  return world_direction(frame, walk_direction_, policy_.speed);
}

}  // namespace doateleop
