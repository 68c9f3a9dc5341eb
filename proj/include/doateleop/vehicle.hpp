#pragma once

#include <array>
#include <cstdint>

#include "doateleop/geometry.hpp"
#include "doateleop/radio_field.hpp"
#include "doateleop/random.hpp"

namespace doateleop {

// Frames: world is fixed; body x points to the right of the chassis, body y
// points forward, and heading is the counterclockwise rotation taking body
// vectors into the world frame. The camera frame is the body frame rotated by
// camera_yaw.

struct VehicleState {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  double camera_yaw = 0.0;
  Vec2 velocity{0.0, 0.0};  // world frame, m/s
  double time = 0.0;
  bool collided = false;  // set by the most recent step

  /// World angle of the camera's forward axis.
  double camera_direction() const { return wrap_angle(heading + camera_yaw + std::numbers::pi / 2.0); }
  Vec2 body_velocity() const { return rotate(velocity, -heading); }
};

struct VehicleLimits {
  double max_speed = 0.5;        // m/s
  double max_camera_rate = 1.0;  // rad/s
  double heading_slew_rate = 1.5;
  double body_radius = 0.35;
  double max_dt = 0.2;
};

/// Velocities in the camera frame.
struct FlcCommand {
  double v_forward = 0.0;
  double v_lateral = 0.0;
  double camera_yaw_rate = 0.0;

  bool operator==(const FlcCommand&) const = default;
};

FlcCommand clamp_command(const FlcCommand& cmd, const VehicleLimits& limits);

enum class Receiver : int { FR = 0, FL = 1, BR = 2, BL = 3, C = 4 };
inline constexpr int kReceiverCount = 5;

struct AntennaArray {
  double delta_sx = 0.4;
  double delta_sy = 0.5;

  /// Body-frame offsets in (FR, FL, BR, BL, C) order.
  std::array<Vec2, kReceiverCount> offsets() const;
  /// World-frame boresight of each corner antenna, aligned with its placement.
  std::array<double, kReceiverCount> boresights(double heading) const;
  void validate() const;
};

/// Explicit Euler step with FLC semantics. A blocked move stops at contact and
/// slides along the wall for the rest of the step. Throws std::invalid_argument for
/// dt outside (0, limits.max_dt].
VehicleState step(const VehicleState& state, const FlcCommand& cmd, double dt, const VehicleLimits& limits,
                  const FloorPlan& plan);

std::array<Vec2, kReceiverCount> antenna_positions(const VehicleState& state, const AntennaArray& array);

struct OdometryConfig {
  double velocity_scale_sigma = 0.0;  // per-run multiplicative scale error
  double velocity_noise_sigma = 0.0;  // per-step multiplicative white noise
  double heading_drift_sigma = 0.0;   // rad / sqrt(s)

  bool exact() const {
    return velocity_scale_sigma == 0.0 && velocity_noise_sigma == 0.0 && heading_drift_sigma == 0.0;
  }
};

struct OdometryReading {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  Vec2 body_velocity{0.0, 0.0};  // nu, body frame
};

/// Dead-reckoning from wheel velocities. Integrates the measured body-frame
/// velocity each step, so errors accumulate as on real hardware.
class Odometer {
 public:
  Odometer(const VehicleState& initial, const OdometryConfig& config, std::uint64_t seed);

  /// Advances the estimate to `state` (the state reached after a step of dt).
  OdometryReading read(const VehicleState& state, double dt);
  const OdometryReading& last() const { return last_; }

 private:
  OdometryConfig config_;
  Rng rng_;
  double scale_ = 1.0;
  double last_true_heading_ = 0.0;
  OdometryReading last_;
};

}  // namespace doateleop
