#include "doateleop/vehicle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace doateleop {

namespace {

struct Obstacle {
  Vec2 a;
  Vec2 b;
};

// Fraction of the motion p0 -> p0 + delta that keeps the disc of radius r
// clear of segment [a, b]; 1 when unobstructed. The distance along the motion
// is convex in t, so a ternary search finds the closest approach and a
// bisection on the approaching side finds first contact.
double free_fraction(const Vec2& p0, const Vec2& delta, const Obstacle& seg, double r) {
  auto clearance = [&](double t) { return point_segment_distance<double>(p0 + t * delta, seg.a, seg.b) - r; };

  const double f0 = clearance(0.0);
  if (f0 <= 0.0) {
    // Already touching: only motion that increases clearance is allowed.
    return clearance(1e-6) >= f0 - 1e-12 ? 1.0 : 0.0;
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (clearance(m1) < clearance(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double t_min = 0.5 * (lo + hi);
  if (clearance(t_min) > 0.0 && clearance(1.0) > 0.0) {
    return 1.0;
  }
  double safe = 0.0;
  double hit = clearance(1.0) <= 0.0 && clearance(t_min) > 0.0 ? 1.0 : t_min;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (safe + hit);
    if (clearance(mid) > 0.0) {
      safe = mid;
    } else {
      hit = mid;
    }
  }
  return safe;
}

}  // namespace

FlcCommand clamp_command(const FlcCommand& cmd, const VehicleLimits& limits) {
  FlcCommand out;
  // NaN reads as zero, infinities saturate.
  auto finite = [](double v) { return std::isnan(v) ? 0.0 : v; };
  out.v_forward = finite(cmd.v_forward);
  out.v_lateral = finite(cmd.v_lateral);
  if (std::isinf(out.v_forward) || std::isinf(out.v_lateral)) {
    out.v_forward = std::isinf(out.v_forward) ? std::copysign(limits.max_speed, out.v_forward) : 0.0;
    out.v_lateral = std::isinf(out.v_lateral) ? std::copysign(limits.max_speed, out.v_lateral) : 0.0;
  }
  out.camera_yaw_rate =
      std::clamp(finite(cmd.camera_yaw_rate), -limits.max_camera_rate, limits.max_camera_rate);
  const double speed = std::hypot(out.v_forward, out.v_lateral);
  if (speed > limits.max_speed) {
    const double s = limits.max_speed / speed;
    out.v_forward *= s;
    out.v_lateral *= s;
  }
  return out;
}

std::array<Vec2, kReceiverCount> AntennaArray::offsets() const {
  const double hx = delta_sx / 2.0;
  const double hy = delta_sy / 2.0;
  return {Vec2(hx, hy), Vec2(-hx, hy), Vec2(hx, -hy), Vec2(-hx, -hy), Vec2(0.0, 0.0)};
}

std::array<double, kReceiverCount> AntennaArray::boresights(double heading) const {
  std::array<double, kReceiverCount> out{};
  const auto off = offsets();
  for (int i = 0; i < 4; ++i) {
    out[i] = wrap_angle(heading + bearing(off[i]));
  }
  out[4] = wrap_angle(heading + std::numbers::pi / 2.0);
  return out;
}

void AntennaArray::validate() const {
  if (!(std::isfinite(delta_sx) && delta_sx > 0.0 && std::isfinite(delta_sy) && delta_sy > 0.0)) {
    throw std::invalid_argument("antenna array separations must be finite and > 0");
  }
}

VehicleState step(const VehicleState& state, const FlcCommand& cmd, double dt, const VehicleLimits& limits,
                  const FloorPlan& plan) {
  if (!(dt > 0.0 && dt <= limits.max_dt)) {
    throw std::invalid_argument("step: dt must be in (0, " + std::to_string(limits.max_dt) + "]");
  }
  const FlcCommand c = clamp_command(cmd, limits);

  VehicleState next = state;
  next.collided = false;

  const Vec2 cam_velocity(c.v_lateral, c.v_forward);
  const Vec2 world_velocity = rotate(cam_velocity, state.heading + state.camera_yaw);
  const Vec2 delta = world_velocity * dt;

  std::vector<Obstacle> obstacles;
  if (delta.squaredNorm() > 0.0) {
    const auto& lo = plan.bounds.min;
    const auto& hi = plan.bounds.max;
    obstacles = {Obstacle{lo, Vec2(hi.x(), lo.y())}, Obstacle{Vec2(hi.x(), lo.y()), hi},
                 Obstacle{hi, Vec2(lo.x(), hi.y())}, Obstacle{Vec2(lo.x(), hi.y()), lo}};
    for (const auto& w : plan.walls) obstacles.push_back(Obstacle{w.a, w.b});
  }
  // Returns the free fraction and the first obstacle hit, if any.
  auto sweep = [&](const Vec2& from, const Vec2& d) {
    double fraction = 1.0;
    const Obstacle* hit = nullptr;
    for (const auto& o : obstacles) {
      const double f = free_fraction(from, d, o, limits.body_radius);
      if (f < fraction) {
        fraction = f;
        hit = &o;
      }
    }
    return std::pair{fraction, hit};
  };

  Vec2 position = state.position;
  if (delta.squaredNorm() > 0.0) {
    const auto [fraction, hit] = sweep(position, delta);
    position += fraction * delta;
    if (hit) {
      next.collided = true;
      // Slide along the contact for the rest of the step.
      const Vec2 away = position - closest_point_on_segment<double>(position, hit->a, hit->b);
      const Vec2 rest = (1.0 - fraction) * delta;
      if (away.norm() > 1e-12) {
        const Vec2 n = away.normalized();
        const Vec2 tangent = rest - std::min(0.0, rest.dot(n)) * n;
        if (tangent.squaredNorm() > 1e-24) {
          position += sweep(position, tangent).first * tangent;
        }
      }
    }
  }
  next.position = position;
  next.velocity = (next.position - state.position) / dt;

  next.camera_yaw = wrap_angle(state.camera_yaw + c.camera_yaw_rate * dt);
  if (delta.squaredNorm() > 0.0) {
    // FLC: the chassis turns toward the camera direction, the camera keeps its world bearing.
    const double max_turn = limits.heading_slew_rate * dt;
    const double turn = std::clamp(next.camera_yaw, -max_turn, max_turn);
    next.heading = wrap_angle(state.heading + turn);
    next.camera_yaw = wrap_angle(next.camera_yaw - turn);
  }
  next.time = state.time + dt;
  return next;
}

std::array<Vec2, kReceiverCount> antenna_positions(const VehicleState& state, const AntennaArray& array) {
  std::array<Vec2, kReceiverCount> out;
  const auto off = array.offsets();
  const Eigen::Matrix2d r = rotation(state.heading);
  for (int i = 0; i < kReceiverCount; ++i) {
    out[i] = state.position + r * off[i];
  }
  return out;
}

Odometer::Odometer(const VehicleState& initial, const OdometryConfig& config, std::uint64_t seed)
    : config_(config), rng_(seed), last_true_heading_(initial.heading) {
  scale_ = 1.0 + config_.velocity_scale_sigma * rng_.normal();
  last_.position = initial.position;
  last_.heading = initial.heading;
  last_.body_velocity = initial.body_velocity();
}

OdometryReading Odometer::read(const VehicleState& state, double dt) {
  const Vec2 true_nu = state.body_velocity();
  double factor = scale_;
  if (config_.velocity_noise_sigma > 0.0) {
    factor *= 1.0 + config_.velocity_noise_sigma * rng_.normal();
  }
  OdometryReading r;
  r.body_velocity = true_nu * factor;

  double dh = wrap_angle(state.heading - last_true_heading_);
  if (config_.heading_drift_sigma > 0.0) {
    dh += config_.heading_drift_sigma * std::sqrt(dt) * rng_.normal();
  }
  last_true_heading_ = state.heading;
  r.heading = wrap_angle(last_.heading + dh);
  if (config_.exact()) {
    r.position = state.position;
    r.heading = state.heading;
  } else {
    r.position = last_.position + rotate(r.body_velocity, r.heading) * dt;
  }
  last_ = r;
  return r;
}

}  // namespace doateleop
