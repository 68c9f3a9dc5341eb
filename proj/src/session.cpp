#include "doateleop/session.hpp"

#include <cmath>

#include "doateleop/random.hpp"

namespace doateleop {

namespace {
constexpr std::uint64_t kOdometrySalt = 0x0d0e7e4000000003ULL;
}

std::uint64_t session_field_seed(std::uint64_t map_seed, std::uint64_t run_seed) {
  return hash_combine(map_seed, run_seed);
}

FieldModel build_session_field(const Scenario& scenario, std::uint64_t seed) {
  PropagationParams params = scenario.map.propagation;
  params.seed = session_field_seed(scenario.map.seed, seed);
  return build_field(scenario.map.plan, scenario.map.ap, params);
}

std::set<int> detect_symbols(const VehicleState& state, const Scenario& scenario) {
  std::set<int> found;
  const double cam = state.camera_direction();
  for (const auto& sym : scenario.symbols) {
    const Vec2 to_symbol = sym.position - state.position;
    const double distance = to_symbol.norm();
    if (distance > scenario.detection.range || distance == 0.0) continue;
    if (std::abs(wrap_angle(bearing(to_symbol) - cam)) > scenario.detection.field_of_view / 2.0) continue;
    if (sym.normal.dot(-to_symbol) <= 0.0) continue;
    // Stop just short of the host wall so it does not count as an obstruction.
    const Vec2 target = sym.position + 0.01 * sym.normal;
    if (!scenario.map.plan.line_of_sight(state.position, target)) continue;
    found.insert(sym.id);
  }
  return found;
}

Session::Session(Scenario scenario, std::uint64_t seed, nlohmann::json extra_config)
    : scenario_(std::move(scenario)),
      field_(build_session_field(scenario_, seed)),
      dt_(scenario_.timing.dt()),
      ticks_per_sample_(scenario_.timing.ticks_per_sample()),
      time_limit_ticks_(static_cast<std::int64_t>(std::ceil(scenario_.time_limit * scenario_.timing.physics_hz - 1e-9))),
      pipeline_(scenario_.estimation, scenario_.antennas, scenario_.timing.rss_hz,
                scenario_.map.propagation.wavelength()),
      odometer_(scenario_.spawn, scenario_.odometry, hash_combine(seed, kOdometrySalt)),
      coverage_(scenario_.map.plan.bounds, scenario_.coverage_cell) {
  scenario_.validate();
  state_.vehicle = scenario_.spawn;
  state_.vehicle.velocity = Vec2::Zero();
  state_.vehicle.time = 0.0;

  frame_.odometry = odometer_.last();
  frame_.camera_yaw = state_.vehicle.camera_yaw;
  frame_.true_position = state_.vehicle.position;
  frame_.true_heading = state_.vehicle.heading;
  frame_.time_remaining = scenario_.time_limit;
  const double rc0 = rss_at(field_, state_.vehicle.position, 0.0);
  frame_.raw.fill(rc0);
  frame_.filtered.fill(rc0);
  frame_.rc_ewma = rc0;
  frame_.rss_percent = rss_to_percent(rc0);
  frame_.bars = signal_bars(frame_.rss_percent);
  frame_.bar.segments.assign(static_cast<std::size_t>(scenario_.estimation.segments), 0.0);

  const std::string canonical = scenario_.canonical_json();
  log_.header.scenario_name = scenario_.name;
  log_.header.scenario_json = canonical;
  log_.header.scenario_hash = fnv1a_hex(canonical);
  log_.header.seed = seed;
  const auto& b = scenario_.map.plan.bounds;
  nlohmann::json config{{"tau", scenario_.evaluation.tau},
                        {"rss_interval", 1.0 / scenario_.timing.rss_hz},
                        {"physics_hz", scenario_.timing.physics_hz},
                        {"bounds", {b.min.x(), b.min.y(), b.max.x(), b.max.y()}},
                        {"coverage_cell", scenario_.coverage_cell},
                        {"spawn", {scenario_.spawn.position.x(), scenario_.spawn.position.y(), scenario_.spawn.heading}},
                        {"interface_mode", to_string(scenario_.interface_mode)}};
  if (extra_config.is_object()) {
    for (const auto& [k, v] : extra_config.items()) config[k] = v;
  }
  log_.header.config = std::move(config);
}

const TelemetryFrame& Session::tick(const ControlInput& input) {
  if (state_.status != SessionStatus::Running) {
    return frame_;
  }
  const FlcCommand cmd = clamp_command(input.command, scenario_.limits);
  const bool was_colliding = state_.vehicle.collided;
  state_.vehicle = step(state_.vehicle, cmd, dt_, scenario_.limits, scenario_.map.plan);
  ++state_.tick;
  state_.elapsed = static_cast<double>(state_.tick) / scenario_.timing.physics_hz;
  state_.vehicle.time = state_.elapsed;
  const VehicleState& v = state_.vehicle;
  const OdometryReading odo = odometer_.read(v, dt_);

  LogRecord rec;
  rec.tick = state_.tick;
  rec.t = state_.elapsed;
  rec.true_position = v.position;
  rec.true_heading = v.heading;
  rec.camera_yaw = v.camera_yaw;
  rec.odometry = odo;
  rec.command = cmd;
  rec.collision = v.collided;

  frame_.events.clear();
  frame_.sampled = false;
  if (v.collided && !was_colliding) {
    ++state_.collision_count;
    rec.events.emplace_back("collision");
  }

  if (state_.tick % ticks_per_sample_ == 0) {
    const auto positions = antenna_positions(v, scenario_.antennas);
    const auto boresights = scenario_.antennas.boresights(v.heading);
    std::array<double, kReceiverCount> raw{};
    for (int i = 0; i < kReceiverCount; ++i) {
      raw[i] = rss_at_receiver(field_, positions[i], boresights[i], state_.elapsed);
    }
    const PipelineOutput out = pipeline_.update(raw, odo.body_velocity.norm(), state_.elapsed);
    const auto doa_cam =
        out.doa_body ? std::optional<DoaEstimate>(to_camera_frame(*out.doa_body, v.camera_yaw)) : std::nullopt;

    frame_.sampled = true;
    frame_.raw = raw;
    frame_.filtered = out.filtered.to_array();
    frame_.rc_ewma = out.ewma[4];
    frame_.rss_percent = rss_to_percent(out.ewma[4]);
    frame_.bars = signal_bars(frame_.rss_percent);
    frame_.bar = color_bar(doa_cam, out.filtered, scenario_.estimation.segments, scenario_.estimation.g_sat);
    frame_.gradient = out.gradient;
    frame_.doa_body = out.doa_body;
    frame_.doa_camera = doa_cam;

    SampleRecord s;
    s.raw = raw;
    s.ewma = out.ewma;
    s.filtered = out.filtered.to_array();
    s.gradient = out.gradient.g;
    if (out.doa_body) {
      s.doa_body = out.doa_body->theta;
      s.doa_camera = doa_cam->theta;
      s.doa_magnitude = out.doa_body->magnitude;
    }
    s.maf_window = out.window;
    s.bar = frame_.bar.segments;
    s.brightness = frame_.bar.brightness;
    s.truth_doa = wrap_angle(bearing<double>(scenario_.map.ap - v.position) - v.heading);
    s.los = scenario_.map.plan.line_of_sight(scenario_.map.ap, v.position);
    rec.sample = std::move(s);

    coverage_.update(v.position);

    if (out.ewma[4] < scenario_.disconnect_threshold) {
      if (!state_.below_threshold_since) state_.below_threshold_since = state_.elapsed;
      if (state_.elapsed - *state_.below_threshold_since >= scenario_.disconnect_hold - 1e-9) {
        state_.status = SessionStatus::SignalLost;
      }
    } else {
      state_.below_threshold_since.reset();
    }
  }

  if (input.mark_found) {
    rec.events.push_back("mark_found:" + std::to_string(*input.mark_found));
  }
  for (int id : detect_symbols(v, scenario_)) {
    if (state_.symbols_found.insert(id).second) {
      rec.events.push_back("symbol:" + std::to_string(id));
    }
  }

  if (state_.status == SessionStatus::Running && state_.tick >= time_limit_ticks_) {
    state_.status = SessionStatus::Timeout;
  }
  if (state_.status == SessionStatus::SignalLost) {
    rec.events.emplace_back("signal_lost");
  } else if (state_.status == SessionStatus::Timeout) {
    rec.events.emplace_back("timeout");
  }
  rec.status = state_.status;

  frame_.tick = state_.tick;
  frame_.t = state_.elapsed;
  frame_.status = state_.status;
  frame_.odometry = odo;
  frame_.camera_yaw = v.camera_yaw;
  frame_.true_position = v.position;
  frame_.true_heading = v.heading;
  frame_.command = cmd;
  frame_.collision = v.collided;
  frame_.symbols_found.assign(state_.symbols_found.begin(), state_.symbols_found.end());
  frame_.time_remaining = std::max(0.0, scenario_.time_limit - state_.elapsed);
  frame_.events = rec.events;

  log_.records.push_back(std::move(rec));
  return frame_;
}

}  // namespace doateleop
