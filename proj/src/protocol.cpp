#include "doateleop/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doateleop {

using nlohmann::json;

json telemetry_json(const TelemetryFrame& f, InterfaceMode mode, bool debug) {
  json j{{"type", "telemetry"},
         {"tick", f.tick},
         {"t", f.t},
         {"status", to_string(f.status)},
         {"odometry", {{"x", f.odometry.position.x()}, {"y", f.odometry.position.y()}, {"heading", f.odometry.heading}}},
         {"camera_yaw", f.camera_yaw},
         {"rss_percent", f.rss_percent},
         {"bars", f.bars},
         {"symbols_found", f.symbols_found},
         {"time_remaining", f.time_remaining},
         {"collision", f.collision},
         {"command",
          {{"v_forward", f.command.v_forward},
           {"v_lateral", f.command.v_lateral},
           {"camera_yaw_rate", f.command.camera_yaw_rate}}},
         {"events", f.events}};
  if (mode == InterfaceMode::Vdoa) {
    j["bar"] = {{"segments", f.bar.segments}, {"brightness", f.bar.brightness}};
  }
  if (debug) {
    json d{{"true_pose", {{"x", f.true_position.x()}, {"y", f.true_position.y()}, {"heading", f.true_heading}}},
           {"raw_rss", f.raw},
           {"filtered_rss", f.filtered},
           {"rc_ewma", f.rc_ewma},
           {"gradient", {f.gradient.g.x(), f.gradient.g.y()}}};
    d["doa_body"] = f.doa_body ? json(f.doa_body->theta) : json(nullptr);
    d["doa_camera"] = f.doa_camera ? json(f.doa_camera->theta) : json(nullptr);
    d["doa_magnitude"] = f.doa_body ? json(f.doa_body->magnitude) : json(nullptr);
    j["debug"] = std::move(d);
  }
  return j;
}

json error_json(const std::string& code, const std::string& message) {
  return json{{"type", "error"}, {"code", code}, {"message", message}};
}

ControlInput parse_control(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("control message must be an object");
  auto number = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return 0.0;
    if (!it->is_number()) throw std::invalid_argument(std::string("control.") + key + " must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("control.") + key + " must be finite");
    return v;
  };
  ControlInput in;
  in.command.v_forward = number("v_forward");
  in.command.v_lateral = number("v_lateral");
  in.command.camera_yaw_rate = number("camera_yaw_rate");
  if (auto it = j.find("mark_found"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw std::invalid_argument("control.mark_found must be an integer symbol id");
    in.mark_found = it->get<int>();
  }
  if (auto it = j.find("timestamp"); it != j.end() && !it->is_null() && !it->is_number()) {
    throw std::invalid_argument("control.timestamp must be a number");
  }
  return in;
}

void apply_record(TelemetryFrame& f, const LogRecord& r, double time_limit) {
  f.tick = r.tick;
  f.t = r.t;
  f.status = r.status;
  f.odometry = r.odometry;
  f.camera_yaw = r.camera_yaw;
  f.true_position = r.true_position;
  f.true_heading = r.true_heading;
  f.command = r.command;
  f.collision = r.collision;
  f.events = r.events;
  f.time_remaining = std::max(0.0, time_limit - r.t);
  for (const auto& e : r.events) {
    if (e.rfind("symbol:", 0) == 0) {
      const int id = std::stoi(e.substr(7));
      if (std::find(f.symbols_found.begin(), f.symbols_found.end(), id) == f.symbols_found.end()) {
        f.symbols_found.insert(std::upper_bound(f.symbols_found.begin(), f.symbols_found.end(), id), id);
      }
    }
  }
  f.sampled = r.sample.has_value();
  if (!r.sample) return;
  const SampleRecord& s = *r.sample;
  f.raw = s.raw;
  f.filtered = s.filtered;
  f.rc_ewma = s.ewma[4];
  f.rss_percent = rss_to_percent(s.ewma[4]);
  f.bars = signal_bars(f.rss_percent);
  f.bar.segments = s.bar;
  f.bar.brightness = s.brightness;
  f.gradient.g = s.gradient;
  if (s.doa_body) {
    f.doa_body = DoaEstimate{*s.doa_body, Frame::Body, s.doa_magnitude};
    f.doa_camera = DoaEstimate{*s.doa_camera, Frame::Camera, s.doa_magnitude};
  } else {
    f.doa_body.reset();
    f.doa_camera.reset();
  }
}

}  // namespace doateleop
