#include "doateleop/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json_util.hpp"

namespace doateleop {

using nlohmann::json;
using detail::read_json_file;
using detail::read_opt;
using detail::reject_unknown;
using detail::vec_from;
using detail::vec_to;

namespace {

PropagationParams parse_propagation(const json& j) {
  reject_unknown(j,
                 {"ref_power", "ref_distance", "path_loss_exponent", "shadowing_sigma", "shadowing_corr_length",
                  "fading_sigma", "fading_coherence_time", "frequency", "antenna"},
                 "propagation");
  PropagationParams p;
  read_opt(j, "ref_power", p.ref_power_dbm);
  read_opt(j, "ref_distance", p.ref_distance);
  read_opt(j, "path_loss_exponent", p.path_loss_exponent);
  read_opt(j, "shadowing_sigma", p.shadowing_sigma);
  read_opt(j, "shadowing_corr_length", p.shadowing_corr_length);
  read_opt(j, "fading_sigma", p.fading_sigma);
  read_opt(j, "fading_coherence_time", p.fading_coherence_time);
  read_opt(j, "frequency", p.frequency);
  if (auto it = j.find("antenna"); it != j.end()) {
    reject_unknown(*it, {"enabled", "max_gain", "exponent"}, "propagation.antenna");
    read_opt(*it, "enabled", p.antenna.enabled);
    read_opt(*it, "max_gain", p.antenna.max_gain_db);
    read_opt(*it, "exponent", p.antenna.exponent);
  }
  return p;
}

json propagation_to_json(const PropagationParams& p) {
  return json{{"ref_power", p.ref_power_dbm},
              {"ref_distance", p.ref_distance},
              {"path_loss_exponent", p.path_loss_exponent},
              {"shadowing_sigma", p.shadowing_sigma},
              {"shadowing_corr_length", p.shadowing_corr_length},
              {"fading_sigma", p.fading_sigma},
              {"fading_coherence_time", p.fading_coherence_time},
              {"frequency", p.frequency},
              {"antenna",
               {{"enabled", p.antenna.enabled}, {"max_gain", p.antenna.max_gain_db}, {"exponent", p.antenna.exponent}}}};
}

OdometryConfig parse_odometry(const json& j) {
  reject_unknown(j, {"velocity_scale_sigma", "velocity_noise_sigma", "heading_drift_sigma"}, "odometry");
  OdometryConfig o;
  read_opt(j, "velocity_scale_sigma", o.velocity_scale_sigma);
  read_opt(j, "velocity_noise_sigma", o.velocity_noise_sigma);
  read_opt(j, "heading_drift_sigma", o.heading_drift_sigma);
  for (double v : {o.velocity_scale_sigma, o.velocity_noise_sigma, o.heading_drift_sigma}) {
    if (!(std::isfinite(v) && v >= 0.0)) throw std::invalid_argument("odometry sigmas must be finite and >= 0");
  }
  return o;
}

json odometry_to_json(const OdometryConfig& o) {
  return json{{"velocity_scale_sigma", o.velocity_scale_sigma},
              {"velocity_noise_sigma", o.velocity_noise_sigma},
              {"heading_drift_sigma", o.heading_drift_sigma}};
}

}  // namespace

const char* to_string(InterfaceMode m) { return m == InterfaceMode::Vdoa ? "vdoa" : "bar"; }

InterfaceMode interface_mode_from_string(const std::string& s) {
  if (s == "vdoa" || s == "VDOA") return InterfaceMode::Vdoa;
  if (s == "bar" || s == "BAR") return InterfaceMode::Bar;
  throw std::invalid_argument("interface mode must be 'vdoa' or 'bar', got '" + s + "'");
}

int SessionTiming::ticks_per_sample() const {
  const double ratio = physics_hz / rss_hz;
  const long r = std::lround(ratio);
  if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9) {
    throw std::invalid_argument("physics rate must be an integer multiple of the RSS sampling rate");
  }
  return static_cast<int>(r);
}

MapSpec parse_map(const json& j) {
  reject_unknown(j, {"bounds", "walls", "ap", "propagation", "seed"}, "map");
  MapSpec m;
  const json& b = j.at("bounds");
  reject_unknown(b, {"min", "max"}, "map.bounds");
  m.plan.bounds = Bounds{vec_from(b.at("min"), "bounds.min"), vec_from(b.at("max"), "bounds.max")};
  for (const auto& w : j.value("walls", json::array())) {
    reject_unknown(w, {"a", "b", "attenuation"}, "map.walls[]");
    m.plan.walls.push_back(WallSegment{vec_from(w.at("a"), "wall.a"), vec_from(w.at("b"), "wall.b"),
                                       w.at("attenuation").get<double>()});
  }
  m.ap = vec_from(j.at("ap"), "ap");
  m.propagation = parse_propagation(j.value("propagation", json::object()));
  m.seed = j.value("seed", std::uint64_t{0});
  m.propagation.seed = m.seed;
  // Validates bounds, walls and parameters.
  (void)build_field(m.plan, m.ap, m.propagation);
  return m;
}

json map_to_json(const MapSpec& m) {
  json walls = json::array();
  for (const auto& w : m.plan.walls) {
    walls.push_back(json{{"a", vec_to(w.a)}, {"b", vec_to(w.b)}, {"attenuation", w.attenuation_db}});
  }
  return json{{"bounds", {{"min", vec_to(m.plan.bounds.min)}, {"max", vec_to(m.plan.bounds.max)}}},
              {"walls", walls},
              {"ap", vec_to(m.ap)},
              {"propagation", propagation_to_json(m.propagation)},
              {"seed", m.seed}};
}

MapSpec load_map(const std::filesystem::path& path) { return parse_map(read_json_file(path)); }

void Scenario::validate() const {
  if (!(time_limit > 0.0)) throw std::invalid_argument("scenario.time_limit must be > 0");
  if (!(disconnect_hold >= 0.0)) throw std::invalid_argument("scenario.disconnect_hold must be >= 0");
  if (!std::isfinite(disconnect_threshold)) throw std::invalid_argument("scenario.disconnect_threshold non-finite");
  if (!map.plan.bounds.contains(spawn.position)) throw std::invalid_argument("scenario.spawn outside map bounds");
  if (!(coverage_cell > 0.0)) throw std::invalid_argument("scenario.coverage_cell must be > 0");
  if (!(detection.range > 0.0 && detection.field_of_view > 0.0)) {
    throw std::invalid_argument("scenario.detection must have positive range and field of view");
  }
  if (!(timing.physics_hz > 0.0 && timing.rss_hz > 0.0 && timing.telemetry_hz > 0.0)) {
    throw std::invalid_argument("scenario.timing rates must be > 0");
  }
  if (timing.dt() > limits.max_dt) throw std::invalid_argument("scenario.timing physics step exceeds max dt");
  (void)timing.ticks_per_sample();
  estimation.validate();
  antennas.validate();
  evaluation.validate();
  // Symbols sit on a wall: within 5 cm of at least one segment.
  for (const auto& s : symbols) {
    bool on_wall = false;
    for (const auto& w : map.plan.walls) {
      if (point_segment_distance<double>(s.position, w.a, w.b) <= 0.05) on_wall = true;
    }
    if (!on_wall) throw std::invalid_argument("symbol " + std::to_string(s.id) + " is not on a wall");
    if (std::abs(s.normal.norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("symbol " + std::to_string(s.id) + " normal must be a unit vector");
    }
  }
}

Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j,
                 {"format_version", "name", "map", "map_file", "spawn", "symbols", "time_limit",
                  "disconnect_threshold", "disconnect_hold", "interface_mode", "estimation", "vehicle", "antennas",
                  "odometry", "timing", "evaluation", "detection", "coverage_cell"},
                 "scenario");
  const int version = j.value("format_version", kScenarioFormatVersion);
  if (version != kScenarioFormatVersion) {
    throw std::invalid_argument("unsupported scenario format_version " + std::to_string(version));
  }
  Scenario s;
  s.name = j.value("name", std::string("scenario"));
  if (j.contains("map") == j.contains("map_file")) {
    throw std::invalid_argument("scenario: exactly one of 'map' or 'map_file' is required");
  }
  if (j.contains("map")) {
    s.map = parse_map(j.at("map"));
  } else {
    s.map = load_map(base_dir / j.at("map_file").get<std::string>());
  }

  const json& spawn = j.at("spawn");
  reject_unknown(spawn, {"position", "heading", "camera_yaw"}, "scenario.spawn");
  s.spawn.position = vec_from(spawn.at("position"), "spawn.position");
  s.spawn.heading = wrap_angle(spawn.value("heading", 0.0));
  s.spawn.camera_yaw = wrap_angle(spawn.value("camera_yaw", 0.0));

  for (const auto& sj : j.value("symbols", json::array())) {
    reject_unknown(sj, {"id", "position", "normal", "area"}, "scenario.symbols[]");
    Symbol sym;
    sym.id = sj.at("id").get<int>();
    sym.position = vec_from(sj.at("position"), "symbol.position");
    sym.normal = vec_from(sj.at("normal"), "symbol.normal");
    read_opt(sj, "area", sym.area);
    s.symbols.push_back(sym);
  }
  read_opt(j, "time_limit", s.time_limit);
  read_opt(j, "disconnect_threshold", s.disconnect_threshold);
  read_opt(j, "disconnect_hold", s.disconnect_hold);
  if (auto it = j.find("interface_mode"); it != j.end()) {
    s.interface_mode = interface_mode_from_string(it->get<std::string>());
  }
  if (auto it = j.find("estimation"); it != j.end()) {
    reject_unknown(*it, {"alpha", "n_max", "v_min", "epsilon", "g_sat", "K", "resize_hysteresis"},
                   "scenario.estimation");
    read_opt(*it, "alpha", s.estimation.alpha);
    read_opt(*it, "n_max", s.estimation.n_max);
    read_opt(*it, "v_min", s.estimation.v_min);
    read_opt(*it, "epsilon", s.estimation.epsilon);
    read_opt(*it, "g_sat", s.estimation.g_sat);
    read_opt(*it, "K", s.estimation.segments);
    read_opt(*it, "resize_hysteresis", s.estimation.resize_hysteresis);
  }
  if (auto it = j.find("vehicle"); it != j.end()) {
    reject_unknown(*it, {"max_speed", "max_camera_rate", "heading_slew_rate", "body_radius"}, "scenario.vehicle");
    read_opt(*it, "max_speed", s.limits.max_speed);
    read_opt(*it, "max_camera_rate", s.limits.max_camera_rate);
    read_opt(*it, "heading_slew_rate", s.limits.heading_slew_rate);
    read_opt(*it, "body_radius", s.limits.body_radius);
  }
  if (auto it = j.find("antennas"); it != j.end()) {
    reject_unknown(*it, {"delta_sx", "delta_sy"}, "scenario.antennas");
    read_opt(*it, "delta_sx", s.antennas.delta_sx);
    read_opt(*it, "delta_sy", s.antennas.delta_sy);
  }
  if (auto it = j.find("odometry"); it != j.end()) {
    s.odometry = parse_odometry(*it);
  }
  if (auto it = j.find("timing"); it != j.end()) {
    reject_unknown(*it, {"physics_hz", "rss_hz", "telemetry_hz"}, "scenario.timing");
    read_opt(*it, "physics_hz", s.timing.physics_hz);
    read_opt(*it, "rss_hz", s.timing.rss_hz);
    read_opt(*it, "telemetry_hz", s.timing.telemetry_hz);
  }
  if (auto it = j.find("evaluation"); it != j.end()) {
    reject_unknown(*it, {"tau"}, "scenario.evaluation");
    read_opt(*it, "tau", s.evaluation.tau);
  }
  s.evaluation.sample_interval = 1.0 / s.timing.rss_hz;
  if (auto it = j.find("detection"); it != j.end()) {
    reject_unknown(*it, {"range", "field_of_view_deg"}, "scenario.detection");
    read_opt(*it, "range", s.detection.range);
    if (auto fov = it->find("field_of_view_deg"); fov != it->end()) {
      s.detection.field_of_view = fov->get<double>() * std::numbers::pi / 180.0;
    }
  }
  read_opt(j, "coverage_cell", s.coverage_cell);
  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json symbols = json::array();
  for (const auto& sym : s.symbols) {
    symbols.push_back(
        json{{"id", sym.id}, {"position", vec_to(sym.position)}, {"normal", vec_to(sym.normal)}, {"area", sym.area}});
  }
  return json{
      {"format_version", kScenarioFormatVersion},
      {"name", s.name},
      {"map", map_to_json(s.map)},
      {"spawn",
       {{"position", vec_to(s.spawn.position)}, {"heading", s.spawn.heading}, {"camera_yaw", s.spawn.camera_yaw}}},
      {"symbols", symbols},
      {"time_limit", s.time_limit},
      {"disconnect_threshold", s.disconnect_threshold},
      {"disconnect_hold", s.disconnect_hold},
      {"interface_mode", to_string(s.interface_mode)},
      {"estimation",
       {{"alpha", s.estimation.alpha},
        {"n_max", s.estimation.n_max},
        {"v_min", s.estimation.v_min},
        {"epsilon", s.estimation.epsilon},
        {"g_sat", s.estimation.g_sat},
        {"K", s.estimation.segments},
        {"resize_hysteresis", s.estimation.resize_hysteresis}}},
      {"vehicle",
       {{"max_speed", s.limits.max_speed},
        {"max_camera_rate", s.limits.max_camera_rate},
        {"heading_slew_rate", s.limits.heading_slew_rate},
        {"body_radius", s.limits.body_radius}}},
      {"antennas", {{"delta_sx", s.antennas.delta_sx}, {"delta_sy", s.antennas.delta_sy}}},
      {"odometry", odometry_to_json(s.odometry)},
      {"timing",
       {{"physics_hz", s.timing.physics_hz}, {"rss_hz", s.timing.rss_hz}, {"telemetry_hz", s.timing.telemetry_hz}}},
      {"evaluation", {{"tau", s.evaluation.tau}}},
      {"detection",
       {{"range", s.detection.range}, {"field_of_view_deg", s.detection.field_of_view * 180.0 / std::numbers::pi}}},
      {"coverage_cell", s.coverage_cell}};
}

std::string Scenario::canonical_json() const { return scenario_to_json(*this).dump(); }

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_json_file(path), path.parent_path());
}

json public_map_json(const Scenario& s) {
  json walls = json::array();
  for (const auto& w : s.map.plan.walls) {
    walls.push_back(json{{"a", vec_to(w.a)}, {"b", vec_to(w.b)}});
  }
  json symbols = json::array();
  for (const auto& sym : s.symbols) {
    symbols.push_back(
        json{{"id", sym.id}, {"position", vec_to(sym.position)}, {"normal", vec_to(sym.normal)}, {"area", sym.area}});
  }
  return json{{"name", s.name},
              {"bounds", {{"min", vec_to(s.map.plan.bounds.min)}, {"max", vec_to(s.map.plan.bounds.max)}}},
              {"walls", walls},
              {"symbols", symbols}};
}

Scenario apply_noise_profile(Scenario s, const std::string& profile) {
  if (profile.empty() || profile == "default") {
    return s;
  }
  if (profile == "off") {
    s.map.propagation.shadowing_sigma = 0.0;
    s.map.propagation.fading_sigma = 0.0;
    s.odometry = OdometryConfig{};
    return s;
  }
  const json j = read_json_file(profile);
  reject_unknown(j, {"propagation", "odometry"}, "noise profile");
  if (auto it = j.find("propagation"); it != j.end()) {
    json merged = propagation_to_json(s.map.propagation);
    for (const auto& [k, v] : it->items()) {
      if (!merged.contains(k)) throw std::invalid_argument("noise profile: unknown propagation key '" + k + "'");
      merged[k] = v;
    }
    const auto seed = s.map.propagation.seed;
    s.map.propagation = parse_propagation(merged);
    s.map.propagation.seed = seed;
  }
  if (auto it = j.find("odometry"); it != j.end()) {
    json merged = odometry_to_json(s.odometry);
    for (const auto& [k, v] : it->items()) {
      if (!merged.contains(k)) throw std::invalid_argument("noise profile: unknown odometry key '" + k + "'");
      merged[k] = v;
    }
    s.odometry = parse_odometry(merged);
  }
  (void)build_field(s.map.plan, s.map.ap, s.map.propagation);
  return s;
}

}  // namespace doateleop
