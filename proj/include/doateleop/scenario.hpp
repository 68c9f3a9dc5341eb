#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "doateleop/estimation.hpp"
#include "doateleop/evaluation.hpp"
#include "doateleop/radio_field.hpp"
#include "doateleop/vehicle.hpp"

namespace doateleop {

inline constexpr int kScenarioFormatVersion = 1;

/// Contents of a map file: geometry, access point and propagation model.
struct MapSpec {
  FloorPlan plan;
  Vec2 ap{0.0, 0.0};
  PropagationParams propagation;
  std::uint64_t seed = 0;
};

struct Symbol {
  int id = 0;
  Vec2 position{0.0, 0.0};
  Vec2 normal{0.0, 1.0};  // unit, pointing away from the wall into the visible side
  double area = 0.004;    // m^2
};

enum class InterfaceMode { Vdoa, Bar };

const char* to_string(InterfaceMode m);
InterfaceMode interface_mode_from_string(const std::string& s);

struct DetectionConfig {
  double range = 1.5;                         // m
  double field_of_view = std::numbers::pi / 2;  // rad, full angle
};

struct SessionTiming {
  double physics_hz = 20.0;
  double rss_hz = 5.0;
  double telemetry_hz = 10.0;

  double dt() const { return 1.0 / physics_hz; }
  int ticks_per_sample() const;
};

struct Scenario {
  std::string name;
  MapSpec map;
  VehicleState spawn;
  std::vector<Symbol> symbols;
  double time_limit = 180.0;
  double disconnect_threshold = -85.0;
  double disconnect_hold = 2.0;
  InterfaceMode interface_mode = InterfaceMode::Vdoa;
  EstimationConfig estimation;
  VehicleLimits limits;
  AntennaArray antennas;
  OdometryConfig odometry;
  SessionTiming timing;
  EvalConfig evaluation;
  DetectionConfig detection;
  double coverage_cell = 0.15;

  void validate() const;
  /// Canonical JSON bytes of the scenario with the map embedded; hashed into logs.
  std::string canonical_json() const;
};

/// Strict parsers: unknown keys are rejected with std::invalid_argument.
MapSpec parse_map(const nlohmann::json& j);
nlohmann::json map_to_json(const MapSpec& m);
MapSpec load_map(const std::filesystem::path& path);

/// `base_dir` resolves a relative "map_file" reference.
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// Geometry the operator may see: bounds, walls and symbols, never the access point.
nlohmann::json public_map_json(const Scenario& s);

/// "off" disables shadowing, fading and odometry noise; "default" keeps the
/// scenario; anything else is read as a JSON file of propagation/odometry overrides.
Scenario apply_noise_profile(Scenario s, const std::string& profile);

}  // namespace doateleop
