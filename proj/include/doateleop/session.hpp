#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "doateleop/estimation.hpp"
#include "doateleop/evaluation.hpp"
#include "doateleop/radio_field.hpp"
#include "doateleop/scenario.hpp"
#include "doateleop/trial_log.hpp"
#include "doateleop/vehicle.hpp"

namespace doateleop {

/// Symbols visible from `state`: within range, inside the camera field of
/// view, facing the robot, and with an unobstructed line of sight.
std::set<int> detect_symbols(const VehicleState& state, const Scenario& scenario);

struct ControlInput {
  FlcCommand command;
  std::optional<int> mark_found;  // operator-reported symbol id
};

/// Snapshot emitted after every tick. Estimation fields hold the most recent
/// RSS sample between sampling ticks.
struct TelemetryFrame {
  std::int64_t tick = 0;
  double t = 0.0;
  SessionStatus status = SessionStatus::Running;
  OdometryReading odometry;
  double camera_yaw = 0.0;
  Vec2 true_position{0.0, 0.0};
  double true_heading = 0.0;
  FlcCommand command;
  bool collision = false;
  bool sampled = false;
  std::array<double, kReceiverCount> raw{};
  std::array<double, kReceiverCount> filtered{};
  double rc_ewma = 0.0;
  double rss_percent = 0.0;
  int bars = 0;
  ColorBar bar;
  GradientEstimate gradient;
  std::optional<DoaEstimate> doa_body;
  std::optional<DoaEstimate> doa_camera;
  std::vector<int> symbols_found;
  double time_remaining = 0.0;
  std::vector<std::string> events;
};

struct SessionState {
  VehicleState vehicle;
  std::int64_t tick = 0;
  double elapsed = 0.0;
  std::set<int> symbols_found;
  SessionStatus status = SessionStatus::Running;
  std::size_t collision_count = 0;
  std::optional<double> below_threshold_since;
};

/// Rules engine for one trial. Single-threaded; owns the field, filters,
/// odometry and log. (scenario, seed, command stream) determines everything.
class Session {
 public:
  Session(Scenario scenario, std::uint64_t seed, nlohmann::json extra_config = nlohmann::json::object());

  /// Advances one physics step. On a terminated session returns the terminal
  /// frame unchanged and ignores the input.
  const TelemetryFrame& tick(const ControlInput& input);
  const TelemetryFrame& tick(const FlcCommand& cmd) { return tick(ControlInput{cmd, std::nullopt}); }

  const SessionState& state() const { return state_; }
  const TelemetryFrame& last_frame() const { return frame_; }
  const Scenario& scenario() const { return scenario_; }
  const FieldModel& field() const { return field_; }
  const TrialLog& log() const { return log_; }
  const CoverageGrid& coverage() const { return coverage_; }
  bool running() const { return state_.status == SessionStatus::Running; }
  double dt() const { return dt_; }

 private:
  Scenario scenario_;
  FieldModel field_;
  double dt_;
  int ticks_per_sample_;
  std::int64_t time_limit_ticks_;
  RssPipeline pipeline_;
  Odometer odometer_;
  SessionState state_;
  TelemetryFrame frame_;
  CoverageGrid coverage_;
  TrialLog log_;
};

/// Field seed used by a session: the map's seed mixed with the run seed.
std::uint64_t session_field_seed(std::uint64_t map_seed, std::uint64_t run_seed);

FieldModel build_session_field(const Scenario& scenario, std::uint64_t seed);

}  // namespace doateleop
