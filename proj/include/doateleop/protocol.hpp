#pragma once

#include <string>

#include <json.hpp>

#include "doateleop/scenario.hpp"
#include "doateleop/session.hpp"
#include "doateleop/trial_log.hpp"

namespace doateleop {

/// Server-to-client telemetry message. Ground truth (true pose, raw and
/// filtered RSS, gradient, DoA) is present only when `debug` is set. BAR mode
/// omits the color-bar block entirely.
nlohmann::json telemetry_json(const TelemetryFrame& frame, InterfaceMode mode, bool debug);

nlohmann::json error_json(const std::string& code, const std::string& message);

/// Parses a "control" message. Missing velocity fields default to 0.
/// Throws std::invalid_argument on wrong types or non-finite values.
ControlInput parse_control(const nlohmann::json& j);

/// Advances a replay frame by one logged record. Estimation fields carry over
/// from the last sampled record.
void apply_record(TelemetryFrame& frame, const LogRecord& record, double time_limit);

}  // namespace doateleop
