#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "doateleop/geometry.hpp"
#include "doateleop/vehicle.hpp"

namespace doateleop {

inline constexpr int kLogFormatVersion = 1;

enum class SessionStatus { Running, Timeout, SignalLost };

const char* to_string(SessionStatus s);
SessionStatus session_status_from_string(const std::string& s);

/// Values produced on RSS sampling ticks.
struct SampleRecord {
  std::array<double, kReceiverCount> raw{};
  std::array<double, kReceiverCount> ewma{};
  std::array<double, kReceiverCount> filtered{};
  Vec2 gradient{0.0, 0.0};
  std::optional<double> doa_body;
  std::optional<double> doa_camera;
  double doa_magnitude = 0.0;
  int maf_window = 1;
  std::vector<double> bar;
  double brightness = 0.0;
  double truth_doa = 0.0;  // body-frame bearing of the access point
  bool los = true;

  bool operator==(const SampleRecord&) const = default;
};

struct LogRecord {
  std::int64_t tick = 0;
  double t = 0.0;
  Vec2 true_position{0.0, 0.0};
  double true_heading = 0.0;
  double camera_yaw = 0.0;
  OdometryReading odometry;
  FlcCommand command;  // as applied, after clamping
  bool collision = false;
  SessionStatus status = SessionStatus::Running;
  std::optional<SampleRecord> sample;
  std::vector<std::string> events;

  bool operator==(const LogRecord& o) const;
};

struct LogHeader {
  int format_version = kLogFormatVersion;
  std::string scenario_name;
  std::string scenario_hash;  // FNV-1a 64 of scenario_json, hex
  std::string scenario_json;  // canonical scenario bytes
  std::uint64_t seed = 0;
  nlohmann::json config;  // run parameters needed for offline evaluation

  bool operator==(const LogHeader&) const = default;
};

struct TrialLog {
  LogHeader header;
  std::vector<LogRecord> records;

  bool operator==(const TrialLog&) const = default;
};

/// Structured failure while reading a log. `last_valid_record` is the index
/// of the last record that parsed and validated, or -1 if none did.
class LogError : public std::runtime_error {
 public:
  LogError(const std::string& what, std::int64_t last_valid_record)
      : std::runtime_error(what), last_valid_record_(last_valid_record) {}
  std::int64_t last_valid_record() const { return last_valid_record_; }

 private:
  std::int64_t last_valid_record_;
};

std::string fnv1a_hex(const std::string& bytes);

/// NDJSON: one header line followed by one line per record.
std::string serialize_log(const TrialLog& log);
TrialLog parse_log(const std::string& text);

void write_log(const std::filesystem::path& path, const TrialLog& log);
TrialLog read_log(const std::filesystem::path& path);

nlohmann::json record_to_json(const LogRecord& r);
LogRecord record_from_json(const nlohmann::json& j);

}  // namespace doateleop
