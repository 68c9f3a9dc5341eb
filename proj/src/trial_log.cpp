#include "doateleop/trial_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace doateleop {

using nlohmann::json;

const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Running:
      return "RUNNING";
    case SessionStatus::Timeout:
      return "TIMEOUT";
    case SessionStatus::SignalLost:
      return "SIGNAL_LOST";
  }
  return "RUNNING";
}

SessionStatus session_status_from_string(const std::string& s) {
  if (s == "RUNNING") return SessionStatus::Running;
  if (s == "TIMEOUT") return SessionStatus::Timeout;
  if (s == "SIGNAL_LOST") return SessionStatus::SignalLost;
  throw std::invalid_argument("unknown session status '" + s + "'");
}

bool LogRecord::operator==(const LogRecord& o) const {
  return tick == o.tick && t == o.t && true_position == o.true_position && true_heading == o.true_heading &&
         camera_yaw == o.camera_yaw && odometry.position == o.odometry.position &&
         odometry.heading == o.odometry.heading && odometry.body_velocity == o.odometry.body_velocity &&
         command == o.command && collision == o.collision && status == o.status && sample == o.sample &&
         events == o.events;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

template <std::size_t N>
std::array<double, N> array_from(const json& j) {
  if (!j.is_array() || j.size() != N) {
    throw std::invalid_argument("expected array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j.at(i).get<double>();
  return out;
}

json header_to_json(const LogHeader& h) {
  return json{{"kind", "header"},       {"format_version", h.format_version}, {"scenario", h.scenario_name},
              {"scenario_hash", h.scenario_hash}, {"seed", h.seed},          {"config", h.config},
              {"scenario_json", h.scenario_json}};
}

LogHeader header_from_json(const json& j) {
  if (j.at("kind").get<std::string>() != "header") {
    throw std::invalid_argument("first line is not a log header");
  }
  LogHeader h;
  h.format_version = j.at("format_version").get<int>();
  h.scenario_name = j.at("scenario").get<std::string>();
  h.scenario_hash = j.at("scenario_hash").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.config = j.at("config");
  h.scenario_json = j.at("scenario_json").get<std::string>();
  return h;
}

}  // namespace

json record_to_json(const LogRecord& r) {
  json j{{"kind", "tick"},
         {"n", r.tick},
         {"t", r.t},
         {"pose", {r.true_position.x(), r.true_position.y(), r.true_heading}},
         {"cam", r.camera_yaw},
         {"odom",
          {r.odometry.position.x(), r.odometry.position.y(), r.odometry.heading, r.odometry.body_velocity.x(),
           r.odometry.body_velocity.y()}},
         {"cmd", {r.command.v_forward, r.command.v_lateral, r.command.camera_yaw_rate}},
         {"col", r.collision},
         {"status", to_string(r.status)},
         {"events", r.events}};
  if (r.sample) {
    const auto& s = *r.sample;
    j["rss"] = json{{"raw", s.raw},
                    {"ewma", s.ewma},
                    {"filt", s.filtered},
                    {"g", {s.gradient.x(), s.gradient.y()}},
                    {"doa", optional_number(s.doa_body)},
                    {"doa_cam", optional_number(s.doa_camera)},
                    {"mag", s.doa_magnitude},
                    {"N", s.maf_window},
                    {"bar", s.bar},
                    {"bright", s.brightness},
                    {"truth", s.truth_doa},
                    {"los", s.los}};
  }
  return j;
}

LogRecord record_from_json(const json& j) {
  if (j.at("kind").get<std::string>() != "tick") {
    throw std::invalid_argument("record is not a tick");
  }
  LogRecord r;
  r.tick = j.at("n").get<std::int64_t>();
  r.t = j.at("t").get<double>();
  const auto pose = array_from<3>(j.at("pose"));
  r.true_position = Vec2(pose[0], pose[1]);
  r.true_heading = pose[2];
  r.camera_yaw = j.at("cam").get<double>();
  const auto odom = array_from<5>(j.at("odom"));
  r.odometry.position = Vec2(odom[0], odom[1]);
  r.odometry.heading = odom[2];
  r.odometry.body_velocity = Vec2(odom[3], odom[4]);
  const auto cmd = array_from<3>(j.at("cmd"));
  r.command = FlcCommand{cmd[0], cmd[1], cmd[2]};
  r.collision = j.at("col").get<bool>();
  r.status = session_status_from_string(j.at("status").get<std::string>());
  r.events = j.at("events").get<std::vector<std::string>>();
  if (auto it = j.find("rss"); it != j.end()) {
    const json& s = *it;
    SampleRecord sr;
    sr.raw = array_from<kReceiverCount>(s.at("raw"));
    sr.ewma = array_from<kReceiverCount>(s.at("ewma"));
    sr.filtered = array_from<kReceiverCount>(s.at("filt"));
    const auto g = array_from<2>(s.at("g"));
    sr.gradient = Vec2(g[0], g[1]);
    sr.doa_body = optional_from(s.at("doa"));
    sr.doa_camera = optional_from(s.at("doa_cam"));
    sr.doa_magnitude = s.at("mag").get<double>();
    sr.maf_window = s.at("N").get<int>();
    sr.bar = s.at("bar").get<std::vector<double>>();
    sr.brightness = s.at("bright").get<double>();
    sr.truth_doa = s.at("truth").get<double>();
    sr.los = s.at("los").get<bool>();
    r.sample = std::move(sr);
  }
  return r;
}

std::string serialize_log(const TrialLog& log) {
  std::string out = header_to_json(log.header).dump();
  out.push_back('\n');
  for (const auto& r : log.records) {
    out += record_to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

TrialLog parse_log(const std::string& text) {
  TrialLog log;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw LogError("log is empty or missing its header", -1);
  }
  try {
    log.header = header_from_json(json::parse(line));
  } catch (const LogError&) {
    throw;
  } catch (const std::exception& e) {
    throw LogError(std::string("malformed log header: ") + e.what(), -1);
  }
  if (log.header.format_version != kLogFormatVersion) {
    throw LogError("unsupported log format_version " + std::to_string(log.header.format_version), -1);
  }
  if (fnv1a_hex(log.header.scenario_json) != log.header.scenario_hash) {
    throw LogError("scenario hash mismatch in log header", -1);
  }

  std::int64_t index = 0;
  while (std::getline(in, line)) {
    const std::int64_t last_valid = index - 1;
    if (line.empty()) {
      throw LogError("empty line after record " + std::to_string(last_valid), last_valid);
    }
    LogRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const std::exception& e) {
      throw LogError("malformed record " + std::to_string(index) + " (last valid record " +
                         std::to_string(last_valid) + "): " + e.what(),
                     last_valid);
    }
    if (!log.records.empty() && !(r.t > log.records.back().t)) {
      throw LogError("non-monotone timestamp at record " + std::to_string(index) + " (last valid record " +
                         std::to_string(last_valid) + ")",
                     last_valid);
    }
    log.records.push_back(std::move(r));
    ++index;
  }
  if (!text.empty() && text.back() != '\n') {
    // The final line was cut before its terminator.
    const std::int64_t last_valid = static_cast<std::int64_t>(log.records.size()) - 2;
    throw LogError("truncated log: final record " + std::to_string(last_valid + 1) +
                       " is unterminated (last valid record " + std::to_string(last_valid) + ")",
                   last_valid);
  }
  return log;
}

void write_log(const std::filesystem::path& path, const TrialLog& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open log for writing: " + path.string());
  }
  out << serialize_log(log);
  if (!out) {
    throw std::runtime_error("failed writing log: " + path.string());
  }
}

TrialLog read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LogError("cannot open log: " + path.string(), -1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_log(ss.str());
}

}  // namespace doateleop
