// doateleop: headless trials, suites, log evaluation, live and replay servers.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "doateleop/radio_field.hpp"
#include "doateleop/report.hpp"
#include "doateleop/scenario.hpp"
#include "doateleop/server.hpp"
#include "doateleop/session.hpp"
#include "doateleop/trial.hpp"

namespace {

using namespace doateleop;
using nlohmann::json;

enum class Format { Json, Table, Csv };

struct Output {
  std::string path;
  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::cout << text;
      if (!text.empty() && text.back() != '\n') std::cout << '\n';
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
  }
};

std::string default_scenario() { return std::string(DOATELEOP_DATA_DIR) + "/scenarios/default.json"; }
std::string default_suite() { return std::string(DOATELEOP_DATA_DIR) + "/suites/default.json"; }

void add_format(CLI::App* cmd, Format& format) {
  cmd->add_option("--format", format, "Output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"json", Format::Json}, {"table", Format::Table}, {"csv", Format::Csv}},
          CLI::ignore_case))
      ->envname("DOATELEOP_FORMAT");
}

std::string map_probe(const Scenario& scenario, std::uint64_t seed, double resolution, double time, Format format) {
  const FieldModel field = build_session_field(scenario, seed);
  const Bounds& b = scenario.map.plan.bounds;
  const int cols = static_cast<int>(std::floor(b.width() / resolution)) + 1;
  const int rows = static_cast<int>(std::floor(b.height() / resolution)) + 1;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(cols * rows));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      values.push_back(rss_at(field, b.min + Vec2(c * resolution, r * resolution), time));
    }
  }
  std::ostringstream os;
  switch (format) {
    case Format::Json:
      os << json{{"scenario", scenario.name}, {"seed", seed},   {"time", time},    {"origin", {b.min.x(), b.min.y()}},
                 {"resolution", resolution},  {"columns", cols}, {"rows", rows},   {"rss", values}}
                .dump();
      break;
    case Format::Csv:
      os << "x,y,rss\n";
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          os << b.min.x() + c * resolution << ',' << b.min.y() + r * resolution << ','
             << values[static_cast<std::size_t>(r * cols + c)] << '\n';
        }
      }
      break;
    case Format::Table:
      // Top row is the largest y so the grid reads like a map.
      for (int r = rows - 1; r >= 0; --r) {
        for (int c = 0; c < cols; ++c) {
          char buf[16];
          std::snprintf(buf, sizeof buf, "%5.0f", values[static_cast<std::size_t>(r * cols + c)]);
          os << buf;
        }
        os << '\n';
      }
      break;
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSS-gradient direction-of-arrival teleoperation simulator"};
  app.require_subcommand(1);

  std::string scenario_path = default_scenario();
  std::uint64_t seed = 1;
  std::string pilot_name = "gradient-follower";
  std::string noise = "default";
  Format format = Format::Table;
  Output out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->envname("DOATELEOP_SCENARIO");
    cmd->add_option("--seed", seed, "Run seed")->envname("DOATELEOP_SEED");
    cmd->add_option("--noise", noise, "off, default, or a JSON noise profile")->envname("DOATELEOP_NOISE");
  };

  auto* run = app.add_subcommand("run", "Run one scripted trial");
  add_common(run);
  run->add_option("--pilot", pilot_name, "Pilot kind or pilot JSON file")->envname("DOATELEOP_PILOT");
  run->add_option("--out", out.path, "Report destination (default stdout)")->envname("DOATELEOP_OUT");
  std::string log_path;
  run->add_option("--log", log_path, "Write the trial log here");
  add_format(run, format);

  auto* suite = app.add_subcommand("suite", "Run a batch of trials");
  std::string suite_path = default_suite();
  std::string suite_noise;
  std::string log_dir;
  unsigned workers = 0;
  suite->add_option("config", suite_path, "Suite JSON file");
  suite->add_option("--noise", suite_noise, "Override the suite's noise profile")->envname("DOATELEOP_NOISE");
  suite->add_option("--out", out.path, "Report destination (default stdout)")->envname("DOATELEOP_OUT");
  suite->add_option("--log-dir", log_dir, "Write every trial log into this directory");
  suite->add_option("--workers", workers, "Parallel workers (0 = all cores)")->envname("DOATELEOP_WORKERS");
  add_format(suite, format);

  auto* evaluate = app.add_subcommand("evaluate", "Recompute the report of a saved log");
  std::string eval_log;
  evaluate->add_option("log", eval_log, "Trial log (NDJSON)")->required();
  evaluate->add_option("--out", out.path, "Report destination (default stdout)")->envname("DOATELEOP_OUT");
  add_format(evaluate, format);

  auto* probe = app.add_subcommand("map-probe", "Dump a noise-inclusive RSS grid of the map");
  double resolution = 0.25;
  double probe_time = 0.0;
  add_common(probe);
  probe->add_option("--resolution", resolution, "Grid spacing in metres")->check(CLI::PositiveNumber);
  probe->add_option("--time", probe_time, "Field time in seconds");
  probe->add_option("--out", out.path, "Destination (default stdout)")->envname("DOATELEOP_OUT");
  add_format(probe, format);

  ServerOptions server_opts;
  auto* serve = app.add_subcommand("serve", "Serve live sessions over WebSocket");
  serve->add_option("--bind", server_opts.address, "Bind address")->envname("DOATELEOP_BIND");
  serve->add_option("--port", server_opts.port, "TCP port (0 = ephemeral)")->envname("DOATELEOP_PORT");
  serve->add_option("--scenario-dir", server_opts.scenario_dir, "Directory of <name>.json scenarios")
      ->envname("DOATELEOP_SCENARIO_DIR");
  serve->add_option("--noise", server_opts.noise, "off, default, or a JSON noise profile")->envname("DOATELEOP_NOISE");
  serve->add_option("--grace", server_opts.grace_seconds, "Reconnect grace window in seconds")
      ->envname("DOATELEOP_GRACE");
  serve->add_option("--time-scale", server_opts.time_scale, "Simulation speed relative to wall clock")
      ->envname("DOATELEOP_TIME_SCALE");
  serve->add_option("--log-dir", server_opts.log_dir, "Write finished session logs here")
      ->envname("DOATELEOP_LOG_DIR");

  auto* replay = app.add_subcommand("replay", "Serve a saved log as telemetry");
  std::string replay_log;
  double replay_speed = 1.0;
  replay->add_option("log", replay_log, "Trial log (NDJSON)")->required();
  replay->add_option("--bind", server_opts.address, "Bind address")->envname("DOATELEOP_BIND");
  replay->add_option("--port", server_opts.port, "TCP port (0 = ephemeral)")->envname("DOATELEOP_PORT");
  replay->add_option("--speed", replay_speed, "Playback speed; 0 waits for step messages")
      ->check(CLI::NonNegativeNumber)
      ->envname("DOATELEOP_REPLAY_SPEED");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const Scenario scenario = apply_noise_profile(load_scenario(scenario_path), noise);
      const PilotPolicy pilot = load_pilot(pilot_name);
      const TrialResult r = run_trial(scenario, pilot, seed);
      if (!log_path.empty()) write_log(log_path, r.log);
      if (format == Format::Json) {
        out.write(report_to_json(r.report).dump(2));
      } else if (format == Format::Csv) {
        out.write(eval_samples_csv(r.log));
      } else {
        out.write(format_table(r.report));
      }
      return 0;
    }
    if (suite->parsed()) {
      SuiteConfig cfg = load_suite(suite_path, suite_noise);
      if (workers) cfg.workers = workers;
      if (!log_dir.empty()) cfg.log_dir = log_dir;
      const SuiteReport rep = run_suite(cfg);
      if (format == Format::Json) {
        out.write(suite_to_json(rep).dump(2));
      } else if (format == Format::Csv) {
        out.write(suite_csv(rep));
      } else {
        out.write(format_table(rep));
      }
      return rep.summary.failed == 0 ? 0 : 1;
    }
    if (evaluate->parsed()) {
      const TrialLog log = read_log(eval_log);
      const TrialReport rep = trial_metrics(log);
      if (format == Format::Json) {
        out.write(report_to_json(rep).dump(2));
      } else if (format == Format::Csv) {
        out.write(eval_samples_csv(log));
      } else {
        out.write(format_table(rep));
      }
      return 0;
    }
    if (probe->parsed()) {
      const Scenario scenario = apply_noise_profile(load_scenario(scenario_path), noise);
      out.write(map_probe(scenario, seed, resolution, probe_time, format));
      return 0;
    }
    if (serve->parsed()) {
      if (server_opts.scenario_dir.empty()) server_opts.scenario_dir = std::string(DOATELEOP_DATA_DIR) + "/scenarios";
      TeleopServer server(server_opts);
      std::cerr << "listening on " << server_opts.address << ":" << server.port() << "\n";
      server.run();
      return 0;
    }
    if (replay->parsed()) {
      ReplayServer server(read_log(replay_log), replay_speed, server_opts);
      std::cerr << "replaying on " << server_opts.address << ":" << server.port() << "\n";
      server.run();
      return 0;
    }
  } catch (const LogError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
