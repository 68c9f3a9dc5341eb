#pragma once

#include <memory>
#include <string>

#include "doateleop/trial_log.hpp"

namespace doateleop {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  std::string scenario_dir;  // holds <name>.json for /session?scenario=<name> and /map/<name>
  std::string noise = "default";
  double grace_seconds = 10.0;  // a dropped operator may reconnect within this window
  double close_delay = 0.5;  // s between the terminal frame and closing the socket
  double time_scale = 1.0;  // simulated seconds per wall-clock second
  std::string log_dir;  // finished sessions are written here when set
};

/// Live teleoperation endpoint.
///
///   GET /healthz                 -> {"status": "ok", ...}
///   GET /map/<name>              -> operator-visible map geometry (no access point)
///   WS  /session?scenario=&mode=&seed=[&debug=1]
///
/// One operator at a time. All session work runs on the single I/O thread,
/// so the engine sees commands in arrival order.
class TeleopServer {
 public:
  explicit TeleopServer(ServerOptions options);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  /// Bound port; useful with port 0.
  unsigned short port() const;
  /// Blocks until stop().
  void run();
  /// Runs on a background thread.
  void start();
  void stop();

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

/// Streams a saved log as telemetry. speed > 0 paces frames by their logged
/// time; speed 0 emits one frame per {"type": "step"} message. Controls are ignored.
class ReplayServer {
 public:
  ReplayServer(TrialLog log, double speed, ServerOptions options);
  ~ReplayServer();
  ReplayServer(const ReplayServer&) = delete;
  ReplayServer& operator=(const ReplayServer&) = delete;

  unsigned short port() const;
  void run();
  void start();
  void stop();

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace doateleop
