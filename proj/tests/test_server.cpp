#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "doateleop/protocol.hpp"
#include "doateleop/server.hpp"
#include "doateleop/session.hpp"
#include "support.hpp"

using namespace doateleop;
using nlohmann::json;

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct HttpResult {
  unsigned status = 0;
  json body;
};

HttpResult http_get(unsigned short port, const std::string& target) {
  net::io_context ioc;
  tcp::socket socket(ioc);
  socket.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
  http::request<http::string_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(socket, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(socket, buffer, res);
  return {res.result_int(), json::parse(res.body())};
}

class WsClient {
 public:
  WsClient(unsigned short port, const std::string& target) : ws_(ioc_) {
    ws_.next_layer().connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
    ws_.handshake("127.0.0.1", target);
  }

  void send(const json& j) { send_text(j.dump()); }
  void send_text(const std::string& text) {
    ws_.text(true);
    ws_.write(net::buffer(text));
  }

  /// Next message, or null once the server has closed the socket.
  json read() {
    beast::flat_buffer buffer;
    beast::error_code ec;
    ws_.read(buffer, ec);
    if (ec) return nullptr;
    return json::parse(beast::buffers_to_string(buffer.data()));
  }

  json read_until(const std::function<bool(const json&)>& pred) {
    for (;;) {
      json j = read();
      if (j.is_null() || pred(j)) return j;
    }
  }

  void close() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

/// Temporary scenario directory with a 3 s copy of the default scenario.
struct Fixture {
  std::filesystem::path dir;
  std::filesystem::path logs;
  Scenario scenario;

  Fixture() {
    dir = std::filesystem::temp_directory_path() /
          ("doateleop_server_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    logs = dir / "logs";
    std::filesystem::create_directories(dir);
    scenario = testing_support::default_scenario();
    scenario.name = "short";
    scenario.time_limit = 3.0;
    std::ofstream(dir / "short.json") << scenario_to_json(scenario).dump(2);
  }
  ~Fixture() { std::filesystem::remove_all(dir); }

  ServerOptions options(double time_scale = 4.0) const {
    ServerOptions o;
    o.port = 0;
    o.scenario_dir = dir.string();
    o.time_scale = time_scale;
    o.log_dir = logs.string();
    o.close_delay = 0.05;
    return o;
  }

  TrialLog only_log() const {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(logs)) files.push_back(e.path());
    REQUIRE(files.size() == 1);
    return read_log(files.front());
  }
};

bool is_terminal(const json& j) { return j.value("type", "") == "telemetry" && j.value("status", "") != "RUNNING"; }

}  // namespace

TEST_CASE("health and map endpoints") {
  Fixture fx;
  TeleopServer server(fx.options());
  server.start();
  const auto health = http_get(server.port(), "/healthz");
  CHECK(health.status == 200);
  CHECK(health.body.at("status") == "ok");
  CHECK(health.body.at("busy") == false);

  const auto map = http_get(server.port(), "/map/short");
  CHECK(map.status == 200);
  CHECK_FALSE(map.body.contains("ap"));
  CHECK(map.body.dump().find("\"ap\"") == std::string::npos);
  CHECK(map.body.at("walls").size() == fx.scenario.map.plan.walls.size());

  CHECK(http_get(server.port(), "/map/missing").status == 404);
  CHECK(http_get(server.port(), "/map/..%2Fetc").status == 400);
  CHECK(http_get(server.port(), "/nowhere").status == 404);
  server.stop();
}

TEST_CASE("session lifecycle: hello, busy, clamp echo, timeout, log") {
  Fixture fx;
  TeleopServer server(fx.options());
  server.start();

  WsClient op(server.port(), "/session?scenario=short&mode=vdoa&seed=4");
  const json hello = op.read();
  CHECK(hello.at("type") == "hello");
  CHECK(hello.at("resumed") == false);
  CHECK(hello.at("time_limit") == 3.0);
  CHECK(hello.at("limits").at("max_speed") == 0.5);

  WsClient other(server.port(), "/session?scenario=short&seed=4");
  const json busy = other.read();
  CHECK(busy.at("type") == "error");
  CHECK(busy.at("code") == "busy");
  CHECK(http_get(server.port(), "/healthz").body.at("busy") == true);

  op.send(json{{"type", "start"}});
  op.send(json{{"type", "control"}, {"v_forward", 5.0}, {"v_lateral", 0.0}});
  const json echoed = op.read_until([](const json& j) {
    return j.value("type", "") == "telemetry" && j.at("command").at("v_forward").get<double>() != 0.0;
  });
  REQUIRE(echoed.is_object());
  CHECK(echoed.at("command").at("v_forward").get<double>() == doctest::Approx(0.5));
  CHECK_FALSE(echoed.contains("debug"));
  CHECK(echoed.contains("bar"));

  const json last = op.read_until(is_terminal);
  REQUIRE(last.is_object());
  CHECK(last.at("status") == "TIMEOUT");
  CHECK(last.at("tick") == 60);
  CHECK(op.read_until([](const json&) { return false; }).is_null());  // server closes

  const TrialLog log = fx.only_log();
  CHECK(log.records.size() == 60);
  CHECK(log.header.seed == 4);
  server.stop();
}

TEST_CASE("rejections and malformed messages") {
  Fixture fx;
  TeleopServer server(fx.options());
  server.start();
  {
    WsClient c(server.port(), "/session?scenario=short&seed=abc");
    CHECK(c.read().at("code") == "bad_request");
  }
  {
    WsClient c(server.port(), "/session?scenario=nope&seed=1");
    CHECK(c.read().at("code") == "bad_scenario");
  }
  {
    WsClient c(server.port(), "/elsewhere");
    CHECK(c.read().at("code") == "not_found");
  }
  WsClient c(server.port(), "/session?scenario=short&seed=2&mode=bar");
  CHECK(c.read().at("mode") == "bar");
  c.send_text("{not json");
  CHECK(c.read().at("code") == "bad_message");
  c.send(json{{"type", "warp"}});
  CHECK(c.read().at("code") == "bad_message");
  c.send(json{{"type", "control"}, {"v_forward", "fast"}});
  CHECK(c.read().at("code") == "bad_message");
  c.send(json::array({1, 2}));
  CHECK(c.read().at("code") == "bad_message");
  c.send(json{{"type", "start"}});
  const json frame = c.read();
  CHECK(frame.at("type") == "telemetry");
  CHECK_FALSE(frame.contains("bar"));
  c.close();
  server.stop();
}

TEST_CASE("reconnecting resumes the same session state") {
  Fixture fx;
  TeleopServer server(fx.options(2.0));
  server.start();
  const std::string target = "/session?scenario=short&seed=9&debug=1";

  std::int64_t tick_at_drop = 0;
  {
    WsClient a(server.port(), target);
    CHECK(a.read().at("resumed") == false);
    a.send(json{{"type", "start"}});
    a.send(json{{"type", "control"}, {"v_forward", 0.3}, {"camera_yaw_rate", 0.2}});
    const json f = a.read_until([](const json& j) { return j.value("tick", 0) >= 20; });
    REQUIRE(f.is_object());
    tick_at_drop = f.at("tick").get<std::int64_t>();
    a.close();
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(200));

  WsClient b(server.port(), target);
  const json hello = b.read();
  CHECK(hello.at("resumed") == true);
  CHECK(hello.at("started") == true);
  const json resumed = b.read();
  REQUIRE(resumed.at("type") == "telemetry");
  const std::int64_t resume_tick = resumed.at("tick").get<std::int64_t>();
  CHECK(resume_tick >= tick_at_drop);
  CHECK(resume_tick < 60);
  b.send(json{{"type", "control"}, {"v_lateral", -0.2}});
  const json last = b.read_until(is_terminal);
  REQUIRE(last.is_object());
  CHECK(last.at("status") == "TIMEOUT");
  server.stop();

  // Headless oracle: feed the logged commands into a fresh session.
  const TrialLog log = fx.only_log();
  REQUIRE(log.records.size() == 60);
  Session headless(fx.scenario, 9, json{{"pilot", "operator"}});
  json frame_at_resume;
  for (const auto& r : log.records) {
    CHECK(r.tick == headless.state().tick + 1);
    headless.tick(r.command);
    if (headless.state().tick == resume_tick) {
      frame_at_resume = telemetry_json(headless.last_frame(), InterfaceMode::Vdoa, true);
    }
  }
  CHECK(serialize_log(headless.log()) == serialize_log(log));
  CHECK(frame_at_resume == resumed);
}

TEST_CASE("replay in step mode emits every record once") {
  Fixture fx;
  Session s(fx.scenario, 5);
  while (s.running()) s.tick(FlcCommand{0.2, 0.1, 0.0});
  const TrialLog log = s.log();
  ServerOptions opts = fx.options();
  opts.close_delay = 0.05;
  ReplayServer replay(log, 0.0, opts);
  replay.start();
  CHECK(http_get(replay.port(), "/healthz").body.at("replay") == true);
  CHECK(http_get(replay.port(), "/map/short").body.contains("walls"));

  WsClient c(replay.port(), "/session?debug=1");
  const json hello = c.read();
  CHECK(hello.at("records") == log.records.size());
  c.send(json{{"type", "step"}, {"count", "many"}});
  CHECK(c.read().at("code") == "bad_message");
  c.send(json{{"type", "step"}, {"count", 10}});
  std::size_t frames = 0;
  for (int i = 0; i < 10; ++i) {
    const json f = c.read();
    CHECK(f.at("replay_index") == i);
    CHECK(f.at("debug").at("true_pose").at("x").get<double>() == log.records[i].true_position.x());
    ++frames;
  }
  c.send(json{{"type", "control"}, {"v_forward", 0.5}});  // ignored
  c.send(json{{"type", "step"}, {"count", 1000}});
  json end;
  for (;;) {
    const json f = c.read();
    REQUIRE(f.is_object());
    if (f.at("type") == "end") {
      end = f;
      break;
    }
    ++frames;
  }
  CHECK(frames == log.records.size());
  CHECK(end.at("records") == log.records.size());
  replay.stop();
}

TEST_CASE("paced replay follows logged time") {
  Fixture fx;
  Session s(fx.scenario, 6);
  while (s.running()) s.tick(FlcCommand{});
  ReplayServer replay(s.log(), 10.0, fx.options());
  replay.start();
  WsClient c(replay.port(), "/session");
  c.read();
  c.send(json{{"type", "step"}});
  CHECK(c.read().at("code") == "not_step_mode");
  {
    WsClient second(replay.port(), "/session");
    CHECK(second.read().at("code") == "busy");
  }
  const auto t0 = std::chrono::steady_clock::now();
  c.send(json{{"type", "start"}});
  std::size_t frames = 0;
  for (;;) {
    const json f = c.read();
    REQUIRE(f.is_object());
    if (f.at("type") == "end") break;
    ++frames;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(frames == 60);
  // 3 s of log at 10x.
  CHECK(elapsed >= 0.28);
  CHECK(elapsed < 3.0);
  replay.stop();
}
