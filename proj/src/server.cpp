#include "doateleop/server.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <optional>
#include <regex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "doateleop/protocol.hpp"
#include "doateleop/scenario.hpp"
#include "doateleop/session.hpp"

namespace doateleop {

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;
using nlohmann::json;
using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

constexpr int kProtocolVersion = 1;

class Connection;

class Core {
 public:
  virtual ~Core() = default;
  virtual Response handle_http(const Request& req) = 0;
  virtual void on_open(const std::shared_ptr<Connection>& c, const std::string& target) = 0;
  virtual void on_message(const std::shared_ptr<Connection>& c, const std::string& text) = 0;
  virtual void on_close(const std::shared_ptr<Connection>& c) = 0;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Core& core) : ws_(std::move(socket)), timer_(ws_.get_executor()), core_(core) {}

  void accept(Request req) {
    target_ = std::string(req.target());
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      self->core_.on_open(self, self->target_);
      self->do_read();
    });
  }

  void send(std::string text) {
    if (!open_ || closing_) return;
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void send(const json& j) { send(j.dump()); }

  /// Flushes queued messages, then closes.
  void close() {
    if (!open_ || closing_) return;
    closing_ = true;
    if (queue_.empty()) do_close();
  }

  void close_after(Clock::duration delay) {
    timer_.expires_after(delay);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->close();
    });
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        self->queue_.clear();
        self->timer_.cancel();
        self->core_.on_close(self);
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->core_.on_message(self, text);
      self->do_read();
    });
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->queue_.clear();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->do_write();
      } else if (self->closing_) {
        self->do_close();
      }
    });
  }

  void do_close() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  std::string target_;
  Core& core_;
  bool open_ = false;
  bool closing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Core& core) : stream_(std::move(socket)), core_(core) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<Connection>(stream_.release_socket(), core_)->accept(std::move(req_));
      return;
    }
    auto res = std::make_shared<Response>(core_.handle_http(req_));
    res->keep_alive(req_.keep_alive());
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (!ec && res->keep_alive()) {
        self->do_read();
      } else {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      }
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  Request req_;
  Core& core_;
};

Response json_response(const Request& req, http::status status, const json& body) {
  Response res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.body() = body.dump();
  return res;
}

struct Target {
  std::string path;
  std::map<std::string, std::string> query;
};

Target parse_target(const std::string& target) {
  Target t;
  const auto q = target.find('?');
  t.path = target.substr(0, q);
  if (q == std::string::npos) return t;
  std::string rest = target.substr(q + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto amp = std::min(rest.find('&', pos), rest.size());
    const std::string item = rest.substr(pos, amp - pos);
    if (!item.empty()) {
      const auto eq = item.find('=');
      t.query[item.substr(0, eq)] = eq == std::string::npos ? std::string() : item.substr(eq + 1);
    }
    pos = amp + 1;
  }
  return t;
}

bool valid_name(const std::string& name) {
  static const std::regex re("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(name, re);
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes"; }

class Acceptor {
 public:
  Acceptor(net::io_context& ioc, const ServerOptions& opts, Core& core) : acceptor_(ioc), core_(core) {
    const tcp::endpoint endpoint(net::ip::make_address(opts.address), opts.port);
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec == net::error::operation_aborted) return;
      if (!ec) std::make_shared<HttpSession>(std::move(socket), core_)->run();
      start();
    });
  }

  void close() {
    beast::error_code ignored;
    acceptor_.close(ignored);
  }

 private:
  tcp::acceptor acceptor_;
  Core& core_;
};

/// io_context plus its optional background thread.
class Runner {
 public:
  net::io_context ioc{1};

  void run() { ioc.run(); }

  void start() {
    thread_ = std::thread([this] { ioc.run(); });
  }

  void stop() {
    ioc.stop();
    if (thread_.joinable()) thread_.join();
  }

  ~Runner() { stop(); }

 private:
  std::thread thread_;
};

Clock::duration seconds(double s) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s));
}

}  // namespace

// ---------------------------------------------------------------------------

struct TeleopServer::Impl : Core {
  struct Live {
    std::string name;
    std::uint64_t seed = 0;
    InterfaceMode mode = InterfaceMode::Vdoa;
    bool debug = false;
    std::unique_ptr<Session> session;
    FlcCommand command;
    std::optional<int> pending_mark;
    std::vector<std::string> pending_events;
    int ticks_since_send = 0;
    int telemetry_every = 2;
    bool started = false;
    bool finished = false;
    std::shared_ptr<Connection> conn;
    std::optional<Clock::time_point> disconnected_at;
  };

  Runner runner;
  ServerOptions opts;
  Acceptor acceptor;
  net::steady_timer timer;
  Clock::time_point next_tick;
  bool ticking = false;
  std::unique_ptr<Live> live;

  explicit Impl(ServerOptions o) : opts(std::move(o)), acceptor(runner.ioc, opts, *this), timer(runner.ioc) {
    if (!(opts.time_scale > 0.0)) throw std::invalid_argument("time scale must be > 0");
    if (!(opts.grace_seconds >= 0.0)) throw std::invalid_argument("grace window must be >= 0");
    acceptor.start();
  }

  ~Impl() override {
    runner.stop();
    live.reset();
  }

  Scenario load(const std::string& name) const {
    if (!valid_name(name)) throw std::invalid_argument("invalid scenario name '" + name + "'");
    const auto path = std::filesystem::path(opts.scenario_dir) / (name + ".json");
    if (!std::filesystem::exists(path)) throw std::out_of_range("unknown scenario '" + name + "'");
    return apply_noise_profile(load_scenario(path), opts.noise);
  }

  Response handle_http(const Request& req) override {
    if (req.method() != http::verb::get) {
      return json_response(req, http::status::method_not_allowed, error_json("method_not_allowed", "GET only"));
    }
    const Target t = parse_target(std::string(req.target()));
    if (t.path == "/healthz") {
      return json_response(req, http::status::ok,
                           json{{"status", "ok"}, {"protocol_version", kProtocolVersion}, {"busy", live != nullptr}});
    }
    if (t.path.rfind("/map/", 0) == 0) {
      const std::string name = t.path.substr(5);
      try {
        return json_response(req, http::status::ok, public_map_json(load(name)));
      } catch (const std::out_of_range& e) {
        return json_response(req, http::status::not_found, error_json("not_found", e.what()));
      } catch (const std::exception& e) {
        return json_response(req, http::status::bad_request, error_json("bad_request", e.what()));
      }
    }
    return json_response(req, http::status::not_found, error_json("not_found", "no such resource"));
  }

  json hello(const Live& l, bool resumed) const {
    const Scenario& s = l.session->scenario();
    return json{{"type", "hello"},
                {"protocol_version", kProtocolVersion},
                {"scenario", l.name},
                {"mode", to_string(l.mode)},
                {"seed", l.seed},
                {"debug", l.debug},
                {"resumed", resumed},
                {"started", l.started},
                {"map", "/map/" + l.name},
                {"physics_hz", s.timing.physics_hz},
                {"telemetry_hz", s.timing.telemetry_hz},
                {"time_limit", s.time_limit},
                {"segments", s.estimation.segments},
                {"limits",
                 {{"max_speed", s.limits.max_speed}, {"max_camera_rate", s.limits.max_camera_rate}}}};
  }

  void reject(const std::shared_ptr<Connection>& c, const std::string& code, const std::string& message) {
    c->send(error_json(code, message));
    c->close();
  }

  void on_open(const std::shared_ptr<Connection>& c, const std::string& target) override {
    const Target t = parse_target(target);
    if (t.path != "/session") {
      reject(c, "not_found", "websocket endpoint is /session");
      return;
    }
    auto get = [&](const char* key, const std::string& fallback) {
      auto it = t.query.find(key);
      return it == t.query.end() ? fallback : it->second;
    };
    const std::string name = get("scenario", "default");
    const std::string mode_text = get("mode", "");
    const bool debug = truthy(get("debug", "0"));
    std::uint64_t seed = 0;
    try {
      std::size_t used = 0;
      const std::string seed_text = get("seed", "1");
      seed = std::stoull(seed_text, &used);
      if (used != seed_text.size()) throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      reject(c, "bad_request", "seed must be a non-negative integer");
      return;
    }

    if (live) {
      const bool same = live->name == name && live->seed == seed && live->debug == debug &&
                        (mode_text.empty() || mode_text == to_string(live->mode));
      if (live->conn || !same || live->finished) {
        reject(c, "busy", "another operator session is active");
        return;
      }
      live->conn = c;
      live->disconnected_at.reset();
      c->send(hello(*live, true));
      c->send(telemetry_json(live->session->last_frame(), live->mode, live->debug));
      return;
    }

    auto l = std::make_unique<Live>();
    try {
      Scenario s = load(name);
      if (!mode_text.empty()) s.interface_mode = interface_mode_from_string(mode_text);
      l->mode = s.interface_mode;
      l->telemetry_every = std::max(1, static_cast<int>(std::lround(s.timing.physics_hz / s.timing.telemetry_hz)));
      l->session = std::make_unique<Session>(std::move(s), seed, json{{"pilot", "operator"}});
    } catch (const std::exception& e) {
      reject(c, "bad_scenario", e.what());
      return;
    }
    l->name = name;
    l->seed = seed;
    l->debug = debug;
    l->conn = c;
    live = std::move(l);
    c->send(hello(*live, false));
    schedule_ticks();
  }

  void on_message(const std::shared_ptr<Connection>& c, const std::string& text) override {
    if (!live || live->conn != c) {
      c->send(error_json("inactive", "this connection has no active session"));
      return;
    }
    json msg;
    try {
      msg = json::parse(text);
    } catch (const json::parse_error& e) {
      c->send(error_json("bad_message", e.what()));
      return;
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
      c->send(error_json("bad_message", "message needs a string 'type'"));
      return;
    }
    const std::string type = msg["type"];
    if (type == "start") {
      if (!live->started) {
        live->started = true;
        c->send(telemetry_json(live->session->last_frame(), live->mode, live->debug));
      }
    } else if (type == "control") {
      try {
        const ControlInput in = parse_control(msg);
        live->command = in.command;
        if (in.mark_found) live->pending_mark = in.mark_found;
      } catch (const std::exception& e) {
        c->send(error_json("bad_message", e.what()));
      }
    } else {
      c->send(error_json("bad_message", "unknown message type '" + type + "'"));
    }
  }

  void on_close(const std::shared_ptr<Connection>& c) override {
    if (!live || live->conn != c) return;
    live->conn.reset();
    live->command = {};
    live->pending_mark.reset();
    live->disconnected_at = Clock::now();
  }

  void schedule_ticks() {
    if (ticking) return;
    ticking = true;
    next_tick = Clock::now();
    arm();
  }

  void arm() {
    const auto period = seconds(live->session->dt() / opts.time_scale);
    next_tick += period;
    const auto now = Clock::now();
    if (next_tick + std::chrono::seconds(1) < now) next_tick = now;
    timer.expires_at(next_tick);
    timer.async_wait([this](beast::error_code ec) {
      if (ec) {
        ticking = false;
        return;
      }
      on_tick();
      if (live) {
        arm();
      } else {
        ticking = false;
      }
    });
  }

  void send_telemetry(Live& l, const TelemetryFrame& f) {
    json j = telemetry_json(f, l.mode, l.debug);
    j["events"] = l.pending_events;
    l.pending_events.clear();
    l.ticks_since_send = 0;
    l.conn->send(j);
  }

  void finish() {
    if (!opts.log_dir.empty()) {
      std::filesystem::create_directories(opts.log_dir);
      const auto& log = live->session->log();
      write_log(std::filesystem::path(opts.log_dir) /
                    (live->name + "-" + std::to_string(live->seed) + "-" +
                     std::to_string(Clock::now().time_since_epoch().count()) + ".ndjson"),
                log);
    }
    live.reset();
  }

  void on_tick() {
    Live& l = *live;
    if (!l.conn) {
      if (l.disconnected_at && Clock::now() - *l.disconnected_at > seconds(opts.grace_seconds)) finish();
      return;
    }
    if (!l.started || l.finished) return;
    const TelemetryFrame& f = l.session->tick(ControlInput{l.command, l.pending_mark});
    l.pending_mark.reset();
    l.pending_events.insert(l.pending_events.end(), f.events.begin(), f.events.end());
    ++l.ticks_since_send;
    const bool terminal = f.status != SessionStatus::Running;
    if (l.ticks_since_send >= l.telemetry_every || terminal) send_telemetry(l, f);
    if (terminal) {
      l.finished = true;
      l.conn->close_after(seconds(opts.close_delay));
      finish();
    }
  }
};

TeleopServer::TeleopServer(ServerOptions options) : impl_(std::make_shared<Impl>(std::move(options))) {}
TeleopServer::~TeleopServer() = default;
unsigned short TeleopServer::port() const { return impl_->acceptor.port(); }
void TeleopServer::run() { impl_->runner.run(); }
void TeleopServer::start() { impl_->runner.start(); }
void TeleopServer::stop() {
  net::post(impl_->runner.ioc, [impl = impl_.get()] {
    impl->acceptor.close();
    impl->timer.cancel();
  });
  impl_->runner.stop();
}

// ---------------------------------------------------------------------------

struct ReplayServer::Impl : Core {
  Runner runner;
  TrialLog log;
  double speed;
  ServerOptions opts;
  Acceptor acceptor;
  net::steady_timer timer;
  Scenario scenario;
  std::shared_ptr<Connection> conn;
  bool debug = false;
  bool started = false;
  std::size_t index = 0;
  TelemetryFrame frame;
  Clock::time_point start_time;

  Impl(TrialLog l, double s, ServerOptions o)
      : log(std::move(l)),
        speed(s),
        opts(std::move(o)),
        acceptor(runner.ioc, opts, *this),
        timer(runner.ioc),
        scenario(parse_scenario(json::parse(log.header.scenario_json))) {
    if (!(speed >= 0.0) || !std::isfinite(speed)) throw std::invalid_argument("replay speed must be >= 0");
    if (log.records.empty()) throw std::invalid_argument("replay log has no records");
    acceptor.start();
  }

  ~Impl() override { runner.stop(); }

  Response handle_http(const Request& req) override {
    if (req.method() != http::verb::get) {
      return json_response(req, http::status::method_not_allowed, error_json("method_not_allowed", "GET only"));
    }
    const Target t = parse_target(std::string(req.target()));
    if (t.path == "/healthz") {
      return json_response(req, http::status::ok,
                           json{{"status", "ok"}, {"protocol_version", kProtocolVersion}, {"replay", true},
                                {"busy", conn != nullptr}});
    }
    if (t.path == "/map/" + log.header.scenario_name) {
      return json_response(req, http::status::ok, public_map_json(scenario));
    }
    return json_response(req, http::status::not_found, error_json("not_found", "no such resource"));
  }

  void reset() {
    timer.cancel();
    conn.reset();
    started = false;
    index = 0;
    frame = TelemetryFrame{};
  }

  void on_open(const std::shared_ptr<Connection>& c, const std::string& target) override {
    const Target t = parse_target(target);
    if (t.path != "/session") {
      c->send(error_json("not_found", "websocket endpoint is /session"));
      c->close();
      return;
    }
    if (conn) {
      c->send(error_json("busy", "another viewer is connected"));
      c->close();
      return;
    }
    reset();
    conn = c;
    auto it = t.query.find("debug");
    debug = it != t.query.end() && truthy(it->second);
    c->send(json{{"type", "hello"},
                 {"protocol_version", kProtocolVersion},
                 {"replay", true},
                 {"scenario", log.header.scenario_name},
                 {"mode", to_string(scenario.interface_mode)},
                 {"seed", log.header.seed},
                 {"debug", debug},
                 {"speed", speed},
                 {"records", log.records.size()},
                 {"duration", log.records.back().t},
                 {"map", "/map/" + log.header.scenario_name},
                 {"segments", scenario.estimation.segments}});
  }

  void emit_next() {
    apply_record(frame, log.records[index], scenario.time_limit);
    json j = telemetry_json(frame, scenario.interface_mode, debug);
    j["replay_index"] = index;
    conn->send(j);
    ++index;
    if (index == log.records.size()) {
      conn->send(json{{"type", "end"}, {"records", log.records.size()}});
      conn->close_after(seconds(opts.close_delay));
    }
  }

  void pace() {
    if (!conn || index >= log.records.size()) return;
    timer.expires_at(start_time + seconds(log.records[index].t / speed));
    timer.async_wait([this](beast::error_code ec) {
      if (ec || !conn) return;
      emit_next();
      pace();
    });
  }

  void on_message(const std::shared_ptr<Connection>& c, const std::string& text) override {
    if (c != conn) return;
    json msg;
    try {
      msg = json::parse(text);
    } catch (const json::parse_error& e) {
      c->send(error_json("bad_message", e.what()));
      return;
    }
    const std::string type = msg.is_object() ? msg.value("type", std::string()) : std::string();
    if (type == "start") {
      if (started) return;
      started = true;
      if (speed > 0.0) {
        start_time = Clock::now();
        pace();
      }
    } else if (type == "step") {
      if (speed > 0.0) {
        c->send(error_json("not_step_mode", "step messages need replay speed 0"));
        return;
      }
      const auto it = msg.find("count");
      if (it != msg.end() && !it->is_number_integer()) {
        c->send(error_json("bad_message", "step count must be an integer"));
        return;
      }
      started = true;
      const long long count = it == msg.end() ? 1 : it->get<long long>();
      for (int k = 0; k < count && index < log.records.size(); ++k) emit_next();
    } else if (type == "control") {
      // Replays are read-only.
    } else {
      c->send(error_json("bad_message", "unknown message type '" + type + "'"));
    }
  }

  void on_close(const std::shared_ptr<Connection>& c) override {
    if (c == conn) reset();
  }
};

ReplayServer::ReplayServer(TrialLog log, double speed, ServerOptions options)
    : impl_(std::make_shared<Impl>(std::move(log), speed, std::move(options))) {}
ReplayServer::~ReplayServer() = default;
unsigned short ReplayServer::port() const { return impl_->acceptor.port(); }
void ReplayServer::run() { impl_->runner.run(); }
void ReplayServer::start() { impl_->runner.start(); }
void ReplayServer::stop() {
  net::post(impl_->runner.ioc, [impl = impl_.get()] {
    impl->acceptor.close();
    impl->timer.cancel();
  });
  impl_->runner.stop();
}

}  // namespace doateleop
