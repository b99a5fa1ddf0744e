#include "travnav/service.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

namespace travnav {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct BadRequest : std::runtime_error {
  http::status status;
  BadRequest(http::status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw BadRequest(http::status::bad_request, "body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw BadRequest(http::status::bad_request, std::string("malformed JSON: ") + e.what());
  }
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw BadRequest(http::status::bad_request, std::string("missing numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

bool in_bounds(const WorldBounds& b, const Eigen::Vector2d& p) { return b.contains(p); }

}  // namespace

struct NavService::Impl {
  ServiceConfig config;
  asio::io_context io;
  std::unique_ptr<tcp::acceptor> acceptor;
  unsigned short bound_port = 0;
  std::atomic<bool> stopping{false};
  bool started = false;

  // Published state.
  mutable std::mutex state_mu;
  std::condition_variable state_cv;
  std::shared_ptr<const StateSnapshot> latest;
  std::deque<std::shared_ptr<const StateSnapshot>> ring;

  // Command queue into the tick thread.
  struct Command {
    std::uint64_t seq = 0;
    std::function<void()> apply;
  };
  std::mutex cmd_mu;
  std::condition_variable cmd_cv;
  std::deque<Command> commands;
  std::uint64_t next_command_seq = 1;

  // Owned by the tick thread after start().
  std::unique_ptr<Mission> mission;
  bool paused = false;
  long steps_pending = 0;
  std::uint64_t applied_command_seq = 0;
  std::uint64_t publish_seq = 0;
  Clock::time_point last_publish{};

  std::thread tick_thread;
  std::thread accept_thread;

  struct Connection {
    std::shared_ptr<tcp::socket> socket;
    std::thread thread;
    std::atomic<bool> done{false};
  };
  std::mutex conn_mu;
  std::list<Connection> connections;

  explicit Impl(ServiceConfig c) : config(std::move(c)) {
    Scenario sc = load_named(config.scenario);
    const Eigen::Vector2d goal = config.goal.value_or(sc.goal);
    mission = std::make_unique<Mission>(std::move(sc), goal, config.mission);
    mission->start(config.instruction);
    paused = config.start_paused;
    publish();
  }

  Scenario load_named(const std::string& name) const {
    if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
      throw ScenarioError("invalid scenario name '" + name + "'");
    }
    const auto path = std::filesystem::path(config.scenario_dir) / (name + ".json");
    if (!std::filesystem::exists(path)) throw ScenarioError("unknown scenario '" + name + "'");
    return load_scenario(path.string());
  }

  // ---- tick thread ----------------------------------------------------------

  void publish() {
    auto snap = std::make_shared<const StateSnapshot>(
        capture_snapshot(*mission, ++publish_seq, applied_command_seq, paused));
    last_publish = Clock::now();
    {
      std::lock_guard lk(state_mu);
      latest = snap;
      ring.push_back(snap);
      while (ring.size() > std::max<std::size_t>(config.history, 1)) ring.pop_front();
    }
    state_cv.notify_all();
  }

  void tick_loop() {
    const auto tick_period = config.tick_rate_hz > 0 ? std::chrono::duration<double>(1.0 / config.tick_rate_hz)
                                                     : std::chrono::duration<double>(0);
    const auto stream_period = config.stream_rate_hz > 0
                                   ? std::chrono::duration<double>(1.0 / config.stream_rate_hz)
                                   : std::chrono::duration<double>(0);
    auto next_tick = Clock::now();
    while (!stopping) {
      std::deque<Command> batch;
      {
        std::unique_lock lk(cmd_mu);
        const bool active = mission->phase() == MissionPhase::Running && (!paused || steps_pending > 0);
        const auto ready = [&] { return stopping || !commands.empty(); };
        if (!active) {
          cmd_cv.wait(lk, ready);
        } else if (paused || tick_period.count() == 0) {
          // stepping runs unpaced
        } else {
          cmd_cv.wait_until(lk, next_tick, ready);
        }
        batch.swap(commands);
      }
      if (stopping) break;

      for (auto& c : batch) {
        c.apply();
        applied_command_seq = c.seq;
      }

      const bool stepping = paused && steps_pending > 0;
      const bool active = mission->phase() == MissionPhase::Running && (!paused || stepping);
      bool ticked = false;
      if (active && (stepping || Clock::now() >= next_tick)) {
        mission->tick();
        ticked = true;
        if (stepping) --steps_pending;
        next_tick = std::max(next_tick + std::chrono::duration_cast<Clock::duration>(tick_period), Clock::now() -
                                 std::chrono::duration_cast<Clock::duration>(tick_period));
      }
      if (mission->phase() != MissionPhase::Running) steps_pending = 0;

      bool publish_now = !batch.empty();
      if (ticked) {
        if (mission->phase() != MissionPhase::Running) publish_now = true;
        if (stepping && steps_pending == 0) publish_now = true;
        if (!paused && Clock::now() - last_publish >= stream_period) publish_now = true;
      }
      if (publish_now) publish();
    }
  }

  std::uint64_t enqueue(std::function<void()> apply) {
    std::uint64_t seq;
    {
      std::lock_guard lk(cmd_mu);
      seq = next_command_seq++;
      commands.push_back({seq, std::move(apply)});
    }
    cmd_cv.notify_all();
    return seq;
  }

  // ---- HTTP -----------------------------------------------------------------

  std::shared_ptr<const StateSnapshot> current() const {
    std::lock_guard lk(state_mu);
    return latest;
  }

  static http::response<http::string_body> reply(const http::request<http::string_body>& req, http::status status,
                                                 const std::string& body) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::content_type, "application/json");
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = body;
    res.prepare_payload();
    return res;
  }

  static std::string accepted(std::uint64_t seq) { return json{{"accepted", true}, {"command_seq", seq}}.dump(); }

  http::response<http::string_body> handle(const http::request<http::string_body>& req) {
    std::string target(req.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    const auto method = req.method();
    const auto expect = [&](http::verb v) {
      if (method != v) throw BadRequest(http::status::method_not_allowed, "method not allowed");
    };

    if (method == http::verb::options) {
      auto res = reply(req, http::status::no_content, "");
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return res;
    }

    if (target == "/scenarios") {
      expect(http::verb::get);
      return reply(req, http::status::ok, json{{"scenarios", list_scenarios(config.scenario_dir)}}.dump());
    }
    if (target == "/state") {
      expect(http::verb::get);
      return reply(req, http::status::ok, snapshot_to_json(*current()));
    }
    if (target == "/report") {
      expect(http::verb::get);
      auto promise = std::make_shared<std::promise<std::string>>();
      auto future = promise->get_future();
      enqueue([this, promise] { promise->set_value(report_to_json(mission->report())); });
      if (future.wait_for(std::chrono::seconds(30)) != std::future_status::ready) {
        throw BadRequest(http::status::service_unavailable, "report timed out");
      }
      return reply(req, http::status::ok, future.get());
    }
    if (target == "/instruction") {
      expect(http::verb::post);
      const json body = parse_body(req.body());
      if (!body.contains("text") || !body["text"].is_string()) {
        throw BadRequest(http::status::bad_request, "missing string field 'text'");
      }
      std::string text = body["text"];
      return reply(req, http::status::accepted,
                   accepted(enqueue([this, text = std::move(text)] { mission->inject_instruction(text); })));
    }
    if (target == "/goal") {
      expect(http::verb::post);
      const json body = parse_body(req.body());
      const Eigen::Vector2d goal(number_field(body, "x"), number_field(body, "y"));
      const auto snap = current();
      if (!in_bounds(snap->bounds, goal)) {
        throw BadRequest(http::status::bad_request, "goal out of bounds: world spans [" +
                                                        std::to_string(snap->bounds.min_x) + ", " +
                                                        std::to_string(snap->bounds.max_x) + "] x [" +
                                                        std::to_string(snap->bounds.min_y) + ", " +
                                                        std::to_string(snap->bounds.max_y) + "]");
      }
      return reply(req, http::status::accepted, accepted(enqueue([this, goal] { mission->set_goal(goal); })));
    }
    if (target == "/pause" || target == "/resume") {
      expect(http::verb::post);
      const bool p = target == "/pause";
      return reply(req, http::status::accepted, accepted(enqueue([this, p] {
                     paused = p;
                     if (!p) steps_pending = 0;
                   })));
    }
    if (target == "/step") {
      expect(http::verb::post);
      const json body = parse_body(req.body());
      long count = 1;
      if (body.contains("count")) {
        if (!body["count"].is_number_integer()) throw BadRequest(http::status::bad_request, "'count' must be an integer");
        count = body["count"].get<long>();
      }
      if (count < 1 || count > 1000000) throw BadRequest(http::status::bad_request, "'count' must be in [1, 1000000]");
      return reply(req, http::status::accepted, accepted(enqueue([this, count] {
                     paused = true;
                     steps_pending += count;
                   })));
    }
    if (target == "/reset") {
      expect(http::verb::post);
      const json body = parse_body(req.body());
      if (!body.contains("scenario") || !body["scenario"].is_string()) {
        throw BadRequest(http::status::bad_request, "missing string field 'scenario'");
      }
      Scenario sc;
      try {
        sc = load_named(body["scenario"].get<std::string>());
      } catch (const ScenarioError& e) {
        throw BadRequest(http::status::not_found, e.what());
      }
      MissionConfig mc = config.mission;
      if (body.contains("seed")) {
        if (!body["seed"].is_number_unsigned()) throw BadRequest(http::status::bad_request, "'seed' must be unsigned");
        mc.seed = body["seed"].get<std::uint64_t>();
      }
      std::string instruction;
      if (body.contains("instruction")) {
        if (!body["instruction"].is_string()) throw BadRequest(http::status::bad_request, "'instruction' must be a string");
        instruction = body["instruction"];
      }
      Eigen::Vector2d goal = sc.goal;
      if (body.contains("goal")) {
        goal = {number_field(body["goal"], "x"), number_field(body["goal"], "y")};
        if (!in_bounds(sc.world.bounds, goal)) throw BadRequest(http::status::bad_request, "goal out of bounds");
      }
      std::optional<bool> pause;
      if (body.contains("paused")) {
        if (!body["paused"].is_boolean()) throw BadRequest(http::status::bad_request, "'paused' must be a boolean");
        pause = body["paused"].get<bool>();
      }
      auto fresh = std::make_shared<Mission>(std::move(sc), goal, mc);
      fresh->start(instruction);
      return reply(req, http::status::accepted, accepted(enqueue([this, fresh, pause] {
                     mission = std::make_unique<Mission>(std::move(*fresh));
                     steps_pending = 0;
                     if (pause) paused = *pause;
                   })));
    }
    throw BadRequest(http::status::not_found, "no route for " + target);
  }

  // ---- WebSocket stream -----------------------------------------------------

  void stream(tcp::socket& socket, const http::request<http::string_body>& req) {
    websocket::stream<tcp::socket&> ws(socket);
    ws.set_option(websocket::stream_base::decorator(
        [](websocket::response_type& res) { res.set(http::field::server, "travnav"); }));
    ws.accept(req);
    ws.text(true);

    std::shared_ptr<const StateSnapshot> last = current();
    ws.write(asio::buffer(snapshot_to_json(*last)));
    beast::flat_buffer incoming;
    while (!stopping) {
      std::vector<std::shared_ptr<const StateSnapshot>> pending;
      {
        std::unique_lock lk(state_mu);
        state_cv.wait_for(lk, std::chrono::milliseconds(100),
                          [&] { return stopping || latest->seq > last->seq; });
        if (stopping) break;
        if (!ring.empty() && ring.front()->seq <= last->seq + 1) {
          for (const auto& s : ring) {
            if (s->seq > last->seq) pending.push_back(s);
          }
        } else if (latest->seq > last->seq) {
          pending.push_back(latest);  // fell behind the history; resync
        }
      }
      for (const auto& s : pending) {
        const bool consecutive = s->seq == last->seq + 1;
        ws.write(asio::buffer(snapshot_to_json(*s, consecutive ? last.get() : nullptr)));
        last = s;
      }
      // Drain client frames so close handshakes complete.
      while (socket.available() > 0) {
        ws.read(incoming);
        incoming.consume(incoming.size());
      }
    }
    beast::error_code ec;
    ws.close(websocket::close_code::going_away, ec);
  }

  void session(std::shared_ptr<tcp::socket> socket) {
    beast::error_code ec;
    beast::flat_buffer buffer;
    try {
      while (!stopping) {
        http::request<http::string_body> req;
        http::read(*socket, buffer, req, ec);
        if (ec) break;
        if (websocket::is_upgrade(req)) {
          if (req.target() == "/stream") stream(*socket, req);
          break;
        }
        http::response<http::string_body> res;
        try {
          res = handle(req);
        } catch (const BadRequest& e) {
          res = reply(req, e.status, json{{"error", e.what()}}.dump());
        } catch (const std::exception& e) {
          res = reply(req, http::status::bad_request, json{{"error", e.what()}}.dump());
        }
        http::write(*socket, res, ec);
        if (ec || !res.keep_alive()) break;
      }
    } catch (const std::exception&) {
      // peer went away mid-stream
    }
    socket->shutdown(tcp::socket::shutdown_both, ec);
  }

  void accept_loop() {
    while (!stopping) {
      auto socket = std::make_shared<tcp::socket>(io);
      beast::error_code ec;
      acceptor->accept(*socket, ec);
      if (stopping) break;
      if (ec) continue;
      std::lock_guard lk(conn_mu);
      for (auto it = connections.begin(); it != connections.end();) {
        if (it->done) {
          it->thread.join();
          it = connections.erase(it);
        } else {
          ++it;
        }
      }
      auto& conn = connections.emplace_back();
      conn.socket = socket;
      conn.thread = std::thread([this, socket, &conn] {
        session(socket);
        conn.done = true;
      });
    }
  }

  unsigned short start() {
    const auto address = asio::ip::make_address(config.host);
    acceptor = std::make_unique<tcp::acceptor>(io);
    const tcp::endpoint endpoint(address, config.port);
    acceptor->open(endpoint.protocol());
    acceptor->set_option(asio::socket_base::reuse_address(true));
    acceptor->bind(endpoint);
    acceptor->listen();
    bound_port = acceptor->local_endpoint().port();
    started = true;
    tick_thread = std::thread([this] { tick_loop(); });
    accept_thread = std::thread([this] { accept_loop(); });
    return bound_port;
  }

  void stop() {
    if (!started || stopping.exchange(true)) return;
    cmd_cv.notify_all();
    state_cv.notify_all();
    {
      // Wake the blocking accept.
      beast::error_code ec;
      tcp::socket poke(io);
      poke.connect(tcp::endpoint(asio::ip::make_address(config.host), bound_port), ec);
    }
    accept_thread.join();
    {
      std::lock_guard lk(conn_mu);
      for (auto& c : connections) {
        beast::error_code ec;
        c.socket->shutdown(tcp::socket::shutdown_both, ec);
      }
    }
    for (auto& c : connections) c.thread.join();
    connections.clear();
    tick_thread.join();
    beast::error_code ec;
    acceptor->close(ec);
  }
};

NavService::NavService(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

NavService::~NavService() { stop(); }

unsigned short NavService::start() {
  if (impl_->started) throw std::logic_error("service already started");
  return impl_->start();
}

void NavService::stop() { impl_->stop(); }

unsigned short NavService::port() const { return impl_->bound_port; }

std::shared_ptr<const StateSnapshot> NavService::latest() const { return impl_->current(); }

}  // namespace travnav
