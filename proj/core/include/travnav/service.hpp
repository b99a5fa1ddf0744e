#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "travnav/runtime.hpp"
#include "travnav/snapshot.hpp"

namespace travnav {

struct ServiceConfig {
  std::string scenario_dir;
  std::string scenario = "curtain_room";
  std::string instruction;
  std::optional<Eigen::Vector2d> goal;  // scenario goal when unset
  MissionConfig mission;
  bool start_paused = false;
  double tick_rate_hz = 20.0;    // wall-clock pacing while running; 0 runs flat out
  double stream_rate_hz = 10.0;  // snapshot publication rate while running
  std::size_t history = 512;     // published snapshots kept for stream subscribers
  std::string host = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
};

/// HTTP + WebSocket front end for one live mission.
///
///   GET  /scenarios                 {"scenarios": [...]}
///   POST /reset {scenario, seed?, instruction?, goal?: {x, y}, paused?}
///   POST /instruction {text}
///   POST /goal {x, y}               400 when outside the world bounds
///   POST /pause, POST /resume
///   POST /step {count?}             pauses, then runs `count` ticks
///   GET  /state                     latest snapshot, full grid
///   GET  /report                    MissionReport JSON of the current mission
///   WS   /stream                    full snapshot on subscribe, then deltas
///
/// Commands answer 202 with {"command_seq": n}; the first snapshot whose
/// command_seq is >= n reflects the command. A single tick thread owns the
/// mission and applies queued commands between ticks.
class NavService {
 public:
  /// Loads the initial scenario; throws ScenarioError.
  explicit NavService(ServiceConfig config);
  ~NavService();
  NavService(const NavService&) = delete;
  NavService& operator=(const NavService&) = delete;

  /// Binds, starts the tick thread and the acceptor; returns the bound port.
  /// Throws boost::system::system_error on bind failure.
  unsigned short start();
  void stop();

  unsigned short port() const;
  std::shared_ptr<const StateSnapshot> latest() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace travnav
