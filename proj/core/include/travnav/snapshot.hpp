#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "travnav/runtime.hpp"

namespace travnav {

/// Immutable view of a live mission, published by the tick thread.
struct StateSnapshot {
  std::uint64_t seq = 0;          // publication counter, strictly increasing
  std::uint64_t command_seq = 0;  // last command applied before capture
  int tick = 0;
  MissionPhase phase = MissionPhase::Idle;
  bool paused = false;
  std::string scenario;
  RobotState robot;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> path;  // remaining waypoints
  std::vector<LandmarkDirective> directives;
  FrameObservation frame;
  GridSpec grid;
  WorldBounds bounds;
  std::vector<std::uint8_t> master;
  std::vector<std::uint32_t> overrides;  // indices of overridden cells
};

StateSnapshot capture_snapshot(const Mission& mission, std::uint64_t seq, std::uint64_t command_seq, bool paused);

/// (index, cost) for every cell that differs. Both grids must be the same size.
std::vector<std::pair<std::uint32_t, std::uint8_t>> grid_delta(const std::vector<std::uint8_t>& from,
                                                               const std::vector<std::uint8_t>& to);

/// JSON text of a snapshot. With `base` (same grid geometry) the grid is sent
/// as {"encoding":"delta","base_seq":n,"changes":[[i,c],...]}, otherwise as
/// {"encoding":"full","cells":[...]}.
std::string snapshot_to_json(const StateSnapshot& snapshot, const StateSnapshot* base = nullptr);

/// Client-side reconstruction: applies the "grid" member of a snapshot
/// message to `cells`. Throws std::invalid_argument on malformed input or a
/// delta against an empty grid.
void apply_grid_message(const std::string& message, std::vector<std::uint8_t>& cells);

}  // namespace travnav
