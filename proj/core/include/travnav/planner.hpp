#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "travnav/costmap.hpp"

namespace travnav {

struct PlannerConfig {
  /// Weight of cell cost against distance: a step costs
  /// length * (1 + cost_weight * c / 253), c the destination cost.
  unsigned cost_weight = 10;
};

/// Exact path cost in units of resolution/253:
/// cardinal + sqrt(2) * diagonal, each a sum of (253 + weight * c) terms.
/// Comparisons are exact, so equal-cost paths found by different searches
/// compare equal.
struct PathCost {
  std::int64_t cardinal = 0;
  std::int64_t diagonal = 0;

  double meters(double resolution) const;
  PathCost operator+(const PathCost& o) const { return {cardinal + o.cardinal, diagonal + o.diagonal}; }
  friend bool operator==(const PathCost&, const PathCost&) = default;
  friend std::strong_ordering operator<=>(const PathCost& a, const PathCost& b);
};

struct Path {
  std::vector<Eigen::Vector2d> waypoints;  // world cell centers
  std::vector<Cell> cells;
  double total_cost = 0.0;  // meters-weighted
  PathCost exact_cost;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cost of stepping onto `to_cost` with a cardinal or diagonal move.
PathCost step_cost(std::uint8_t to_cost, bool diagonal, const PlannerConfig& config);

/// 8-connected A* over a cost grid. Cells at 254 are blocked, and a diagonal
/// move needs both adjacent cardinal cells unblocked. Returns std::nullopt
/// when the goal is blocked or unreachable. Throws PlanningError when start
/// or goal lies outside the grid or the start cell is lethal.
std::optional<Path> plan(const GridSpec& spec, std::span<const std::uint8_t> costs, const Eigen::Vector2d& start,
                         const Eigen::Vector2d& goal, const PlannerConfig& config = {});

std::optional<Path> plan(const Costmap& map, const Eigen::Vector2d& start, const Eigen::Vector2d& goal,
                         const PlannerConfig& config = {});

}  // namespace travnav
