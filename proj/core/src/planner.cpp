#include "travnav/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace travnav {

namespace {
__extension__ typedef __int128 Int128;
}  // namespace

double PathCost::meters(double resolution) const {
  return resolution / 253.0 * (static_cast<double>(cardinal) + std::sqrt(2.0) * static_cast<double>(diagonal));
}

std::strong_ordering operator<=>(const PathCost& a, const PathCost& b) {
  // Sign of (a.c - b.c) + sqrt(2) * (a.d - b.d), computed without rounding.
  const Int128 dc = static_cast<Int128>(a.cardinal) - b.cardinal;
  const Int128 dd = static_cast<Int128>(a.diagonal) - b.diagonal;
  auto sign = [](Int128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
  int s = 0;
  if (sign(dc) >= 0 && sign(dd) >= 0) {
    s = (dc == 0 && dd == 0) ? 0 : 1;
  } else if (sign(dc) <= 0 && sign(dd) <= 0) {
    s = -1;
  } else {
    // Opposite signs: compare dc^2 against 2 dd^2.
    const Int128 lhs = dc * dc;
    const Int128 rhs = 2 * dd * dd;
    const int mag = lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);  // mag 0 impossible: sqrt(2) is irrational
    s = dc > 0 ? mag : -mag;
  }
  return s < 0 ? std::strong_ordering::less : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

PathCost step_cost(std::uint8_t to_cost, bool diagonal, const PlannerConfig& config) {
  const std::int64_t units = 253 + static_cast<std::int64_t>(config.cost_weight) * to_cost;
  return diagonal ? PathCost{0, units} : PathCost{units, 0};
}

namespace {

struct OpenEntry {
  double f;
  PathCost g;
  std::size_t index;
};

// Pops the lowest f; ties prefer the deeper node, then the lower cell index.
struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.index > b.index;
  }
};

Cell checked_cell(const GridSpec& spec, const Eigen::Vector2d& p, const char* what) {
  const auto c = spec.world_to_cell_checked(p.x(), p.y());
  if (!c) throw PlanningError(std::string(what) + " is outside the grid");
  return *c;
}

}  // namespace

std::optional<Path> plan(const GridSpec& spec, std::span<const std::uint8_t> costs, const Eigen::Vector2d& start,
                         const Eigen::Vector2d& goal, const PlannerConfig& config) {
  spec.validate();
  if (costs.size() != spec.cell_count()) throw std::invalid_argument("plan: cost grid size mismatch");
  const Cell s = checked_cell(spec, start, "start");
  const Cell t = checked_cell(spec, goal, "goal");
  if (costs[spec.index(s)] >= kLethalCost) throw PlanningError("start cell is lethal");
  if (costs[spec.index(t)] >= kLethalCost) return std::nullopt;

  const std::size_t n = spec.cell_count();
  const std::size_t start_i = spec.index(s);
  const std::size_t goal_i = spec.index(t);
  const Eigen::Vector2d goal_center = spec.cell_center(t);
  auto heuristic = [&](Cell c) { return (spec.cell_center(c) - goal_center).norm(); };
  auto blocked = [&](Cell c) { return !spec.contains(c) || costs[spec.index(c)] >= kLethalCost; };

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<PathCost> g(n);
  std::vector<bool> reached(n, false);
  std::vector<std::size_t> parent(n, kNone);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;

  reached[start_i] = true;
  open.push({heuristic(s), PathCost{}, start_i});

  static constexpr std::array<std::array<int, 2>, 8> kMoves{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

  bool found = false;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (top.g != g[top.index]) continue;  // stale
    if (top.index == goal_i) {
      found = true;
      break;
    }
    const Cell c = spec.cell_of(top.index);
    for (const auto& m : kMoves) {
      const Cell nb{c.x + m[0], c.y + m[1]};
      if (blocked(nb)) continue;
      const bool diagonal = m[0] != 0 && m[1] != 0;
      if (diagonal && (blocked({c.x + m[0], c.y}) || blocked({c.x, c.y + m[1]}))) continue;
      const std::size_t ni = spec.index(nb);
      const PathCost cand = top.g + step_cost(costs[ni], diagonal, config);
      if (reached[ni] && !(cand < g[ni])) continue;
      reached[ni] = true;
      g[ni] = cand;
      parent[ni] = top.index;
      open.push({cand.meters(spec.resolution) + heuristic(nb), cand, ni});
    }
  }
  if (!found) return std::nullopt;

  Path path;
  for (std::size_t i = goal_i; i != kNone; i = parent[i]) {
    path.cells.push_back(spec.cell_of(i));
    if (i == start_i) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  path.waypoints.reserve(path.cells.size());
  for (const auto& c : path.cells) path.waypoints.push_back(spec.cell_center(c));
  path.exact_cost = g[goal_i];
  path.total_cost = path.exact_cost.meters(spec.resolution);
  return path;
}

std::optional<Path> plan(const Costmap& map, const Eigen::Vector2d& start, const Eigen::Vector2d& goal,
                         const PlannerConfig& config) {
  return plan(map.spec(), map.master(), start, goal, config);
}

}  // namespace travnav
