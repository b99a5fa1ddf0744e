#include "travnav/snapshot.hpp"

#include <stdexcept>

#include <json.hpp>

namespace travnav {

using nlohmann::json;

StateSnapshot capture_snapshot(const Mission& mission, std::uint64_t seq, std::uint64_t command_seq, bool paused) {
  StateSnapshot s;
  s.seq = seq;
  s.command_seq = command_seq;
  s.tick = mission.tick_count();
  s.phase = mission.phase();
  s.paused = paused;
  s.scenario = mission.scenario().name;
  s.robot = mission.robot();
  s.goal = mission.goal();
  if (const auto& path = mission.path()) {
    s.path.assign(path->waypoints.begin() + static_cast<std::ptrdiff_t>(mission.path_progress()),
                  path->waypoints.end());
  }
  s.directives = mission.directives();
  s.frame = mission.last_frame();
  s.grid = mission.costmap().spec();
  s.bounds = mission.scenario().world.bounds;
  const auto master = mission.costmap().master();
  s.master.assign(master.begin(), master.end());
  const auto overrides = mission.costmap().override_layer();
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    if (overrides[i]) s.overrides.push_back(static_cast<std::uint32_t>(i));
  }
  return s;
}

std::vector<std::pair<std::uint32_t, std::uint8_t>> grid_delta(const std::vector<std::uint8_t>& from,
                                                               const std::vector<std::uint8_t>& to) {
  if (from.size() != to.size()) throw std::invalid_argument("grid_delta: size mismatch");
  std::vector<std::pair<std::uint32_t, std::uint8_t>> out;
  for (std::size_t i = 0; i < to.size(); ++i) {
    if (from[i] != to[i]) out.emplace_back(static_cast<std::uint32_t>(i), to[i]);
  }
  return out;
}

namespace {

json points_json(const std::vector<Eigen::Vector2d>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x(), p.y()});
  return a;
}

}  // namespace

std::string snapshot_to_json(const StateSnapshot& s, const StateSnapshot* base) {
  json j;
  j["type"] = "snapshot";
  j["seq"] = s.seq;
  j["command_seq"] = s.command_seq;
  j["tick"] = s.tick;
  j["phase"] = std::string(to_string(s.phase));
  j["paused"] = s.paused;
  j["scenario"] = s.scenario;
  j["robot"] = {{"x", s.robot.x}, {"y", s.robot.y}, {"theta", s.robot.theta}};
  j["goal"] = {{"x", s.goal.x()}, {"y", s.goal.y()}};
  j["path"] = points_json(s.path);
  json dirs = json::array();
  for (const auto& d : s.directives) dirs.push_back({{"label", d.label}, {"attribute", to_int(d.attribute)}});
  j["directives"] = dirs;
  json boxes = json::array();
  for (const auto& b : s.frame.boxes) {
    boxes.push_back({{"label", b.label},
                     {"attribute", to_int(b.attribute)},
                     {"left", b.box.left()},
                     {"top", b.box.top()},
                     {"right", b.box.right()},
                     {"bottom", b.box.bottom()}});
  }
  j["boxes"] = boxes;
  j["points"] = {{"tra", points_json(s.frame.traversable_points)},
                 {"untra", points_json(s.frame.untraversable_points)}};
  j["bounds"] = {s.bounds.min_x, s.bounds.min_y, s.bounds.max_x, s.bounds.max_y};
  j["grid_spec"] = {{"resolution", s.grid.resolution},
                    {"origin", {s.grid.origin_x, s.grid.origin_y}},
                    {"width", s.grid.width},
                    {"height", s.grid.height}};
  j["overrides"] = s.overrides;
  json grid;
  if (base && base->grid == s.grid && base->master.size() == s.master.size()) {
    json changes = json::array();
    for (const auto& [i, c] : grid_delta(base->master, s.master)) changes.push_back({i, c});
    grid = {{"encoding", "delta"}, {"base_seq", base->seq}, {"changes", std::move(changes)}};
  } else {
    grid = {{"encoding", "full"}, {"cells", s.master}};
  }
  j["grid"] = std::move(grid);
  return j.dump();
}

void apply_grid_message(const std::string& message, std::vector<std::uint8_t>& cells) {
  json j;
  try {
    j = json::parse(message);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: ") + e.what());
  }
  if (!j.contains("grid") || !j["grid"].contains("encoding")) throw std::invalid_argument("snapshot: no grid");
  const auto& g = j["grid"];
  try {
    if (g["encoding"] == "full") {
      cells = g.at("cells").get<std::vector<std::uint8_t>>();
      return;
    }
    if (g["encoding"] != "delta") throw std::invalid_argument("snapshot: unknown grid encoding");
    if (cells.empty()) throw std::invalid_argument("snapshot: delta without a base grid");
    for (const auto& ch : g.at("changes")) {
      const auto i = ch.at(0).get<std::size_t>();
      if (i >= cells.size()) throw std::invalid_argument("snapshot: delta index out of range");
      cells[i] = ch.at(1).get<std::uint8_t>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: ") + e.what());
  }
}

}  // namespace travnav
