#include "travnav/runtime.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace travnav {

std::string_view to_string(MissionPhase phase) {
  switch (phase) {
    case MissionPhase::Idle: return "Idle";
    case MissionPhase::Running: return "Running";
    case MissionPhase::Reached: return "Reached";
    case MissionPhase::NoPathStalled: return "NoPathStalled";
    case MissionPhase::Faulted: return "Faulted";
    case MissionPhase::TimedOut: return "TimedOut";
  }
  return "Unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent per-tick streams for the grounder and the LiDAR.
std::uint64_t tick_seed(std::uint64_t seed, int tick, std::uint64_t stream) {
  return splitmix64(splitmix64(seed ^ (stream * 0x632be59bd9b4e019ULL)) + static_cast<std::uint64_t>(tick));
}

}  // namespace

std::uint64_t hash_grid(std::span<const std::uint8_t> cells) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (auto c : cells) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Mission::Mission(Scenario scenario, const Eigen::Vector2d& goal, MissionConfig config)
    : scenario_(std::move(scenario)), config_(std::move(config)), goal_(goal) {
  if (!(config_.threshold > 0.0)) throw std::invalid_argument("mission: threshold must be positive");
  if (!(config_.dt >= 0.0)) throw std::invalid_argument("mission: dt must be non-negative");
  if (!(config_.lookahead >= 0.0)) throw std::invalid_argument("mission: lookahead must be non-negative");
  if (config_.replan_interval < 1 || config_.stall_budget < 1 || config_.max_ticks < 0) {
    throw std::invalid_argument("mission: invalid replan, stall or tick budget");
  }
  if (!scenario_.world.bounds.contains(goal_)) throw std::invalid_argument("mission: goal outside world bounds");
  config_.lexicon.validate();
  seed_ = config_.seed.value_or(scenario_.seed);
  robot_ = scenario_.start;
  if (config_.speed) robot_.speed = *config_.speed;
  costmap_ = scenario_.initial_costmap();

  report_.scenario = scenario_.name;
  report_.goal = goal_;
  report_.threshold = config_.threshold;
  report_.seed = seed_;
  report_.grid = scenario_.grid;
}

bool Mission::terminal() const {
  return phase_ == MissionPhase::Reached || phase_ == MissionPhase::NoPathStalled ||
         phase_ == MissionPhase::Faulted || phase_ == MissionPhase::TimedOut;
}

void Mission::record_pose() { report_.trajectory.push_back({tick_, robot_.x, robot_.y, robot_.theta}); }

void Mission::start(std::string_view instruction) {
  if (phase_ != MissionPhase::Idle) throw std::logic_error("mission already started");
  report_.instruction = std::string(instruction);
  directives_ = parse_instruction(instruction, config_.lexicon);
  directives_changed_ = true;
  record_pose();
  phase_ = (robot_.position() - goal_).norm() <= config_.threshold ? MissionPhase::Reached : MissionPhase::Running;
}

void Mission::inject_instruction(std::string_view text) {
  directives_ = parse_instruction(text, config_.lexicon);
  directives_changed_ = true;
  report_.injections.push_back({tick_, std::string(text)});
  if (phase_ == MissionPhase::NoPathStalled) {
    phase_ = MissionPhase::Running;
    stalled_plans_ = 0;
  }
}

bool Mission::set_goal(const Eigen::Vector2d& goal) {
  if (!scenario_.world.bounds.contains(goal)) return false;
  goal_ = goal;
  report_.goal = goal;
  path_.reset();
  stalled_plans_ = 0;
  if (phase_ == MissionPhase::Reached || phase_ == MissionPhase::NoPathStalled) phase_ = MissionPhase::Running;
  if (phase_ == MissionPhase::Running && (robot_.position() - goal_).norm() <= config_.threshold) {
    phase_ = MissionPhase::Reached;
  }
  return true;
}

std::map<std::string, bool> Mission::traversal_permission() const {
  std::map<std::string, bool> permission;
  for (const auto& obj : scenario_.world.objects) {
    bool allowed = false;
    bool denied = false;
    for (const auto& d : directives_) {
      if (!label_matches(obj.label, d.label)) continue;
      (d.attribute == Attribute::Traversable ? allowed : denied) = true;
    }
    permission[obj.label] = allowed && !denied;
  }
  return permission;
}

std::size_t Mission::path_progress() const {
  if (!path_) return 0;
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path_->waypoints.size(); ++i) {
    const double d = (path_->waypoints[i] - robot_.position()).squaredNorm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  return nearest;
}

bool Mission::path_blocked() const {
  if (!path_) return true;
  const auto& cells = path_->cells;
  for (std::size_t i = path_progress(); i < cells.size(); ++i) {
    if (costmap_.cost(cells[i]) >= kLethalCost) return true;
  }
  return false;
}

void Mission::tick() {
  if (phase_ != MissionPhase::Running) return;
  const int t = tick_;

  // Ground the directive labels in the current camera view.
  frame_ = FrameObservation{};
  std::vector<AttributedBox> boxes;
  if (!directives_.empty()) {
    std::vector<std::string> labels;
    for (const auto& d : directives_) labels.push_back(d.label);
    const SceneView view = camera_view(scenario_.world, robot_, scenario_.camera, scenario_.camera_mount);
    GrounderNoise noise = scenario_.grounder_noise;
    noise.seed = tick_seed(seed_, t, 1);
    boxes = attach_attributes(ground_synthetic(view, labels, scenario_.camera, noise), directives_);
  }

  const PointCloud cloud = lidar_scan(scenario_.world, robot_, scenario_.lidar, tick_seed(seed_, t, 2));
  const Eigen::Isometry3d sensor = lidar_to_world(robot_, scenario_.lidar);
  SegmentedCloud seg;
  if (!boxes.empty()) {
    seg = segment(cloud, boxes, scenario_.camera);
    costmap_ = update_costmap(costmap_, seg, cloud, robot_.pose(), sensor);
  } else {
    seg.untraversable.resize(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) seg.untraversable[i] = i;
    costmap_ = update_costmap_fallback(costmap_, cloud, robot_.pose(), sensor);
  }
  frame_.boxes = boxes;
  for (auto i : seg.traversable) frame_.traversable_points.push_back((sensor * cloud.points[i].vec()).head<2>());
  for (auto i : seg.untraversable) frame_.untraversable_points.push_back((sensor * cloud.points[i].vec()).head<2>());

  const bool due = !path_ || directives_changed_ || t % config_.replan_interval == 0 || path_blocked();
  directives_changed_ = false;
  if (due) {
    try {
      path_ = plan(costmap_, robot_.position(), goal_, config_.planner);
    } catch (const PlanningError&) {
      path_.reset();
    }
    stalled_plans_ = path_ ? 0 : stalled_plans_ + 1;
  }
  report_.plan_available.push_back(path_.has_value());

  if (!path_) {
    ++tick_;
    record_pose();
    if (stalled_plans_ >= config_.stall_budget) {
      phase_ = MissionPhase::NoPathStalled;
    } else if (tick_ >= config_.max_ticks) {
      phase_ = MissionPhase::TimedOut;
    }
    return;
  }

  const StepResult step = step_robot(scenario_.world, robot_, *path_, config_.dt, traversal_permission(),
                                       config_.lookahead);
  robot_ = step.state;
  for (const auto& label : step.unpermitted) {
    auto& list = report_.unpermitted_entries;
    if (std::find(list.begin(), list.end(), label) == list.end()) list.push_back(label);
  }
  ++tick_;
  record_pose();
  if (config_.snapshot_interval > 0 && tick_ % config_.snapshot_interval == 0) {
    report_.snapshots.push_back({tick_, std::vector<std::uint8_t>(costmap_.master().begin(), costmap_.master().end())});
  }

  if (step.collision) {
    report_.fault = *step.collision;
    phase_ = MissionPhase::Faulted;
  } else if ((robot_.position() - goal_).norm() <= config_.threshold) {
    phase_ = MissionPhase::Reached;
  } else if (tick_ >= config_.max_ticks) {
    phase_ = MissionPhase::TimedOut;
  }
}

void Mission::run_to_completion() {
  while (phase_ == MissionPhase::Running) tick();
}

MissionReport Mission::report() const {
  MissionReport r = report_;
  r.phase = phase_;
  r.ticks = tick_;
  r.directives = directives_;
  r.final_map_hash = hash_grid(costmap_.master());
  return r;
}

MissionReport run_mission(const Scenario& scenario, std::string_view instruction, const Eigen::Vector2d& goal,
                          const MissionConfig& config, std::span<const ScheduledInstruction> schedule) {
  Mission mission(scenario, goal, config);
  mission.start(instruction);
  std::vector<ScheduledInstruction> pending(schedule.begin(), schedule.end());
  std::stable_sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; });
  std::size_t next = 0;
  for (;;) {
    while (next < pending.size() && pending[next].tick <= mission.tick_count()) {
      mission.inject_instruction(pending[next++].text);
    }
    if (mission.phase() != MissionPhase::Running) break;
    mission.tick();
  }
  return mission.report();
}

std::string report_to_json(const MissionReport& r) {
  using nlohmann::json;
  json j;
  j["scenario"] = r.scenario;
  j["instruction"] = r.instruction;
  j["goal"] = {r.goal.x(), r.goal.y()};
  j["threshold"] = r.threshold;
  j["seed"] = r.seed;
  j["phase"] = std::string(to_string(r.phase));
  j["ticks"] = r.ticks;
  json dirs = json::array();
  for (const auto& d : r.directives) {
    dirs.push_back({{"label", d.label}, {"attribute", to_int(d.attribute)}, {"action", d.source_action}});
  }
  j["directives"] = dirs;
  json inj = json::array();
  for (const auto& i : r.injections) inj.push_back({{"tick", i.tick}, {"text", i.text}});
  j["injections"] = inj;
  j["fault"] = r.fault ? json(*r.fault) : json(nullptr);
  j["unpermitted_entries"] = r.unpermitted_entries;
  json traj = json::array();
  for (const auto& s : r.trajectory) traj.push_back({s.tick, s.x, s.y, s.theta});
  j["trajectory"] = traj;
  std::string avail;
  avail.reserve(r.plan_available.size());
  for (bool b : r.plan_available) avail.push_back(b ? '1' : '0');
  j["plan_available"] = avail;
  j["grid"] = {{"resolution", r.grid.resolution},
               {"origin", {r.grid.origin_x, r.grid.origin_y}},
               {"width", r.grid.width},
               {"height", r.grid.height}};
  json snaps = json::array();
  for (const auto& s : r.snapshots) snaps.push_back({{"tick", s.tick}, {"hash", hash_grid(s.master)}});
  j["snapshots"] = snaps;
  j["final_map_hash"] = r.final_map_hash;
  return j.dump(2) + "\n";
}

std::string trajectory_csv(const MissionReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "tick,x,y,theta\n";
  for (const auto& s : r.trajectory) out << s.tick << ',' << s.x << ',' << s.y << ',' << s.theta << '\n';
  return out.str();
}

}  // namespace travnav
