#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "travnav/costmap.hpp"
#include "travnav/grounding.hpp"
#include "travnav/instruction.hpp"
#include "travnav/planner.hpp"
#include "travnav/scenario.hpp"
#include "travnav/segmentation.hpp"
#include "travnav/simworld.hpp"

namespace travnav {

enum class MissionPhase { Idle, Running, Reached, NoPathStalled, Faulted, TimedOut };

std::string_view to_string(MissionPhase phase);

struct MissionConfig {
  double dt = 0.05;
  std::optional<double> speed;  // overrides the scenario's robot speed
  double threshold = 0.3;
  int replan_interval = 5;
  int stall_budget = 40;
  int max_ticks = 6000;
  double lookahead = 0.2;  // meters of path ahead the robot steers at
  int snapshot_interval = 0;  // ticks between costmap snapshots; 0 disables
  PlannerConfig planner;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  VerbLexicon lexicon = VerbLexicon::defaults();
};

struct ScheduledInstruction {
  int tick = 0;  // applied before this tick runs
  std::string text;
};

struct TrajectorySample {
  int tick = 0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct CostmapSnapshot {
  int tick = 0;
  std::vector<std::uint8_t> master;
};

struct MissionReport {
  std::string scenario;
  std::string instruction;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double threshold = 0.0;
  std::uint64_t seed = 0;
  MissionPhase phase = MissionPhase::Idle;
  int ticks = 0;
  std::vector<TrajectorySample> trajectory;  // includes the start pose at tick 0
  std::vector<bool> plan_available;          // one entry per executed tick
  std::vector<LandmarkDirective> directives;
  std::vector<ScheduledInstruction> injections;
  std::optional<std::string> fault;
  std::vector<std::string> unpermitted_entries;
  GridSpec grid;
  std::vector<CostmapSnapshot> snapshots;
  std::uint64_t final_map_hash = 0;
};

std::string report_to_json(const MissionReport& report);
/// `tick,x,y,theta` with a header line.
std::string trajectory_csv(const MissionReport& report);
std::uint64_t hash_grid(std::span<const std::uint8_t> cells);

/// What the last tick perceived, for live views.
struct FrameObservation {
  std::vector<AttributedBox> boxes;
  std::vector<Eigen::Vector2d> traversable_points;    // world frame
  std::vector<Eigen::Vector2d> untraversable_points;  // world frame
};

/// One closed-loop mission: parse once, then each tick ground, attach
/// attributes, segment (or fall back to the raw cloud), update the costmap,
/// replan when due and step the robot. Not thread-safe; one owner drives it.
class Mission {
 public:
  Mission(Scenario scenario, const Eigen::Vector2d& goal, MissionConfig config = {});

  /// Parses the instruction and enters Running, or Reached when the robot
  /// already sits within the threshold of the goal.
  void start(std::string_view instruction);

  /// Replaces the directives; a stalled mission resumes. Applies before the next tick.
  void inject_instruction(std::string_view text);

  /// Returns false (and changes nothing) when the goal lies outside the world.
  bool set_goal(const Eigen::Vector2d& goal);

  /// Runs one loop iteration. No-op unless Running.
  void tick();

  /// Ticks until a terminal phase.
  void run_to_completion();

  MissionPhase phase() const { return phase_; }
  bool terminal() const;
  int tick_count() const { return tick_; }
  const Scenario& scenario() const { return scenario_; }
  const MissionConfig& config() const { return config_; }
  const RobotState& robot() const { return robot_; }
  const Costmap& costmap() const { return costmap_; }
  const std::optional<Path>& path() const { return path_; }
  const Eigen::Vector2d& goal() const { return goal_; }
  const std::vector<LandmarkDirective>& directives() const { return directives_; }
  const FrameObservation& last_frame() const { return frame_; }
  /// Index of the path waypoint closest to the robot; 0 without a path.
  std::size_t path_progress() const;

  MissionReport report() const;

 private:
  bool path_blocked() const;
  std::map<std::string, bool> traversal_permission() const;
  void record_pose();

  Scenario scenario_;
  MissionConfig config_;
  std::uint64_t seed_ = 0;
  Eigen::Vector2d goal_;
  RobotState robot_;
  Costmap costmap_;
  std::optional<Path> path_;
  std::vector<LandmarkDirective> directives_;
  bool directives_changed_ = false;
  MissionPhase phase_ = MissionPhase::Idle;
  int tick_ = 0;
  int stalled_plans_ = 0;
  FrameObservation frame_;
  MissionReport report_;
};

/// Headless run. Scheduled instructions are injected before their tick.
MissionReport run_mission(const Scenario& scenario, std::string_view instruction, const Eigen::Vector2d& goal,
                          const MissionConfig& config = {}, std::span<const ScheduledInstruction> schedule = {});

}  // namespace travnav
