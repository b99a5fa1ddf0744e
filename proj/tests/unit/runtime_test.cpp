#include <gtest/gtest.h>

#include "random_inputs.hpp"
#include "travnav/runtime.hpp"

using namespace travnav;

namespace {

const char* kCurtain = "Go through the curtain and watch out the chair.";

Scenario curtain_room() { return load_scenario(testing_support::scenario_path("curtain_room")); }

}  // namespace

TEST(Mission, ReachesGoalThroughCurtain) {
  const Scenario sc = curtain_room();
  const auto r = run_mission(sc, kCurtain, sc.goal);
  EXPECT_EQ(r.phase, MissionPhase::Reached);
  EXPECT_FALSE(r.fault);
  EXPECT_TRUE(r.unpermitted_entries.empty());
  ASSERT_EQ(r.directives.size(), 2u);
  EXPECT_EQ(r.trajectory.front().tick, 0);
  EXPECT_EQ(static_cast<int>(r.trajectory.size()), r.ticks + 1);
  EXPECT_EQ(static_cast<int>(r.plan_available.size()), r.ticks);
  EXPECT_LE((Eigen::Vector2d(r.trajectory.back().x, r.trajectory.back().y) - sc.goal).norm(), r.threshold);
}

TEST(Mission, DeterministicReport) {
  const Scenario sc = curtain_room();
  MissionConfig cfg;
  cfg.snapshot_interval = 25;
  const auto a = report_to_json(run_mission(sc, kCurtain, sc.goal, cfg));
  const auto b = report_to_json(run_mission(sc, kCurtain, sc.goal, cfg));
  EXPECT_EQ(a, b);
  cfg.seed = 99;
  EXPECT_NE(a, report_to_json(run_mission(sc, kCurtain, sc.goal, cfg)));
}

TEST(Mission, StallsWithoutDirectives) {
  const Scenario sc = curtain_room();
  MissionConfig cfg;
  cfg.stall_budget = 10;
  const auto r = run_mission(sc, "", sc.goal, cfg);
  EXPECT_EQ(r.phase, MissionPhase::NoPathStalled);
  EXPECT_TRUE(std::none_of(r.plan_available.begin(), r.plan_available.end(), [](bool b) { return b; }));
}

TEST(Mission, InjectionResumesStalledMission) {
  const Scenario sc = curtain_room();
  MissionConfig cfg;
  cfg.stall_budget = 10;
  Mission m(sc, sc.goal, cfg);
  m.start("");
  m.run_to_completion();
  ASSERT_EQ(m.phase(), MissionPhase::NoPathStalled);
  m.inject_instruction(kCurtain);
  EXPECT_EQ(m.phase(), MissionPhase::Running);
  m.run_to_completion();
  EXPECT_EQ(m.phase(), MissionPhase::Reached);
  EXPECT_EQ(m.report().injections.size(), 1u);
}

TEST(Mission, ScheduledInjectionMatchesManualDrive) {
  const Scenario sc = curtain_room();
  const std::vector<ScheduledInstruction> schedule{{15, kCurtain}};
  const auto scheduled = run_mission(sc, "", sc.goal, {}, schedule);
  Mission m(sc, sc.goal);
  m.start("");
  for (int i = 0; i < 15; ++i) m.tick();
  m.inject_instruction(kCurtain);
  m.run_to_completion();
  EXPECT_EQ(report_to_json(scheduled), report_to_json(m.report()));
}

TEST(Mission, GoalValidation) {
  const Scenario sc = curtain_room();
  EXPECT_THROW(Mission(sc, {50, 50}), std::invalid_argument);
  MissionConfig bad;
  bad.threshold = 0;
  EXPECT_THROW(Mission(sc, sc.goal, bad), std::invalid_argument);
  Mission m(sc, sc.goal);
  EXPECT_FALSE(m.set_goal({-1, 0}));
  EXPECT_TRUE(m.set_goal({1.5, 1.0}));
  m.start("");
  m.run_to_completion();
  EXPECT_EQ(m.phase(), MissionPhase::Reached);
}

TEST(Mission, StartAtGoalReachesImmediately) {
  const Scenario sc = curtain_room();
  Mission m(sc, sc.start.position());
  m.start("");
  EXPECT_EQ(m.phase(), MissionPhase::Reached);
  EXPECT_EQ(m.tick_count(), 0);
}

TEST(Report, CsvAndJsonShape) {
  const Scenario sc = curtain_room();
  MissionConfig cfg;
  cfg.max_ticks = 5;
  const auto r = run_mission(sc, kCurtain, sc.goal, cfg);
  EXPECT_EQ(r.phase, MissionPhase::TimedOut);
  const auto csv = trajectory_csv(r);
  EXPECT_EQ(csv.rfind("tick,x,y,theta\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  const auto json = report_to_json(r);
  EXPECT_NE(json.find("\"phase\": \"TimedOut\""), std::string::npos);
  EXPECT_EQ(hash_grid(std::vector<std::uint8_t>{}), 14695981039346656037ull);
}

TEST(Mission, StalledMissionFindsPathWithinReplanInterval) {
  const Scenario sc = curtain_room();
  MissionConfig cfg;
  cfg.stall_budget = 10;
  Mission m(sc, sc.goal, cfg);
  m.start("");
  m.run_to_completion();
  ASSERT_EQ(m.phase(), MissionPhase::NoPathStalled);
  m.inject_instruction("pass through the curtain");
  bool found = false;
  for (int i = 0; i < cfg.replan_interval && !found; ++i) {
    m.tick();
    found = m.path().has_value();
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(m.phase(), MissionPhase::Running);
}

TEST(Mission, DemotingCurtainMidCrossingClosesIt) {
  const Scenario sc = curtain_room();
  Mission m(sc, sc.goal);
  m.start(kCurtain);
  while (m.phase() == MissionPhase::Running && m.robot().x < 2.6) m.tick();
  ASSERT_EQ(m.phase(), MissionPhase::Running);
  ASSERT_TRUE(m.path());
  const auto& g = m.costmap().spec();
  std::vector<std::size_t> curtain_cells;
  for (int y = g.world_to_cell(0, 1.55).y; y <= g.world_to_cell(0, 2.45).y; ++y) {
    const std::size_t i = g.index({g.world_to_cell(3.025, 0).x, y});
    if (m.costmap().override_layer()[i]) curtain_cells.push_back(i);
  }
  ASSERT_FALSE(curtain_cells.empty());

  m.inject_instruction("Avoid the curtain and watch out the chair.");
  for (int i = 0; i < 3 && m.phase() == MissionPhase::Running; ++i) m.tick();
  int relethal = 0;
  for (auto i : curtain_cells) {
    if (m.costmap().master()[i] == kLethalCost) ++relethal;
  }
  EXPECT_GT(relethal, 0);
  if (m.path()) {
    for (const auto& c : m.path()->cells) EXPECT_LT(m.costmap().cost(c), kLethalCost);
  }
  m.run_to_completion();
  EXPECT_NE(m.phase(), MissionPhase::Reached);
}
