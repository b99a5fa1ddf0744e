// travnav: command line front end for the navigation library.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "travnav/costmap.hpp"
#include "travnav/geometry.hpp"
#include "travnav/grounding.hpp"
#include "travnav/instruction.hpp"
#include "travnav/pgm.hpp"
#include "travnav/planner.hpp"
#include "travnav/runtime.hpp"
#include "travnav/scenario.hpp"
#include "travnav/segmentation.hpp"
#include "travnav/service.hpp"
#include "travnav/simworld.hpp"

namespace fs = std::filesystem;
using namespace travnav;

namespace {

constexpr int kExitNoResult = 3;

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw CLI::ValidationError(what, "expected a number, got '" + item + "'");
    out.push_back(v);
  }
  if (out.size() != expected) {
    throw CLI::ValidationError(what, "expected " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << data;
}

PointCloud read_cloud(const std::string& path) {
  std::istringstream in(read_file(path));
  PointCloud cloud;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    LidarPoint p;
    if (!(ls >> p.x >> p.y >> p.z)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected x y z");
    cloud.points.push_back(p);
  }
  return cloud;
}

std::vector<AttributedBox> read_boxes(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<AttributedBox> boxes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    AttributedBox b;
    int attr = -1;
    if (!(ls >> b.label >> b.box.cx >> b.box.cy >> b.box.w >> b.box.h >> attr) || (attr != 0 && attr != 1) ||
        !(b.box.w > 0) || !(b.box.h > 0)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected label cx cy w h 0|1");
    }
    b.attribute = attr ? Attribute::Traversable : Attribute::Untraversable;
    boxes.push_back(b);
  }
  return boxes;
}

VerbLexicon lexicon_from(const std::string& path) { return path.empty() ? VerbLexicon::defaults() : VerbLexicon::load(path); }

void print_directives(const std::vector<LandmarkDirective>& directives) {
  for (const auto& d : directives) std::cout << d.label << '\t' << to_int(d.attribute) << '\n';
}

std::atomic<bool> g_interrupted{false};

void save_raster(const fs::path& dir, const std::string& stem, const GridSpec& spec, std::span<const std::uint8_t> c) {
  save_costmap((dir / (stem + ".pgm")).string(), (dir / (stem + ".meta")).string(), spec, c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-aware costmap navigation tools"};
  app.require_subcommand(1);

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "Extract landmark directives from an instruction");
  std::string parse_text;
  std::string lexicon_path;
  bool parse_remote = false;
  parse_cmd->add_option("text", parse_text, "Instruction text")->required();
  parse_cmd->add_option("--lexicon", lexicon_path, "Verb lexicon JSON")->check(CLI::ExistingFile);
  parse_cmd->add_flag("--remote", parse_remote, "Use the model endpoint (MODEL_ENDPOINT, MODEL_API_KEY)");

  // ground
  auto* ground_cmd = app.add_subcommand("ground", "Synthetic grounding from a scenario pose");
  std::string ground_scenario;
  std::string ground_pose;
  std::vector<std::string> ground_labels;
  std::optional<std::uint64_t> ground_seed;
  ground_cmd->add_option("--scenario", ground_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  ground_cmd->add_option("--pose", ground_pose, "x,y,theta (default: scenario start)");
  ground_cmd->add_option("--labels", ground_labels, "Labels to ground")->required()->delimiter(',');
  ground_cmd->add_option("--seed", ground_seed, "Noise seed (default: scenario seed)");

  // project
  auto* project_cmd = app.add_subcommand("project", "Project a LiDAR point into the image");
  std::string calib_path;
  std::string point_text;
  project_cmd->add_option("--calib", calib_path, "Camera calibration JSON")->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--point", point_text, "x,y,z in the LiDAR frame")->required();

  // segment
  auto* segment_cmd = app.add_subcommand("segment", "Split a cloud into traversable and untraversable points");
  std::string seg_calib;
  std::string seg_cloud;
  std::string seg_boxes;
  segment_cmd->add_option("--calib", seg_calib, "Camera calibration JSON")->required()->check(CLI::ExistingFile);
  segment_cmd->add_option("--cloud", seg_cloud, "Point file, one 'x y z' per line")->required()->check(CLI::ExistingFile);
  segment_cmd->add_option("--boxes", seg_boxes, "Box file, one 'label cx cy w h attr' per line")
      ->required()
      ->check(CLI::ExistingFile);

  // costmap
  auto* costmap_cmd = app.add_subcommand("costmap", "Run a scenario for N ticks and export the master costmap");
  std::string cm_scenario;
  int cm_steps = 0;
  std::string cm_out;
  std::string cm_meta;
  std::string cm_instruction;
  costmap_cmd->add_option("--scenario", cm_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  costmap_cmd->add_option("--steps", cm_steps, "Ticks to run")->required()->check(CLI::NonNegativeNumber);
  costmap_cmd->add_option("--out", cm_out, "Output PGM")->required();
  costmap_cmd->add_option("--meta", cm_meta, "Sidecar path (default: <out> with .meta)");
  costmap_cmd->add_option("--instruction", cm_instruction, "Instruction for the run");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Plan on an exported costmap");
  std::string plan_map;
  std::string plan_meta;
  std::string plan_start;
  std::string plan_goal;
  unsigned plan_weight = PlannerConfig{}.cost_weight;
  plan_cmd->add_option("--map", plan_map, "Costmap PGM")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--meta", plan_meta, "Sidecar JSON (default: <map> with .meta)");
  plan_cmd->add_option("--start", plan_start, "x,y")->required();
  plan_cmd->add_option("--goal", plan_goal, "x,y")->required();
  plan_cmd->add_option("--weight", plan_weight, "Cost weight lambda");

  // sim
  auto* sim_cmd = app.add_subcommand("sim", "Run a mission");
  std::string sim_scenario;
  std::string sim_instruction;
  std::string sim_goal;
  bool sim_headless = false;
  std::string sim_serve;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_record;
  int sim_snapshot_interval = 20;
  int sim_max_ticks = MissionConfig{}.max_ticks;
  std::string sim_lexicon;
  bool sim_paused = false;
  sim_cmd->add_option("--scenario", sim_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--instruction", sim_instruction, "Instruction text");
  sim_cmd->add_option("--goal", sim_goal, "x,y (default: scenario goal)");
  auto* headless_flag = sim_cmd->add_flag("--headless", sim_headless, "Run to completion without a server");
  sim_cmd->add_option("--serve", sim_serve, "Serve the live mission on host:port")->excludes(headless_flag);
  sim_cmd->add_option("--seed", sim_seed, "Override the scenario seed");
  sim_cmd->add_option("--record", sim_record, "Write report.json, trajectory.csv and costmap PGMs here");
  sim_cmd->add_option("--snapshot-interval", sim_snapshot_interval, "Ticks between recorded costmaps")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--max-ticks", sim_max_ticks, "Tick budget")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--lexicon", sim_lexicon, "Verb lexicon JSON")->check(CLI::ExistingFile);
  sim_cmd->add_flag("--paused", sim_paused, "Start the served mission paused");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*parse_cmd) {
      std::vector<LandmarkDirective> directives;
      if (parse_remote) {
        auto client = HttpModelClient::from_environment();
        directives = remote_extract(parse_text, *client);
      } else {
        directives = parse_instruction(parse_text, lexicon_from(lexicon_path));
      }
      print_directives(directives);
      return 0;
    }

    if (*ground_cmd) {
      const Scenario sc = load_scenario(ground_scenario);
      RobotState robot = sc.start;
      if (!ground_pose.empty()) {
        const auto pose = parse_numbers(ground_pose, 3, "--pose");
        robot.x = pose[0];
        robot.y = pose[1];
        robot.theta = pose[2];
      }
      GrounderNoise noise = sc.grounder_noise;
      if (ground_seed) noise.seed = *ground_seed;
      const SceneView view = camera_view(sc.world, robot, sc.camera, sc.camera_mount);
      for (const auto& b : ground_synthetic(view, ground_labels, sc.camera, noise)) {
        std::printf("%s %.6f %.6f %.6f %.6f\n", b.label.c_str(), b.box.cx, b.box.cy, b.box.w, b.box.h);
      }
      return 0;
    }

    if (*project_cmd) {
      const CameraModel cam = load_camera_calibration(calib_path);
      const auto p = parse_numbers(point_text, 3, "--point");
      const auto px = project({p[0], p[1], p[2]}, cam);
      if (!px) {
        std::cout << "BehindCamera\n";
        return kExitNoResult;
      }
      std::printf("%.9f %.9f %.9f\n", px->u, px->v, px->depth);
      return 0;
    }

    if (*segment_cmd) {
      const CameraModel cam = load_camera_calibration(seg_calib);
      const PointCloud cloud = read_cloud(seg_cloud);
      const auto boxes = read_boxes(seg_boxes);
      const SegmentedCloud seg = segment(cloud, boxes, cam);
      std::cout << "traversable";
      for (auto i : seg.traversable) std::cout << ' ' << i;
      std::cout << "\nuntraversable";
      for (auto i : seg.untraversable) std::cout << ' ' << i;
      std::cout << '\n';
      return 0;
    }

    if (*costmap_cmd) {
      Scenario sc = load_scenario(cm_scenario);
      const Eigen::Vector2d goal = sc.goal;
      Mission mission(std::move(sc), goal);
      mission.start(cm_instruction);
      for (int i = 0; i < cm_steps && mission.phase() == MissionPhase::Running; ++i) mission.tick();
      const std::string meta = cm_meta.empty() ? fs::path(cm_out).replace_extension(".meta").string() : cm_meta;
      save_costmap(cm_out, meta, mission.costmap().spec(), mission.costmap().master());
      std::cerr << "ticks " << mission.tick_count() << ", phase " << to_string(mission.phase()) << '\n';
      return 0;
    }

    if (*plan_cmd) {
      const CostRaster raster =
          load_costmap(plan_map, plan_meta.empty() ? fs::path(plan_map).replace_extension(".meta").string() : plan_meta);
      const auto s = parse_numbers(plan_start, 2, "--start");
      const auto g = parse_numbers(plan_goal, 2, "--goal");
      PlannerConfig cfg;
      cfg.cost_weight = plan_weight;
      const auto path = plan(raster.spec, raster.costs, {s[0], s[1]}, {g[0], g[1]}, cfg);
      if (!path) {
        std::cerr << "NoPath\n";
        return kExitNoResult;
      }
      for (const auto& w : path->waypoints) std::printf("%.6f %.6f\n", w.x(), w.y());
      return 0;
    }

    if (*sim_cmd) {
      MissionConfig cfg;
      cfg.seed = sim_seed;
      cfg.max_ticks = sim_max_ticks;
      cfg.lexicon = lexicon_from(sim_lexicon);
      if (!sim_record.empty()) cfg.snapshot_interval = sim_snapshot_interval;

      if (!sim_serve.empty()) {
        ServiceConfig svc;
        const fs::path scenario_path(sim_scenario);
        svc.scenario_dir = scenario_path.parent_path().empty() ? "." : scenario_path.parent_path().string();
        svc.scenario = scenario_path.stem().string();
        svc.instruction = sim_instruction;
        if (!sim_goal.empty()) {
          const auto g = parse_numbers(sim_goal, 2, "--goal");
          svc.goal = Eigen::Vector2d(g[0], g[1]);
        }
        svc.mission = cfg;
        svc.start_paused = sim_paused;
        const auto colon = sim_serve.rfind(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--serve", "expected host:port");
        svc.host = sim_serve.substr(0, colon);
        svc.port = static_cast<unsigned short>(std::stoi(sim_serve.substr(colon + 1)));
        NavService service(svc);
        const auto port = service.start();
        std::cerr << "serving on " << svc.host << ':' << port << '\n';
        std::signal(SIGINT, [](int) { g_interrupted = true; });
        std::signal(SIGTERM, [](int) { g_interrupted = true; });
        while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
        return 0;
      }

      const Scenario sc = load_scenario(sim_scenario);
      Eigen::Vector2d goal = sc.goal;
      if (!sim_goal.empty()) {
        const auto g = parse_numbers(sim_goal, 2, "--goal");
        goal = {g[0], g[1]};
      }
      (void)sim_headless;  // headless is the only non-served mode
      const MissionReport report = run_mission(sc, sim_instruction, goal, cfg);
      std::cout << "phase " << to_string(report.phase) << " ticks " << report.ticks << '\n';
      if (report.fault) std::cout << "fault " << *report.fault << '\n';
      if (!sim_record.empty()) {
        const fs::path dir(sim_record);
        fs::create_directories(dir);
        write_file(dir / "report.json", report_to_json(report));
        write_file(dir / "trajectory.csv", trajectory_csv(report));
        for (const auto& snap : report.snapshots) {
          char stem[32];
          std::snprintf(stem, sizeof stem, "costmap_%06d", snap.tick);
          save_raster(dir, stem, report.grid, snap.master);
        }
      }
      return report.phase == MissionPhase::Reached ? 0 : 1;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
