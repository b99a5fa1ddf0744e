#include "travnav/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace travnav {

Costmap Scenario::initial_costmap() const { return Costmap(grid, static_layer, inflation_radius); }

namespace {

using nlohmann::json;

Polygon polygon_from(const json& j) {
  Polygon poly;
  for (const auto& v : j) poly.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  poly.validate();
  return poly;
}

MountPose mount_from(const json& j, MountPose m) {
  m.x = j.value("x", m.x);
  m.y = j.value("y", m.y);
  m.z = j.value("z", m.z);
  m.yaw = j.value("yaw", m.yaw);
  m.pitch = j.value("pitch", m.pitch);
  return m;
}

Scenario parse(const json& j) {
  Scenario sc;
  sc.name = j.value("name", std::string("unnamed"));

  const auto& b = j.at("bounds");
  sc.world.bounds = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
  if (!(sc.world.bounds.max_x > sc.world.bounds.min_x) || !(sc.world.bounds.max_y > sc.world.bounds.min_y)) {
    throw ScenarioError("bounds must have positive extent");
  }

  const json grid = j.value("grid", json::object());
  sc.grid.resolution = grid.value("resolution", 0.05);
  sc.inflation_radius = grid.value("inflation_radius", 0.2);
  sc.grid.origin_x = sc.world.bounds.min_x;
  sc.grid.origin_y = sc.world.bounds.min_y;
  sc.grid.width = static_cast<int>(std::ceil((sc.world.bounds.max_x - sc.world.bounds.min_x) / sc.grid.resolution - 1e-9));
  sc.grid.height = static_cast<int>(std::ceil((sc.world.bounds.max_y - sc.world.bounds.min_y) / sc.grid.resolution - 1e-9));
  sc.grid.validate();

  for (const auto& s : j.value("static_map", json::array())) {
    SceneObject obj;
    obj.label = s.value("label", std::string("structure"));
    obj.footprint = polygon_from(s.at("polygon"));
    const json band = s.value("height_band", json::array({0.0, 2.5}));
    obj.z_min = band.at(0).get<double>();
    obj.z_max = band.at(1).get<double>();
    obj.truly_traversable = false;
    obj.mapped = true;
    sc.world.objects.push_back(std::move(obj));
  }
  for (const auto& o : j.value("objects", json::array())) {
    SceneObject obj;
    obj.label = o.at("label").get<std::string>();
    obj.footprint = polygon_from(o.at("polygon"));
    obj.truly_traversable = o.at("truly_traversable").get<bool>();
    const auto& band = o.at("height_band");
    obj.z_min = band.at(0).get<double>();
    obj.z_max = band.at(1).get<double>();
    obj.mapped = o.value("mapped", false);
    if (!(obj.z_max > obj.z_min)) throw ScenarioError("object " + obj.label + ": empty height band");
    sc.world.objects.push_back(std::move(obj));
  }

  const auto& robot = j.at("robot");
  const auto& start = robot.at("start");
  sc.start = {start.at(0).get<double>(), start.at(1).get<double>(), start.at(2).get<double>(),
              robot.value("speed", 0.5)};
  if (!sc.world.bounds.contains(sc.start.position())) throw ScenarioError("robot start outside world bounds");
  sc.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};

  const json lidar = j.value("lidar", json::object());
  sc.lidar.beam_count = lidar.value("beam_count", sc.lidar.beam_count);
  sc.lidar.max_range = lidar.value("max_range", sc.lidar.max_range);
  sc.lidar.min_range = lidar.value("min_range", sc.lidar.min_range);
  sc.lidar.noise_sigma = lidar.value("noise_sigma", sc.lidar.noise_sigma);
  sc.lidar.mount = mount_from(lidar.value("mount", json::object()), sc.lidar.mount);
  if (sc.lidar.beam_count < 1 || !(sc.lidar.max_range > 0.0)) throw ScenarioError("invalid lidar spec");

  const json cam = j.value("camera", json::object());
  CameraModel cm = CameraModel::default_synthetic();
  cm.f = cam.value("f", cm.f);
  cm.sx = cam.value("sx", cm.sx);
  cm.sy = cam.value("sy", cm.sy);
  cm.skew = cam.value("k", cm.skew);
  cm.u0 = cam.value("u0", cm.u0);
  cm.v0 = cam.value("v0", cm.v0);
  cm.image_w = cam.value("image_w", cm.image_w);
  cm.image_h = cam.value("image_h", cm.image_h);
  sc.camera_mount = mount_from(cam.value("mount", json::object()), MountPose{0.0, 0.0, 0.35, 0.0, 0.0});
  const Eigen::Isometry3d ext = lidar_to_camera(sc.lidar.mount, sc.camera_mount);
  cm.rotation = ext.linear();
  cm.translation = ext.translation();
  cm.validate();
  sc.camera = cm;

  const json noise = j.value("grounder_noise", json::object());
  sc.grounder_noise.split_probability = noise.value("split_probability", 0.0);
  sc.grounder_noise.center_jitter_px = noise.value("center_jitter_px", 0.0);
  sc.grounder_noise.dropout_probability = noise.value("dropout_probability", 0.0);
  sc.seed = j.value("seed", std::uint64_t{0});
  sc.grounder_noise.seed = sc.seed;

  sc.static_layer = rasterize_static_layer(sc.world, sc.grid);
  return sc;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  try {
    return parse(json::parse(text));
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::vector<std::string> list_scenarios(const std::string& directory) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(directory, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace travnav
