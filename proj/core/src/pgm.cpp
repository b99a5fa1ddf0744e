#include "travnav/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace travnav {

std::uint8_t cost_to_gray(std::uint8_t cost) {
  const int c = std::min<int>(cost, kLethalCost);
  return static_cast<std::uint8_t>(std::lround(255.0 * (kLethalCost - c) / kLethalCost));
}

std::uint8_t gray_to_cost(std::uint8_t gray) {
  return static_cast<std::uint8_t>(std::lround(kLethalCost * (255.0 - gray) / 255.0));
}

std::string encode_costmap_pgm(const GridSpec& spec, std::span<const std::uint8_t> costs) {
  if (costs.size() != spec.cell_count()) throw std::invalid_argument("pgm: cost grid size mismatch");
  std::string out = "P5\n" + std::to_string(spec.width) + " " + std::to_string(spec.height) + "\n255\n";
  out.reserve(out.size() + costs.size());
  for (int y = spec.height - 1; y >= 0; --y) {
    for (int x = 0; x < spec.width; ++x) out.push_back(static_cast<char>(cost_to_gray(costs[spec.index({x, y})])));
  }
  return out;
}

namespace {

// Reads the next header integer, skipping whitespace and '#' comments.
int next_header_int(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw std::runtime_error("pgm: malformed header");
  return std::stoi(bytes.substr(start, pos - start));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::uint8_t> decode_costmap_pgm(const std::string& bytes, const GridSpec& spec) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw std::runtime_error("pgm: not a P5 file");
  std::size_t pos = 2;
  const int w = next_header_int(bytes, pos);
  const int h = next_header_int(bytes, pos);
  const int maxval = next_header_int(bytes, pos);
  if (maxval != 255) throw std::runtime_error("pgm: only 8-bit rasters are supported");
  ++pos;  // single whitespace before the raster
  if (w != spec.width || h != spec.height) throw std::runtime_error("pgm: size disagrees with metadata");
  if (bytes.size() - pos < spec.cell_count()) throw std::runtime_error("pgm: truncated raster");

  std::vector<std::uint8_t> costs(spec.cell_count());
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;
    for (int x = 0; x < w; ++x) {
      costs[spec.index({x, y})] = gray_to_cost(static_cast<std::uint8_t>(bytes[pos++]));
    }
  }
  return costs;
}

std::string grid_meta_json(const GridSpec& spec, const std::string& image_name) {
  nlohmann::json j = {{"resolution", spec.resolution},
                      {"origin", {spec.origin_x, spec.origin_y}},
                      {"width", spec.width},
                      {"height", spec.height}};
  if (!image_name.empty()) j["image"] = image_name;
  return j.dump(2);
}

GridSpec grid_meta_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GridSpec spec;
    spec.resolution = j.at("resolution").get<double>();
    spec.origin_x = j.at("origin").at(0).get<double>();
    spec.origin_y = j.at("origin").at(1).get<double>();
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("grid metadata: ") + e.what());
  }
}

void save_costmap(const std::string& pgm_path, const std::string& meta_path, const GridSpec& spec,
                  std::span<const std::uint8_t> costs) {
  std::ofstream pgm(pgm_path, std::ios::binary);
  if (!pgm) throw std::runtime_error("cannot write " + pgm_path);
  pgm << encode_costmap_pgm(spec, costs);
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot write " + meta_path);
  const auto slash = pgm_path.find_last_of('/');
  meta << grid_meta_json(spec, slash == std::string::npos ? pgm_path : pgm_path.substr(slash + 1)) << "\n";
}

CostRaster load_costmap(const std::string& pgm_path, const std::string& meta_path) {
  CostRaster r;
  r.spec = grid_meta_from_json(slurp(meta_path));
  r.costs = decode_costmap_pgm(slurp(pgm_path), r.spec);
  return r;
}

}  // namespace travnav
