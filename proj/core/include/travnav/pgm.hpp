#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "travnav/costmap.hpp"

namespace travnav {

/// 254 -> 0 (black), 0 -> 255 (white), linear in between.
std::uint8_t cost_to_gray(std::uint8_t cost);
/// Inverse of cost_to_gray on its image.
std::uint8_t gray_to_cost(std::uint8_t gray);

/// Binary P5 raster, first row = highest y.
std::string encode_costmap_pgm(const GridSpec& spec, std::span<const std::uint8_t> costs);

struct CostRaster {
  GridSpec spec;
  std::vector<std::uint8_t> costs;
};

/// Decodes a P5 raster back to costs; the GridSpec comes from the sidecar.
std::vector<std::uint8_t> decode_costmap_pgm(const std::string& bytes, const GridSpec& spec);

std::string grid_meta_json(const GridSpec& spec, const std::string& image_name = {});
GridSpec grid_meta_from_json(const std::string& text);

/// Writes `pgm_path` and the JSON sidecar `meta_path`.
void save_costmap(const std::string& pgm_path, const std::string& meta_path, const GridSpec& spec,
                  std::span<const std::uint8_t> costs);
CostRaster load_costmap(const std::string& pgm_path, const std::string& meta_path);

}  // namespace travnav
