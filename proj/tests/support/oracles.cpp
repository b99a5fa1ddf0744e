#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace oracle {

using travnav::Cell;

Projected homogeneous(const travnav::CameraModel& cam, double x, double y, double z) {
  const double K[3][3] = {{cam.f * cam.sx, cam.skew * cam.sy, cam.u0}, {0.0, cam.f * cam.sy, cam.v0}, {0.0, 0.0, 1.0}};
  double E[4][4] = {};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) E[r][c] = cam.rotation(r, c);
    E[r][3] = cam.translation(r);
  }
  E[3][3] = 1.0;
  const double X[4] = {x, y, z, 1.0};
  // [I|0] keeps the first three rows of E X.
  double cam_pt[3] = {0, 0, 0};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) cam_pt[r] += E[r][c] * X[c];
  }
  double out[3] = {0, 0, 0};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r] += K[r][c] * cam_pt[c];
  }
  return {out[0] / out[2], out[1] / out[2], out[2]};
}

travnav::SegmentedCloud segment(const travnav::PointCloud& cloud, std::span<const travnav::AttributedBox> boxes,
                                const travnav::CameraModel& cam) {
  travnav::SegmentedCloud out;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    const Projected q = homogeneous(cam, p.x, p.y, p.z);
    bool in_any = false;
    bool in_untra = false;
    if (q.w > travnav::kDepthEpsilon) {
      for (const auto& b : boxes) {
        const bool inside = b.box.cx - b.box.w / 2 <= q.u && q.u <= b.box.cx + b.box.w / 2 &&
                            b.box.cy - b.box.h / 2 <= q.v && q.v <= b.box.cy + b.box.h / 2;
        if (!inside) continue;
        in_any = true;
        if (b.attribute == travnav::Attribute::Untraversable) in_untra = true;
      }
    }
    (in_any && !in_untra ? out.traversable : out.untraversable).push_back(i);
  }
  return out;
}

namespace {

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::vector<Cell> line(Cell from, Cell to) {
  const long dx = to.x - from.x;
  const long dy = to.y - from.y;
  const long n = std::max(std::labs(dx), std::labs(dy));
  std::vector<Cell> out;
  if (n == 0) return {from};
  const bool x_major = std::labs(dx) >= std::labs(dy);
  const long sign = (x_major ? dx : dy) > 0 ? 1 : -1;
  const long minor = x_major ? dy : dx;
  for (long i = 0; i <= n; ++i) {
    // round half up of i*minor/n  ==  floor((2*i*minor + n) / (2n))
    const long m = floor_div(2 * i * minor + n, 2 * n);
    if (x_major) {
      out.push_back({static_cast<int>(from.x + sign * i), static_cast<int>(from.y + m)});
    } else {
      out.push_back({static_cast<int>(from.x + m), static_cast<int>(from.y + sign * i)});
    }
  }
  return out;
}

Grid make_grid(const travnav::GridSpec& spec, std::vector<std::uint8_t> static_layer, double radius) {
  Grid g;
  g.spec = spec;
  g.radius = radius;
  g.static_layer = std::move(static_layer);
  g.obstacle.assign(spec.cell_count(), 0);
  g.overridden.assign(spec.cell_count(), 0);
  g.master = master_of(g);
  return g;
}

void apply(Grid& g, Cell sensor, const std::vector<Cell>& tra, const std::vector<Cell>& untra, bool keep_overrides) {
  const auto idx = [&](Cell c) { return static_cast<std::size_t>(c.y) * g.spec.width + c.x; };
  if (tra.empty() && untra.empty()) return;
  for (const auto* list : {&tra, &untra}) {
    for (const auto& c : *list) {
      const auto l = line(sensor, c);
      for (std::size_t k = 0; k + 1 < l.size(); ++k) g.obstacle[idx(l[k])] = 0;
    }
  }
  std::set<std::size_t> untra_cells;
  for (const auto& c : untra) untra_cells.insert(idx(c));
  for (const auto i : untra_cells) {
    g.obstacle[i] = 254;
    if (!keep_overrides) g.overridden[i] = 0;
  }
  for (const auto& c : tra) {
    const auto i = idx(c);
    if (untra_cells.count(i)) continue;
    g.obstacle[i] = 0;
    g.overridden[i] = 1;
  }
  g.master = master_of(g);
}

std::vector<std::uint8_t> master_of(const Grid& g) {
  const auto& s = g.spec;
  const std::size_t n = s.cell_count();
  std::vector<Cell> lethal;
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const auto i = static_cast<std::size_t>(y) * s.width + x;
      if (std::max(g.static_layer[i], g.obstacle[i]) == 254) lethal.push_back({x, y});
    }
  }
  std::vector<std::uint8_t> out(n, 0);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const auto i = static_cast<std::size_t>(y) * s.width + x;
      const std::uint8_t base = std::max(g.static_layer[i], g.obstacle[i]);
      if (base == 254) {
        out[i] = 254;
      } else {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : lethal) best = std::min(best, s.resolution * std::hypot(c.x - x, c.y - y));
        std::uint8_t v = base;
        if (best <= g.radius + 1e-9) {
          v = std::max<std::uint8_t>(v, static_cast<std::uint8_t>(std::lround(253.0 - 252.0 * best / g.radius)));
        }
        out[i] = v;
      }
      if (g.overridden[i]) out[i] = 0;
    }
  }
  return out;
}

std::optional<travnav::PathCost> dijkstra(const travnav::GridSpec& spec, std::span<const std::uint8_t> costs,
                                          Cell start, Cell goal, unsigned weight) {
  const auto idx = [&](Cell c) { return static_cast<std::size_t>(c.y) * spec.width + c.x; };
  const auto blocked = [&](int x, int y) {
    return x < 0 || y < 0 || x >= spec.width || y >= spec.height || costs[idx({x, y})] >= 254;
  };
  if (blocked(start.x, start.y) || blocked(goal.x, goal.y)) return std::nullopt;
  std::vector<std::optional<travnav::PathCost>> dist(spec.cell_count());
  std::vector<bool> done(spec.cell_count(), false);
  dist[idx(start)] = travnav::PathCost{};
  // O(n^2) selection: no heap, no heuristic.
  for (;;) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (done[i] || !dist[i]) continue;
      if (!best || *dist[i] < *dist[*best]) best = i;
    }
    if (!best) return std::nullopt;
    if (*best == idx(goal)) return dist[*best];
    done[*best] = true;
    const int cx = static_cast<int>(*best % spec.width);
    const int cy = static_cast<int>(*best / spec.width);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if ((dx == 0 && dy == 0) || blocked(cx + dx, cy + dy)) continue;
        const bool diag = dx != 0 && dy != 0;
        if (diag && (blocked(cx + dx, cy) || blocked(cx, cy + dy))) continue;
        const auto ni = idx({cx + dx, cy + dy});
        const std::int64_t units = 253 + static_cast<std::int64_t>(weight) * costs[ni];
        travnav::PathCost c = *dist[*best];
        (diag ? c.diagonal : c.cardinal) += units;
        if (!dist[ni] || c < *dist[ni]) dist[ni] = c;
      }
    }
  }
}

std::optional<travnav::BoundingBox> dense_silhouette_box(const std::vector<Eigen::Vector3d>& outline_world,
                                                        const Eigen::Isometry3d& world_to_optical,
                                                        const travnav::CameraModel& cam, double spacing_px) {
  // outline_world holds consecutive segment endpoints: (a0, b0, a1, b1, ...).
  double lo_u = std::numeric_limits<double>::infinity(), lo_v = lo_u;
  double hi_u = -lo_u, hi_v = -lo_u;
  bool inside = false;
  const Eigen::Matrix3d K = cam.intrinsic();
  for (std::size_t k = 0; k + 1 < outline_world.size(); k += 2) {
    const Eigen::Vector3d a = world_to_optical * outline_world[k];
    const Eigen::Vector3d b = world_to_optical * outline_world[k + 1];
    // Adaptive subdivision until projected neighbours are within spacing.
    std::vector<std::pair<double, double>> stack{{0.0, 1.0}};
    const auto px = [&](double t) -> std::optional<Eigen::Vector2d> {
      const Eigen::Vector3d p = a + t * (b - a);
      if (p.z() <= travnav::kDepthEpsilon) return std::nullopt;
      const Eigen::Vector3d q = K * p;
      return Eigen::Vector2d(q.x() / q.z(), q.y() / q.z());
    };
    std::vector<double> ts{0.0};
    while (!stack.empty()) {
      auto [t0, t1] = stack.back();
      stack.pop_back();
      const auto p0 = px(t0), p1 = px(t1);
      // A projected in-front segment is a segment, so a stretch wholly past
      // one image edge is bounded by its ends.
      const bool beyond = p0 && p1 &&
                          ((p0->x() < 0 && p1->x() < 0) || (p0->y() < 0 && p1->y() < 0) ||
                           (p0->x() > cam.image_w && p1->x() > cam.image_w) ||
                           (p0->y() > cam.image_h && p1->y() > cam.image_h));
      const bool close = p0 && p1 && ((*p0 - *p1).norm() <= spacing_px || beyond);
      // Depth is linear in t: both ends behind means all of it is.
      if (close || (!p0 && !p1) || t1 - t0 < 1e-9) {
        ts.push_back(t1);
        continue;
      }
      const double tm = 0.5 * (t0 + t1);
      stack.push_back({tm, t1});
      stack.push_back({t0, tm});
    }
    for (double t : ts) {
      const auto p = px(t);
      if (!p) continue;
      if (p->x() >= 0 && p->x() <= cam.image_w && p->y() >= 0 && p->y() <= cam.image_h) inside = true;
      lo_u = std::min(lo_u, p->x());
      hi_u = std::max(hi_u, p->x());
      lo_v = std::min(lo_v, p->y());
      hi_v = std::max(hi_v, p->y());
    }
  }
  if (!inside) return std::nullopt;
  lo_u = std::clamp(lo_u, 0.0, double(cam.image_w));
  hi_u = std::clamp(hi_u, 0.0, double(cam.image_w));
  lo_v = std::clamp(lo_v, 0.0, double(cam.image_h));
  hi_v = std::clamp(hi_v, 0.0, double(cam.image_h));
  return travnav::BoundingBox{0.5 * (lo_u + hi_u), 0.5 * (lo_v + hi_v), hi_u - lo_u, hi_v - lo_v};
}

bool principal_ray_meets_prism(const Eigen::Isometry3d& world_to_optical, const std::vector<Eigen::Vector2d>& footprint,
                               double z_min, double z_max, double max_range, double step) {
  const Eigen::Isometry3d to_world = world_to_optical.inverse();
  const Eigen::Vector3d o = to_world * Eigen::Vector3d(0, 0, 0);
  const Eigen::Vector3d d = (to_world * Eigen::Vector3d(0, 0, 1) - o).normalized();
  // Even-odd crossing test.
  const auto in_polygon = [&](double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = footprint.size() - 1; i < footprint.size(); j = i++) {
      const auto& a = footprint[i];
      const auto& b = footprint[j];
      if ((a.y() > y) != (b.y() > y) && x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x()) in = !in;
    }
    return in;
  };
  for (double t = 0.0; t <= max_range; t += step) {
    const Eigen::Vector3d p = o + t * d;
    if (p.z() >= z_min && p.z() <= z_max && in_polygon(p.x(), p.y())) return true;
  }
  return false;
}

}  // namespace oracle
