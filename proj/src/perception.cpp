#include "coopbev/perception.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace coopbev {
namespace {

constexpr double kAreaEps = 1e-12;
constexpr double kGridFitTol = 1e-9;

int cell_count(double side, double cell_size) {
  const int n = static_cast<int>(std::llround(side / cell_size));
  if (n <= 0 || std::abs(n * cell_size - side) > kGridFitTol) {
    throw std::invalid_argument("frame side is not a whole number of cells");
  }
  return n;
}

std::size_t bit_index(const BevGrid& grid, int ix, int iy) {
  return static_cast<std::size_t>(iy) * grid.width_cells + ix;
}

// Footprint corners in the grid frame, where cells are axis aligned.
geom::Polygon to_grid_frame(const BevGrid& grid, const geom::OrientedRect& rect) {
  const double c = std::cos(grid.origin.heading);
  const double s = std::sin(grid.origin.heading);
  geom::Polygon local;
  for (const auto& p : geom::rect_corners(rect)) {
    const double dx = p.x - grid.origin.x;
    const double dy = p.y - grid.origin.y;
    local.push_back({c * dx + s * dy, -s * dx + c * dy});
  }
  return local;
}

void check_same_frame(const BevGrid& a, const BevGrid& b) {
  if (!a.same_frame(b)) {
    throw std::invalid_argument("grids are in different frames");
  }
}

}  // namespace

bool BevGrid::get(int ix, int iy) const {
  const std::size_t i = bit_index(*this, ix, iy);
  return (words[i >> 6] >> (i & 63)) & 1u;
}

void BevGrid::set(int ix, int iy) {
  const std::size_t i = bit_index(*this, ix, iy);
  words[i >> 6] |= std::uint64_t{1} << (i & 63);
}

int BevGrid::popcount() const {
  int n = 0;
  for (const auto w : words) n += std::popcount(w);
  return n;
}

bool BevGrid::same_frame(const BevGrid& other) const {
  return origin.x == other.origin.x && origin.y == other.origin.y &&
         origin.heading == other.origin.heading &&
         cell_size == other.cell_size && width_cells == other.width_cells &&
         height_cells == other.height_cells;
}

BevGrid make_grid(const geom::OrientedRect& frame, double cell_size) {
  if (cell_size <= 0.0) throw std::invalid_argument("cell size must be positive");
  BevGrid grid;
  grid.origin = frame.center;
  grid.cell_size = cell_size;
  grid.width_cells = cell_count(frame.length, cell_size);
  grid.height_cells = cell_count(frame.width, cell_size);
  const std::size_t bits =
      static_cast<std::size_t>(grid.width_cells) * grid.height_cells;
  grid.words.assign((bits + 63) / 64, 0);
  return grid;
}

geom::Vec2 cell_center(const BevGrid& grid, int ix, int iy) {
  const double u =
      (ix + 0.5) * grid.cell_size - 0.5 * grid.width_cells * grid.cell_size;
  const double v =
      (iy + 0.5) * grid.cell_size - 0.5 * grid.height_cells * grid.cell_size;
  const double c = std::cos(grid.origin.heading);
  const double s = std::sin(grid.origin.heading);
  return {grid.origin.x + c * u - s * v, grid.origin.y + s * u + c * v};
}

BevGrid render_ground_truth(const WorldState& world,
                            const geom::OrientedRect& frame_fov,
                            double cell_size) {
  BevGrid grid = make_grid(frame_fov, cell_size);
  const double half_w = 0.5 * grid.width_cells * cell_size;
  const double half_h = 0.5 * grid.height_cells * cell_size;
  for (const auto& obj : world.objects) {
    const geom::Polygon local = to_grid_frame(grid, footprint(obj));
    double lo_u = local[0].x, hi_u = local[0].x;
    double lo_v = local[0].y, hi_v = local[0].y;
    for (const auto& p : local) {
      lo_u = std::min(lo_u, p.x);
      hi_u = std::max(hi_u, p.x);
      lo_v = std::min(lo_v, p.y);
      hi_v = std::max(hi_v, p.y);
    }
    const int ix0 = std::max(0, static_cast<int>(std::floor((lo_u + half_w) / cell_size)));
    const int ix1 = std::min(grid.width_cells - 1,
                             static_cast<int>(std::floor((hi_u + half_w) / cell_size)));
    const int iy0 = std::max(0, static_cast<int>(std::floor((lo_v + half_h) / cell_size)));
    const int iy1 = std::min(grid.height_cells - 1,
                             static_cast<int>(std::floor((hi_v + half_h) / cell_size)));
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        if (grid.get(ix, iy)) continue;
        const double u = ix * cell_size - half_w;
        const double v = iy * cell_size - half_h;
        const geom::Polygon cell = {{u, v},
                                    {u + cell_size, v},
                                    {u + cell_size, v + cell_size},
                                    {u, v + cell_size}};
        if (geom::convex_intersection_area(cell, local) > kAreaEps) {
          grid.set(ix, iy);
        }
      }
    }
  }
  return grid;
}

BevGrid render_local_bev(const ObjectState& observer, const BevGrid& ground,
                         const DetectionModel& det, RngStream& rng) {
  BevGrid out = ground;
  std::fill(out.words.begin(), out.words.end(), 0);
  const double half_len = 0.5 * ground.width_cells * ground.cell_size;
  const double half_wid = 0.5 * ground.height_cells * ground.cell_size;
  const double c = std::cos(observer.pose.heading);
  const double s = std::sin(observer.pose.heading);
  // Word scan visits occupied cells in the same row-major order a full sweep
  // would, so the draw sequence is unchanged.
  for (std::size_t w = 0; w < ground.words.size(); ++w) {
    std::uint64_t bits = ground.words[w];
    while (bits) {
      const int bit = std::countr_zero(bits);
      bits &= bits - 1;
      const std::size_t index = (w << 6) + bit;
      const int ix = static_cast<int>(index % ground.width_cells);
      const int iy = static_cast<int>(index / ground.width_cells);
      const geom::Vec2 p = cell_center(ground, ix, iy);
      const double dx = p.x - observer.pose.x;
      const double dy = p.y - observer.pose.y;
      const double u = c * dx + s * dy;
      const double v = -s * dx + c * dy;
      if (std::abs(u) > half_len || std::abs(v) > half_wid) continue;
      const double d = std::sqrt(dx * dx + dy * dy);
      const double p_det =
          det.base_detection_prob * std::exp(-det.distance_decay * d);
      if (rng.uniform01() < p_det) out.set(ix, iy);
    }
  }
  return out;
}

BevGrid render_local_bev(const ObjectState& observer, const WorldState& world,
                         const DetectionModel& det,
                         const geom::OrientedRect& frame_fov, RngStream& rng,
                         double cell_size) {
  return render_local_bev(observer, render_ground_truth(world, frame_fov, cell_size),
                          det, rng);
}

BevGrid fuse_bev(const std::vector<BevGrid>& grids) {
  if (grids.empty()) throw std::invalid_argument("nothing to fuse");
  BevGrid out = grids.front();
  for (std::size_t g = 1; g < grids.size(); ++g) {
    check_same_frame(out, grids[g]);
    for (std::size_t w = 0; w < out.words.size(); ++w) {
      out.words[w] |= grids[g].words[w];
    }
  }
  return out;
}

double iou(const BevGrid& a, const BevGrid& b) {
  check_same_frame(a, b);
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    inter += std::popcount(a.words[w] & b.words[w]);
    uni += std::popcount(a.words[w] | b.words[w]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double marginal_segmentation_accuracy(const std::vector<int>& selected,
                                      int target,
                                      const std::map<int, BevGrid>& grids) {
  if (std::find(selected.begin(), selected.end(), target) == selected.end()) {
    throw std::invalid_argument("target CAV is not in the selected set");
  }
  const auto grid_for = [&grids](int id) -> const BevGrid& {
    const auto it = grids.find(id);
    if (it == grids.end()) {
      throw std::invalid_argument("no grid for CAV " + std::to_string(id));
    }
    return it->second;
  };
  std::vector<BevGrid> full = {grid_for(0)};
  std::vector<BevGrid> reduced = {grid_for(0)};
  for (const int id : selected) {
    full.push_back(grid_for(id));
    if (id != target) reduced.push_back(grid_for(id));
  }
  return 1.0 - iou(fuse_bev(full), fuse_bev(reduced));
}

double marginal_bev_contribution(double m, double a, double omega) {
  return m + omega * a;
}

double compression_degradation(double rho, const CompensationParams& params) {
  if (rho < 1.0) throw std::invalid_argument("compression ratio must be at least 1");
  return params.beta *
         (std::exp(-params.gamma * params.rho0) - std::exp(-params.gamma * rho));
}

CompressionEffect apply_compression_effect(double g, double rho,
                                           const CompensationParams& params) {
  const double dg = compression_degradation(rho, params);
  CompressionEffect effect;
  effect.realized = std::max(0.0, g - dg);
  effect.compensated = effect.realized + dg;
  return effect;
}

std::string to_pgm(const BevGrid& grid) {
  std::string out = "P1\n" + std::to_string(grid.width_cells) + " " +
                    std::to_string(grid.height_cells) + "\n";
  for (int iy = grid.height_cells - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.width_cells; ++ix) {
      out += grid.get(ix, iy) ? '1' : '0';
      out += (ix + 1 == grid.width_cells) ? '\n' : ' ';
    }
  }
  return out;
}

}  // namespace coopbev
