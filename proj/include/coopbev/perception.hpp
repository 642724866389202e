#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coopbev/geometry.hpp"
#include "coopbev/rng.hpp"
#include "coopbev/world.hpp"

namespace coopbev {

// Binary occupancy grid in the frame of `origin`: cell x runs along the
// origin heading, cell y across it, both centered on the origin.
struct BevGrid {
  geom::Pose2D origin;
  double cell_size = 0.5;
  int width_cells = 0;
  int height_cells = 0;
  std::vector<std::uint64_t> words;

  bool get(int ix, int iy) const;
  void set(int ix, int iy);
  int popcount() const;
  bool same_frame(const BevGrid& other) const;
};

// Grid covering the frame rect; the rect sides must be whole multiples of
// cell_size.
BevGrid make_grid(const geom::OrientedRect& frame, double cell_size = 0.5);

// World position of a cell's center.
geom::Vec2 cell_center(const BevGrid& grid, int ix, int iy);

struct DetectionModel {
  double base_detection_prob = 0.95;
  double distance_decay = 0.01;  // 1/m; detect prob = base * exp(-decay * d)
  std::uint64_t seed = 0;
};

struct CompensationParams {
  double beta = 0.34;
  double gamma = 0.15;
  double rho0 = 1.0;
};

// Cell occupied iff it overlaps any unconnected object's footprint.
BevGrid render_ground_truth(const WorldState& world,
                            const geom::OrientedRect& frame_fov,
                            double cell_size = 0.5);

// Occupied ground-truth cells inside the observer's own view (same extent as
// the frame, centered on the observer) survive with probability
// base * exp(-decay * distance-to-observer); everything else is zero. One
// uniform draw per candidate cell in row-major order.
BevGrid render_local_bev(const ObjectState& observer, const WorldState& world,
                         const DetectionModel& det,
                         const geom::OrientedRect& frame_fov, RngStream& rng,
                         double cell_size = 0.5);

// Same sensor model against an already-rendered ground-truth grid, for
// callers rendering several observers of one world.
BevGrid render_local_bev(const ObjectState& observer, const BevGrid& ground,
                         const DetectionModel& det, RngStream& rng);

// Cell-wise OR; grids must share the frame.
BevGrid fuse_bev(const std::vector<BevGrid>& grids);

// Intersection over union of occupied cells; 1.0 when both grids are empty.
double iou(const BevGrid& a, const BevGrid& b);

// Drop in fused-map IoU when the target CAV's grid is removed from the
// selected set. The ego grid (key 0) joins both fusions.
double marginal_segmentation_accuracy(const std::vector<int>& selected,
                                      int target,
                                      const std::map<int, BevGrid>& grids);

// g_i = m_i + omega * A_i
double marginal_bev_contribution(double m, double a, double omega);

// Contribution lost to compression ratio rho, zero at rho = 1.
double compression_degradation(double rho, const CompensationParams& params);

struct CompressionEffect {
  double realized = 0.0;     // contribution actually delivered
  double compensated = 0.0;  // value fed back to the learner
};

CompressionEffect apply_compression_effect(double g, double rho,
                                           const CompensationParams& params);

// ASCII bitmap dump for debugging.
std::string to_pgm(const BevGrid& grid);

}  // namespace coopbev
