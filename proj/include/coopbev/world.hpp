#pragma once

#include <cstdint>
#include <vector>

#include "coopbev/geometry.hpp"
#include "coopbev/rng.hpp"

namespace coopbev {

inline constexpr double kSlotSeconds = 0.1;  // 100 ms slots

struct ObjectState {
  int id = 0;
  geom::Pose2D pose;
  double longitudinal_velocity = 0.0;  // m/s along own heading
  double length = 4.5;                 // footprint, meters
  double width = 2.0;
};

geom::OrientedRect footprint(const ObjectState& obj);

// Ego id is 0, collaborators carry ids 1..N (matching the selector's CAV
// ids), unconnected objects start at 1001.
struct WorldState {
  std::int64_t slot = 0;
  ObjectState ego;
  std::vector<ObjectState> collaborators;
  std::vector<ObjectState> objects;
};

// Mean-reverting velocity walk plus a heading random walk per entity.
struct MotionModel {
  double mean_speed = 10.0;     // m/s
  double reversion_rate = 0.5;  // 1/s pull toward mean_speed
  double noise_scale = 2.0;     // velocity diffusion, m/s per sqrt(s)
  double heading_rate = 0.05;   // heading walk, rad per sqrt(s)
  std::uint64_t seed = 0;
};

// One slot of motion for every entity. Poses advance by the pre-update
// velocity along the pre-update heading, then velocity and heading are
// perturbed. Noise is drawn from rng in a fixed order (ego, collaborators,
// objects), two normal draws per entity.
WorldState step_world(const WorldState& state, const MotionModel& model,
                      RngStream& rng);

// step_world with the noise stream derived from (model.seed, state.slot), so
// advancing a copied state reproduces the exact future of the original.
WorldState advance_world(const WorldState& state, const MotionModel& model);

// The unconnected objects whose footprint center lies inside fov, id order.
// Collaborators and the ego are never included.
std::vector<ObjectState> objects_in_fov(const WorldState& state,
                                        const geom::OrientedRect& fov);

// Root mean square of (v_i - v_ego) over objects_in_fov; 0 with nothing in
// view, which later yields the most permissive fusion deadline.
double driving_volatility(const WorldState& state,
                          const geom::OrientedRect& fov);

enum class Layout { kGrid, kRing, kPoses };

struct WorldInit {
  Layout layout = Layout::kGrid;
  int n_collaborators = 4;
  int m_objects = 30;
  double spacing = 8.0;             // object grid pitch / ring gap
  double collaborator_ring = 20.0;  // collaborator distance from ego
  std::vector<geom::Pose2D> poses;  // kPoses: ego, collaborators, objects
  MotionModel motion;
};

// Builds slot-0 state for the requested layout; every entity starts at the
// model's mean speed.
WorldState make_world(const WorldInit& init);

}  // namespace coopbev
