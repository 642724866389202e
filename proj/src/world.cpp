#include "coopbev/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopbev {

namespace {

constexpr std::uint64_t kWorldStreamTag = 0x3077;
constexpr int kFirstObjectId = 1001;

void step_entity(ObjectState& obj, const MotionModel& model, RngStream& rng) {
  const double dt = kSlotSeconds;
  const double v = obj.longitudinal_velocity;
  const double h = obj.pose.heading;
  obj.pose.x += v * std::cos(h) * dt;
  obj.pose.y += v * std::sin(h) * dt;
  const double xi = rng.normal();
  const double eta = rng.normal();
  obj.longitudinal_velocity =
      v + model.reversion_rate * (model.mean_speed - v) * dt +
      model.noise_scale * std::sqrt(dt) * xi;
  obj.pose.heading = geom::normalize_angle(
      h + model.heading_rate * std::sqrt(dt) * eta);
}

}  // namespace

geom::OrientedRect footprint(const ObjectState& obj) {
  return {obj.pose, obj.length, obj.width};
}

WorldState step_world(const WorldState& state, const MotionModel& model,
                      RngStream& rng) {
  WorldState next = state;
  next.slot = state.slot + 1;
  step_entity(next.ego, model, rng);
  for (ObjectState& c : next.collaborators) step_entity(c, model, rng);
  for (ObjectState& o : next.objects) step_entity(o, model, rng);
  return next;
}

WorldState advance_world(const WorldState& state, const MotionModel& model) {
  RngStream rng(derive_seed(model.seed, kWorldStreamTag,
                            static_cast<std::uint64_t>(state.slot)));
  return step_world(state, model, rng);
}

std::vector<ObjectState> objects_in_fov(const WorldState& state,
                                        const geom::OrientedRect& fov) {
  const auto corners = geom::rect_corners(fov);
  const geom::Polygon poly(corners.begin(), corners.end());
  std::vector<ObjectState> in;
  for (const ObjectState& o : state.objects) {
    if (geom::point_in_convex(poly, {o.pose.x, o.pose.y})) in.push_back(o);
  }
  std::sort(in.begin(), in.end(),
            [](const ObjectState& a, const ObjectState& b) {
              return a.id < b.id;
            });
  return in;
}

double driving_volatility(const WorldState& state,
                          const geom::OrientedRect& fov) {
  const std::vector<ObjectState> in = objects_in_fov(state, fov);
  if (in.empty()) return 0.0;
  double sum_sq = 0.0;
  for (const ObjectState& o : in) {
    const double dv =
        o.longitudinal_velocity - state.ego.longitudinal_velocity;
    sum_sq += dv * dv;
  }
  return std::sqrt(sum_sq / static_cast<double>(in.size()));
}

WorldState make_world(const WorldInit& init) {
  if (init.n_collaborators < 1) {
    throw std::invalid_argument("world needs at least one collaborator");
  }
  if (init.m_objects < 0) {
    throw std::invalid_argument("object count must be non-negative");
  }
  WorldState state;
  state.slot = 0;
  state.ego.id = 0;
  state.ego.longitudinal_velocity = init.motion.mean_speed;

  auto add_collaborator = [&](const geom::Pose2D& pose) {
    ObjectState c;
    c.id = static_cast<int>(state.collaborators.size()) + 1;
    c.pose = pose;
    c.longitudinal_velocity = init.motion.mean_speed;
    state.collaborators.push_back(c);
  };
  auto add_object = [&](const geom::Pose2D& pose) {
    ObjectState o;
    o.id = kFirstObjectId + static_cast<int>(state.objects.size());
    o.pose = pose;
    o.longitudinal_velocity = init.motion.mean_speed;
    state.objects.push_back(o);
  };

  switch (init.layout) {
    case Layout::kGrid: {
      state.ego.pose = geom::make_pose(0.0, 0.0, 0.0);
      for (int i = 0; i < init.n_collaborators; ++i) {
        const double a =
            2.0 * geom::kPi * i / static_cast<double>(init.n_collaborators);
        add_collaborator(geom::make_pose(init.collaborator_ring * std::cos(a),
                                         init.collaborator_ring * std::sin(a),
                                         0.0));
      }
      const int side = static_cast<int>(
          std::ceil(std::sqrt(static_cast<double>(init.m_objects))));
      const double half = 0.5 * init.spacing * (side - 1);
      for (int j = 0; j < init.m_objects; ++j) {
        const int r = j / side;
        const int c = j % side;
        add_object(geom::make_pose(c * init.spacing - half,
                                   r * init.spacing - half, 0.0));
      }
      break;
    }
    case Layout::kRing: {
      state.ego.pose = geom::make_pose(0.0, 0.0, 0.0);
      for (int i = 0; i < init.n_collaborators; ++i) {
        const double a =
            2.0 * geom::kPi * i / static_cast<double>(init.n_collaborators);
        add_collaborator(geom::make_pose(init.collaborator_ring * std::cos(a),
                                         init.collaborator_ring * std::sin(a),
                                         a + geom::kPi / 2.0));
      }
      const double radius =
          std::max(init.spacing * init.m_objects / (2.0 * geom::kPi),
                   init.spacing);
      for (int j = 0; j < init.m_objects; ++j) {
        const double a =
            2.0 * geom::kPi * j / std::max(init.m_objects, 1);
        add_object(geom::make_pose(radius * std::cos(a),
                                   radius * std::sin(a),
                                   a + geom::kPi / 2.0));
      }
      break;
    }
    case Layout::kPoses: {
      const std::size_t need =
          1 + static_cast<std::size_t>(init.n_collaborators) +
          static_cast<std::size_t>(init.m_objects);
      if (init.poses.size() != need) {
        throw std::invalid_argument(
            "pose layout needs " + std::to_string(need) + " poses, got " +
            std::to_string(init.poses.size()));
      }
      state.ego.pose = init.poses[0];
      for (int i = 0; i < init.n_collaborators; ++i) {
        add_collaborator(init.poses[1 + i]);
      }
      for (int j = 0; j < init.m_objects; ++j) {
        add_object(init.poses[1 + init.n_collaborators + j]);
      }
      break;
    }
  }
  return state;
}

}  // namespace coopbev
