#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "coopbev/geometry.hpp"
#include "coopbev/rng.hpp"
#include "coopbev/world.hpp"

using namespace coopbev;

namespace {

WorldState tiny_world() {
  WorldInit init;
  init.layout = Layout::kGrid;
  init.n_collaborators = 2;
  init.m_objects = 4;
  init.motion.mean_speed = 0.0;
  init.motion.noise_scale = 0.0;
  init.motion.heading_rate = 0.0;
  return make_world(init);
}

bool same_state(const WorldState& a, const WorldState& b) {
  auto same_obj = [](const ObjectState& x, const ObjectState& y) {
    return x.id == y.id && x.pose.x == y.pose.x && x.pose.y == y.pose.y &&
           x.pose.heading == y.pose.heading &&
           x.longitudinal_velocity == y.longitudinal_velocity;
  };
  if (a.slot != b.slot) return false;
  if (!same_obj(a.ego, b.ego)) return false;
  if (a.collaborators.size() != b.collaborators.size()) return false;
  if (a.objects.size() != b.objects.size()) return false;
  for (std::size_t i = 0; i < a.collaborators.size(); ++i) {
    if (!same_obj(a.collaborators[i], b.collaborators[i])) return false;
  }
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    if (!same_obj(a.objects[i], b.objects[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero motion is a fixed point apart from the slot counter") {
  WorldState w = tiny_world();
  MotionModel still;
  still.mean_speed = 0.0;
  still.reversion_rate = 0.0;
  still.noise_scale = 0.0;
  still.heading_rate = 0.0;
  RngStream rng(1);
  const WorldState next = step_world(w, still, rng);
  CHECK(next.slot == w.slot + 1);
  CHECK(next.ego.pose.x == w.ego.pose.x);
  CHECK(next.ego.pose.y == w.ego.pose.y);
  CHECK(next.objects[3].pose.x == w.objects[3].pose.x);
}

TEST_CASE("pose advances by velocity times slot duration along heading") {
  WorldState w = tiny_world();
  w.ego.longitudinal_velocity = 10.0;
  w.ego.pose = geom::make_pose(0.0, 0.0, 0.0);
  MotionModel quiet;
  quiet.mean_speed = 10.0;
  quiet.noise_scale = 0.0;
  quiet.heading_rate = 0.0;
  RngStream rng(1);
  WorldState next = step_world(w, quiet, rng);
  CHECK(next.ego.pose.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(next.ego.pose.y == doctest::Approx(0.0));

  w.ego.pose = geom::make_pose(0.0, 0.0, geom::kPi / 2.0);
  next = step_world(w, quiet, rng);
  CHECK(next.ego.pose.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next.ego.pose.y == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("velocity reverts toward the mean without noise") {
  WorldState w = tiny_world();
  w.ego.longitudinal_velocity = 0.0;
  MotionModel model;
  model.mean_speed = 10.0;
  model.reversion_rate = 0.5;
  model.noise_scale = 0.0;
  model.heading_rate = 0.0;
  RngStream rng(1);
  const WorldState next = step_world(w, model, rng);
  CHECK(next.ego.longitudinal_velocity == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("advance_world is deterministic and future-stable under copying") {
  WorldInit init;
  init.layout = Layout::kRing;
  init.n_collaborators = 3;
  init.m_objects = 10;
  init.motion.seed = 42;
  WorldState a = make_world(init);
  WorldState b = make_world(init);
  for (int i = 0; i < 50; ++i) {
    a = advance_world(a, init.motion);
    b = advance_world(b, init.motion);
  }
  CHECK(same_state(a, b));

  // A copy taken mid-run must evolve into the same future as the original.
  WorldState c = a;
  const WorldState a2 = advance_world(advance_world(a, init.motion), init.motion);
  const WorldState c2 = advance_world(advance_world(c, init.motion), init.motion);
  CHECK(same_state(a2, c2));
}

TEST_CASE("objects_in_fov matches a rect-frame membership oracle") {
  WorldInit init;
  init.layout = Layout::kGrid;
  init.n_collaborators = 2;
  init.m_objects = 36;
  init.spacing = 6.0;
  WorldState w = make_world(init);
  const geom::OrientedRect fov{geom::make_pose(3.0, -2.0, 0.4), 40.0, 22.0};

  std::set<int> expected;
  const double ch = std::cos(fov.center.heading);
  const double sh = std::sin(fov.center.heading);
  for (const ObjectState& o : w.objects) {
    const double dx = o.pose.x - fov.center.x;
    const double dy = o.pose.y - fov.center.y;
    const double u = dx * ch + dy * sh;
    const double v = -dx * sh + dy * ch;
    if (std::abs(u) <= fov.length / 2.0 && std::abs(v) <= fov.width / 2.0) {
      expected.insert(o.id);
    }
  }
  const std::vector<ObjectState> in = objects_in_fov(w, fov);
  std::set<int> got;
  for (const ObjectState& o : in) got.insert(o.id);
  CHECK(got == expected);
  CHECK_FALSE(expected.empty());
  for (std::size_t i = 1; i < in.size(); ++i) {
    CHECK(in[i - 1].id < in[i].id);
  }
}

TEST_CASE("objects_in_fov never returns the ego or collaborators") {
  WorldState w = tiny_world();
  // A FoV covering everything still only reports unconnected objects.
  const geom::OrientedRect fov{geom::make_pose(0.0, 0.0, 0.0), 1000.0, 1000.0};
  const std::vector<ObjectState> in = objects_in_fov(w, fov);
  CHECK(in.size() == w.objects.size());
  for (const ObjectState& o : in) CHECK(o.id >= 1001);
}

TEST_CASE("driving_volatility formula cases") {
  WorldState w = tiny_world();
  const geom::OrientedRect fov{geom::make_pose(0.0, 0.0, 0.0), 1000.0, 1000.0};
  w.ego.longitudinal_velocity = 5.0;
  for (ObjectState& o : w.objects) o.longitudinal_velocity = 5.0;
  CHECK(driving_volatility(w, fov) == doctest::Approx(0.0));

  w.objects.resize(1);
  w.objects[0].longitudinal_velocity = 8.0;
  CHECK(driving_volatility(w, fov) == doctest::Approx(3.0).epsilon(1e-12));

  w.objects.resize(2);
  w.objects[1].id = 1002;
  w.objects[1].longitudinal_velocity = 9.0;
  CHECK(driving_volatility(w, fov) ==
        doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));

  // Empty view reads as a static environment.
  const geom::OrientedRect empty_fov{geom::make_pose(5000.0, 5000.0, 0.0), 10.0,
                                     10.0};
  CHECK(driving_volatility(w, empty_fov) == doctest::Approx(0.0));
}

TEST_CASE("driving_volatility is Galilean-invariant and monotone") {
  WorldState w = tiny_world();
  const geom::OrientedRect fov{geom::make_pose(0.0, 0.0, 0.0), 1000.0, 1000.0};
  w.ego.longitudinal_velocity = 5.0;
  const std::vector<double> speeds = {7.0, 2.0, 5.5, 9.0};
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    w.objects[i].longitudinal_velocity = speeds[i];
  }
  const double base = driving_volatility(w, fov);

  WorldState shifted = w;
  shifted.ego.longitudinal_velocity += 13.5;
  for (ObjectState& o : shifted.objects) o.longitudinal_velocity += 13.5;
  CHECK(driving_volatility(shifted, fov) ==
        doctest::Approx(base).epsilon(1e-12));

  WorldState wilder = w;
  wilder.objects[1].longitudinal_velocity = -4.0;  // deviation 3 -> 9
  CHECK(driving_volatility(wilder, fov) > base);
}

TEST_CASE("make_world lays out the requested population with unique ids") {
  WorldInit init;
  init.layout = Layout::kGrid;
  init.n_collaborators = 4;
  init.m_objects = 30;
  const WorldState w = make_world(init);
  CHECK(w.slot == 0);
  CHECK(w.collaborators.size() == 4);
  CHECK(w.objects.size() == 30);
  std::set<int> ids = {w.ego.id};
  for (const ObjectState& c : w.collaborators) ids.insert(c.id);
  for (const ObjectState& o : w.objects) ids.insert(o.id);
  CHECK(ids.size() == 35);
  CHECK(w.ego.id == 0);
  for (int i = 0; i < 4; ++i) CHECK(w.collaborators[i].id == i + 1);
  for (const ObjectState& c : w.collaborators) {
    const double dist = std::hypot(c.pose.x, c.pose.y);
    CHECK(dist == doctest::Approx(init.collaborator_ring).epsilon(1e-12));
  }
}

TEST_CASE("make_world pose layout places entities verbatim") {
  WorldInit init;
  init.layout = Layout::kPoses;
  init.n_collaborators = 1;
  init.m_objects = 2;
  init.poses = {geom::make_pose(1.0, 2.0, 0.1), geom::make_pose(3.0, 4.0, 0.2),
                geom::make_pose(5.0, 6.0, 0.3), geom::make_pose(7.0, 8.0, 0.4)};
  const WorldState w = make_world(init);
  CHECK(w.ego.pose.x == doctest::Approx(1.0));
  CHECK(w.collaborators[0].pose.y == doctest::Approx(4.0));
  CHECK(w.objects[1].pose.x == doctest::Approx(7.0));

  init.poses.pop_back();
  CHECK_THROWS_AS(make_world(init), std::invalid_argument);
}

TEST_CASE("footprint tracks the pose and keeps positive dimensions") {
  WorldState w = tiny_world();
  w.ego.pose = geom::make_pose(3.0, -1.0, 0.7);
  const geom::OrientedRect fp = footprint(w.ego);
  CHECK(fp.center.x == doctest::Approx(3.0));
  CHECK(fp.center.y == doctest::Approx(-1.0));
  CHECK(fp.center.heading == doctest::Approx(0.7));
  CHECK(fp.length > 0.0);
  CHECK(fp.width > 0.0);
}
