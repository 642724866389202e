#pragma once

#include <array>
#include <vector>

namespace coopbev::geom {

inline constexpr double kPi = 3.14159265358979323846;

// maps any angle to [-pi, pi)
double normalize_angle(double a);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, [-pi, pi)
};

inline Pose2D make_pose(double x, double y, double heading) {
  return Pose2D{x, y, normalize_angle(heading)};
}

// Rectangle centered on a pose; length runs along the heading axis, width
// across it.
struct OrientedRect {
  Pose2D center;
  double length = 0.0;
  double width = 0.0;
};

// Convex polygon, counter-clockwise, no repeated closing vertex.
using Polygon = std::vector<Vec2>;

// CCW corners starting from (+length/2, +width/2) in the rect frame
std::array<Vec2, 4> rect_corners(const OrientedRect& r);

// shoelace; expects CCW input, result clamped to >= 0
double polygon_area(const Polygon& p);

// Sutherland-Hodgman clip of one convex polygon against another
Polygon convex_clip(const Polygon& subject, const Polygon& clip);

double convex_intersection_area(const Polygon& a, const Polygon& b);
double convex_intersection_area(const OrientedRect& a, const OrientedRect& b);

bool point_in_convex(const Polygon& poly, const Vec2& p);

// Fraction of fov_i's area that does not overlap fov_e, in [0, 1]. Throws
// std::invalid_argument when fov_i has zero area.
double normalized_extended_fov(const OrientedRect& fov_i, const OrientedRect& fov_e);

}  // namespace coopbev::geom
