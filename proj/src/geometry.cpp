#include "coopbev/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace coopbev::geom {

double normalize_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r - kPi;
}

std::array<Vec2, 4> rect_corners(const OrientedRect& r) {
  const double c = std::cos(r.center.heading);
  const double s = std::sin(r.center.heading);
  const double hl = 0.5 * r.length;
  const double hw = 0.5 * r.width;
  auto at = [&](double a, double b) {
    return Vec2{r.center.x + a * c - b * s, r.center.y + a * s + b * c};
  };
  return {at(hl, hw), at(-hl, hw), at(-hl, -hw), at(hl, -hw)};
}

double polygon_area(const Polygon& p) {
  if (p.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  const double area = 0.5 * twice;
  return area > 0.0 ? area : 0.0;
}

Polygon convex_clip(const Polygon& subject, const Polygon& clip) {
  constexpr double eps = 1e-12;
  Polygon out = subject;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Vec2 a = clip[i];
    const Vec2 b = clip[(i + 1) % clip.size()];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    Polygon in;
    in.swap(out);
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Vec2 p = in[j];
      const Vec2 q = in[(j + 1) % in.size()];
      const double sp = ex * (p.y - a.y) - ey * (p.x - a.x);
      const double sq = ex * (q.y - a.y) - ey * (q.x - a.x);
      const bool p_in = sp >= -eps;
      const bool q_in = sq >= -eps;
      if (p_in) out.push_back(p);
      if (p_in != q_in) {
        const double t = sp / (sp - sq);
        out.push_back(Vec2{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
  }
  return out;
}

double convex_intersection_area(const Polygon& a, const Polygon& b) {
  return polygon_area(convex_clip(a, b));
}

double convex_intersection_area(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = rect_corners(a);
  const auto cb = rect_corners(b);
  return convex_intersection_area(Polygon(ca.begin(), ca.end()),
                                  Polygon(cb.begin(), cb.end()));
}

bool point_in_convex(const Polygon& poly, const Vec2& p) {
  if (poly.size() < 3) return false;
  constexpr double eps = 1e-9;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const double cr = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cr < -eps) return false;
  }
  return true;
}

double normalized_extended_fov(const OrientedRect& fov_i, const OrientedRect& fov_e) {
  // Measure fov_i through the same corner/shoelace path as the clipped
  // intersection so the self-overlap ratio is exactly 1.
  const auto corners = rect_corners(fov_i);
  const double area_i = polygon_area(Polygon(corners.begin(), corners.end()));
  if (!(area_i > 0.0)) {
    throw std::invalid_argument("normalized_extended_fov: fov_i has zero area");
  }
  const double inter = convex_intersection_area(fov_i, fov_e);
  double a = 1.0 - inter / area_i;
  if (a < 0.0) a = 0.0;
  if (a > 1.0) a = 1.0;
  return a;
}

}  // namespace coopbev::geom
