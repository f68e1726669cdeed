#include "navrl/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace navrl::sim {

namespace {

double cross(const Vec2& u, const Vec2& v) { return u.x * v.y - u.y * v.x; }
double dot(const Vec2& u, const Vec2& v) { return u.x * v.x + u.y * v.y; }
Vec2 sub(const Vec2& u, const Vec2& v) { return {u.x - v.x, u.y - v.y}; }

}  // namespace

std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir,
                                  const Segment& s) {
  const Vec2 e = sub(s.b, s.a);
  const double denom = cross(dir, e);
  if (denom == 0.0) return std::nullopt;  // parallel (collinear rays miss too)
  const Vec2 ao = sub(s.a, origin);
  const double t = cross(ao, e) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_circle(const Vec2& origin, const Vec2& dir,
                                 const Circle& c) {
  const Vec2 oc = sub(origin, c.center);
  const double b = dot(oc, dir);
  const double q = dot(oc, oc) - c.radius * c.radius;
  const double disc = b * b - q;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  double t = -b - root;
  if (t < 0.0) t = -b + root;  // origin inside: exit surface
  if (t < 0.0) return std::nullopt;
  return t;
}

std::optional<double> ray_box(const Vec2& origin, const Vec2& dir,
                              const Box& b) {
  // Slab test on both axes.
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double lo[2] = {b.center.x - b.half_w, b.center.y - b.half_h};
  const double hi[2] = {b.center.x + b.half_w, b.center.y + b.half_h};
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return std::nullopt;
      continue;
    }
    double t0 = (lo[axis] - o[axis]) / d[axis];
    double t1 = (hi[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmax < 0.0) return std::nullopt;
  return tmin >= 0.0 ? tmin : tmax;  // inside: exit surface
}

double point_segment_distance(const Vec2& p, const Segment& s) {
  const Vec2 e = sub(s.b, s.a);
  const Vec2 ap = sub(p, s.a);
  const double len2 = dot(e, e);
  double t = len2 > 0.0 ? dot(ap, e) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 closest{s.a.x + t * e.x, s.a.y + t * e.y};
  return std::hypot(p.x - closest.x, p.y - closest.y);
}

double circle_signed_distance(const Vec2& p, const Circle& c) {
  return std::hypot(p.x - c.center.x, p.y - c.center.y) - c.radius;
}

double box_signed_distance(const Vec2& p, const Box& b) {
  const double dx = std::abs(p.x - b.center.x) - b.half_w;
  const double dy = std::abs(p.y - b.center.y) - b.half_h;
  const double outside = std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
  const double inside = std::min(std::max(dx, dy), 0.0);
  return outside + inside;
}

}  // namespace navrl::sim
