#pragma once

#include <optional>

namespace navrl::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

// Axis-aligned box.
struct Box {
  Vec2 center;
  double half_w = 0.0;
  double half_h = 0.0;
};

// First-hit distance along the ray (origin, unit direction), if any.
// A ray starting inside a solid shape hits its far surface.
std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir,
                                  const Segment& s);
std::optional<double> ray_circle(const Vec2& origin, const Vec2& dir,
                                 const Circle& c);
std::optional<double> ray_box(const Vec2& origin, const Vec2& dir,
                              const Box& b);

double point_segment_distance(const Vec2& p, const Segment& s);

// Signed distances: negative inside.
double circle_signed_distance(const Vec2& p, const Circle& c);
double box_signed_distance(const Vec2& p, const Box& b);

}  // namespace navrl::sim
