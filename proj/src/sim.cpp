#include "navrl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace navrl::sim {

namespace {
constexpr double kMinRange = 1e-9;  // keeps normalized lidar strictly positive
}

Eigen::VectorXd Observation::flatten() const {
  Eigen::VectorXd v(kObservationSize);
  for (int i = 0; i < kLidarBeams; ++i) v[i] = lidar[i];
  v[kLidarBeams] = goal_distance;
  v[kLidarBeams + 1] = goal_heading_error;
  return v;
}

WorldModel::WorldModel(const WorldParams& params, Pose start_pose,
                       std::vector<Segment> interior_walls,
                       std::vector<Circle> circles, std::vector<Box> boxes)
    : params_(params),
      start_pose_(start_pose),
      robot_(start_pose),
      walls_(std::move(interior_walls)),
      circles_(std::move(circles)),
      boxes_(std::move(boxes)) {
  const double h = params_.half_extent;
  walls_.push_back({{-h, -h}, {h, -h}});
  walls_.push_back({{h, -h}, {h, h}});
  walls_.push_back({{h, h}, {-h, h}});
  walls_.push_back({{-h, h}, {-h, -h}});
}

double WorldModel::raycast(const Vec2& origin, const Vec2& dir) const {
  double best = params_.lidar_max_range;
  for (const auto& s : walls_)
    if (auto t = ray_segment(origin, dir, s)) best = std::min(best, *t);
  for (const auto& c : circles_)
    if (auto t = ray_circle(origin, dir, c)) best = std::min(best, *t);
  for (const auto& b : boxes_)
    if (auto t = ray_box(origin, dir, b)) best = std::min(best, *t);
  return std::max(best, kMinRange);
}

std::array<double, kLidarBeams> WorldModel::lidar_scan(const Pose& pose) const {
  std::array<double, kLidarBeams> ranges;
  const double increment = 2.0 * std::numbers::pi / kLidarBeams;
  for (int i = 0; i < kLidarBeams; ++i) {
    const double angle = pose.heading + i * increment;
    ranges[i] = raycast({pose.x, pose.y}, {std::cos(angle), std::sin(angle)});
  }
  return ranges;
}

double WorldModel::clearance(const Vec2& p) const {
  const double h = params_.half_extent;
  double d = std::min({h - std::abs(p.x), h - std::abs(p.y)});
  for (const auto& s : walls_) d = std::min(d, point_segment_distance(p, s));
  for (const auto& c : circles_) d = std::min(d, circle_signed_distance(p, c));
  for (const auto& b : boxes_) d = std::min(d, box_signed_distance(p, b));
  return d;
}

TerminalCause WorldModel::check_termination(int steps_elapsed) const {
  const double goal_dist = std::hypot(robot_.x - goal_.x, robot_.y - goal_.y);
  if (goal_dist <= params_.goal_radius) return TerminalCause::Goal;
  const auto ranges = lidar_scan(robot_);
  if (*std::min_element(ranges.begin(), ranges.end()) <
      params_.collision_distance)
    return TerminalCause::Collision;
  if (steps_elapsed >= params_.idle_step_limit) return TerminalCause::Idle;
  return TerminalCause::Running;
}

Observation WorldModel::observe() const {
  if (!has_goal_) throw std::logic_error("observe: world has no goal; reset first");
  Observation obs;
  const auto ranges = lidar_scan(robot_);
  for (int i = 0; i < kLidarBeams; ++i)
    obs.lidar[i] =
        std::clamp(ranges[i], kMinRange, params_.lidar_max_range) /
        params_.lidar_max_range;
  obs.goal_distance =
      std::min(std::hypot(goal_.x - robot_.x, goal_.y - robot_.y) /
                   params_.arena_diagonal(),
               1.0);
  const double bearing = std::atan2(goal_.y - robot_.y, goal_.x - robot_.x);
  obs.goal_heading_error =
      wrap_angle(bearing - robot_.heading) / std::numbers::pi;
  return obs;
}

StepOutcome WorldModel::step(int action, double dt) {
  if (terminal_)
    throw std::logic_error("step: episode already terminal; reset first");
  if (action < 0 || action >= kActionCount)
    throw std::invalid_argument("step: action index out of range");
  if (!has_goal_) throw std::logic_error("step: world has no goal; reset first");

  const double v = params_.linear_speed;
  const double w = kAngularSpeed[action];
  if (w == 0.0) {
    robot_.x += v * dt * std::cos(robot_.heading);
    robot_.y += v * dt * std::sin(robot_.heading);
  } else {
    // Exact unicycle arc of radius v / w.
    const double radius = v / w;
    const double next_heading = robot_.heading + w * dt;
    robot_.x += radius * (std::sin(next_heading) - std::sin(robot_.heading));
    robot_.y -= radius * (std::cos(next_heading) - std::cos(robot_.heading));
    robot_.heading = wrap_angle(next_heading);
  }
  ++steps_;

  const TerminalCause cause = check_termination(steps_);
  terminal_ = cause != TerminalCause::Running;

  StepOutcome out;
  out.observation = observe();
  out.cause = cause;
  out.terminal = terminal_;
  out.reward = cause == TerminalCause::Goal        ? 200.0
               : cause == TerminalCause::Collision ? -20.0
                                                   : 0.0;
  return out;
}

Observation WorldModel::reset(const GoalSpec& goal, Rng* rng) {
  robot_ = start_pose_;
  steps_ = 0;
  terminal_ = false;

  if (const auto* fixed = std::get_if<FixedGoal>(&goal)) {
    if (clearance(fixed->point) < params_.spawn_clearance)
      throw std::invalid_argument("reset: fixed goal violates spawn clearance");
    goal_ = fixed->point;
  } else {
    if (rng == nullptr)
      throw std::invalid_argument("reset: random goal needs an rng");
    const double h = params_.half_extent;
    bool placed = false;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const Vec2 p{rng->uniform(-h, h), rng->uniform(-h, h)};
      if (clearance(p) >= params_.spawn_clearance) {
        goal_ = p;
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::runtime_error(
          "reset: goal placement failed after 10000 rejection samples; "
          "scenario geometry leaves no clear space");
  }
  has_goal_ = true;
  return observe();
}

}  // namespace navrl::sim
