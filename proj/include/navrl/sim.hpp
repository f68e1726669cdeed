#pragma once

#include <Eigen/Dense>
#include <array>
#include <variant>
#include <vector>

#include "navrl/core.hpp"
#include "navrl/env.hpp"
#include "navrl/geometry.hpp"

namespace navrl::sim {

inline constexpr int kLidarBeams = 24;
inline constexpr int kActionCount = 5;
inline constexpr int kObservationSize = kLidarBeams + 2;

// Action index -> commanded angular velocity (rad/s); linear speed is fixed.
inline constexpr std::array<double, kActionCount> kAngularSpeed = {
    -1.5, -0.75, 0.0, 0.75, 1.5};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, kept in (-pi, pi]
};

struct WorldParams {
  double half_extent = 2.0;          // square arena [-h, h]^2
  double robot_radius = 0.105;       // body radius, clearance bookkeeping only
  double linear_speed = 0.15;        // m/s, never negative
  double control_dt = 0.2;           // s
  double lidar_max_range = 3.5;      // m
  double goal_radius = 0.25;         // success margin, m
  double collision_distance = 0.12;  // on the minimum raw lidar range, m
  int idle_step_limit = 500;
  double spawn_clearance = 0.30;     // goal placement clearance, m

  double arena_diagonal() const { return 2.0 * half_extent * std::sqrt(2.0); }
};

// 24 normalized lidar ranges plus the goal's relative distance and bearing.
struct Observation {
  std::array<double, kLidarBeams> lidar{};  // each in (0, 1]
  double goal_distance = 0.0;               // [0, 1], by arena diagonal
  double goal_heading_error = 0.0;          // [-1, 1], by pi

  Eigen::VectorXd flatten() const;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
  TerminalCause cause = TerminalCause::Running;
};

struct RandomGoal {};
struct FixedGoal {
  Vec2 point;
};
using GoalSpec = std::variant<RandomGoal, FixedGoal>;

// Deterministic 2D world: unicycle kinematics at fixed linear speed, raycast
// lidar against static geometry, and goal/collision/idle termination.
class WorldModel {
 public:
  WorldModel(const WorldParams& params, Pose start_pose,
             std::vector<Segment> interior_walls, std::vector<Circle> circles,
             std::vector<Box> boxes);

  const WorldParams& params() const { return params_; }
  const Pose& robot() const { return robot_; }
  const Vec2& goal() const { return goal_; }
  const std::vector<Segment>& walls() const { return walls_; }
  const std::vector<Circle>& circles() const { return circles_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  int steps_elapsed() const { return steps_; }
  bool terminal() const { return terminal_; }

  // First hit among walls and obstacles, clamped to lidar_max_range.
  double raycast(const Vec2& origin, const Vec2& dir) const;

  // Raw (unnormalized) ranges; beam i points at heading + i * 15 degrees.
  std::array<double, kLidarBeams> lidar_scan(const Pose& pose) const;

  // Distance from p to the nearest wall or obstacle surface; negative
  // outside the arena or inside an obstacle.
  double clearance(const Vec2& p) const;

  // Goal before collision before idle; Running otherwise.
  TerminalCause check_termination(int steps_elapsed) const;

  Observation observe() const;

  // Advances the pose along an exact arc (straight segment when the action
  // commands zero angular velocity), then evaluates termination. Throws if
  // the episode already ended.
  StepOutcome step(int action, double dt);
  StepOutcome step(int action) { return step(action, params_.control_dt); }

  // Restores the start pose and places the goal. Random placement rejection-
  // samples uniformly over the arena until spawn clearance holds.
  Observation reset(const GoalSpec& goal, Rng* rng);

  void set_robot(const Pose& pose) { robot_ = pose; }

 private:
  WorldParams params_;
  Pose start_pose_;
  Pose robot_;
  std::vector<Segment> walls_;  // four arena walls plus interior segments
  std::vector<Circle> circles_;
  std::vector<Box> boxes_;
  Vec2 goal_;
  bool has_goal_ = false;
  int steps_ = 0;
  bool terminal_ = false;
};

// rl::Env adapter: one WorldModel plus a goal policy for resets.
class NavEnv final : public rl::Env {
 public:
  NavEnv(WorldModel world, GoalSpec goal_spec)
      : world_(std::move(world)), goal_spec_(std::move(goal_spec)) {}

  int observation_size() const override { return kObservationSize; }
  int action_count() const override { return kActionCount; }
  Eigen::VectorXd reset(Rng& rng) override {
    return world_.reset(goal_spec_, &rng).flatten();
  }
  rl::StepResult step(int action) override {
    StepOutcome out = world_.step(action);
    return {out.observation.flatten(), out.reward, out.terminal, out.cause};
  }
  double step_seconds() const override { return world_.params().control_dt; }

  const WorldModel& world() const { return world_; }
  WorldModel& world() { return world_; }

 private:
  WorldModel world_;
  GoalSpec goal_spec_;
};

}  // namespace navrl::sim
