#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "navrl/sim.hpp"

namespace navrl::scenarios {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One of the three arenas: geometry, start pose, the four fixed evaluation
// goals, and the training episode budget.
struct ScenarioSpec {
  int id = 0;
  std::string name;
  sim::WorldParams params;
  sim::Pose start_pose;
  std::vector<sim::Segment> walls;  // interior walls, arena bounds excluded
  std::vector<sim::Circle> circles;
  std::vector<sim::Box> boxes;
  std::array<sim::Vec2, 4> fixed_goals{};
  int training_episodes = 0;

  sim::WorldModel make_world() const;
};

// Parses and validates a scenario file: schema version, unknown keys,
// exactly four fixed goals, spawn clearance of start pose and goals, and
// reachability of every fixed goal. Violations raise ScenarioError naming
// the failing constraint.
ScenarioSpec load_scenario(const std::filesystem::path& file);

// Bundled scenario by id: <scenario_dir>/scenario<id>.json.
ScenarioSpec load_scenario(int id, const std::filesystem::path& scenario_dir);

// Flood-fill over free space (obstacles inflated by the collision distance
// plus one motion step) at 5 cm resolution, from the start pose. Returns the
// indices of fixed goals that cannot be reached; empty means all fine.
std::vector<int> validate_reachability(const ScenarioSpec& spec);

}  // namespace navrl::scenarios
