#pragma once

#include <Eigen/Dense>

#include "navrl/core.hpp"

namespace navrl::rl {

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool terminal = false;
  TerminalCause cause = TerminalCause::Running;
};

// Episodic environment driven by a training or evaluation loop. Environments
// must terminate every episode on their own (goal, collision, or step cap).
class Env {
 public:
  virtual ~Env() = default;

  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;

  // Begins a new episode and returns the first observation.
  virtual Eigen::VectorXd reset(Rng& rng) = 0;

  virtual StepResult step(int action) = 0;

  // Simulated duration of one step, for episode-time bookkeeping.
  virtual double step_seconds() const { return 1.0; }
};

}  // namespace navrl::rl
