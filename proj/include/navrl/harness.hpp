#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "navrl/rl.hpp"
#include "navrl/scenario.hpp"

namespace navrl::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int scenario_id = 1;
  std::filesystem::path scenario_dir = "scenarios";
  rl::AgentKind agent = rl::AgentKind::DDQN;
  rl::Hyperparams hp;  // hp.max_episodes == 0 -> scenario's training budget
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  int checkpoint_interval = 500;  // episodes; 0 disables periodic checkpoints
  int trials_per_goal = 25;
  bool quiet = false;

  void validate() const;  // throws ConfigError
};

// JSON config file; unknown keys are rejected. Fields present in the file
// replace the passed-in values (command-line flags are applied on top by the
// CLI).
RunConfig load_config(const std::filesystem::path& file, RunConfig base = {});

// Serialized echo of the resolved configuration, written next to outputs.
std::string config_to_json(const RunConfig& config);

struct TrialResult {
  int trial = 0;       // global index, goal-major
  int goal_index = 0;  // 0..3
  TerminalCause cause = TerminalCause::Running;
  int steps = 0;
  double sim_time = 0.0;
  std::vector<sim::Pose> trajectory;  // start pose plus one pose per step
};

struct EvalReport {
  int scenario_id = 0;
  std::string label;  // algorithm tag for comparison tables
  int trials_per_goal = 0;
  std::array<int, 4> per_goal_successes{};
  std::vector<TrialResult> trials;

  int total_trials() const { return static_cast<int>(trials.size()); }
  int successes() const;
  // Undefined (nullopt) when there are no trials / no successes.
  std::optional<double> success_rate_percent() const;
  std::optional<double> episode_time_mean() const;  // successful trials only
  std::optional<double> episode_time_stddev() const;
};

// Greedy (epsilon = 0) rollouts: trials_per_goal episodes against each of
// the four fixed goals. The network is not mutated.
EvalReport run_eval(const nn::Mlp& net, const scenarios::ScenarioSpec& spec,
                    int trials_per_goal, std::string label);

// Trains for the configured episode budget; writes periodic checkpoints, a
// final checkpoint, training.csv (with a window-100 moving-average reward
// column), and a config echo into config.out_dir.
int cmd_train(const RunConfig& config);

// Evaluates a checkpoint on a scenario; writes eval_trials.csv,
// trajectories.csv, and eval_summary.json into out_dir.
int cmd_eval(const std::filesystem::path& checkpoint, int scenario_id,
             const std::filesystem::path& scenario_dir, int trials_per_goal,
             const std::filesystem::path& out_dir, const std::string& label);

// Side-by-side table from two eval_summary.json files (or their directories)
// covering the same scenario.
int cmd_compare(const std::filesystem::path& report_a,
                const std::filesystem::path& report_b, std::ostream& out);

}  // namespace navrl::harness
