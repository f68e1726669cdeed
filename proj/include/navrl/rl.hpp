#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "navrl/core.hpp"
#include "navrl/env.hpp"
#include "navrl/nn.hpp"

namespace navrl::rl {

using nn::Mat;
using nn::Mlp;
using nn::Vec;

enum class AgentKind { DQN, DDQN };

constexpr std::string_view to_string(AgentKind kind) {
  return kind == AgentKind::DQN ? "dqn" : "ddqn";
}

struct Transition {
  Vec state;
  int action = 0;
  double reward = 0.0;
  Vec next_state;
  bool terminal = false;
};

// Bounded FIFO of transitions with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, Rng rng);

  void push(Transition t);

  int size() const { return static_cast<int>(storage_.size()); }
  int capacity() const { return capacity_; }

  // Fills `out` with n uniform draws (with replacement). Returns false and
  // leaves `out` untouched while the buffer is still empty.
  bool sample(int n, std::vector<Transition>& out);

 private:
  int capacity_;
  std::vector<Transition> storage_;
  int next_ = 0;  // overwrite position once full
  Rng rng_;
};

struct Hyperparams {
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_steps = 20000.0;
  int batch_size = 64;
  int buffer_capacity = 100000;
  int target_sync_interval = 2000;  // environment steps between hard syncs
  double learning_rate = 1e-4;
  int train_start = 2000;  // transitions stored before updates begin
  int max_episodes = 0;
  double grad_clip_norm = 0.0;  // 0 disables clipping

  // Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

// Greedy action; the lowest index wins ties.
int greedy_action(const Eigen::Ref<const Vec>& q);

// Epsilon-greedy: argmax with probability 1-epsilon, else uniform.
int select_action(const Eigen::Ref<const Vec>& q, double epsilon, Rng& rng);

// epsilon_end + (epsilon_start - epsilon_end) * exp(-step / decay_steps)
double epsilon_at(std::int64_t step, const Hyperparams& hp);

// One-step TD target bootstrapped from the target network's maximum.
double dqn_target(double reward, bool terminal,
                  const Eigen::Ref<const Vec>& q_next_target, double gamma);

// Double-DQN target: the online network selects the action, the target
// network evaluates it.
double ddqn_target(double reward, bool terminal,
                   const Eigen::Ref<const Vec>& q_next_online,
                   const Eigen::Ref<const Vec>& q_next_target, double gamma);

// Preallocated buffers for train_step; reuse across calls in hot loops.
struct TrainScratch {
  Mat states;
  Mat next_states;
  std::vector<int> actions;
  Vec targets;
  Mlp::Activations online_acts;
  Mlp::Activations next_online_acts;
  Mlp::Activations target_acts;
  nn::Gradients grads;
};

// One optimization step on the batch: per-sample targets from the frozen
// target net (plus online-net action selection for DDQN), then one Adam step
// on the mean squared error. Returns the pre-update loss; throws on a
// non-finite loss (divergence guard).
double train_step(AgentKind kind, Mlp& online, const Mlp& target,
                  std::span<const Transition> batch, const Hyperparams& hp,
                  nn::Adam& opt, TrainScratch& scratch);
double train_step(AgentKind kind, Mlp& online, const Mlp& target,
                  std::span<const Transition> batch, const Hyperparams& hp,
                  nn::Adam& opt);

struct EpisodeRecord {
  int episode = 0;
  int steps = 0;
  double total_reward = 0.0;
  TerminalCause cause = TerminalCause::Running;
  double epsilon = 0.0;    // value used for the episode's final step
  double mean_loss = 0.0;  // 0 until training has started
  double sim_time = 0.0;   // steps * env.step_seconds()
};

struct TrainResult {
  Mlp net;
  std::vector<EpisodeRecord> episodes;
};

using EpisodeCallback =
    std::function<void(const EpisodeRecord& record, const Mlp& online)>;

// Episodic training loop, deterministic given the seed. Each environment
// step: epsilon-greedy act, store the transition, one gradient step once the
// buffer holds max(train_start, batch_size) transitions, and a hard target
// sync every target_sync_interval steps.
TrainResult run_training(Env& env, AgentKind kind, const Hyperparams& hp,
                         std::uint64_t seed,
                         const std::vector<int>& hidden_dims = {256, 256, 256},
                         const EpisodeCallback& on_episode = {});

}  // namespace navrl::rl
