#include "navrl/rl.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace navrl::rl {

ReplayBuffer::ReplayBuffer(int capacity, Rng rng)
    : capacity_(capacity), rng_(rng) {
  if (capacity <= 0)
    throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
}

bool ReplayBuffer::sample(int n, std::vector<Transition>& out) {
  if (storage_.empty()) return false;
  out.resize(n);
  for (int i = 0; i < n; ++i) out[i] = storage_[rng_.uniform_int(size())];
  return true;
}

void Hyperparams::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("hyperparams: gamma must be in [0, 1)");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0))
    throw std::invalid_argument("hyperparams: epsilon_start must be in [0, 1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start))
    throw std::invalid_argument(
        "hyperparams: need 0 <= epsilon_end <= epsilon_start");
  if (!(epsilon_decay_steps > 0.0))
    throw std::invalid_argument("hyperparams: epsilon_decay_steps must be > 0");
  if (batch_size <= 0)
    throw std::invalid_argument("hyperparams: batch_size must be positive");
  if (buffer_capacity <= 0)
    throw std::invalid_argument("hyperparams: buffer_capacity must be positive");
  if (target_sync_interval <= 0)
    throw std::invalid_argument(
        "hyperparams: target_sync_interval must be positive");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("hyperparams: learning_rate must be positive");
  if (train_start < 0)
    throw std::invalid_argument("hyperparams: train_start must be >= 0");
  if (max_episodes < 0)
    throw std::invalid_argument("hyperparams: max_episodes must be >= 0");
  if (grad_clip_norm < 0.0)
    throw std::invalid_argument("hyperparams: grad_clip_norm must be >= 0");
}

int greedy_action(const Eigen::Ref<const Vec>& q) {
  int best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = static_cast<int>(i);
  return best;
}

int select_action(const Eigen::Ref<const Vec>& q, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon)
    return rng.uniform_int(static_cast<int>(q.size()));
  return greedy_action(q);
}

double epsilon_at(std::int64_t step, const Hyperparams& hp) {
  return hp.epsilon_end + (hp.epsilon_start - hp.epsilon_end) *
                              std::exp(-static_cast<double>(step) /
                                       hp.epsilon_decay_steps);
}

double dqn_target(double reward, bool terminal,
                  const Eigen::Ref<const Vec>& q_next_target, double gamma) {
  if (!std::isfinite(reward) || !q_next_target.allFinite())
    throw std::invalid_argument("dqn_target: non-finite input");
  if (terminal) return reward;
  return reward + gamma * q_next_target.maxCoeff();
}

double ddqn_target(double reward, bool terminal,
                   const Eigen::Ref<const Vec>& q_next_online,
                   const Eigen::Ref<const Vec>& q_next_target, double gamma) {
  if (!std::isfinite(reward) || !q_next_online.allFinite() ||
      !q_next_target.allFinite())
    throw std::invalid_argument("ddqn_target: non-finite input");
  if (terminal) return reward;
  return reward + gamma * q_next_target[greedy_action(q_next_online)];
}

double train_step(AgentKind kind, Mlp& online, const Mlp& target,
                  std::span<const Transition> batch, const Hyperparams& hp,
                  nn::Adam& opt, TrainScratch& scratch) {
  const auto batch_size = static_cast<Eigen::Index>(batch.size());
  if (batch_size == 0) throw std::invalid_argument("train_step: empty batch");

  const int in_dim = online.input_size();
  scratch.states.resize(in_dim, batch_size);
  scratch.next_states.resize(in_dim, batch_size);
  scratch.actions.resize(batch_size);
  scratch.targets.resize(batch_size);
  for (Eigen::Index i = 0; i < batch_size; ++i) {
    scratch.states.col(i) = batch[i].state;
    scratch.next_states.col(i) = batch[i].next_state;
    scratch.actions[i] = batch[i].action;
  }

  const Mat& q_next_target =
      target.forward_batch(scratch.next_states, scratch.target_acts);
  if (kind == AgentKind::DDQN) {
    const Mat& q_next_online =
        online.forward_batch(scratch.next_states, scratch.next_online_acts);
    for (Eigen::Index i = 0; i < batch_size; ++i)
      scratch.targets[i] =
          ddqn_target(batch[i].reward, batch[i].terminal, q_next_online.col(i),
                      q_next_target.col(i), hp.gamma);
  } else {
    for (Eigen::Index i = 0; i < batch_size; ++i)
      scratch.targets[i] = dqn_target(batch[i].reward, batch[i].terminal,
                                      q_next_target.col(i), hp.gamma);
  }

  const double loss =
      nn::backward_batch(online, scratch.states, scratch.actions,
                         scratch.targets, scratch.online_acts, scratch.grads);
  if (!std::isfinite(loss))
    throw std::runtime_error("train_step: non-finite loss, training diverged");

  if (hp.grad_clip_norm > 0.0) {
    const double norm = std::sqrt(scratch.grads.squared_norm());
    if (norm > hp.grad_clip_norm) scratch.grads.scale(hp.grad_clip_norm / norm);
  }
  opt.step(online, scratch.grads);
  return loss;
}

double train_step(AgentKind kind, Mlp& online, const Mlp& target,
                  std::span<const Transition> batch, const Hyperparams& hp,
                  nn::Adam& opt) {
  TrainScratch scratch;
  return train_step(kind, online, target, batch, hp, opt, scratch);
}

TrainResult run_training(Env& env, AgentKind kind, const Hyperparams& hp,
                         std::uint64_t seed,
                         const std::vector<int>& hidden_dims,
                         const EpisodeCallback& on_episode) {
  hp.validate();

  // Independent streams so that, e.g., goal placement does not perturb
  // exploration when unrelated settings change.
  Rng init_rng(seed, 0);
  Rng policy_rng(seed, 1);
  Rng env_rng(seed, 3);
  ReplayBuffer buffer(hp.buffer_capacity, Rng(seed, 2));

  std::vector<int> dims;
  dims.push_back(env.observation_size());
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(env.action_count());

  Mlp online(dims, init_rng);
  Mlp target = online;
  nn::Adam opt(online, hp.learning_rate);

  const int train_start = std::max(hp.train_start, hp.batch_size);
  TrainScratch scratch;
  std::vector<Transition> batch;

  TrainResult result{std::move(online), {}};
  result.episodes.reserve(hp.max_episodes);
  std::int64_t total_steps = 0;

  for (int episode = 0; episode < hp.max_episodes; ++episode) {
    Vec obs = env.reset(env_rng);
    double episode_reward = 0.0;
    double loss_sum = 0.0;
    int loss_count = 0;
    int steps = 0;
    double epsilon = 0.0;
    TerminalCause cause = TerminalCause::Running;

    while (true) {
      epsilon = epsilon_at(total_steps, hp);
      const int action = select_action(result.net.forward(obs), epsilon, policy_rng);
      StepResult sr = env.step(action);

      Transition t;
      t.state = std::move(obs);
      t.action = action;
      t.reward = sr.reward;
      t.next_state = sr.observation;
      t.terminal = sr.terminal;
      buffer.push(std::move(t));
      obs = std::move(sr.observation);

      episode_reward += sr.reward;
      ++steps;
      ++total_steps;

      if (buffer.size() >= train_start) {
        buffer.sample(hp.batch_size, batch);
        loss_sum += train_step(kind, result.net, target, batch, hp, opt, scratch);
        ++loss_count;
      }
      if (total_steps % hp.target_sync_interval == 0)
        copy_weights(result.net, target);

      if (sr.terminal) {
        cause = sr.cause;
        break;
      }
    }

    EpisodeRecord record;
    record.episode = episode;
    record.steps = steps;
    record.total_reward = episode_reward;
    record.cause = cause;
    record.epsilon = epsilon;
    record.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    record.sim_time = steps * env.step_seconds();
    result.episodes.push_back(record);
    if (on_episode) on_episode(record, result.net);
  }
  return result;
}

}  // namespace navrl::rl
