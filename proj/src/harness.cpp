#include "navrl/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <set>

namespace navrl::harness {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

rl::AgentKind parse_agent(const std::string& s) {
  if (s == "dqn") return rl::AgentKind::DQN;
  if (s == "ddqn") return rl::AgentKind::DDQN;
  throw ConfigError("config: agent must be 'dqn' or 'ddqn', got '" + s + "'");
}

void require_known_keys(const json& obj, const std::set<std::string>& allowed,
                        const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (scenario_id < 1 || scenario_id > 3)
    throw ConfigError("config: scenario must be 1, 2, or 3");
  if (checkpoint_interval < 0)
    throw ConfigError("config: checkpoint_interval must be >= 0");
  if (trials_per_goal < 0)
    throw ConfigError("config: trials_per_goal must be >= 0");
  if (out_dir.empty()) throw ConfigError("config: out_dir must be set");
  try {
    hp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& file, RunConfig base) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + file.string() + ": " + e.what());
  }

  require_known_keys(doc,
                     {"scenario", "scenario_dir", "agent", "seed", "out_dir",
                      "checkpoint_interval", "trials_per_goal", "hyperparams"},
                     "config");
  if (doc.contains("scenario")) base.scenario_id = doc.at("scenario").get<int>();
  if (doc.contains("scenario_dir"))
    base.scenario_dir = doc.at("scenario_dir").get<std::string>();
  if (doc.contains("agent"))
    base.agent = parse_agent(doc.at("agent").get<std::string>());
  if (doc.contains("seed")) base.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("out_dir")) base.out_dir = doc.at("out_dir").get<std::string>();
  if (doc.contains("checkpoint_interval"))
    base.checkpoint_interval = doc.at("checkpoint_interval").get<int>();
  if (doc.contains("trials_per_goal"))
    base.trials_per_goal = doc.at("trials_per_goal").get<int>();

  if (doc.contains("hyperparams")) {
    const json& hp = doc.at("hyperparams");
    require_known_keys(hp,
                       {"gamma", "epsilon_start", "epsilon_end",
                        "epsilon_decay_steps", "batch_size", "buffer_capacity",
                        "target_sync_interval", "learning_rate", "train_start",
                        "max_episodes", "grad_clip_norm"},
                       "hyperparams");
    auto& h = base.hp;
    if (hp.contains("gamma")) h.gamma = hp.at("gamma").get<double>();
    if (hp.contains("epsilon_start"))
      h.epsilon_start = hp.at("epsilon_start").get<double>();
    if (hp.contains("epsilon_end"))
      h.epsilon_end = hp.at("epsilon_end").get<double>();
    if (hp.contains("epsilon_decay_steps"))
      h.epsilon_decay_steps = hp.at("epsilon_decay_steps").get<double>();
    if (hp.contains("batch_size")) h.batch_size = hp.at("batch_size").get<int>();
    if (hp.contains("buffer_capacity"))
      h.buffer_capacity = hp.at("buffer_capacity").get<int>();
    if (hp.contains("target_sync_interval"))
      h.target_sync_interval = hp.at("target_sync_interval").get<int>();
    if (hp.contains("learning_rate"))
      h.learning_rate = hp.at("learning_rate").get<double>();
    if (hp.contains("train_start")) h.train_start = hp.at("train_start").get<int>();
    if (hp.contains("max_episodes"))
      h.max_episodes = hp.at("max_episodes").get<int>();
    if (hp.contains("grad_clip_norm"))
      h.grad_clip_norm = hp.at("grad_clip_norm").get<double>();
  }
  return base;
}

std::string config_to_json(const RunConfig& config) {
  ordered_json doc;
  doc["scenario"] = config.scenario_id;
  doc["scenario_dir"] = config.scenario_dir.string();
  doc["agent"] = std::string(rl::to_string(config.agent));
  doc["seed"] = config.seed;
  doc["out_dir"] = config.out_dir.string();
  doc["checkpoint_interval"] = config.checkpoint_interval;
  doc["trials_per_goal"] = config.trials_per_goal;
  ordered_json hp;
  hp["gamma"] = config.hp.gamma;
  hp["epsilon_start"] = config.hp.epsilon_start;
  hp["epsilon_end"] = config.hp.epsilon_end;
  hp["epsilon_decay_steps"] = config.hp.epsilon_decay_steps;
  hp["batch_size"] = config.hp.batch_size;
  hp["buffer_capacity"] = config.hp.buffer_capacity;
  hp["target_sync_interval"] = config.hp.target_sync_interval;
  hp["learning_rate"] = config.hp.learning_rate;
  hp["train_start"] = config.hp.train_start;
  hp["max_episodes"] = config.hp.max_episodes;
  hp["grad_clip_norm"] = config.hp.grad_clip_norm;
  doc["hyperparams"] = std::move(hp);
  return doc.dump(2) + "\n";
}

int EvalReport::successes() const {
  int n = 0;
  for (int s : per_goal_successes) n += s;
  return n;
}

std::optional<double> EvalReport::success_rate_percent() const {
  if (trials.empty()) return std::nullopt;
  return 100.0 * successes() / static_cast<double>(trials.size());
}

std::optional<double> EvalReport::episode_time_mean() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& t : trials)
    if (t.cause == TerminalCause::Goal) {
      sum += t.sim_time;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> EvalReport::episode_time_stddev() const {
  const auto mean = episode_time_mean();
  if (!mean) return std::nullopt;
  double ss = 0.0;
  int n = 0;
  for (const auto& t : trials)
    if (t.cause == TerminalCause::Goal) {
      ss += (t.sim_time - *mean) * (t.sim_time - *mean);
      ++n;
    }
  if (n < 2) return 0.0;
  return std::sqrt(ss / (n - 1));
}

EvalReport run_eval(const nn::Mlp& net, const scenarios::ScenarioSpec& spec,
                    int trials_per_goal, std::string label) {
  if (net.input_size() != sim::kObservationSize ||
      net.output_size() != sim::kActionCount)
    throw nn::CheckpointError(
        nn::CheckpointErrorKind::BadShape,
        "eval: checkpoint architecture mismatch (need " +
            std::to_string(sim::kObservationSize) + " inputs, " +
            std::to_string(sim::kActionCount) + " outputs)");

  EvalReport report;
  report.scenario_id = spec.id;
  report.label = std::move(label);
  report.trials_per_goal = trials_per_goal;

  sim::WorldModel world = spec.make_world();
  int trial_index = 0;
  for (int g = 0; g < 4; ++g) {
    for (int t = 0; t < trials_per_goal; ++t) {
      sim::Observation obs =
          world.reset(sim::FixedGoal{spec.fixed_goals[g]}, nullptr);

      TrialResult trial;
      trial.trial = trial_index++;
      trial.goal_index = g;
      trial.trajectory.push_back(world.robot());
      while (true) {
        const int action = rl::greedy_action(net.forward(obs.flatten()));
        const sim::StepOutcome out = world.step(action);
        obs = out.observation;
        trial.trajectory.push_back(world.robot());
        ++trial.steps;
        if (out.terminal) {
          trial.cause = out.cause;
          break;
        }
      }
      trial.sim_time = trial.steps * spec.params.control_dt;
      if (trial.cause == TerminalCause::Goal) ++report.per_goal_successes[g];
      report.trials.push_back(std::move(trial));
    }
  }
  return report;
}

namespace {

void write_eval_outputs(const EvalReport& report,
                        const scenarios::ScenarioSpec& spec,
                        const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  auto trials_csv = open_out(out_dir / "eval_trials.csv");
  trials_csv << "trial,goal_index,cause,steps,sim_time\n";
  for (const auto& t : report.trials)
    trials_csv << t.trial << ',' << t.goal_index << ',' << to_string(t.cause)
               << ',' << t.steps << ',' << fmt(t.sim_time) << '\n';

  auto traj_csv = open_out(out_dir / "trajectories.csv");
  traj_csv << "trial,goal_index,step,x,y,heading\n";
  for (const auto& t : report.trials)
    for (std::size_t i = 0; i < t.trajectory.size(); ++i)
      traj_csv << t.trial << ',' << t.goal_index << ',' << i << ','
               << fmt(t.trajectory[i].x) << ',' << fmt(t.trajectory[i].y)
               << ',' << fmt(t.trajectory[i].heading) << '\n';

  ordered_json doc;
  doc["scenario"] = report.scenario_id;
  doc["label"] = report.label;
  doc["trials_per_goal"] = report.trials_per_goal;
  doc["total_trials"] = report.total_trials();
  doc["successes"] = report.successes();
  ordered_json per_goal = ordered_json::array();
  for (int g = 0; g < 4; ++g) {
    ordered_json entry;
    entry["goal_index"] = g;
    entry["x"] = spec.fixed_goals[g].x;
    entry["y"] = spec.fixed_goals[g].y;
    entry["trials"] = report.trials_per_goal;
    entry["successes"] = report.per_goal_successes[g];
    per_goal.push_back(std::move(entry));
  }
  doc["per_goal"] = std::move(per_goal);
  doc["sr_defined"] = report.success_rate_percent().has_value();
  if (auto sr = report.success_rate_percent())
    doc["sr_percent"] = *sr;
  else
    doc["sr_percent"] = nullptr;
  if (auto et = report.episode_time_mean())
    doc["et_mean_s"] = *et;
  else
    doc["et_mean_s"] = nullptr;
  if (auto sd = report.episode_time_stddev())
    doc["et_std_s"] = *sd;
  else
    doc["et_std_s"] = nullptr;

  auto summary = open_out(out_dir / "eval_summary.json");
  summary << doc.dump(2) << '\n';
}

}  // namespace

int cmd_train(const RunConfig& config_in) {
  RunConfig config = config_in;
  const scenarios::ScenarioSpec spec =
      scenarios::load_scenario(config.scenario_id, config.scenario_dir);
  if (config.hp.max_episodes == 0)
    config.hp.max_episodes = spec.training_episodes;
  config.validate();

  std::filesystem::create_directories(config.out_dir);
  auto config_echo = open_out(config.out_dir / "config.json");
  config_echo << config_to_json(config);
  config_echo.close();

  sim::NavEnv env(spec.make_world(), sim::RandomGoal{});

  auto csv = open_out(config.out_dir / "training.csv");
  csv << "episode,steps,total_reward,terminal_cause,epsilon,mean_loss,"
         "reward_ma100\n";

  std::deque<double> window;
  double window_sum = 0.0;
  const auto on_episode = [&](const rl::EpisodeRecord& rec,
                              const nn::Mlp& online) {
    window.push_back(rec.total_reward);
    window_sum += rec.total_reward;
    if (window.size() > 100) {
      window_sum -= window.front();
      window.pop_front();
    }
    const double ma = window_sum / static_cast<double>(window.size());
    csv << rec.episode << ',' << rec.steps << ',' << fmt(rec.total_reward)
        << ',' << to_string(rec.cause) << ',' << fmt(rec.epsilon) << ','
        << fmt(rec.mean_loss) << ',' << fmt(ma) << '\n';

    if (config.checkpoint_interval > 0 &&
        (rec.episode + 1) % config.checkpoint_interval == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%06d.qnet", rec.episode + 1);
      nn::save_checkpoint(config.out_dir / name, online);
    }
    if (!config.quiet && (rec.episode + 1) % 100 == 0)
      std::cout << "episode " << (rec.episode + 1) << '/'
                << config.hp.max_episodes << "  ma100=" << fmt(ma)
                << "  epsilon=" << fmt(rec.epsilon) << std::endl;
  };

  rl::TrainResult result = rl::run_training(env, config.agent, config.hp,
                                            config.seed, {256, 256, 256},
                                            on_episode);
  nn::save_checkpoint(config.out_dir / "final.qnet", result.net);
  return 0;
}

int cmd_eval(const std::filesystem::path& checkpoint, int scenario_id,
             const std::filesystem::path& scenario_dir, int trials_per_goal,
             const std::filesystem::path& out_dir, const std::string& label) {
  if (trials_per_goal < 0)
    throw ConfigError("eval: trials_per_goal must be >= 0");
  const nn::Mlp net = nn::load_checkpoint(checkpoint);
  const scenarios::ScenarioSpec spec =
      scenarios::load_scenario(scenario_id, scenario_dir);
  const std::string tag = label.empty() ? checkpoint.stem().string() : label;
  const EvalReport report = run_eval(net, spec, trials_per_goal, tag);
  write_eval_outputs(report, spec, out_dir);
  return 0;
}

namespace {

struct SummaryRow {
  int scenario = 0;
  std::string label;
  bool sr_defined = false;
  double sr = 0.0;
  bool et_defined = false;
  double et_mean = 0.0;
  double et_std = 0.0;
};

SummaryRow read_summary(const std::filesystem::path& path_in) {
  std::filesystem::path path = path_in;
  if (std::filesystem::is_directory(path)) path /= "eval_summary.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("compare: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("compare: " + path.string() + ": " + e.what());
  }
  SummaryRow row;
  row.scenario = doc.at("scenario").get<int>();
  row.label = doc.at("label").get<std::string>();
  row.sr_defined = !doc.at("sr_percent").is_null();
  if (row.sr_defined) row.sr = doc.at("sr_percent").get<double>();
  row.et_defined = !doc.at("et_mean_s").is_null();
  if (row.et_defined) {
    row.et_mean = doc.at("et_mean_s").get<double>();
    row.et_std = doc.at("et_std_s").is_null() ? 0.0 : doc.at("et_std_s").get<double>();
  }
  return row;
}

}  // namespace

int cmd_compare(const std::filesystem::path& report_a,
                const std::filesystem::path& report_b, std::ostream& out) {
  const SummaryRow a = read_summary(report_a);
  const SummaryRow b = read_summary(report_b);
  if (a.scenario != b.scenario)
    throw ConfigError("compare: reports cover different scenarios (" +
                      std::to_string(a.scenario) + " vs " +
                      std::to_string(b.scenario) + ")");

  char line[160];
  out << "Env  Algorithm        ET (s)              SR\n";
  for (const SummaryRow* row : {&a, &b}) {
    std::string et = "n/a";
    if (row->et_defined) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f +/- %.2f", row->et_mean, row->et_std);
      et = buf;
    }
    std::string sr = "n/a";
    if (row->sr_defined) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.0f%%", row->sr);
      sr = buf;
    }
    std::snprintf(line, sizeof(line), "%-4d %-16s %-19s %s\n", row->scenario,
                  row->label.c_str(), et.c_str(), sr.c_str());
    out << line;
  }
  return 0;
}

}  // namespace navrl::harness
