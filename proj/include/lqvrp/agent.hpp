#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqvrp/advisor.hpp"
#include "lqvrp/env.hpp"
#include "lqvrp/model.hpp"
#include "lqvrp/qnet.hpp"
#include "lqvrp/replay.hpp"

namespace lqvrp {

// Component switches; everything on is the full method.
struct Ablation {
  bool double_q = true;
  bool dueling = true;
  bool per = true;
  bool llm_memory = true;
  bool llm_per_boost = true;
  bool reward_shaping = true;

  static Ablation all_off() { return {false, false, false, false, false, false}; }
  bool operator==(const Ablation&) const = default;
};

enum class PhaseRule { FixedFraction, Stagnation, Either };

struct TrainConfig {
  double gamma = 0.99;
  double eps_start = 0.8;
  double eps_min = 0.01;
  double eps_decay = 0.995;
  double lr = 0.0002;
  double eps_llm = 1.5;

  int episodes = 1500;
  int horizon = 0;  // steps per episode; 0 means 4 * customers
  int batch_size = 64;
  double tau = 0.005;
  int update_period = 4;
  int warmup = 1000;

  PhaseRule phase_rule = PhaseRule::Either;
  double phase1_fraction = 0.2;
  int stagnation_window = 50;
  double stagnation_tolerance = 0.01;

  Ablation switches;
  bool use_advisor = true;

  double alpha = 0.6;
  double beta_start = 0.4;
  double beta_end = 1.0;
  size_t buffer_capacity = 100000;
  double eps_floor = 1e-3;
  // Multiplier applied to rewards before they enter the replay buffer.
  double reward_scale = 0.01;

  std::vector<int> trunk{128, 128};
  int head_hidden = 64;
  LossKind loss = LossKind::Huber;

  int guidance_steps = 5;
  int max_rounds = 3;
  size_t pool_capacity = 10;
  size_t pool_top_k = 3;

  EnvConfig env;
  int checkpoint_every = 0;
  std::uint64_t seed = 0;

  int resolved_horizon(const Instance& inst) const;
  // Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
// Overlays the keys present in `j` onto `base`; unknown keys throw.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

// eps_k = max(eps_min, eps_start * eps_decay^k).
double epsilon_at(const TrainConfig& cfg, int episode);

// Bootstrapped targets; double_q selects with `online` and evaluates with
// `target`, otherwise the target network's masked max is used.
Eigen::VectorXd td_targets(const std::vector<const Transition*>& batch, const QNet& online,
                           const QNet& target, double gamma, bool double_q);

struct ActionChoice {
  int action = -1;
  bool constrained = false;  // chosen from legal ∩ advisor set
};

// Epsilon-greedy over legal ∩ guidance (legal alone when the intersection is
// empty or no guidance is given). Draws one uniform, then one index when
// exploring.
ActionChoice select_action(const QNet& net, const Eigen::VectorXd& features,
                           const std::vector<int>& legal, const std::vector<int>* guidance,
                           double eps, std::mt19937_64& rng);

// Online/target pair, optimiser and replay buffer: the learning half of the
// training loop, independent of the routing environment.
class Learner {
 public:
  Learner(const NetShape& shape, const TrainConfig& cfg, std::uint64_t seed);

  const QNet& online() const { return online_; }
  const QNet& target() const { return target_; }
  QNet& online() { return online_; }
  PrioritizedReplay& buffer() { return buffer_; }
  const PrioritizedReplay& buffer() const { return buffer_; }
  std::mt19937_64& rng() { return rng_; }
  long updates() const { return updates_; }

  double td_error(const Transition& t) const;
  // Computes the TD error and stores the transition with its priority.
  void remember(Transition t);
  bool ready() const;
  // One sampled gradient step followed by priority refresh and target averaging.
  double update(double beta);

 private:
  TrainConfig cfg_;
  QNet online_;
  QNet target_;
  Adam adam_;
  PrioritizedReplay buffer_;
  std::mt19937_64 rng_;
  long updates_ = 0;
};

class PhaseController {
 public:
  explicit PhaseController(const TrainConfig& cfg);
  bool in_phase1() const { return phase1_; }
  void record(int episode, double episode_return);
  int switched_at() const { return switched_at_; }

 private:
  TrainConfig cfg_;
  bool phase1_ = true;
  int switched_at_ = -1;
  std::vector<double> returns_;
};

struct EpisodeReport {
  int episode = 0;
  double episode_return = 0.0;
  double cost = 0.0;  // generalised cost of the induced plan
  bool feasible = false;
  int steps = 0;
  int phase = 1;
  double epsilon = 0.0;
  int llm_calls = 0;
  double llm_accept_rate = 0.0;
  int llm_actions = 0;
};

nlohmann::json to_json(const EpisodeReport& r);

struct TrainResult {
  std::optional<RoutePlan> best_plan;
  double best_cost = 0.0;
  int best_episode = -1;
  std::vector<EpisodeReport> reports;
  QNet final_net;
  MemoryPool pool;
  int phase_switch = -1;
  long backend_calls = 0;
  long backend_failures = 0;
  long llm_flagged_stored = 0;
};

struct TrainHooks {
  std::function<void(const EpisodeReport&)> on_episode;
  std::function<void(int episode, const QNet&)> on_checkpoint;
  std::function<void(const std::string&)> on_log;
};

// Two-phase training: advisor-constrained exploration while the phase rule
// holds, then autonomous prioritised refinement. Deterministic for a fixed
// seed and a deterministic backend.
TrainResult train(const Instance& inst, const TrainConfig& cfg, AdvisorBackend* backend,
                  const TrainHooks& hooks = {});

using Policy = std::function<int(const EnvState&, const std::vector<int>& legal)>;

struct PolicyEvaluation {
  double mean_cost = 0.0;
  double satisfaction_rate = 0.0;
  int episodes = 0;
  int feasible = 0;
  RoutePlan last_plan;
};

// Rolls the policy out `episodes` times; an episode satisfies the
// constraints when its induced plan evaluates with zero violations.
PolicyEvaluation evaluate_policy(const Instance& inst, const Policy& policy, int episodes,
                                 const EnvConfig& env_cfg = {}, int horizon = 0);
// Greedy rollouts of a network.
PolicyEvaluation evaluate_policy(const Instance& inst, const QNet& net, int episodes,
                                 const EnvConfig& env_cfg = {}, int horizon = 0);
// Greedy rollouts of a checkpoint; NetError(CheckpointCorrupt) if it does not load.
PolicyEvaluation evaluate_policy(const Instance& inst, const std::string& checkpoint_text,
                                 int episodes, const EnvConfig& env_cfg = {}, int horizon = 0);

// Replays a fixed plan as a policy.
Policy scripted_policy(const RoutePlan& plan);

}  // namespace lqvrp
