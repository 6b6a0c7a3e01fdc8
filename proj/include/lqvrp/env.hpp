#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqvrp/instance.hpp"
#include "lqvrp/model.hpp"

namespace lqvrp {

struct RewardConfig {
  CostWeights weights = CostWeights::freight();  // gamma_d, gamma_f
  double violation_penalty = 500.0;              // gamma_e
  bool penalize_window = true;
  bool penalize_broken_edge = true;
  bool shaping = true;
  double first_visit_bonus = 1.0;
  double progress_bonus = 2.0;      // times the fraction of total demand served this step
  double utilization_bonus = 3.0;   // times the route load / capacity, paid at depot return
};

struct EnvConfig {
  RewardConfig reward;
  ClockMode clock = ClockMode::Global;
  // Remove actions whose edge is already broken at the earliest arrival.
  // Disabled, such moves stay legal and are penalised instead.
  bool mask_broken_edges = true;
};

struct EnvState {
  int position = 0;
  double remaining_capacity = 0.0;
  std::vector<bool> pending;  // pending[i - 1] is customer i
  double clock = 0.0;
  int routes_used = 1;        // route currently being driven, 1-based

  bool is_pending(int customer) const { return pending[static_cast<size_t>(customer - 1)]; }
  int pending_count() const;
  bool operator==(const EnvState&) const = default;
};

struct StepInfo {
  double distance = 0.0;       // delta d_t
  bool dispatched = false;     // left the depot this step
  double arrival = 0.0;
  bool window_violation = false;
  bool broken_edge = false;
  bool deadlock = false;
  int psi = 0;                 // number of penalised events this step
  double shaping_first_visit = 0.0;
  double shaping_progress = 0.0;
  double shaping_utilization = 0.0;

  double shaping() const { return shaping_first_visit + shaping_progress + shaping_utilization; }
  bool flagged() const { return window_violation || broken_edge || deadlock; }
};

struct StepOutcome {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  bool success = false;  // all customers served and vehicle back at the depot
  StepInfo info;
};

class EnvError : public std::logic_error {
 public:
  enum class Kind { IllegalAction, IncompleteEpisode };
  EnvError(Kind kind, const std::string& message) : std::logic_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Single-vehicle routing MDP over an instance. Stepping is deterministic;
// the object holds no per-episode state, so one Env may serve many episodes.
class Env {
 public:
  explicit Env(const Instance& inst, EnvConfig cfg = {});

  const Instance& instance() const { return *inst_; }
  const EnvConfig& config() const { return cfg_; }

  EnvState reset() const;
  // Legal node ids, ascending. Empty means the episode cannot continue.
  std::vector<int> action_space(const EnvState& s) const;
  StepOutcome step(const EnvState& s, int action) const;
  bool is_terminal_success(const EnvState& s) const;

 private:
  const Instance* inst_;
  EnvConfig cfg_;
};

struct TraceStep {
  EnvState state;
  int action = 0;
  StepOutcome outcome;
};

using Trace = std::vector<TraceStep>;

// Sum of distance and dispatch costs over a finished episode.
double rollout_cost(const Trace& trace, const CostWeights& weights);
// Routes as executed; an unterminated final route is kept as is.
RoutePlan extract_plan(const Trace& trace);
// Node ids visited in order, depot returns included.
std::vector<int> action_sequence(const Trace& trace);

nlohmann::json to_json(const EnvState& s);
nlohmann::json to_json(const TraceStep& step);
// One JSON record per line.
std::string trace_to_text(const Trace& trace);

}  // namespace lqvrp
