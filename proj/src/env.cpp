#include "lqvrp/env.hpp"

#include <algorithm>

namespace lqvrp {

int EnvState::pending_count() const {
  return static_cast<int>(std::count(pending.begin(), pending.end(), true));
}

Env::Env(const Instance& inst, EnvConfig cfg) : inst_(&inst), cfg_(cfg) {}

EnvState Env::reset() const {
  EnvState s;
  s.position = 0;
  s.remaining_capacity = inst_->capacity();
  s.pending.assign(static_cast<size_t>(inst_->customer_count()), true);
  s.clock = 0.0;
  s.routes_used = 1;
  return s;
}

bool Env::is_terminal_success(const EnvState& s) const {
  return s.position == 0 && s.pending_count() == 0;
}

std::vector<int> Env::action_space(const EnvState& s) const {
  std::vector<int> actions;
  if (is_terminal_success(s)) return actions;
  const bool at_depot = s.position == 0;
  if (at_depot && s.routes_used > inst_->max_routes()) return actions;
  if (!at_depot) actions.push_back(0);
  for (int i = 1; i <= inst_->customer_count(); ++i) {
    if (!s.is_pending(i)) continue;
    if (!at_depot && inst_->node(i).demand > s.remaining_capacity) continue;
    actions.push_back(i);
  }
  if (cfg_.mask_broken_edges) {
    std::erase_if(actions, [&](int a) {
      return inst_->edge(s.position, a).broken_at(s.clock + inst_->travel_time(s.position, a));
    });
  }
  return actions;
}

StepOutcome Env::step(const EnvState& s, int action) const {
  const auto legal = action_space(s);
  if (!std::binary_search(legal.begin(), legal.end(), action))
    throw EnvError(EnvError::Kind::IllegalAction,
                   "action " + std::to_string(action) + " not permitted at node " +
                       std::to_string(s.position));

  const auto& rw = cfg_.reward;
  const auto& edge = inst_->edge(s.position, action);
  StepOutcome out;
  out.next = s;
  auto& next = out.next;
  auto& info = out.info;

  info.distance = edge.cost;
  info.dispatched = s.position == 0 && action != 0;
  info.arrival = s.clock + edge.travel_time;
  info.broken_edge = edge.broken_at(info.arrival);
  next.position = action;

  if (action == 0) {
    next.clock = info.arrival;
    if (cfg_.clock == ClockMode::PerRoute) next.clock = 0.0;
    info.shaping_utilization =
        rw.utilization_bonus * (inst_->capacity() - s.remaining_capacity) / inst_->capacity();
    next.remaining_capacity = inst_->capacity();
    next.routes_used += 1;
  } else {
    const auto& node = inst_->node(action);
    info.window_violation = info.arrival > node.window.close;
    next.clock = std::max(info.arrival, node.window.open);
    next.pending[static_cast<size_t>(action - 1)] = false;
    next.remaining_capacity -= node.demand;
    info.shaping_first_visit = rw.first_visit_bonus;
    const double total = inst_->total_demand();
    info.shaping_progress = total > 0.0 ? rw.progress_bonus * node.demand / total : 0.0;
  }

  if (info.window_violation && rw.penalize_window) ++info.psi;
  if (info.broken_edge && rw.penalize_broken_edge) ++info.psi;

  if (is_terminal_success(next)) {
    out.done = true;
    out.success = true;
  } else if (action_space(next).empty()) {
    out.done = true;
    info.deadlock = true;
    ++info.psi;
  }

  out.reward = -rw.weights.distance_weight * info.distance -
               rw.weights.dispatch_weight * (info.dispatched ? 1.0 : 0.0) -
               rw.violation_penalty * info.psi;
  if (rw.shaping) out.reward += info.shaping();
  else info.shaping_first_visit = info.shaping_progress = info.shaping_utilization = 0.0;
  return out;
}

double rollout_cost(const Trace& trace, const CostWeights& weights) {
  if (trace.empty()) return 0.0;
  if (!trace.back().outcome.done)
    throw EnvError(EnvError::Kind::IncompleteEpisode, "trace does not end in a terminal step");
  // same summation order as the evaluator, so the two agree bit for bit
  double distance = 0.0;
  int dispatches = 0;
  for (const auto& st : trace) {
    distance += st.outcome.info.distance;
    dispatches += st.outcome.info.dispatched;
  }
  return weights.distance_weight * distance + weights.dispatch_weight * dispatches;
}

RoutePlan extract_plan(const Trace& trace) {
  RoutePlan plan;
  std::vector<int> current;
  for (const auto& st : trace) {
    if (st.action == 0) {
      if (!current.empty()) plan.routes.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(st.action);
    }
  }
  if (!current.empty()) plan.routes.push_back(std::move(current));
  return plan;
}

std::vector<int> action_sequence(const Trace& trace) {
  std::vector<int> seq;
  seq.reserve(trace.size());
  for (const auto& st : trace) seq.push_back(st.action);
  return seq;
}

nlohmann::json to_json(const EnvState& s) {
  std::vector<int> pending;
  for (size_t i = 0; i < s.pending.size(); ++i)
    if (s.pending[i]) pending.push_back(static_cast<int>(i) + 1);
  return {{"position", s.position},
          {"remaining_capacity", s.remaining_capacity},
          {"pending", pending},
          {"clock", s.clock},
          {"routes_used", s.routes_used}};
}

nlohmann::json to_json(const TraceStep& step) {
  const auto& info = step.outcome.info;
  return {{"state", to_json(step.state)},
          {"action", step.action},
          {"reward", step.outcome.reward},
          {"done", step.outcome.done},
          {"success", step.outcome.success},
          {"distance", info.distance},
          {"dispatched", info.dispatched},
          {"arrival", info.arrival},
          {"window_violation", info.window_violation},
          {"broken_edge", info.broken_edge},
          {"deadlock", info.deadlock},
          {"psi", info.psi},
          {"shaping", info.shaping()}};
}

std::string trace_to_text(const Trace& trace) {
  std::string out;
  for (const auto& st : trace) out += to_json(st).dump() + "\n";
  return out;
}

}  // namespace lqvrp
