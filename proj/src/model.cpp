#include "lqvrp/model.hpp"

#include <algorithm>
#include <cmath>

namespace lqvrp {

int RoutePlan::route_count() const {
  return static_cast<int>(std::count_if(routes.begin(), routes.end(),
                                        [](const auto& r) { return !r.empty(); }));
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnservedCustomer: return "UnservedCustomer";
    case ViolationKind::DuplicateVisit: return "DuplicateVisit";
    case ViolationKind::CapacityExceeded: return "CapacityExceeded";
    case ViolationKind::WindowMissed: return "WindowMissed";
    case ViolationKind::BrokenEdgeUsed: return "BrokenEdgeUsed";
    case ViolationKind::ImpassableEdgeUsed: return "ImpassableEdgeUsed";
    case ViolationKind::RouteLimitExceeded: return "RouteLimitExceeded";
  }
  return "?";
}

bool Verdict::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

namespace {

void check_edge(const Instance& inst, int route, int from, int to, double arrive,
                std::vector<Violation>& out) {
  const auto& e = inst.edge(from, to);
  if (!e.broken_at(arrive)) return;
  Violation v{e.passable() ? ViolationKind::BrokenEdgeUsed : ViolationKind::ImpassableEdgeUsed, route};
  v.edge_from = from;
  v.edge_to = to;
  v.measured = arrive;
  v.bound = e.break_time;
  out.push_back(v);
}

}  // namespace

Verdict evaluate(const Instance& inst, const RoutePlan& plan, ClockMode clock_mode) {
  Verdict verdict;
  std::vector<int> visits(static_cast<size_t>(inst.size()), 0);
  double clock = 0.0;

  for (size_t k = 0; k < plan.routes.size(); ++k) {
    const auto& route = plan.routes[k];
    const int r = static_cast<int>(k);
    verdict.service_times.emplace_back();
    if (route.empty()) continue;
    ++verdict.routes;
    if (clock_mode == ClockMode::PerRoute) clock = 0.0;

    double load = 0.0;
    int at = 0;
    for (const int next : route) {
      if (next <= 0 || next >= inst.size())
        throw ModelError(ModelError::Kind::UnknownNode,
                         "route " + std::to_string(k) + " visits unknown customer " +
                             std::to_string(next));
      const double arrive = clock + inst.travel_time(at, next);
      verdict.distance += inst.cost(at, next);
      check_edge(inst, r, at, next, arrive, verdict.violations);

      const auto& node = inst.node(next);
      if (arrive > node.window.close) {
        Violation v{ViolationKind::WindowMissed, r, next};
        v.measured = arrive;
        v.bound = node.window.close;
        verdict.violations.push_back(v);
      }
      clock = std::max(arrive, node.window.open);
      verdict.service_times.back().push_back(clock);

      if (++visits[static_cast<size_t>(next)] > 1) {
        Violation v{ViolationKind::DuplicateVisit, r, next};
        v.measured = visits[static_cast<size_t>(next)];
        v.bound = 1;
        verdict.violations.push_back(v);
      }
      load += node.demand;
      at = next;
    }
    const double back = clock + inst.travel_time(at, 0);
    verdict.distance += inst.cost(at, 0);
    check_edge(inst, r, at, 0, back, verdict.violations);
    clock = back;

    if (load > inst.capacity()) {
      Violation v{ViolationKind::CapacityExceeded, r};
      v.measured = load;
      v.bound = inst.capacity();
      verdict.violations.push_back(v);
    }
  }

  if (verdict.routes > inst.max_routes()) {
    Violation v{ViolationKind::RouteLimitExceeded};
    v.measured = verdict.routes;
    v.bound = inst.max_routes();
    verdict.violations.push_back(v);
  }
  for (int i = 1; i < inst.size(); ++i) {
    if (visits[static_cast<size_t>(i)] == 0) {
      Violation v{ViolationKind::UnservedCustomer, -1, i};
      v.bound = 1;
      verdict.violations.push_back(v);
    }
  }
  verdict.feasible = verdict.violations.empty();
  return verdict;
}

// ---------------------------------------------------------------------------

namespace {

class ExhaustiveSearch {
 public:
  ExhaustiveSearch(const Instance& inst, const CostWeights& w, ClockMode clock)
      : inst_(inst), weights_(w), clock_mode_(clock), served_(static_cast<size_t>(inst.size()), false) {}

  std::optional<std::pair<RoutePlan, double>> run() {
    current_.routes.clear();
    extend(0, 0.0, 0.0, 0.0, 0);
    if (!found_) return std::nullopt;
    return std::make_pair(best_, best_cost_);
  }

 private:
  // `at` is the current position; at == 0 means the previous route is closed
  // (or none has started yet).
  void extend(int at, double clock, double load, double distance, int served) {
    const int n = inst_.customer_count();
    if (at == 0 && served == n) {
      offer(distance);
      return;
    }
    if (at != 0) {
      const double back = clock + inst_.travel_time(at, 0);
      if (!inst_.edge(at, 0).broken_at(back)) extend(0, back, 0.0, distance + inst_.cost(at, 0), served);
    }
    const bool opening = (at == 0);
    if (opening && static_cast<int>(current_.routes.size()) >= inst_.max_routes()) return;
    const double start_clock = (opening && clock_mode_ == ClockMode::PerRoute) ? 0.0 : clock;

    for (int j = 1; j <= n; ++j) {
      if (served_[static_cast<size_t>(j)]) continue;
      const auto& node = inst_.node(j);
      if (load + node.demand > inst_.capacity()) continue;
      const double arrive = start_clock + inst_.travel_time(at, j);
      if (arrive > node.window.close || inst_.edge(at, j).broken_at(arrive)) continue;

      if (opening) current_.routes.emplace_back();
      current_.routes.back().push_back(j);
      served_[static_cast<size_t>(j)] = true;
      extend(j, std::max(arrive, node.window.open), load + node.demand,
             distance + inst_.cost(at, j), served + 1);
      served_[static_cast<size_t>(j)] = false;
      current_.routes.back().pop_back();
      if (opening) current_.routes.pop_back();
    }
  }

  void offer(double distance) {
    const double cost = weights_.distance_weight * distance +
                        weights_.dispatch_weight * static_cast<double>(current_.routes.size());
    const double tol = 1e-9 * std::max(1.0, std::abs(cost));
    if (!found_ || cost < best_cost_ - tol ||
        (std::abs(cost - best_cost_) <= tol && current_ < best_)) {
      found_ = true;
      best_ = current_;
      best_cost_ = cost;
    }
  }

  const Instance& inst_;
  CostWeights weights_;
  ClockMode clock_mode_;
  std::vector<bool> served_;
  RoutePlan current_;
  RoutePlan best_;
  double best_cost_ = 0.0;
  bool found_ = false;
};

}  // namespace

ExactResult exact_solve(const Instance& inst, int limit, const CostWeights& weights,
                        ClockMode clock) {
  if (inst.customer_count() > limit)
    throw ModelError(ModelError::Kind::TooLarge,
                     std::to_string(inst.customer_count()) + " customers exceed oracle limit " +
                         std::to_string(limit));
  ExhaustiveSearch search(inst, weights, clock);
  auto best = search.run();
  if (!best) throw ModelError(ModelError::Kind::Infeasible, "no feasible plan for " + inst.name());

  ExactResult result{best->first, best->second, evaluate(inst, best->first, clock)};
  if (!result.verdict.feasible)
    throw std::logic_error("exact_solve produced a plan the evaluator rejects");
  return result;
}

double gap(double plan_cost, double optimal_cost) {
  if (!(optimal_cost > 0.0))
    throw ModelError(ModelError::Kind::NonPositiveOptimal, "optimal cost must be positive");
  return 100.0 * (plan_cost - optimal_cost) / optimal_cost;
}

nlohmann::json to_json(const RoutePlan& plan) { return plan.routes; }

RoutePlan plan_from_json(const nlohmann::json& j) {
  return RoutePlan{j.get<std::vector<std::vector<int>>>()};
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& x : v.violations) {
    violations.push_back({{"kind", to_string(x.kind)},
                          {"route", x.route},
                          {"node", x.node},
                          {"edge", {x.edge_from, x.edge_to}},
                          {"measured", x.measured},
                          {"bound", x.bound}});
  }
  return {{"feasible", v.feasible},
          {"distance", v.distance},
          {"routes", v.routes},
          {"violations", violations}};
}

}  // namespace lqvrp
