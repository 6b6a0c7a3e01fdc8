#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqvrp/instance.hpp"

namespace lqvrp {

// Ordered routes executed back to back by one vehicle. Each route starts and
// ends at the depot implicitly, so the depot id never appears inside a route.
struct RoutePlan {
  std::vector<std::vector<int>> routes;

  int route_count() const;
  bool operator==(const RoutePlan&) const = default;
  auto operator<=>(const RoutePlan&) const = default;
};

// How arrival times carry over between routes. Global: the clock keeps
// running through depot visits; PerRoute: every route starts at t = 0.
enum class ClockMode { Global, PerRoute };

// Generalised cost = distance_weight * distance + dispatch_weight * routes.
struct CostWeights {
  double distance_weight = 1.0;
  double dispatch_weight = 0.0;

  static CostWeights distance_only() { return {1.0, 0.0}; }
  // Freight coefficients used for training rewards and gap reporting.
  static CostWeights freight() { return {4.5, 65.0}; }
};

enum class ViolationKind {
  UnservedCustomer,
  DuplicateVisit,
  CapacityExceeded,
  WindowMissed,
  BrokenEdgeUsed,
  ImpassableEdgeUsed,
  RouteLimitExceeded,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int route = -1;  // index into RoutePlan::routes, -1 for plan-level checks
  int node = -1;
  int edge_from = -1;
  int edge_to = -1;
  double measured = 0.0;
  double bound = 0.0;

  bool operator==(const Violation&) const = default;
};

struct Verdict {
  bool feasible = true;
  double distance = 0.0;  // sum of c_ij over used edges
  int routes = 0;         // non-empty routes dispatched
  std::vector<Violation> violations;
  // Service start time per visit, aligned with RoutePlan::routes.
  std::vector<std::vector<double>> service_times;

  double cost(const CostWeights& w = CostWeights::distance_only()) const {
    return w.distance_weight * distance + w.dispatch_weight * routes;
  }
  bool has(ViolationKind kind) const;
};

class ModelError : public std::runtime_error {
 public:
  enum class Kind { UnknownNode, TooLarge, Infeasible, NonPositiveOptimal };
  ModelError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Checks a complete plan against capacity, single service, time windows
// (waiting allowed before a window opens), path breaks and the route limit.
// Infeasibility is reported in the verdict; only unknown node ids throw.
Verdict evaluate(const Instance& inst, const RoutePlan& plan, ClockMode clock = ClockMode::Global);

struct ExactResult {
  RoutePlan plan;
  double cost = 0.0;
  Verdict verdict;
};

inline constexpr int kDefaultOracleLimit = 8;

// Exhaustive search over ordered partitions of the customers into at most
// max_routes routes. Ties on cost resolve to the lexicographically smallest
// plan.
ExactResult exact_solve(const Instance& inst, int limit = kDefaultOracleLimit,
                        const CostWeights& weights = CostWeights::distance_only(),
                        ClockMode clock = ClockMode::Global);

// Percentage gap 100 * (cost - optimal) / optimal.
double gap(double plan_cost, double optimal_cost);

nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const RoutePlan& plan);
RoutePlan plan_from_json(const nlohmann::json& j);

}  // namespace lqvrp
