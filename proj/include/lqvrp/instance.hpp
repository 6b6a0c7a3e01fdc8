#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lqvrp {

// Sentinel for "never": an open window end or an edge that never breaks.
inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct TimeWindow {
  double open = 0.0;
  double close = kNever;

  bool contains(double t) const { return t >= open && t <= close; }
  bool operator==(const TimeWindow&) const = default;
};

struct Node {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;
  TimeWindow window;

  bool operator==(const Node&) const = default;
};

// Directed view of an undirected road segment. The edge is unusable for any
// traversal that arrives at its head at or after `break_time`; a break time
// of zero marks a permanently impassable edge.
struct EdgeSpec {
  int from = 0;
  int to = 0;
  double cost = 0.0;
  double travel_time = 0.0;
  double break_time = kNever;

  bool passable() const { return break_time > 0.0; }
  bool breaks() const { return break_time != kNever; }
  bool broken_at(double arrival) const { return arrival >= break_time; }
  bool operator==(const EdgeSpec&) const = default;
};

class InstanceError : public std::runtime_error {
 public:
  enum class Kind {
    MissingSection,
    MalformedLine,
    DuplicateNodeId,
    DepotDemandNonzero,
    UnsupportedFormat,
    InvalidConfig,
    InfeasibleAugmentation,
    SchemaVersionMismatch,
    ParseError,
  };

  InstanceError(Kind kind, std::string message, int position = -1);

  Kind kind() const { return kind_; }
  // Line number (parser) or byte offset (deserializer); -1 when not applicable.
  int position() const { return position_; }

 private:
  Kind kind_;
  int position_;
};

class Instance {
 public:
  Instance() = default;
  Instance(std::string name, std::vector<Node> nodes, double capacity,
           int max_routes, std::uint64_t rng_seed = 0);

  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_.at(static_cast<size_t>(i)); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int customer_count() const { return size() - 1; }
  double capacity() const { return capacity_; }
  int max_routes() const { return max_routes_; }
  std::uint64_t rng_seed() const { return rng_seed_; }

  const EdgeSpec& edge(int i, int j) const {
    return edges_[static_cast<size_t>(i) * nodes_.size() + static_cast<size_t>(j)];
  }
  double cost(int i, int j) const { return edge(i, j).cost; }
  double travel_time(int i, int j) const { return edge(i, j).travel_time; }
  bool contains(int i) const { return i >= 0 && i < size(); }

  double total_demand() const;
  // False when the fleet of max_routes trips cannot carry the total demand.
  bool capacity_feasible() const;
  // Planning horizon: twice the cost of the nearest-neighbour giant tour.
  double horizon() const;

  void set_window(int i, TimeWindow w);
  // Sets the break time of the undirected edge {i, j}.
  void set_break(int i, int j, double t);
  void set_rng_seed(std::uint64_t seed) { rng_seed_ = seed; }
  void set_max_routes(int k) { max_routes_ = k; }
  void set_name(std::string name) { name_ = std::move(name); }
  // Undirected edges {i<j} carrying a finite break time.
  int broken_edge_count() const;

  bool operator==(const Instance&) const = default;

 private:
  void build_edges();

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<EdgeSpec> edges_;
  double capacity_ = 0.0;
  int max_routes_ = 1;
  std::uint64_t rng_seed_ = 0;
};

double euclidean(const Node& a, const Node& b);

// Parses a TSPLIB/Augerat CVRP file (EUC_2D only). The declared depot is
// renumbered to 0; the other nodes keep their file order.
Instance parse_vrp(std::string_view text);

struct AugmentConfig {
  double window_tightness = 0.25;
  double break_fraction = 0.1;
  std::uint64_t seed = 0;
  int max_retries = 64;
};

// Draws customer time windows and edge break times. Pure function of its
// arguments.
Instance augment(const Instance& inst, const AugmentConfig& cfg);

// Earliest arrival time from the depot (t = 0) at every node, waiting allowed,
// edges usable only while not yet broken. kNever marks unreachable nodes.
std::vector<double> earliest_arrivals(const Instance& inst);

// True if every customer is reachable before its window closes and is
// feasible as a single-customer route.
bool passes_solvability_screen(const Instance& inst);

inline constexpr int kInstanceFormatVersion = 1;

std::string serialize(const Instance& inst);
Instance deserialize(std::string_view text);

}  // namespace lqvrp
