#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqvrp/qnet.hpp"

namespace lqvrp {

struct Transition {
  Eigen::VectorXd state;
  Mask state_mask;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  Mask next_mask;
  bool done = false;
  bool llm = false;      // action came from the advisor-constrained set
  double priority = 0.0;
};

// Replay priority |td| * (1 + eps_llm * llm) + eps_floor.
double replay_priority(double td_error, bool llm, double eps_llm, double eps_floor);

// Binary tree of partial sums over a fixed number of leaves.
class SumTree {
 public:
  explicit SumTree(size_t leaves = 1);

  size_t leaves() const { return leaves_; }
  void set(size_t leaf, double value);
  double get(size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_[1]; }
  // Leaf whose cumulative range contains `mass` (clamped to the populated prefix).
  size_t find(double mass, size_t populated) const;

 private:
  size_t leaves_;
  size_t base_;
  std::vector<double> nodes_;
};

struct ReplayConfig {
  size_t capacity = 100000;
  double eps_llm = 1.5;
  double eps_floor = 1e-3;
  // Keep the advisor boost when priorities are refreshed after an update.
  bool boost_on_refresh = true;
};

struct SampleRef {
  size_t slot = 0;
  std::uint64_t serial = 0;
};

struct SampledBatch {
  std::vector<const Transition*> transitions;
  std::vector<SampleRef> refs;
  std::vector<double> probabilities;
  std::vector<double> weights;
};

class ReplayError : public std::runtime_error {
 public:
  enum class Kind { Underfilled, StaleIndex, InvalidConfig };
  ReplayError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Proportional prioritised replay over a ring buffer. Sampling probability
// P(i) = p_i^alpha / sum_k p_k^alpha, weights (size * P(i))^-beta normalised
// by the batch maximum.
class PrioritizedReplay {
 public:
  explicit PrioritizedReplay(ReplayConfig cfg = {});

  size_t size() const { return size_; }
  size_t capacity() const { return cfg_.capacity; }
  const ReplayConfig& config() const { return cfg_; }

  // Stores with the priority computed from td_error; returns that priority.
  double push(Transition t, double td_error);
  // Stores with the current maximum priority (1 when empty).
  double push_max_priority(Transition t);

  SampledBatch sample(size_t batch_size, double alpha, double beta, std::mt19937_64& rng);
  void update_priorities(const std::vector<SampleRef>& refs, const std::vector<double>& td_errors);

  double priority(size_t slot) const { return items_.at(slot).priority; }
  const Transition& at(size_t slot) const { return items_.at(slot); }
  // Sampling probability of a slot under the tree's current alpha.
  double probability(size_t slot) const;
  double tree_total() const { return tree_.total(); }
  double leaf_mass(size_t slot) const { return tree_.get(slot); }

  std::string dump_text() const;

 private:
  size_t store(Transition t);
  void set_alpha(double alpha);

  ReplayConfig cfg_;
  std::vector<Transition> items_;
  std::vector<std::uint64_t> serials_;
  SumTree tree_;
  size_t next_ = 0;
  size_t size_ = 0;
  std::uint64_t serial_ = 0;
  double alpha_ = 1.0;
  double max_priority_ = 1.0;
};

}  // namespace lqvrp
