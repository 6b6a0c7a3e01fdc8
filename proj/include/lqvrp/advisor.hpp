#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lqvrp/env.hpp"
#include "lqvrp/instance.hpp"

namespace lqvrp {

using Trajectory = std::vector<int>;

struct DecodeParams {
  double temperature = 0.7;
  int max_tokens = 512;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that turns a prompt into reply text: a hosted chat model or the
// deterministic mock below.
class AdvisorBackend {
 public:
  virtual ~AdvisorBackend() = default;
  virtual std::string complete(const std::string& prompt, const DecodeParams& params) = 0;
  virtual std::string name() const = 0;
  long calls() const { return calls_; }

 protected:
  long calls_ = 0;
};

enum class FaultMode { None, SyntaxGarbage, HallucinatedNode, InfeasibleLeg };

// Reads the routing state back out of the prompt and answers with
// nearest-feasible-neighbour trajectories (plus a replay of the best memory
// entry when present). Pure function of (prompt, seed). Fault modes make
// every candidate fail one filter layer on purpose.
class MockBackend : public AdvisorBackend {
 public:
  explicit MockBackend(std::uint64_t seed, FaultMode fault = FaultMode::None, double noise = 0.35);

  std::string complete(const std::string& prompt, const DecodeParams& params) override;
  std::string name() const override { return "mock"; }

 private:
  std::uint64_t seed_;
  FaultMode fault_;
  double noise_;
};

// ---------------------------------------------------------------------------
// Memory pool

struct MemoryEntry {
  Trajectory trajectory;
  double episode_return = 0.0;
  std::vector<std::string> notes;  // violation annotations of that episode
  std::uint64_t inserted = 0;
};

// Best-return trajectories seen so far, at most `capacity` of them, ordered
// by return (ties: earlier insertion first).
class MemoryPool {
 public:
  explicit MemoryPool(size_t capacity = 10) : capacity_(capacity) {}

  void update(const Trajectory& trajectory, double episode_return,
              std::vector<std::string> notes = {});
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  std::vector<MemoryEntry> top(size_t k) const;
  size_t size() const { return entries_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }

 private:
  size_t capacity_;
  std::uint64_t counter_ = 0;
  std::vector<MemoryEntry> entries_;
};

// ---------------------------------------------------------------------------
// Prompting and filtering

inline constexpr int kCandidatesRequested = 3;

std::string build_prompt(const EnvState& state, const Instance& inst, const MemoryPool* pool,
                         const std::vector<std::string>& errors, size_t memory_top_k = 3);

struct SyntaxError {
  std::string message;
};

// First well-formed bracketed list of integer lists in the reply.
std::variant<std::vector<Trajectory>, SyntaxError> parse_reply(const std::string& raw);

// Empty on success, otherwise the reason the candidate is implausible.
std::optional<std::string> semantic_check(const Trajectory& traj, const EnvState& state,
                                          const Instance& inst);

enum class PhysicalFault {
  CapacityExceeded,
  WindowMissed,
  BrokenEdgeUsed,
  ImpassableEdgeUsed,
  RouteLimitExceeded,
  IllegalMove,
  Deadlock,
};

const char* to_string(PhysicalFault f);

struct PhysicalError {
  PhysicalFault fault;
  int leg = 0;  // 0-based index into the trajectory
  std::string message;
};

// Simulates the trajectory from `state` under the environment's rules and
// reports the first leg that breaks a constraint.
std::optional<PhysicalError> physical_check(const Trajectory& traj, const EnvState& state,
                                            const Env& env);

enum class FilterLayer { Syntax, Semantic, Physical, Accepted };

const char* to_string(FilterLayer layer);

struct FilterVerdict {
  int round = 0;
  int candidate = -1;  // -1 when the whole reply failed to parse
  FilterLayer layer = FilterLayer::Syntax;
  std::string message;
};

struct CandidateSet {
  std::vector<std::string> prompts;
  std::vector<std::string> raw_replies;
  std::vector<Trajectory> parsed;
  std::vector<FilterVerdict> verdicts;
  std::vector<Trajectory> accepted;
  std::vector<int> action_set;  // first actions of accepted candidates, ascending
  int rounds = 0;
};

struct AdviseConfig {
  int max_rounds = 3;
  bool use_memory = true;
  size_t memory_top_k = 3;
  DecodeParams decode;
};

// Query / filter / feed-back loop. Returns with an empty accepted set when
// every round fails; BackendUnavailable propagates to the caller.
CandidateSet advise(const EnvState& state, const Env& env, AdvisorBackend& backend,
                    const MemoryPool& pool, const AdviseConfig& cfg = {});

// Follows accepted trajectories for a bounded number of steps so the advisor
// need not be queried every step.
class GuidanceCache {
 public:
  explicit GuidanceCache(int max_steps = 5) : max_steps_(max_steps) {}

  void load(const std::vector<Trajectory>& accepted);
  void clear();
  // Next action of every trajectory still being followed, ascending.
  std::vector<int> actions() const;
  void advance(int action);
  bool exhausted() const;

 private:
  struct Cursor {
    Trajectory traj;
    size_t next = 0;
  };
  int max_steps_;
  int steps_ = 0;
  std::vector<Cursor> live_;
};

}  // namespace lqvrp
