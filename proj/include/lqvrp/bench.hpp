#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqvrp/agent.hpp"
#include "lqvrp/instance.hpp"
#include "lqvrp/model.hpp"

namespace lqvrp {

class BenchError : public std::runtime_error {
 public:
  enum class Kind { BadPath, AlreadyExists, MissingOracle, Usage, RunFailed };
  BenchError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class Method { Dqn, LlmDqnMock, LlmDqnRemote };

const char* to_string(Method m);
// Accepts dqn, llm-dqn (mock), llm-dqn-mock and llm-dqn-remote.
Method method_from_string(const std::string& s);

// Write to a sibling temporary file, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& data);

// ---------------------------------------------------------------------------
// Instances and manifest

// Seeded random customers on a 100x100 square, demand in [1, 30], capacity
// sized for two to three routes, then augmented with windows and breaks.
Instance make_synthetic(std::uint64_t seed, int customers, const AugmentConfig& aug = {});

// Ten instances of 5 to 8 customers, seeds base_seed .. base_seed + count - 1.
std::vector<Instance> desk_corpus(int count = 10, std::uint64_t base_seed = 1000);

struct ManifestEntry {
  std::string name;
  std::string file;    // relative to the manifest directory
  std::string sha256;
  std::uint64_t seed = 0;
  int customers = 0;
  std::optional<double> oracle_cost;
  std::optional<RoutePlan> oracle_plan;
  std::optional<double> best_known;
};

struct Manifest {
  AugmentConfig augment;
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& name) const;
  // Oracle cost if present, else the best-known value; MissingOracle otherwise.
  double reference_cost(const std::string& name) const;
};

inline constexpr int kManifestFormatVersion = 1;
nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
Manifest load_manifest(const std::filesystem::path& path);

// Generalised-cost oracle used for gaps (freight weights).
std::optional<ExactResult> oracle_for(const Instance& inst, int limit = kDefaultOracleLimit,
                                      ClockMode clock = ClockMode::Global);

// Writes one canonical file per instance plus manifest.json. Refuses to touch
// an existing manifest unless `force`.
Manifest prepare(const std::vector<Instance>& instances, const std::filesystem::path& out_dir,
                 const AugmentConfig& aug, bool force, int oracle_limit = kDefaultOracleLimit);

// ---------------------------------------------------------------------------
// Runs

struct RunSpec {
  std::vector<std::filesystem::path> instances;
  Method method = Method::LlmDqnMock;
  TrainConfig config;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::filesystem::path out_dir;
  std::string label = "all";  // configuration name, e.g. an ablation row
  int jobs = 1;
  int eval_episodes = 1;
  FaultMode mock_fault = FaultMode::None;

  void validate() const;
};

struct RunRecord {
  std::string instance;
  std::string method;
  std::string label;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::optional<double> best_cost;
  int best_episode = -1;
  double satisfaction_rate = 0.0;
  double eval_cost = 0.0;
  double train_feasible_rate = 0.0;
  int episodes = 0;
  double wall_seconds = 0.0;
  std::filesystem::path report_path;
};

// Stem shared by the report, checkpoint and timing files of one run.
std::string run_stem(const std::string& instance, Method method, const std::string& label,
                     std::uint64_t seed);

// Trains one (instance, seed) pair and writes
// <stem>.jsonl (header, one record per episode, summary), <stem>.ckpt.json and
// <stem>.timing.json. Report and checkpoint are byte-stable for a fixed seed
// and a deterministic backend; wall time goes only to the timing file.
RunRecord run_one(const Instance& inst, const RunSpec& spec, std::uint64_t seed);

// All instances x seeds; failures are recorded and the batch continues.
std::vector<RunRecord> run_batch(const RunSpec& spec);

// ---------------------------------------------------------------------------
// Reporting

struct RunSummary {
  std::string instance;
  std::string method;
  std::string label;
  std::uint64_t seed = 0;
  std::optional<double> best_cost;
  int best_episode = -1;
  double satisfaction_rate = 0.0;
  double wall_seconds = 0.0;
  std::vector<double> returns;  // per episode
};

// Parses every *.jsonl report in a directory (sorted by file name).
std::vector<RunSummary> load_runs(const std::filesystem::path& dir);
RunSummary parse_report(const std::string& text);

struct TableRow {
  std::string instance;  // "mean" on aggregate rows
  std::string method;
  std::string label;
  int runs = 0;
  int found = 0;            // runs with a feasible best plan
  double gap_mean = 0.0;    // mean over seeds of the per-seed best gap, percent
  double gap_std = 0.0;     // population standard deviation
  double satisfaction = 0.0;  // percent
  double episodes_to_best = 0.0;
  double wall_seconds = 0.0;
  bool dashed = false;      // configuration not applicable to the method
};

struct ResultTable {
  std::vector<TableRow> rows;
};

// Per (instance, method, label) rows followed by one aggregate row per
// (method, label). A run without any feasible plan counts as a 100% gap.
ResultTable build_table(const std::vector<RunSummary>& runs, const Manifest& manifest);
std::string table_text(const ResultTable& t);
std::string table_csv(const ResultTable& t);
ResultTable table_from_csv(const std::string& csv);
// Episode-indexed returns averaged over seeds, one column per (instance, method, label).
std::string curves_csv(const std::vector<RunSummary>& runs);

// Gap assigned to runs that never produced a feasible plan.
inline constexpr double kNoPlanGap = 100.0;

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
  std::string name;
  Ablation switches;
  bool needs_advisor = false;
};

// all, no-llm-memory, no-llm-per, no-double, no-dueling, no-reward-reshape.
std::vector<AblationRow> ablation_rows();

}  // namespace lqvrp
