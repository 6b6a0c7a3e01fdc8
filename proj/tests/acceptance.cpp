// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>

#include "chain_mdp.hpp"
#include "lqvrp/advisor.hpp"
#include "lqvrp/agent.hpp"
#include "lqvrp/bench.hpp"
#include "lqvrp/env.hpp"
#include "lqvrp/model.hpp"
#include "lqvrp/qnet.hpp"
#include "lqvrp/replay.hpp"
#include "slow_oracle.hpp"

using namespace lqvrp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = fs::temp_directory_path() / ("lqvrp-accept-" + tag + "-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string num(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// first `count` feasible seeded instances, sizes cycling through `sizes`
std::vector<Instance> feasible_instances(int count, std::uint64_t seed, const std::vector<int>& sizes) {
  std::vector<Instance> out;
  for (; static_cast<int>(out.size()) < count; ++seed) {
    Instance inst = make_synthetic(seed, sizes[out.size() % sizes.size()]);
    if (oracle_for(inst)) out.push_back(std::move(inst));
  }
  return out;
}

Outcome oracle_equivalence() {
  const auto instances = feasible_instances(10, 2000, {5, 6, 7});
  int agree = 0, exact_rollouts = 0;
  for (const auto& inst : instances) {
    const ExactResult r = exact_solve(inst, kDefaultOracleLimit, CostWeights::freight());
    const slow::Best ref = slow::solve(inst, 4.5, 65.0);
    if (std::abs(r.cost - ref.cost) <= 1e-9 * ref.cost) ++agree;

    const Env env(inst);
    Trace trace;
    EnvState s = env.reset();
    for (const auto& route : r.plan.routes) {
      std::vector<int> legs = route;
      legs.push_back(0);
      for (int a : legs) {
        StepOutcome o = env.step(s, a);
        trace.push_back({s, a, o});
        s = o.next;
      }
    }
    const double rollout = rollout_cost(trace, CostWeights::freight());
    if (rollout == evaluate(inst, r.plan).cost(CostWeights::freight()) && rollout == r.cost) ++exact_rollouts;
  }
  return {agree == 10 && exact_rollouts == 10,
          "slow oracle agrees on " + std::to_string(agree) + "/10, exact rollout cost on " +
              std::to_string(exact_rollouts) + "/10"};
}

Outcome gradient_check() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 2.0);
  double worst = 0.0;
  long checked = 0;
  for (int n = 0; n < 20; ++n) {
    const int inputs = 2 + n % 4, actions = 2 + n % 3;
    const QNet net({inputs, actions, {3 + n % 3, 4}, 3, n % 2 == 0}, static_cast<std::uint64_t>(n));
    Batch b;
    const int size = 4;
    b.features = Eigen::MatrixXd(inputs, size);
    for (Eigen::Index i = 0; i < b.features.size(); ++i) b.features.data()[i] = u(rng);
    b.targets.resize(size);
    b.weights.resize(size);
    for (int i = 0; i < size; ++i) {
      const int a = i % actions;
      Mask m(static_cast<size_t>(actions), 1);
      if (actions > 2) m[static_cast<size_t>((a + 1) % actions)] = 0;
      b.masks.push_back(m);
      b.actions.push_back(a);
      b.targets[i] = g(rng);
      b.weights[i] = 0.3 + u(rng);
    }
    const LossKind kind = n % 3 == 0 ? LossKind::Squared : LossKind::Huber;
    const LossGrad lg = net.backward(b, kind);
    QNet probe = net;
    for (Eigen::Index k = 0; k < net.params().size(); ++k) {
      const double h = 1e-6;
      probe.params() = net.params();
      probe.params()[k] += h;
      const double up = probe.backward(b, kind).loss;
      probe.params()[k] -= 2 * h;
      const double down = probe.backward(b, kind).loss;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max(std::abs(fd), std::abs(lg.grad[k]));
      // dead units: both sides are zero up to differencing noise
      if (scale <= 1e-8) continue;
      worst = std::max(worst, std::abs(fd - lg.grad[k]) / scale);
      ++checked;
    }
  }
  return {worst <= 1e-5, "max relative error " + sci(worst) + " over " + std::to_string(checked) +
                             " partials in 20 networks"};
}

Outcome per_distribution() {
  ReplayConfig cfg;
  cfg.capacity = 6;
  PrioritizedReplay buf(cfg);
  const double tds[6] = {0.2, 1.0, 3.0, 0.05, 2.0, 0.7};
  for (int i = 0; i < 6; ++i) {
    Transition t;
    t.state = t.next_state = Eigen::VectorXd::Zero(1);
    t.llm = i == 2;
    buf.push(std::move(t), tds[i]);
  }
  std::mt19937_64 rng(12345);
  const int draws = 100000;
  std::vector<int> counts(6, 0);
  for (int k = 0; k < draws; ++k) ++counts[buf.sample(1, 0.6, 0.4, rng).refs[0].slot];
  double worst_sigma = 0.0;
  for (size_t i = 0; i < 6; ++i) {
    const double p = buf.probability(i);
    worst_sigma = std::max(worst_sigma, std::abs(counts[i] - draws * p) / std::sqrt(draws * p * (1 - p)));
  }

  bool ratio_ok = true;
  for (double delta : {0.1, 1.0, 4.0}) {
    for (double alpha : {0.6, 1.0}) {
      PrioritizedReplay pair(cfg);
      for (bool flag : {true, false}) {
        Transition t;
        t.state = t.next_state = Eigen::VectorXd::Zero(1);
        t.llm = flag;
        pair.push(std::move(t), delta);
      }
      pair.sample(1, alpha, 0.4, rng);
      const double expect = std::pow((2.5 * delta + 1e-3) / (delta + 1e-3), alpha);
      ratio_ok = ratio_ok && std::abs(pair.probability(0) / pair.probability(1) - expect) <= 1e-12 * expect;
    }
  }
  return {worst_sigma <= 3.0 && ratio_ok,
          "worst deviation " + num(worst_sigma, 2) + " sigma over 1e5 draws, boost ratio " +
              (ratio_ok ? "exact" : "off")};
}

Outcome priority_formula() {
  struct Case {
    double delta;
    bool llm;
    double expect;
  };
  const Case cases[] = {{2.0, true, 5.001}, {2.0, false, 2.001}, {0.0, true, 0.001},
                        {1.0, true, 2.501}, {1.0, false, 1.001}, {0.0, false, 0.001}};
  int ok = 0;
  for (const auto& c : cases) ok += replay_priority(c.delta, c.llm, 1.5, 1e-3) == c.expect;
  return {ok == 6, std::to_string(ok) + "/6 hand values reproduced exactly"};
}

Outcome vanilla_chain() {
  const chain::Result r = chain::run();
  return {r.max_error <= 1e-2 && r.updates <= 5000,
          "max |Q - Q*| = " + sci(r.max_error) + " after " + std::to_string(r.updates) + " updates"};
}

RunSpec training_spec(const Manifest& m, const fs::path& data, const fs::path& out, Method method) {
  RunSpec spec;
  for (const auto& e : m.entries) spec.instances.push_back(data / e.file);
  spec.method = method;
  spec.out_dir = out;
  spec.config.episodes = 1500;
  spec.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (method == Method::Dqn) {
    spec.config.switches = Ablation::all_off();
    spec.config.use_advisor = false;
  }
  return spec;
}

Outcome tiny_training() {
  TempDir data("c6data"), out("c6runs");
  const Manifest m = prepare(feasible_instances(5, 6000, {6}), data.path, {}, false);
  const auto records = run_batch(training_spec(m, data.path, out.path, Method::LlmDqnMock));
  std::map<std::string, int> good;
  std::map<std::string, double> seconds;
  for (const auto& r : records) {
    seconds[r.instance] += r.wall_seconds;
    if (r.ok && r.best_cost && gap(*r.best_cost, m.reference_cost(r.instance)) <= 5.0) ++good[r.instance];
  }
  int passing = 0;
  double slowest = 0.0;
  std::string detail;
  for (const auto& e : m.entries) {
    passing += good[e.name] >= 2;
    slowest = std::max(slowest, seconds[e.name]);
    detail += e.name + " " + std::to_string(good[e.name]) + "/3; ";
  }
  return {passing == 5 && slowest <= 600.0, detail + "slowest instance " + num(slowest, 1) + " s"};
}

Outcome directional() {
  TempDir data("c7data"), out("c7runs");
  const Manifest m = prepare(desk_corpus(), data.path, {}, false);
  run_batch(training_spec(m, data.path, out.path, Method::LlmDqnMock));
  run_batch(training_spec(m, data.path, out.path, Method::Dqn));
  const ResultTable t = build_table(load_runs(out.path), m);
  const TableRow* llm = nullptr;
  const TableRow* dqn = nullptr;
  for (const auto& row : t.rows) {
    if (row.instance != "mean") continue;
    if (row.method == "llm-dqn") llm = &row;
    if (row.method == "dqn") dqn = &row;
  }
  if (!llm || !dqn) return {false, "missing aggregate rows"};
  const bool gap_ok = llm->gap_mean < dqn->gap_mean;
  const bool sat_ok = llm->satisfaction > dqn->satisfaction;
  return {gap_ok && sat_ok, "gap llm-dqn " + num(llm->gap_mean, 2) + "% vs dqn " + num(dqn->gap_mean, 2) +
                                "%, satisfaction " + num(llm->satisfaction, 1) + "% vs " +
                                num(dqn->satisfaction, 1) + "%"};
}

Outcome self_correction() {
  const auto instances = feasible_instances(10, 3000, {5, 6, 7});
  const std::pair<FaultMode, FilterLayer> faults[] = {{FaultMode::SyntaxGarbage, FilterLayer::Syntax},
                                                       {FaultMode::HallucinatedNode, FilterLayer::Semantic},
                                                       {FaultMode::InfeasibleLeg, FilterLayer::Physical}};
  long rejected = 0, misplaced = 0, accepted_leaks = 0;
  long replayed = 0, dirty = 0;
  std::mt19937_64 rng(8);
  for (size_t k = 0; k < instances.size(); ++k) {
    const Env env(instances[k]);
    // a few states along a random legal walk
    std::vector<EnvState> states{env.reset()};
    EnvState s = env.reset();
    for (int step = 0; step < 4; ++step) {
      const auto legal = env.action_space(s);
      if (legal.empty()) break;
      const StepOutcome o = env.step(s, legal[rng() % legal.size()]);
      if (o.done) break;
      s = o.next;
      states.push_back(s);
    }
    for (const auto& st : states) {
      for (auto [fault, layer] : faults) {
        MockBackend mock(k, fault);
        const CandidateSet c = advise(st, env, mock, MemoryPool{});
        accepted_leaks += static_cast<long>(c.accepted.size());
        for (const auto& v : c.verdicts) (v.layer == layer ? rejected : misplaced) += 1;
      }
      MockBackend mock(k);
      const CandidateSet c = advise(st, env, mock, MemoryPool{});
      for (const auto& traj : c.accepted) {
        ++replayed;
        EnvState cur = st;
        for (int a : traj) {
          const StepOutcome o = env.step(cur, a);
          if (o.info.flagged()) {
            ++dirty;
            break;
          }
          cur = o.next;
        }
      }
    }
  }
  return {misplaced == 0 && accepted_leaks == 0 && rejected > 0 && replayed > 0 && dirty == 0,
          std::to_string(rejected) + " injected faults rejected at the intended layer, " +
              std::to_string(misplaced) + " elsewhere; " + std::to_string(replayed) +
              " accepted candidates replayed, " + std::to_string(dirty) + " with violations"};
}

Outcome determinism() {
  TempDir data("c9data"), a("c9a"), b("c9b");
  const Manifest m = prepare({desk_corpus().front()}, data.path, {}, false);
  auto spec_for = [&](const fs::path& out) {
    RunSpec spec = training_spec(m, data.path, out, Method::LlmDqnMock);
    spec.config.episodes = 300;
    spec.seeds = {5};
    return spec;
  };
  run_batch(spec_for(a.path));
  run_batch(spec_for(b.path));
  int compared = 0, identical = 0;
  for (const auto& f : fs::directory_iterator(a.path)) {
    const std::string name = f.path().filename().string();
    if (name.find(".timing.") != std::string::npos) continue;  // wall clock only
    ++compared;
    if (fs::exists(b.path / name) && read_file(f.path()) == read_file(b.path / name)) ++identical;
  }
  return {compared >= 3 && compared == identical,
          std::to_string(identical) + "/" + std::to_string(compared) + " report files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"oracle equivalence", oracle_equivalence},
      {"gradient correctness", gradient_check},
      {"replay distribution", per_distribution},
      {"priority formula", priority_formula},
      {"vanilla DQN sanity", vanilla_chain},
      {"tiny end-to-end training", tiny_training},
      {"directional desk comparison", directional},
      {"self-correction filter", self_correction},
      {"determinism", determinism},
  };
  // optional criterion numbers on the command line select a subset
  std::vector<bool> wanted(std::size(criteria), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(std::size(criteria))) wanted[static_cast<size_t>(k - 1)] = true;
  }
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    if (!wanted[static_cast<size_t>(index++)]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %-28s %s  %s (%.1f s)\n", index, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
