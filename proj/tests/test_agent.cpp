#include <doctest.h>

#include <cmath>
#include <map>

#include "chain_mdp.hpp"
#include "fixtures.hpp"
#include "lqvrp/agent.hpp"
#include "lqvrp/bench.hpp"

using namespace lqvrp;

namespace {

// Q(s, .) equals the output biases whatever the input.
QNet constant_net(const std::vector<double>& q) {
  QNet net({2, static_cast<int>(q.size()), {2}, 2, false}, 0);
  net.params().setZero();
  const Eigen::Index n = static_cast<Eigen::Index>(q.size());
  for (Eigen::Index a = 0; a < n; ++a) net.params()[net.params().size() - n + a] = q[static_cast<size_t>(a)];
  return net;
}

Transition step(double reward, bool done, Mask next_mask = {1, 1}) {
  Transition t;
  t.state = t.next_state = Eigen::VectorXd::Zero(2);
  t.state_mask = {1, 1};
  t.next_mask = std::move(next_mask);
  t.reward = reward;
  t.done = done;
  return t;
}

TrainConfig quick(int episodes) {
  TrainConfig cfg;
  cfg.episodes = episodes;
  cfg.warmup = 64;
  cfg.batch_size = 16;
  cfg.trunk = {32};
  cfg.head_hidden = 16;
  return cfg;
}

class Down : public AdvisorBackend {
 public:
  std::string complete(const std::string&, const DecodeParams&) override {
    ++calls_;
    throw BackendUnavailable("offline");
  }
  std::string name() const override { return "down"; }
};

}  // namespace

TEST_CASE("epsilon schedule") {
  const TrainConfig cfg;
  CHECK(epsilon_at(cfg, 0) == 0.8);
  for (int k : {1, 10, 100, 500, 2000}) CHECK(epsilon_at(cfg, k) == std::max(0.01, 0.8 * std::pow(0.995, k)));
  CHECK(epsilon_at(cfg, 100000) == 0.01);
}

TEST_CASE("config defaults, validation and JSON overlay") {
  const TrainConfig cfg;
  CHECK(cfg.gamma == 0.99);
  CHECK(cfg.eps_start == 0.8);
  CHECK(cfg.eps_min == 0.01);
  CHECK(cfg.eps_decay == 0.995);
  CHECK(cfg.lr == 0.0002);
  CHECK(cfg.eps_llm == 1.5);
  CHECK_NOTHROW(cfg.validate());
  TrainConfig bad = cfg;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const TrainConfig back = train_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  const TrainConfig tweaked = train_config_from_json({{"episodes", 7}, {"switches", {{"per", false}}}});
  CHECK(tweaked.episodes == 7);
  CHECK_FALSE(tweaked.switches.per);
  CHECK(tweaked.switches.double_q);
  CHECK_THROWS(train_config_from_json({{"episodse", 7}}));
  CHECK(cfg.resolved_horizon(fixtures::pythagoras()) == 12);
}

TEST_CASE("td targets by hand") {
  const QNet online = constant_net({1.0, 3.0});
  const QNet target = constant_net({5.0, 2.0});
  const Transition live = step(0.5, false);
  const Transition end = step(0.5, true);
  const Transition narrow = step(0.5, false, {1, 0});
  const std::vector<const Transition*> batch{&live, &end, &narrow};

  const Eigen::VectorXd dbl = td_targets(batch, online, target, 0.9, true);
  CHECK(dbl[0] == doctest::Approx(0.5 + 0.9 * 2.0));  // online picks 1, target scores it 2
  CHECK(dbl[1] == 0.5);
  CHECK(dbl[2] == doctest::Approx(0.5 + 0.9 * 5.0));

  const Eigen::VectorXd plain = td_targets(batch, online, target, 0.9, false);
  CHECK(plain[0] == doctest::Approx(0.5 + 0.9 * 5.0));
  CHECK(plain[1] == 0.5);

  const Eigen::VectorXd myopic = td_targets(batch, online, target, 0.0, true);
  for (int i = 0; i < 3; ++i) CHECK(myopic[i] == 0.5);
}

TEST_CASE("select_action") {
  std::mt19937_64 rng(99);
  SUBCASE("exploration is uniform over legal and guidance") {
    const QNet net({2, 8, {4}, 4, true}, 1);
    const std::vector<int> legal{0, 2, 3, 5};
    const std::vector<int> guide{2, 3, 5, 7};
    std::map<int, int> counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const ActionChoice c = select_action(net, Eigen::VectorXd::Zero(2), legal, &guide, 1.0, rng);
      CHECK(c.constrained);
      ++counts[c.action];
    }
    CHECK(counts.size() == 3);
    double chi = 0.0;
    for (auto [a, k] : counts) chi += (k - n / 3.0) * (k - n / 3.0) / (n / 3.0);
    CHECK(chi < 13.82);  // 2 dof, p = 0.001
  }
  SUBCASE("greedy picks the masked argmax") {
    const QNet net = constant_net({1.0, 7.0, 3.0, 9.0});
    CHECK(select_action(net, Eigen::VectorXd::Zero(2), {0, 1, 2}, nullptr, 0.0, rng).action == 1);
    const std::vector<int> guide{0, 2};
    CHECK(select_action(net, Eigen::VectorXd::Zero(2), {0, 1, 2}, &guide, 0.0, rng).action == 2);
  }
  SUBCASE("disjoint guidance falls back to the legal set") {
    const QNet net = constant_net({1.0, 7.0, 3.0, 9.0});
    const std::vector<int> guide{3};
    const ActionChoice c = select_action(net, Eigen::VectorXd::Zero(2), {0, 1}, &guide, 0.0, rng);
    CHECK(c.action == 1);
    CHECK_FALSE(c.constrained);
  }
}

TEST_CASE("plain DQN on a two-state chain recovers the closed-form values") {
  const chain::Result r = chain::run();
  CHECK(r.max_error < 1e-2);
}

TEST_CASE("phase switching") {
  TrainConfig cfg;
  cfg.episodes = 100;
  cfg.phase_rule = PhaseRule::FixedFraction;
  PhaseController fixed(cfg);
  for (int e = 0; e < 100; ++e) fixed.record(e, -static_cast<double>(e));
  CHECK(fixed.switched_at() == 20);

  cfg.episodes = 10000;
  cfg.phase_rule = PhaseRule::Stagnation;
  PhaseController flat(cfg);
  for (int e = 0; e < 150; ++e) flat.record(e, -100.0);
  CHECK(flat.switched_at() == 100);

  PhaseController moving(cfg);
  for (int e = 0; e < 150; ++e) moving.record(e, -1000.0 + 10.0 * e);
  CHECK(moving.in_phase1());
}

TEST_CASE("training on one customer finds the oracle plan") {
  const Instance inst("one", {Node{0, 50, 50, 0, {}}, Node{1, 20, 90, 3, {0, 200}}}, 10, 1);
  MockBackend mock(0);
  TrainConfig cfg = quick(200);
  const TrainResult r = train(inst, cfg, &mock);
  REQUIRE(r.best_plan);
  const ExactResult oracle = exact_solve(inst, 8, CostWeights::freight());
  CHECK(*r.best_plan == oracle.plan);
  CHECK(gap(r.best_cost, oracle.cost) == 0.0);
  const PolicyEvaluation ev = evaluate_policy(inst, r.final_net, 1);
  CHECK(ev.satisfaction_rate == 1.0);
  CHECK(ev.mean_cost == oracle.cost);
}

TEST_CASE("training is deterministic and the advisor stays in phase 1") {
  const Instance inst = make_synthetic(901, 5);
  TrainConfig cfg = quick(60);
  cfg.phase_rule = PhaseRule::FixedFraction;
  cfg.phase1_fraction = 0.5;
  auto run = [&] {
    MockBackend mock(4);
    std::vector<std::string> lines;
    TrainHooks hooks;
    hooks.on_episode = [&](const EpisodeReport& r) { lines.push_back(to_json(r).dump()); };
    TrainResult res = train(inst, cfg, &mock, hooks);
    return std::make_pair(lines, res);
  };
  const auto [a, ra] = run();
  const auto [b, rb] = run();
  CHECK(a == b);
  CHECK(ra.final_net.params() == rb.final_net.params());

  CHECK(ra.phase_switch == 30);
  long phase1_llm_actions = 0;
  for (const auto& rep : ra.reports) {
    if (rep.phase == 2) {
      CHECK(rep.llm_calls == 0);
      CHECK(rep.llm_actions == 0);
    } else {
      phase1_llm_actions += rep.llm_actions;
    }
  }
  CHECK(ra.backend_calls > 0);
  // every flagged transition came from a phase-1 step on the intersected set
  CHECK(ra.llm_flagged_stored == phase1_llm_actions);
}

TEST_CASE("vanilla DQN path never touches the advisor") {
  const Instance inst = make_synthetic(902, 5);
  TrainConfig cfg = quick(20);
  cfg.switches = Ablation::all_off();
  cfg.use_advisor = false;
  MockBackend mock(1);
  const TrainResult r = train(inst, cfg, &mock);
  CHECK(mock.calls() == 0);
  CHECK(r.backend_calls == 0);
  CHECK(r.llm_flagged_stored == 0);
  CHECK(r.pool.empty());
}

TEST_CASE("an unreachable backend degrades to plain DQN") {
  const Instance inst = make_synthetic(902, 5);
  Down down;
  std::vector<std::string> log;
  TrainHooks hooks;
  hooks.on_log = [&](const std::string& s) { log.push_back(s); };
  const TrainResult r = train(inst, quick(10), &down, hooks);
  CHECK(r.reports.size() == 10);
  CHECK(r.backend_failures > 0);
  CHECK(r.llm_flagged_stored == 0);
  CHECK_FALSE(log.empty());
}

TEST_CASE("policy evaluation") {
  SUBCASE("a policy that always deadlocks never satisfies") {
    Instance inst = fixtures::triangle();
    inst.set_break(1, 2, 1e-9);
    inst.set_break(0, 2, 1e-9);
    const Policy first = [](const EnvState&, const std::vector<int>& legal) { return legal.front(); };
    const PolicyEvaluation ev = evaluate_policy(inst, first, 3);
    CHECK(ev.satisfaction_rate == 0.0);
    CHECK(ev.episodes == 3);
  }
  SUBCASE("the oracle plan replayed satisfies every time") {
    const Instance inst = make_synthetic(901, 5);
    const ExactResult oracle = exact_solve(inst, 8, CostWeights::freight());
    const PolicyEvaluation ev = evaluate_policy(inst, scripted_policy(oracle.plan), 4);
    CHECK(ev.satisfaction_rate == 1.0);
    CHECK(ev.mean_cost == oracle.cost);
    CHECK(ev.last_plan == oracle.plan);
  }
  SUBCASE("checkpoints") {
    const Instance inst = fixtures::pythagoras();
    CHECK_THROWS_AS(evaluate_policy(inst, std::string("{}"), 1), NetError);
    const QNet wrong({3, 2, {4}, 2, true}, 0);
    CHECK_THROWS_AS(evaluate_policy(inst, wrong, 1), NetError);
  }
}
