#include <doctest.h>

#include <algorithm>
#include <regex>

#include "fixtures.hpp"
#include "lqvrp/advisor.hpp"
#include "lqvrp/bench.hpp"

using namespace lqvrp;

namespace {

class Scripted : public AdvisorBackend {
 public:
  explicit Scripted(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::string& prompt, const DecodeParams&) override {
    prompts.push_back(prompt);
    const auto& r = replies_[std::min(static_cast<size_t>(calls_), replies_.size() - 1)];
    ++calls_;
    return r;
  }
  std::string name() const override { return "scripted"; }
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
};

class Down : public AdvisorBackend {
 public:
  std::string complete(const std::string&, const DecodeParams&) override {
    ++calls_;
    throw BackendUnavailable("connection refused");
  }
  std::string name() const override { return "down"; }
};

std::vector<Trajectory> parsed(const std::string& raw) {
  auto r = parse_reply(raw);
  REQUIRE(std::holds_alternative<std::vector<Trajectory>>(r));
  return std::get<std::vector<Trajectory>>(r);
}

std::string syntax_message(const std::string& raw) {
  auto r = parse_reply(raw);
  REQUIRE(std::holds_alternative<SyntaxError>(r));
  return std::get<SyntaxError>(r).message;
}

EnvState served(const Env& env, const std::vector<int>& actions) {
  EnvState s = env.reset();
  for (int a : actions) s = env.step(s, a).next;
  return s;
}

}  // namespace

TEST_CASE("prompt content") {
  const Instance inst = fixtures::pythagoras();
  const Env env(inst);
  const EnvState s = env.reset();
  const MemoryPool empty;
  const std::string p = build_prompt(s, inst, &empty, {});
  CHECK(p == build_prompt(s, inst, &empty, {}));
  CHECK(p.find("[memory]") == std::string::npos);
  CHECK(p.find("[previous_errors]") == std::string::npos);
  CHECK(p.find("[road_closures]") == std::string::npos);
  CHECK(p.find("list of lists") != std::string::npos);

  std::smatch m;
  REQUIRE(std::regex_search(p, m, std::regex("pending_customers: ([^\\n]*)")));
  const std::string line = m[1];
  for (const char* id : {"1", "2", "3"}) CHECK(std::count(line.begin(), line.end(), id[0]) == 1);

  MemoryPool pool;
  pool.update({1, 2, 0, 3, 0}, -120.0, {"window missed at 3"});
  Instance broken = fixtures::pythagoras();
  broken.set_break(1, 3, 4.0);
  const std::string q = build_prompt(s, broken, &pool, {"round 1: Syntax error: nope"});
  CHECK(q.find("[memory]") != std::string::npos);
  CHECK(q.find("[1,2,0,3,0]") != std::string::npos);
  CHECK(q.find("window missed at 3") != std::string::npos);
  CHECK(q.find("round 1: Syntax error: nope") != std::string::npos);
  CHECK(q.find("edge 1-3 closes_at=4") != std::string::npos);
}

TEST_CASE("parse_reply") {
  CHECK(parsed("[[1,3,2],[2,1,3],[3,2,1]]").size() == 3);
  CHECK(parsed("Sure! Here you go:\n[[1, 3, 2], [2,0,1]] hope it helps") ==
        std::vector<Trajectory>{{1, 3, 2}, {2, 0, 1}});
  CHECK(syntax_message("route: 1→3→2").find("Syntax error") == 0);
  CHECK(syntax_message("[[1,x,2]]").find("'x'") != std::string::npos);
  CHECK(syntax_message("[[1,2.5]]").find("'2.5'") != std::string::npos);
  CHECK(std::holds_alternative<SyntaxError>(parse_reply("[[1,2],[3")));
  // the first well-formed block wins
  CHECK(parsed("[[a]] then [[4,5]]") == std::vector<Trajectory>{{4, 5}});
}

TEST_CASE("semantic_check") {
  const Instance inst = fixtures::pythagoras();
  const Env env(inst);
  const EnvState s = served(env, {1});
  CHECK(semantic_check({2, 1}, s, inst).has_value());
  CHECK(semantic_check({3, 0, 2}, s, inst) == std::nullopt);
  CHECK(semantic_check({2, 3}, s, inst) == std::nullopt);
  CHECK(semantic_check({4}, s, inst).has_value());
  CHECK(semantic_check({-1}, s, inst).has_value());
  CHECK(semantic_check({}, s, inst).has_value());
  CHECK(semantic_check({2, 2}, s, inst).has_value());
}

TEST_CASE("physical_check") {
  const Instance inst = fixtures::pythagoras();
  const Env env(inst);
  // 4 + 5 + 1 = 10 fits; the capacity-6 variant overflows on the second leg
  CHECK(physical_check({1, 2, 3, 0}, env.reset(), env) == std::nullopt);
  const Instance tight("tight", inst.nodes(), 6, 3);
  const Env env2(tight);
  const auto err = physical_check({1, 2}, env2.reset(), env2);
  REQUIRE(err);
  CHECK(err->fault == PhysicalFault::CapacityExceeded);
  CHECK(err->leg == 1);
  CHECK(physical_check({1, 0, 2}, env2.reset(), env2) == std::nullopt);

  // arrival at 2 via 1 is 8; a break at 7 closes the road first
  Instance broken = fixtures::pythagoras();
  broken.set_break(1, 2, 7.0);
  EnvConfig open_cfg;
  open_cfg.mask_broken_edges = false;
  const Env env3(broken, open_cfg);
  const auto e3 = physical_check({1, 2}, env3.reset(), env3);
  REQUIRE(e3);
  CHECK(e3->fault == PhysicalFault::BrokenEdgeUsed);
  CHECK(e3->message.find("leg 1") != std::string::npos);
  CHECK(physical_check({3}, env.reset(), env) == std::nullopt);

  Instance late = fixtures::pythagoras();
  late.set_window(3, {0.0, 4.0});
  const Env env4(late);
  const auto e4 = physical_check({3}, env4.reset(), env4);
  REQUIRE(e4);
  CHECK(e4->fault == PhysicalFault::WindowMissed);
}

TEST_CASE("advise with the mock backend") {
  const Instance inst = fixtures::pythagoras();
  const Env env(inst);
  MockBackend mock(1);
  const MemoryPool pool;
  const CandidateSet c = advise(env.reset(), env, mock, pool);
  CHECK(c.rounds == 1);
  REQUIRE_FALSE(c.accepted.empty());
  for (const auto& t : c.accepted) {
    CHECK(semantic_check(t, env.reset(), inst) == std::nullopt);
    CHECK(physical_check(t, env.reset(), env) == std::nullopt);
  }
  CHECK(std::is_sorted(c.action_set.begin(), c.action_set.end()));

  MockBackend again(1);
  CHECK(advise(env.reset(), env, again, pool).raw_replies == c.raw_replies);
}

TEST_CASE("mock candidates are feasible across seeded instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = make_synthetic(seed, 6);
    const Env env(inst);
    MockBackend mock(seed);
    const CandidateSet c = advise(env.reset(), env, mock, MemoryPool{});
    for (const auto& t : c.accepted) {
      // stepping an accepted candidate raises no flag
      EnvState s = env.reset();
      for (int a : t) {
        const StepOutcome out = env.step(s, a);
        CHECK_FALSE(out.info.flagged());
        s = out.next;
      }
    }
  }
}

TEST_CASE("fault modes fail the intended layer") {
  const Instance inst = fixtures::pythagoras();
  const Env env(inst);
  const std::pair<FaultMode, FilterLayer> cases[] = {{FaultMode::SyntaxGarbage, FilterLayer::Syntax},
                                                      {FaultMode::HallucinatedNode, FilterLayer::Semantic},
                                                      {FaultMode::InfeasibleLeg, FilterLayer::Physical}};
  for (auto [fault, layer] : cases) {
    MockBackend mock(3, fault);
    const CandidateSet c = advise(env.reset(), env, mock, MemoryPool{});
    CHECK(c.accepted.empty());
    CHECK(c.rounds == 3);
    CHECK(mock.calls() == 3);
    REQUIRE_FALSE(c.verdicts.empty());
    for (const auto& v : c.verdicts) CHECK(v.layer == layer);
  }
}

TEST_CASE("errors are fed back verbatim and the filter order holds") {
  const Instance inst = fixtures::pythagoras();
  const Env env(inst);
  Scripted backend({"no idea", "[[9],[1,1],[1,2,3,0]]", "[[2]]"});
  const CandidateSet c = advise(env.reset(), env, backend, MemoryPool{});
  REQUIRE(c.prompts.size() == 2);
  const std::string first_error = std::get<SyntaxError>(parse_reply("no idea")).message;
  CHECK(c.prompts[1].find(first_error) != std::string::npos);
  CHECK(c.accepted == std::vector<Trajectory>{{1, 2, 3, 0}});
  CHECK(c.action_set == std::vector<int>{1});
  int semantic = 0;
  for (const auto& v : c.verdicts)
    if (v.layer == FilterLayer::Semantic) ++semantic;
  CHECK(semantic == 2);

  Down down;
  CHECK_THROWS_AS(advise(env.reset(), env, down, MemoryPool{}), BackendUnavailable);
}

TEST_CASE("memory pool") {
  MemoryPool pool(2);
  pool.update({1}, 5.0);
  pool.update({2}, 9.0);
  pool.update({3}, 7.0);
  REQUIRE(pool.size() == 2);
  CHECK(pool.entries()[0].episode_return == 9.0);
  CHECK(pool.entries()[1].episode_return == 7.0);

  pool.update({3}, 8.0);
  CHECK(pool.size() == 2);
  CHECK(pool.entries()[1].episode_return == 8.0);
  pool.update({3}, 1.0);
  CHECK(pool.entries()[1].episode_return == 8.0);

  pool.update({}, 100.0);
  CHECK(pool.entries()[0].episode_return == 9.0);

  MemoryPool ties(3);
  ties.update({1}, 4.0);
  ties.update({2}, 4.0);
  CHECK(ties.entries()[0].trajectory == Trajectory{1});
  CHECK(ties.top(1).size() == 1);
}

TEST_CASE("guidance cache follows trajectories for a bounded number of steps") {
  GuidanceCache cache(2);
  CHECK(cache.exhausted());
  cache.load({{1, 2, 3}, {2, 1}, {1, 3}});
  CHECK(cache.actions() == std::vector<int>{1, 2});
  cache.advance(1);
  CHECK(cache.actions() == std::vector<int>{2, 3});
  cache.advance(3);
  CHECK(cache.exhausted());

  cache.load({{1}});
  cache.advance(2);  // off the spine
  CHECK(cache.exhausted());
}
