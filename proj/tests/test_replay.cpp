#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "lqvrp/replay.hpp"

using namespace lqvrp;

namespace {

Transition item(int action, bool llm = false) {
  Transition t;
  t.state = Eigen::VectorXd::Zero(2);
  t.next_state = Eigen::VectorXd::Zero(2);
  t.state_mask = t.next_mask = {1, 1};
  t.action = action;
  t.llm = llm;
  return t;
}

ReplayConfig small(size_t capacity) {
  ReplayConfig cfg;
  cfg.capacity = capacity;
  return cfg;
}

}  // namespace

TEST_CASE("priority formula") {
  CHECK(replay_priority(2.0, true, 1.5, 1e-3) == doctest::Approx(5.001).epsilon(1e-15));
  CHECK(replay_priority(2.0, false, 1.5, 1e-3) == doctest::Approx(2.001).epsilon(1e-15));
  CHECK(replay_priority(0.0, true, 1.5, 1e-3) == 1e-3);
  CHECK(replay_priority(-2.0, false, 1.5, 1e-3) == replay_priority(2.0, false, 1.5, 1e-3));
}

TEST_CASE("push stores the priority and evicts the oldest") {
  PrioritizedReplay buf(small(3));
  CHECK(buf.push(item(0, true), 2.0) == doctest::Approx(5.001));
  buf.push(item(1), 2.0);
  buf.push(item(2), 1.0);
  CHECK(buf.size() == 3);
  buf.push(item(3), 1.0);
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).action == 3);
  CHECK(buf.push_max_priority(item(4)) == doctest::Approx(5.001));
  CHECK(PrioritizedReplay(small(2)).push_max_priority(item(0)) == 1.0);
  CHECK_THROWS_AS(PrioritizedReplay(small(0)), ReplayError);
}

TEST_CASE("sampling probabilities") {
  std::mt19937_64 rng(1);
  SUBCASE("two items, alpha 1") {
    ReplayConfig cfg = small(4);
    cfg.eps_floor = 0.0;
    PrioritizedReplay buf(cfg);
    buf.push(item(0), 1.0);
    buf.push(item(1), 3.0);
    buf.sample(1, 1.0, 0.0, rng);
    CHECK(buf.probability(0) == doctest::Approx(0.25));
    CHECK(buf.probability(1) == doctest::Approx(0.75));
  }
  SUBCASE("equal priorities give uniform draws and unit weights") {
    PrioritizedReplay buf(small(8));
    for (int i = 0; i < 8; ++i) buf.push(item(i), 0.7);
    const SampledBatch b = buf.sample(8, 0.6, 0.4, rng);
    for (double p : b.probabilities) CHECK(p == doctest::Approx(0.125));
    for (double w : b.weights) CHECK(w == doctest::Approx(1.0));
  }
  SUBCASE("alpha 0 is uniform, beta 0 gives unit weights") {
    PrioritizedReplay buf(small(5));
    for (int i = 0; i < 5; ++i) buf.push(item(i), i * 3.0);
    const SampledBatch b = buf.sample(5, 0.0, 0.0, rng);
    for (double p : b.probabilities) CHECK(p == doctest::Approx(0.2));
    const SampledBatch c = buf.sample(5, 1.0, 0.0, rng);
    for (double w : c.weights) CHECK(w == 1.0);
  }
  SUBCASE("weights follow (B P)^-beta over the batch maximum") {
    PrioritizedReplay buf(small(4));
    for (int i = 0; i < 4; ++i) buf.push(item(i), 1.0 + i);
    const SampledBatch b = buf.sample(4, 1.0, 0.5, rng);
    double max_w = 0.0;
    for (double p : b.probabilities) max_w = std::max(max_w, std::pow(4.0 * p, -0.5));
    for (size_t k = 0; k < 4; ++k)
      CHECK(b.weights[k] == doctest::Approx(std::pow(4.0 * b.probabilities[k], -0.5) / max_w));
  }
  SUBCASE("underfilled") {
    PrioritizedReplay buf(small(4));
    buf.push(item(0), 1.0);
    CHECK_THROWS_AS(buf.sample(2, 0.6, 0.4, rng), ReplayError);
  }
}

TEST_CASE("empirical frequencies match P(i) within 3 sigma") {
  std::mt19937_64 rng(2025);
  PrioritizedReplay buf(small(5));
  const double tds[5] = {0.5, 1.0, 2.0, 4.0, 0.1};
  for (int i = 0; i < 5; ++i) buf.push(item(i), tds[i]);
  const int draws = 1000;
  std::vector<int> counts(5, 0);
  for (int k = 0; k < draws; ++k) ++counts[buf.sample(1, 0.6, 0.4, rng).refs[0].slot];
  for (size_t i = 0; i < 5; ++i) {
    const double p = buf.probability(i);
    const double sigma = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(counts[i] - draws * p) <= 3 * sigma);
  }
}

TEST_CASE("sum tree stays consistent under random interleavings") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (size_t leaves = 1; leaves <= 64; ++leaves) {
    PrioritizedReplay buf(small(leaves));
    double alpha = 1.0;  // until the first sample sets it
    for (int op = 0; op < 200; ++op) {
      if (buf.size() < 2 || u(rng) < 1.0) {
        buf.push(item(op, u(rng) < 1.5), u(rng));
      } else {
        alpha = 0.6;
        const SampledBatch b = buf.sample(2, alpha, 0.4, rng);
        buf.update_priorities(b.refs, {u(rng), u(rng)});
      }
      double sum = 0.0;
      for (size_t i = 0; i < buf.size(); ++i) {
        CHECK(buf.leaf_mass(i) == doctest::Approx(std::pow(buf.priority(i), alpha)).epsilon(1e-12));
        sum += buf.leaf_mass(i);
      }
      CHECK(buf.tree_total() == doctest::Approx(sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("update_priorities") {
  std::mt19937_64 rng(4);
  PrioritizedReplay buf(small(2));
  buf.push(item(0, true), 1.0);
  buf.push(item(1, false), 1.0);
  SampledBatch b = buf.sample(2, 0.6, 0.4, rng);
  std::vector<double> deltas;
  for (const auto* t : b.transitions) deltas.push_back(t->action == 0 ? 2.0 : 0.0);
  buf.update_priorities(b.refs, deltas);
  CHECK(buf.priority(0) == doctest::Approx(5.001));  // boost survives the refresh
  CHECK(buf.priority(1) == 1e-3);

  b = buf.sample(1, 0.6, 0.4, rng);
  buf.push(item(2), 1.0);
  buf.push(item(3), 1.0);
  CHECK_THROWS_AS(buf.update_priorities(b.refs, {1.0}), ReplayError);

  ReplayConfig cfg = small(2);
  cfg.boost_on_refresh = false;
  PrioritizedReplay plain(cfg);
  plain.push(item(0, true), 1.0);
  plain.push(item(1, true), 1.0);
  b = plain.sample(1, 0.6, 0.4, rng);
  plain.update_priorities(b.refs, {2.0});
  CHECK(plain.priority(b.refs[0].slot) == doctest::Approx(2.001));
}

TEST_CASE("advisor flag amplifies the sampling probability by the exact ratio") {
  std::mt19937_64 rng(6);
  for (double alpha : {0.6, 1.0}) {
    PrioritizedReplay buf(small(3));
    buf.push(item(0, true), 0.8);
    buf.push(item(1, false), 0.8);
    buf.push(item(2, false), 3.0);
    buf.sample(1, alpha, 0.4, rng);
    const double expect = std::pow((2.5 * 0.8 + 1e-3) / (0.8 + 1e-3), alpha);
    CHECK(buf.probability(0) / buf.probability(1) == doctest::Approx(expect).epsilon(1e-12));
  }
}
