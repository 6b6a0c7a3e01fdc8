#include "lqvrp/agent.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lqvrp {

using nlohmann::json;

int TrainConfig::resolved_horizon(const Instance& inst) const {
  return horizon > 0 ? horizon : 4 * std::max(1, inst.customer_count());
}

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("invalid training config: ") + field);
  };
  need(gamma >= 0.0 && gamma <= 1.0, "gamma");
  need(eps_start >= 0.0 && eps_start <= 1.0, "eps_start");
  need(eps_min >= 0.0 && eps_min <= eps_start, "eps_min");
  need(eps_decay > 0.0 && eps_decay <= 1.0, "eps_decay");
  need(lr > 0.0, "lr");
  need(eps_llm >= 0.0, "eps_llm");
  need(episodes >= 0, "episodes");
  need(horizon >= 0, "horizon");
  need(batch_size > 0, "batch_size");
  need(tau > 0.0 && tau <= 1.0, "tau");
  need(update_period > 0, "update_period");
  need(warmup >= 0, "warmup");
  need(phase1_fraction >= 0.0 && phase1_fraction <= 1.0, "phase1_fraction");
  need(stagnation_window > 0, "stagnation_window");
  need(stagnation_tolerance >= 0.0, "stagnation_tolerance");
  need(alpha >= 0.0, "alpha");
  need(beta_start >= 0.0 && beta_end >= 0.0, "beta");
  need(buffer_capacity > 0, "buffer_capacity");
  need(eps_floor > 0.0, "eps_floor");
  need(reward_scale > 0.0, "reward_scale");
  need(!trunk.empty() && std::all_of(trunk.begin(), trunk.end(), [](int w) { return w > 0; }), "trunk");
  need(head_hidden > 0, "head_hidden");
  need(guidance_steps > 0, "guidance_steps");
  need(max_rounds > 0, "max_rounds");
  need(pool_capacity > 0, "pool_capacity");
  need(checkpoint_every >= 0, "checkpoint_every");
}

namespace {

const char* phase_rule_name(PhaseRule r) {
  switch (r) {
    case PhaseRule::FixedFraction: return "fixed_fraction";
    case PhaseRule::Stagnation: return "stagnation";
    case PhaseRule::Either: return "either";
  }
  return "either";
}

PhaseRule phase_rule_from(const std::string& s) {
  if (s == "fixed_fraction") return PhaseRule::FixedFraction;
  if (s == "stagnation") return PhaseRule::Stagnation;
  if (s == "either") return PhaseRule::Either;
  throw std::invalid_argument("unknown phase rule: " + s);
}

}  // namespace

json to_json(const TrainConfig& c) {
  const auto& sw = c.switches;
  return json{
      {"gamma", c.gamma},
      {"eps_start", c.eps_start},
      {"eps_min", c.eps_min},
      {"eps_decay", c.eps_decay},
      {"lr", c.lr},
      {"eps_llm", c.eps_llm},
      {"episodes", c.episodes},
      {"horizon", c.horizon},
      {"batch_size", c.batch_size},
      {"tau", c.tau},
      {"update_period", c.update_period},
      {"warmup", c.warmup},
      {"phase_rule", phase_rule_name(c.phase_rule)},
      {"phase1_fraction", c.phase1_fraction},
      {"stagnation_window", c.stagnation_window},
      {"stagnation_tolerance", c.stagnation_tolerance},
      {"switches",
       {{"double_q", sw.double_q},
        {"dueling", sw.dueling},
        {"per", sw.per},
        {"llm_memory", sw.llm_memory},
        {"llm_per_boost", sw.llm_per_boost},
        {"reward_shaping", sw.reward_shaping}}},
      {"use_advisor", c.use_advisor},
      {"alpha", c.alpha},
      {"beta_start", c.beta_start},
      {"beta_end", c.beta_end},
      {"buffer_capacity", c.buffer_capacity},
      {"eps_floor", c.eps_floor},
      {"reward_scale", c.reward_scale},
      {"trunk", c.trunk},
      {"head_hidden", c.head_hidden},
      {"loss", c.loss == LossKind::Huber ? "huber" : "squared"},
      {"guidance_steps", c.guidance_steps},
      {"max_rounds", c.max_rounds},
      {"pool_capacity", c.pool_capacity},
      {"pool_top_k", c.pool_top_k},
      {"clock", c.env.clock == ClockMode::Global ? "global" : "per_route"},
      {"mask_broken_edges", c.env.mask_broken_edges},
      {"violation_penalty", c.env.reward.violation_penalty},
      {"checkpoint_every", c.checkpoint_every},
      {"seed", c.seed},
  };
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw std::invalid_argument("training config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "gamma") c.gamma = v.get<double>();
    else if (k == "eps_start") c.eps_start = v.get<double>();
    else if (k == "eps_min") c.eps_min = v.get<double>();
    else if (k == "eps_decay") c.eps_decay = v.get<double>();
    else if (k == "lr") c.lr = v.get<double>();
    else if (k == "eps_llm") c.eps_llm = v.get<double>();
    else if (k == "episodes") c.episodes = v.get<int>();
    else if (k == "horizon") c.horizon = v.get<int>();
    else if (k == "batch_size") c.batch_size = v.get<int>();
    else if (k == "tau") c.tau = v.get<double>();
    else if (k == "update_period") c.update_period = v.get<int>();
    else if (k == "warmup") c.warmup = v.get<int>();
    else if (k == "phase_rule") c.phase_rule = phase_rule_from(v.get<std::string>());
    else if (k == "phase1_fraction") c.phase1_fraction = v.get<double>();
    else if (k == "stagnation_window") c.stagnation_window = v.get<int>();
    else if (k == "stagnation_tolerance") c.stagnation_tolerance = v.get<double>();
    else if (k == "switches") {
      for (auto s = v.begin(); s != v.end(); ++s) {
        const bool on = s.value().get<bool>();
        if (s.key() == "double_q") c.switches.double_q = on;
        else if (s.key() == "dueling") c.switches.dueling = on;
        else if (s.key() == "per") c.switches.per = on;
        else if (s.key() == "llm_memory") c.switches.llm_memory = on;
        else if (s.key() == "llm_per_boost") c.switches.llm_per_boost = on;
        else if (s.key() == "reward_shaping") c.switches.reward_shaping = on;
        else throw std::invalid_argument("unknown switch: " + s.key());
      }
    } else if (k == "use_advisor") c.use_advisor = v.get<bool>();
    else if (k == "alpha") c.alpha = v.get<double>();
    else if (k == "beta_start") c.beta_start = v.get<double>();
    else if (k == "beta_end") c.beta_end = v.get<double>();
    else if (k == "buffer_capacity") c.buffer_capacity = v.get<size_t>();
    else if (k == "eps_floor") c.eps_floor = v.get<double>();
    else if (k == "reward_scale") c.reward_scale = v.get<double>();
    else if (k == "trunk") c.trunk = v.get<std::vector<int>>();
    else if (k == "head_hidden") c.head_hidden = v.get<int>();
    else if (k == "loss") {
      const auto s = v.get<std::string>();
      if (s == "huber") c.loss = LossKind::Huber;
      else if (s == "squared") c.loss = LossKind::Squared;
      else throw std::invalid_argument("unknown loss: " + s);
    } else if (k == "guidance_steps") c.guidance_steps = v.get<int>();
    else if (k == "max_rounds") c.max_rounds = v.get<int>();
    else if (k == "pool_capacity") c.pool_capacity = v.get<size_t>();
    else if (k == "pool_top_k") c.pool_top_k = v.get<size_t>();
    else if (k == "clock") {
      const auto s = v.get<std::string>();
      if (s == "global") c.env.clock = ClockMode::Global;
      else if (s == "per_route") c.env.clock = ClockMode::PerRoute;
      else throw std::invalid_argument("unknown clock mode: " + s);
    } else if (k == "mask_broken_edges") c.env.mask_broken_edges = v.get<bool>();
    else if (k == "violation_penalty") c.env.reward.violation_penalty = v.get<double>();
    else if (k == "checkpoint_every") c.checkpoint_every = v.get<int>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else throw std::invalid_argument("unknown training config key: " + k);
  }
  return c;
}

double epsilon_at(const TrainConfig& cfg, int episode) {
  return std::max(cfg.eps_min, cfg.eps_start * std::pow(cfg.eps_decay, episode));
}

Eigen::VectorXd td_targets(const std::vector<const Transition*>& batch, const QNet& online,
                           const QNet& target, double gamma, bool double_q) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::VectorXd y(n);
  if (n == 0) return y;
  const Eigen::Index dim = batch.front()->next_state.size();
  Eigen::MatrixXd next(dim, n);
  std::vector<Mask> masks(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    next.col(i) = batch[i]->next_state;
    masks[i] = batch[i]->next_mask;
  }
  const Eigen::MatrixXd q_target = target.forward_batch(next, masks);
  Eigen::MatrixXd q_online;
  if (double_q) q_online = online.forward_batch(next, masks);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    y(i) = t.reward;
    if (t.done) continue;
    const int a = masked_argmax(double_q ? Eigen::VectorXd(q_online.col(i)) : Eigen::VectorXd(q_target.col(i)));
    if (a < 0) continue;  // nothing legal afterwards: no bootstrap
    y(i) += gamma * q_target(a, i);
  }
  return y;
}

ActionChoice select_action(const QNet& net, const Eigen::VectorXd& features,
                           const std::vector<int>& legal, const std::vector<int>* guidance,
                           double eps, std::mt19937_64& rng) {
  if (legal.empty()) throw std::invalid_argument("select_action: no legal action");
  ActionChoice choice;
  std::vector<int> effective;
  if (guidance != nullptr)
    std::set_intersection(legal.begin(), legal.end(), guidance->begin(), guidance->end(),
                          std::back_inserter(effective));
  if (effective.empty()) {
    effective = legal;
  } else {
    choice.constrained = true;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < eps) {
    std::uniform_int_distribution<size_t> pick(0, effective.size() - 1);
    choice.action = effective[pick(rng)];
    return choice;
  }
  Mask m(static_cast<size_t>(net.shape().actions), 0);
  for (int a : legal) m[static_cast<size_t>(a)] = 1;
  const Eigen::VectorXd q = net.forward(features, m);
  double best = kMaskedQ;
  for (int a : effective) {
    if (choice.action < 0 || q(a) > best) {
      best = q(a);
      choice.action = a;
    }
  }
  return choice;
}

// ---------------------------------------------------------------------------

Learner::Learner(const NetShape& shape, const TrainConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      online_(shape, seed),
      target_(online_),
      adam_(online_.params().size()),
      buffer_(ReplayConfig{cfg.buffer_capacity, cfg.switches.llm_per_boost ? cfg.eps_llm : 0.0,
                           cfg.eps_floor, true}),
      rng_(seed ^ 0x9e3779b97f4a7c15ULL) {}

double Learner::td_error(const Transition& t) const {
  const std::vector<const Transition*> one{&t};
  const double y = td_targets(one, online_, target_, cfg_.gamma, cfg_.switches.double_q)(0);
  return online_.forward(t.state, t.state_mask)(t.action) - y;
}

void Learner::remember(Transition t) {
  if (cfg_.switches.per) {
    const double td = td_error(t);
    buffer_.push(std::move(t), td);
  } else {
    buffer_.push(std::move(t), 0.0);
  }
}

bool Learner::ready() const {
  return buffer_.size() >= static_cast<size_t>(std::max(cfg_.warmup, cfg_.batch_size));
}

double Learner::update(double beta) {
  const bool per = cfg_.switches.per;
  SampledBatch sb = buffer_.sample(static_cast<size_t>(cfg_.batch_size), per ? cfg_.alpha : 0.0,
                                   per ? beta : 0.0, rng_);
  Batch b;
  const auto n = static_cast<Eigen::Index>(sb.transitions.size());
  b.features.resize(online_.shape().inputs, n);
  b.actions.resize(sb.transitions.size());
  b.weights.resize(n);
  b.masks.resize(sb.transitions.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = *sb.transitions[i];
    b.features.col(i) = t.state;
    b.actions[i] = t.action;
    b.weights(i) = sb.weights[i];
    b.masks[i] = t.state_mask;
  }
  b.targets = td_targets(sb.transitions, online_, target_, cfg_.gamma, cfg_.switches.double_q);

  const LossGrad lg = online_.backward(b, cfg_.loss);
  adam_.step(online_.params(), lg.grad, cfg_.lr);
  if (per) {
    buffer_.update_priorities(sb.refs, std::vector<double>(lg.td_errors.data(),
                                                           lg.td_errors.data() + lg.td_errors.size()));
  }
  polyak_update(target_, online_, cfg_.tau);
  ++updates_;
  return lg.loss;
}

// ---------------------------------------------------------------------------

PhaseController::PhaseController(const TrainConfig& cfg) : cfg_(cfg) {
  if (cfg_.phase_rule != PhaseRule::Stagnation && cfg_.phase1_fraction <= 0.0) {
    phase1_ = false;
    switched_at_ = 0;
  }
}

void PhaseController::record(int episode, double episode_return) {
  returns_.push_back(episode_return);
  if (!phase1_) return;
  const int next = episode + 1;
  bool done = false;
  if (cfg_.phase_rule != PhaseRule::Stagnation) {
    const int limit = static_cast<int>(std::ceil(cfg_.phase1_fraction * cfg_.episodes));
    if (next >= limit) done = true;
  }
  if (cfg_.phase_rule != PhaseRule::FixedFraction) {
    const size_t w = static_cast<size_t>(cfg_.stagnation_window);
    if (returns_.size() >= 2 * w) {
      const auto end = returns_.end();
      const double recent = std::accumulate(end - static_cast<long>(w), end, 0.0) / static_cast<double>(w);
      const double before =
          std::accumulate(end - static_cast<long>(2 * w), end - static_cast<long>(w), 0.0) / static_cast<double>(w);
      if (std::abs(recent - before) <= cfg_.stagnation_tolerance * std::abs(before)) done = true;
    }
  }
  if (done) {
    phase1_ = false;
    switched_at_ = next;
  }
}

json to_json(const EpisodeReport& r) {
  return json{{"episode", r.episode},
              {"return", r.episode_return},
              {"cost", r.cost},
              {"feasible", r.feasible},
              {"steps", r.steps},
              {"phase", r.phase},
              {"epsilon", r.epsilon},
              {"llm_calls", r.llm_calls},
              {"llm_accept_rate", r.llm_accept_rate},
              {"llm_actions", r.llm_actions}};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> violation_notes(const Verdict& v) {
  std::vector<std::string> notes;
  for (const auto& x : v.violations) {
    std::ostringstream s;
    switch (x.kind) {
      case ViolationKind::WindowMissed: s << "window missed at node " << x.node; break;
      case ViolationKind::BrokenEdgeUsed:
        s << "broken edge " << x.edge_from << "-" << x.edge_to; break;
      case ViolationKind::UnservedCustomer: s << "customer " << x.node << " unserved"; break;
      case ViolationKind::CapacityExceeded: s << "capacity exceeded on route " << x.route; break;
      default: s << "violation on route " << x.route; break;
    }
    notes.push_back(s.str());
  }
  return notes;
}

}  // namespace

TrainResult train(const Instance& inst, const TrainConfig& cfg_in, AdvisorBackend* backend,
                  const TrainHooks& hooks) {
  cfg_in.validate();
  TrainConfig cfg = cfg_in;
  cfg.env.reward.shaping = cfg.switches.reward_shaping;

  const Env env(inst, cfg.env);
  const FeatureEncoder enc(inst);
  NetShape shape{enc.size(), enc.action_count(), cfg.trunk, cfg.head_hidden, cfg.switches.dueling};
  Learner learner(shape, cfg, cfg.seed);
  PhaseController phase(cfg);
  GuidanceCache cache(cfg.guidance_steps);
  AdviseConfig advise_cfg;
  advise_cfg.max_rounds = cfg.max_rounds;
  advise_cfg.use_memory = cfg.switches.llm_memory;
  advise_cfg.memory_top_k = cfg.pool_top_k;

  TrainResult result;
  result.pool = MemoryPool(cfg.pool_capacity);
  const bool advisor_on = cfg.use_advisor && backend != nullptr;
  const int horizon = cfg.resolved_horizon(inst);
  const CostWeights& weights = cfg.env.reward.weights;
  long steps_total = 0;

  auto log = [&](const std::string& msg) {
    if (hooks.on_log) hooks.on_log(msg);
  };

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double eps = epsilon_at(cfg, ep);
    const double beta =
        cfg.episodes > 1 ? cfg.beta_start + (cfg.beta_end - cfg.beta_start) * ep / (cfg.episodes - 1)
                         : cfg.beta_end;
    const bool phase1 = advisor_on && phase.in_phase1();

    EpisodeReport rep;
    rep.episode = ep;
    rep.phase = phase.in_phase1() ? 1 : 2;
    rep.epsilon = eps;
    int accepted_queries = 0;
    int cooldown = 0;
    cache.clear();

    Trace trace;
    EnvState s = env.reset();
    std::vector<int> legal = env.action_space(s);
    for (int t = 0; t < horizon && !legal.empty(); ++t) {
      std::vector<int> guidance;
      bool guided = false;
      if (phase1) {
        if (cooldown > 0) --cooldown;
        if ((s.position == 0 || cache.exhausted()) && cooldown == 0) {
          try {
            const CandidateSet cs = advise(s, env, *backend, result.pool, advise_cfg);
            ++rep.llm_calls;
            result.backend_calls += cs.rounds;
            if (!cs.accepted.empty()) {
              ++accepted_queries;
              cache.load(cs.accepted);
            } else {
              cache.clear();
              cooldown = cfg.guidance_steps;
            }
          } catch (const BackendUnavailable& e) {
            ++result.backend_failures;
            cache.clear();
            cooldown = cfg.guidance_steps;
            log(std::string("advisor unavailable, continuing without guidance: ") + e.what());
          }
        }
        guidance = cache.actions();
        guided = !guidance.empty();
      }

      const Eigen::VectorXd x = enc.encode(s);
      const ActionChoice choice =
          select_action(learner.online(), x, legal, guided ? &guidance : nullptr, eps, learner.rng());
      const StepOutcome out = env.step(s, choice.action);
      if (phase1) cache.advance(choice.action);

      const std::vector<int> next_legal = out.done ? std::vector<int>{} : env.action_space(out.next);
      Transition tr;
      tr.state = x;
      tr.state_mask = enc.mask(legal);
      tr.action = choice.action;
      tr.reward = out.reward * cfg.reward_scale;
      tr.next_state = enc.encode(out.next);
      tr.next_mask = enc.mask(next_legal);
      tr.done = out.done;
      tr.llm = phase1 && choice.constrained;
      if (tr.llm) {
        ++rep.llm_actions;
        ++result.llm_flagged_stored;
      }
      learner.remember(std::move(tr));

      rep.episode_return += out.reward;
      trace.push_back({s, choice.action, out});
      ++steps_total;
      if (learner.ready() && steps_total % cfg.update_period == 0) learner.update(beta);

      s = out.next;
      legal = next_legal;
      if (out.done) break;
    }

    rep.steps = static_cast<int>(trace.size());
    const RoutePlan plan = extract_plan(trace);
    const Verdict verdict = evaluate(inst, plan, cfg.env.clock);
    rep.cost = verdict.cost(weights);
    rep.feasible = verdict.feasible;
    rep.llm_accept_rate = rep.llm_calls > 0 ? static_cast<double>(accepted_queries) / rep.llm_calls : 0.0;

    if (rep.feasible && (!result.best_plan || rep.cost < result.best_cost)) {
      result.best_plan = plan;
      result.best_cost = rep.cost;
      result.best_episode = ep;
    }
    if (advisor_on && cfg.switches.llm_memory)
      result.pool.update(action_sequence(trace), rep.episode_return, violation_notes(verdict));

    const bool was_phase1 = phase.in_phase1();
    phase.record(ep, rep.episode_return);
    if (was_phase1 && !phase.in_phase1())
      log("phase 2 from episode " + std::to_string(phase.switched_at()));

    result.reports.push_back(rep);
    if (hooks.on_episode) hooks.on_episode(rep);
    if (cfg.checkpoint_every > 0 && (ep + 1) % cfg.checkpoint_every == 0 && hooks.on_checkpoint)
      hooks.on_checkpoint(ep + 1, learner.online());
  }

  result.phase_switch = phase.switched_at();
  result.final_net = learner.online();
  return result;
}

// ---------------------------------------------------------------------------

PolicyEvaluation evaluate_policy(const Instance& inst, const Policy& policy, int episodes,
                                 const EnvConfig& env_cfg, int horizon) {
  const Env env(inst, env_cfg);
  const int h = horizon > 0 ? horizon : 4 * std::max(1, inst.customer_count());
  PolicyEvaluation ev;
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Trace trace;
    EnvState s = env.reset();
    for (int t = 0; t < h; ++t) {
      const auto legal = env.action_space(s);
      if (legal.empty()) break;
      const int a = policy(s, legal);
      const StepOutcome out = env.step(s, a);
      trace.push_back({s, a, out});
      s = out.next;
      if (out.done) break;
    }
    ev.last_plan = extract_plan(trace);
    const Verdict v = evaluate(inst, ev.last_plan, env_cfg.clock);
    total += v.cost(env_cfg.reward.weights);
    if (v.feasible) ++ev.feasible;
    ++ev.episodes;
  }
  if (ev.episodes > 0) {
    ev.mean_cost = total / ev.episodes;
    ev.satisfaction_rate = static_cast<double>(ev.feasible) / ev.episodes;
  }
  return ev;
}

PolicyEvaluation evaluate_policy(const Instance& inst, const QNet& net, int episodes,
                                 const EnvConfig& env_cfg, int horizon) {
  const FeatureEncoder enc(inst);
  if (net.shape().inputs != enc.size() || net.shape().actions != enc.action_count())
    throw NetError(NetError::Kind::ShapeMismatch, "network shape does not fit the instance");
  Policy greedy = [&](const EnvState& s, const std::vector<int>& legal) {
    return masked_argmax(net.forward(enc.encode(s), enc.mask(legal)));
  };
  return evaluate_policy(inst, greedy, episodes, env_cfg, horizon);
}

PolicyEvaluation evaluate_policy(const Instance& inst, const std::string& checkpoint_text,
                                 int episodes, const EnvConfig& env_cfg, int horizon) {
  const QNet net = checkpoint_from_text(checkpoint_text);
  return evaluate_policy(inst, net, episodes, env_cfg, horizon);
}

Policy scripted_policy(const RoutePlan& plan) {
  std::vector<int> seq;
  for (const auto& r : plan.routes) {
    if (r.empty()) continue;
    seq.insert(seq.end(), r.begin(), r.end());
    seq.push_back(0);
  }
  auto cursor = std::make_shared<size_t>(0);
  return [seq, cursor](const EnvState& s, const std::vector<int>& legal) {
    // a fresh episode starts over
    if (s.position == 0 && s.routes_used == 1 &&
        std::all_of(s.pending.begin(), s.pending.end(), [](bool b) { return b; }))
      *cursor = 0;
    const int a = *cursor < seq.size() ? seq[*cursor] : legal.front();
    ++*cursor;
    return a;
  };
}

}  // namespace lqvrp
