#include "lqvrp/advisor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace lqvrp {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string list_text(const std::vector<int>& xs) {
  std::string out = "[";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out + "]";
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Memory pool

void MemoryPool::update(const Trajectory& trajectory, double episode_return,
                        std::vector<std::string> notes) {
  if (trajectory.empty() || capacity_ == 0) return;
  if (std::any_of(trajectory.begin(), trajectory.end(), [](int x) { return x < 0; })) return;
  auto dup = std::find_if(entries_.begin(), entries_.end(),
                          [&](const MemoryEntry& e) { return e.trajectory == trajectory; });
  if (dup != entries_.end()) {
    if (episode_return <= dup->episode_return) return;
    entries_.erase(dup);
  }
  entries_.push_back({trajectory, episode_return, std::move(notes), counter_++});
  std::stable_sort(entries_.begin(), entries_.end(), [](const MemoryEntry& a, const MemoryEntry& b) {
    if (a.episode_return != b.episode_return) return a.episode_return > b.episode_return;
    return a.inserted < b.inserted;
  });
  if (entries_.size() > capacity_) entries_.resize(capacity_);
}

std::vector<MemoryEntry> MemoryPool::top(size_t k) const {
  return {entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(std::min(k, entries_.size()))};
}

// ---------------------------------------------------------------------------
// Prompt

std::string build_prompt(const EnvState& state, const Instance& inst, const MemoryPool* pool,
                         const std::vector<std::string>& errors, size_t memory_top_k) {
  const auto w = CostWeights::freight();
  std::ostringstream p;
  p << "You are an expert solver for the capacitated vehicle routing problem with time windows "
       "and road closures. A single vehicle with capacity "
    << num(inst.capacity()) << " starts at depot 0 and may drive at most " << inst.max_routes()
    << " consecutive routes.\n";
  p << "Goal: serve every pending customer exactly once while minimising " << num(w.distance_weight)
    << " x travelled distance + " << num(w.dispatch_weight) << " x number of depot departures.\n";
  p << "Rules: the load of a route must not exceed the capacity; a customer must be reached no "
       "later than the end of its time window (arriving early means waiting); a road can no longer "
       "be entered once its closing time has passed; travel time equals Euclidean distance.\n\n";

  std::vector<int> pending;
  for (int i = 1; i <= inst.customer_count(); ++i)
    if (state.is_pending(i)) pending.push_back(i);

  p << "[state]\n";
  p << "position: " << state.position << "\n";
  p << "clock: " << num(state.clock) << "\n";
  p << "remaining_capacity: " << num(state.remaining_capacity) << "\n";
  p << "routes_used: " << state.routes_used << " of " << inst.max_routes() << "\n";
  p << "pending_customers: " << list_text(pending) << "\n\n";

  p << "[nodes]\n";
  for (const auto& n : inst.nodes()) {
    if (n.id == 0) {
      p << "node 0 depot x=" << num(n.x) << " y=" << num(n.y) << "\n";
      continue;
    }
    p << "node " << n.id << " x=" << num(n.x) << " y=" << num(n.y) << " demand=" << num(n.demand)
      << " window=[" << num(n.window.open) << ", " << num(n.window.close) << "] "
      << (state.is_pending(n.id) ? "pending" : "served") << "\n";
  }

  std::vector<int> relevant = pending;
  relevant.push_back(0);
  if (state.position != 0) relevant.push_back(state.position);
  std::sort(relevant.begin(), relevant.end());
  std::ostringstream roads;
  for (size_t a = 0; a < relevant.size(); ++a) {
    for (size_t b = a + 1; b < relevant.size(); ++b) {
      const auto& e = inst.edge(relevant[a], relevant[b]);
      if (!e.breaks()) continue;
      roads << "edge " << relevant[a] << "-" << relevant[b] << " closes_at=" << num(e.break_time)
            << (e.break_time <= state.clock ? " (closed)" : "") << "\n";
    }
  }
  if (!roads.str().empty()) p << "\n[road_closures]\n" << roads.str();

  if (pool && !pool->empty()) {
    p << "\n[memory]\n";
    int rank = 1;
    for (const auto& e : pool->top(memory_top_k)) {
      p << rank++ << ". return=" << num(e.episode_return) << " trajectory=" << list_text(e.trajectory);
      if (!e.notes.empty()) {
        p << " issues:";
        for (const auto& n : e.notes) p << " " << n << ";";
      }
      p << "\n";
    }
  }

  if (!errors.empty()) {
    p << "\n[previous_errors]\n";
    for (const auto& e : errors) p << "- " << e << "\n";
  }

  p << "\n[instructions]\n";
  p << "Think step by step: check remaining capacity, the time each candidate customer would be "
       "reached, and which roads will be closed by then; reuse good trajectories from memory and "
       "avoid the previous errors.\n";
  p << "Then output exactly " << kCandidatesRequested
    << " candidate trajectories as one list of lists of node ids, each listing the nodes to visit "
       "from the current position in order, using 0 for a return to the depot, e.g. "
       "[[2,1,0,3,0],[1,2,0,3,0],[3,0,1,2,0]]. Output in list format.\n";
  return p.str();
}

// ---------------------------------------------------------------------------
// Reply parsing

std::variant<std::vector<Trajectory>, SyntaxError> parse_reply(const std::string& raw) {
  static const std::regex well_formed(
      R"(^\[\s*(\[\s*(-?\d+(\s*,\s*-?\d+)*)?\s*\](\s*,\s*\[\s*(-?\d+(\s*,\s*-?\d+)*)?\s*\])*)?\s*\]$)");
  static const std::regex integer(R"(-?\d+)");

  std::optional<std::string> first_problem;
  for (size_t start = 0; start < raw.size(); ++start) {
    if (raw[start] != '[') continue;
    const size_t inner = raw.find_first_not_of(" \t\r\n", start + 1);
    if (inner == std::string::npos || raw[inner] != '[') continue;
    int depth = 0;
    size_t end = start;
    for (; end < raw.size(); ++end) {
      if (raw[end] == '[') ++depth;
      if (raw[end] == ']' && --depth == 0) break;
    }
    if (end >= raw.size()) {
      if (!first_problem) first_problem = "unbalanced brackets in candidate list";
      break;
    }
    const std::string block = raw.substr(start, end - start + 1);
    if (std::regex_match(block, well_formed)) {
      std::vector<Trajectory> out;
      Trajectory current;
      for (size_t i = 1; i + 1 < block.size(); ++i) {
        if (block[i] == '[') current.clear();
        else if (block[i] == ']') out.push_back(current);
        else if (block[i] == '-' || std::isdigit(static_cast<unsigned char>(block[i]))) {
          size_t j = i + 1;
          while (j < block.size() && std::isdigit(static_cast<unsigned char>(block[j]))) ++j;
          current.push_back(std::stoi(block.substr(i, j - i)));
          i = j - 1;
        }
      }
      return out;
    }
    if (!first_problem) {
      std::string tokens = block;
      for (char& c : tokens)
        if (c == '[' || c == ']' || c == ',') c = ' ';
      std::istringstream in(tokens);
      for (std::string tok; in >> tok;) {
        if (!std::regex_match(tok, integer)) {
          first_problem = "non-integer token '" + tok + "' in candidate list";
          break;
        }
      }
      if (!first_problem) first_problem = "candidate list must be a flat list of integer lists";
    }
    start = end;
  }
  return SyntaxError{
      "Syntax error: " +
      first_problem.value_or("reply contains no bracketed list of node-id lists") +
      ". Reply with a list of lists of integers such as [[1,2,0],[2,1,0]]."};
}

// ---------------------------------------------------------------------------
// Filters

std::optional<std::string> semantic_check(const Trajectory& traj, const EnvState& state,
                                          const Instance& inst) {
  if (traj.empty()) return "Semantic error: empty trajectory";
  std::set<int> seen;
  for (size_t k = 0; k < traj.size(); ++k) {
    const int node = traj[k];
    if (node < 0 || node >= inst.size())
      return "Semantic error: node " + std::to_string(node) + " at position " + std::to_string(k) +
             " does not exist (valid ids are 0.." + std::to_string(inst.size() - 1) + ")";
    if (node == 0) continue;
    if (!state.is_pending(node))
      return "Semantic error: customer " + std::to_string(node) + " has already been served";
    if (!seen.insert(node).second)
      return "Semantic error: customer " + std::to_string(node) + " is visited twice";
  }
  return std::nullopt;
}

const char* to_string(PhysicalFault f) {
  switch (f) {
    case PhysicalFault::CapacityExceeded: return "CapacityExceeded";
    case PhysicalFault::WindowMissed: return "WindowMissed";
    case PhysicalFault::BrokenEdgeUsed: return "BrokenEdgeUsed";
    case PhysicalFault::ImpassableEdgeUsed: return "ImpassableEdgeUsed";
    case PhysicalFault::RouteLimitExceeded: return "RouteLimitExceeded";
    case PhysicalFault::IllegalMove: return "IllegalMove";
    case PhysicalFault::Deadlock: return "Deadlock";
  }
  return "?";
}

std::optional<PhysicalError> physical_check(const Trajectory& traj, const EnvState& state,
                                            const Env& env) {
  const auto& inst = env.instance();
  EnvState s = state;
  for (size_t k = 0; k < traj.size(); ++k) {
    const int to = traj[k];
    const int from = s.position;
    const std::string leg = "leg " + std::to_string(k) + " (" + std::to_string(from) + "->" +
                            std::to_string(to) + ")";
    auto fail = [&](PhysicalFault f, const std::string& what) {
      return PhysicalError{f, static_cast<int>(k),
                           std::string("Physical error: ") + to_string(f) + " at " + leg + ": " + what};
    };
    if (env.is_terminal_success(s)) return fail(PhysicalFault::IllegalMove, "all customers already served");
    if (to == from) return fail(PhysicalFault::IllegalMove, "vehicle is already at node " + std::to_string(to));
    if (from == 0 && s.routes_used > inst.max_routes())
      return fail(PhysicalFault::RouteLimitExceeded,
                  "all " + std::to_string(inst.max_routes()) + " routes are used");
    const double arrive = s.clock + inst.travel_time(from, to);
    const auto& e = inst.edge(from, to);
    if (e.broken_at(arrive))
      return fail(e.passable() ? PhysicalFault::BrokenEdgeUsed : PhysicalFault::ImpassableEdgeUsed,
                  "path reachability: road closes at " + num(e.break_time) + " but arrival is " + num(arrive));
    if (to != 0) {
      const auto& n = inst.node(to);
      if (n.demand > s.remaining_capacity)
        return fail(PhysicalFault::CapacityExceeded, "demand " + num(n.demand) +
                                                         " exceeds remaining capacity " +
                                                         num(s.remaining_capacity));
      if (arrive > n.window.close)
        return fail(PhysicalFault::WindowMissed, "arrival " + num(arrive) + " after window close " +
                                                     num(n.window.close));
    }
    const auto legal = env.action_space(s);
    if (!std::binary_search(legal.begin(), legal.end(), to))
      return fail(PhysicalFault::IllegalMove, "move not permitted from the current state");
    const auto out = env.step(s, to);
    if (out.info.deadlock)
      return fail(PhysicalFault::Deadlock, "no feasible continuation after this move");
    if (out.info.flagged())
      return fail(PhysicalFault::IllegalMove, "move triggers a constraint penalty");
    s = out.next;
  }
  return std::nullopt;
}

const char* to_string(FilterLayer layer) {
  switch (layer) {
    case FilterLayer::Syntax: return "Syntax";
    case FilterLayer::Semantic: return "Semantic";
    case FilterLayer::Physical: return "Physical";
    case FilterLayer::Accepted: return "Accepted";
  }
  return "?";
}

CandidateSet advise(const EnvState& state, const Env& env, AdvisorBackend& backend,
                    const MemoryPool& pool, const AdviseConfig& cfg) {
  CandidateSet out;
  std::vector<std::string> errors;
  const int rounds = std::max(1, cfg.max_rounds);
  for (int round = 1; round <= rounds; ++round) {
    out.rounds = round;
    const std::string prompt = build_prompt(state, env.instance(), cfg.use_memory ? &pool : nullptr,
                                            errors, cfg.memory_top_k);
    out.prompts.push_back(prompt);
    const std::string reply = backend.complete(prompt, cfg.decode);
    out.raw_replies.push_back(reply);

    auto parsed = parse_reply(reply);
    if (auto* err = std::get_if<SyntaxError>(&parsed)) {
      out.verdicts.push_back({round, -1, FilterLayer::Syntax, err->message});
      errors.push_back("round " + std::to_string(round) + ": " + err->message);
      continue;
    }
    auto& candidates = std::get<std::vector<Trajectory>>(parsed);
    if (candidates.size() > static_cast<size_t>(kCandidatesRequested))
      candidates.resize(kCandidatesRequested);
    for (size_t c = 0; c < candidates.size(); ++c) {
      const auto& traj = candidates[c];
      out.parsed.push_back(traj);
      const int idx = static_cast<int>(c);
      if (auto why = semantic_check(traj, state, env.instance())) {
        out.verdicts.push_back({round, idx, FilterLayer::Semantic, *why});
        errors.push_back("round " + std::to_string(round) + " candidate " + std::to_string(c + 1) +
                         " " + list_text(traj) + ": " + *why);
        continue;
      }
      if (auto bad = physical_check(traj, state, env)) {
        out.verdicts.push_back({round, idx, FilterLayer::Physical, bad->message});
        errors.push_back("round " + std::to_string(round) + " candidate " + std::to_string(c + 1) +
                         " " + list_text(traj) + ": " + bad->message);
        continue;
      }
      out.verdicts.push_back({round, idx, FilterLayer::Accepted, ""});
      out.accepted.push_back(traj);
    }
    if (!out.accepted.empty()) break;
  }
  std::set<int> firsts;
  for (const auto& t : out.accepted) firsts.insert(t.front());
  out.action_set.assign(firsts.begin(), firsts.end());
  return out;
}

// ---------------------------------------------------------------------------
// Guidance cache

void GuidanceCache::load(const std::vector<Trajectory>& accepted) {
  live_.clear();
  steps_ = 0;
  for (const auto& t : accepted)
    if (!t.empty()) live_.push_back({t, 0});
}

void GuidanceCache::clear() {
  live_.clear();
  steps_ = 0;
}

std::vector<int> GuidanceCache::actions() const {
  std::set<int> out;
  for (const auto& c : live_)
    if (c.next < c.traj.size()) out.insert(c.traj[c.next]);
  return {out.begin(), out.end()};
}

void GuidanceCache::advance(int action) {
  ++steps_;
  std::erase_if(live_, [&](const Cursor& c) { return c.next >= c.traj.size() || c.traj[c.next] != action; });
  for (auto& c : live_) ++c.next;
}

bool GuidanceCache::exhausted() const {
  if (steps_ >= max_steps_) return true;
  return std::none_of(live_.begin(), live_.end(), [](const Cursor& c) { return c.next < c.traj.size(); });
}

// ---------------------------------------------------------------------------
// Mock backend

namespace {

struct PromptView {
  int position = 0;
  double clock = 0.0;
  double remaining = 0.0;
  double capacity = 0.0;
  int routes_used = 1;
  int max_routes = 1;
  struct Site {
    double x = 0.0, y = 0.0, demand = 0.0, open = 0.0, close = kNever;
    bool pending = false;
  };
  std::vector<Site> sites;
  std::map<std::pair<int, int>, double> closes;
  std::vector<Trajectory> memory;

  double dist(int a, int b) const {
    return std::hypot(sites[static_cast<size_t>(a)].x - sites[static_cast<size_t>(b)].x,
                      sites[static_cast<size_t>(a)].y - sites[static_cast<size_t>(b)].y);
  }
  double closes_at(int a, int b) const {
    auto it = closes.find({std::min(a, b), std::max(a, b)});
    return it == closes.end() ? kNever : it->second;
  }
};

Trajectory parse_int_list(const std::string& body) {
  Trajectory out;
  std::string s = body;
  for (char& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  for (int v; in >> v;) out.push_back(v);
  return out;
}

PromptView read_prompt(const std::string& prompt) {
  static const std::regex capacity_re(R"(vehicle with capacity (\S+) )");
  static const std::regex position_re(R"(^position: (\d+))");
  static const std::regex clock_re(R"(^clock: (\S+))");
  static const std::regex remaining_re(R"(^remaining_capacity: (\S+))");
  static const std::regex routes_re(R"(^routes_used: (\d+) of (\d+))");
  static const std::regex depot_re(R"(^node 0 depot x=(\S+) y=(\S+))");
  static const std::regex node_re(
      R"(^node (\d+) x=(\S+) y=(\S+) demand=(\S+) window=\[(\S+), (\S+)\] (pending|served))");
  static const std::regex edge_re(R"(^edge (\d+)-(\d+) closes_at=(\S+))");
  static const std::regex memory_re(R"(^\d+\. return=\S+ trajectory=\[([^\]]*)\])");

  PromptView v;
  std::smatch m;
  if (std::regex_search(prompt, m, capacity_re)) v.capacity = std::stod(m[1]);
  std::istringstream in(prompt);
  for (std::string line; std::getline(in, line);) {
    if (std::regex_search(line, m, position_re)) v.position = std::stoi(m[1]);
    else if (std::regex_search(line, m, clock_re)) v.clock = std::stod(m[1]);
    else if (std::regex_search(line, m, remaining_re)) v.remaining = std::stod(m[1]);
    else if (std::regex_search(line, m, routes_re)) {
      v.routes_used = std::stoi(m[1]);
      v.max_routes = std::stoi(m[2]);
    } else if (std::regex_search(line, m, depot_re)) {
      if (v.sites.empty()) v.sites.resize(1);
      v.sites[0].x = std::stod(m[1]);
      v.sites[0].y = std::stod(m[2]);
    } else if (std::regex_search(line, m, node_re)) {
      const auto id = static_cast<size_t>(std::stoi(m[1]));
      if (v.sites.size() <= id) v.sites.resize(id + 1);
      auto& s = v.sites[id];
      s.x = std::stod(m[2]);
      s.y = std::stod(m[3]);
      s.demand = std::stod(m[4]);
      s.open = std::stod(m[5]);
      s.close = std::stod(m[6]);
      s.pending = m[7] == "pending";
    } else if (std::regex_search(line, m, edge_re)) {
      v.closes[{std::stoi(m[1]), std::stoi(m[2])}] = std::stod(m[3]);
    } else if (std::regex_search(line, m, memory_re)) {
      v.memory.push_back(parse_int_list(m[1]));
    }
  }
  if (v.sites.empty()) v.sites.resize(1);
  return v;
}

// Greedy construction from the prompt's state. Each step picks the pending
// customer with the lowest score w_dist * (distance + waiting) + w_slack * slack,
// both normalised, plus a random handicap of size `noise`. Moves that would
// miss a window, overload the vehicle or cross a closed road are skipped.
// An early return to the depot competes with the customers at score
// w_dist * distance + return_bias.
Trajectory construct(const PromptView& v, double w_dist, double w_slack, double noise,
                     double return_bias, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double scale = 0.0, horizon = 1.0;
  for (size_t i = 1; i < v.sites.size(); ++i) {
    scale += v.dist(0, static_cast<int>(i));
    if (v.sites[i].close != kNever) horizon = std::max(horizon, v.sites[i].close);
  }
  scale = v.sites.size() > 1 ? scale / static_cast<double>(v.sites.size() - 1) : 1.0;
  if (scale <= 0.0) scale = 1.0;

  std::vector<bool> pending(v.sites.size(), false);
  int left = 0;
  for (size_t i = 1; i < v.sites.size(); ++i)
    if (v.sites[i].pending) pending[i] = true, ++left;
  int at = v.position;
  double clock = v.clock, cap = v.remaining;
  int routes = v.routes_used;
  Trajectory out;
  while (left > 0) {
    int best = -1;
    double best_score = kNever;
    for (size_t j = 1; j < v.sites.size(); ++j) {
      if (!pending[j]) continue;
      const auto& s = v.sites[j];
      const int jj = static_cast<int>(j);
      const double arrive = clock + v.dist(at, jj);
      if (s.demand > cap || arrive > s.close || arrive >= v.closes_at(at, jj)) continue;
      const double slack = s.close == kNever ? horizon : s.close - std::max(arrive, s.open);
      const double wait = std::max(0.0, s.open - arrive);
      const double score = w_dist * (v.dist(at, jj) + wait) / scale + w_slack * slack / horizon +
                           (noise > 0.0 ? noise * unit(rng) : 0.0);
      if (score < best_score) best_score = score, best = jj;
    }
    bool home = best < 0;
    if (!home && at != 0 && return_bias != kNever && routes + 1 <= v.max_routes) {
      if (w_dist * v.dist(at, 0) / scale + return_bias < best_score &&
          clock + v.dist(at, 0) < v.closes_at(at, 0))
        home = true;
    }
    if (home) {
      if (at == 0) break;
      const double back = clock + v.dist(at, 0);
      if (back >= v.closes_at(at, 0) || routes + 1 > v.max_routes) break;
      out.push_back(0);
      clock = back;
      at = 0;
      cap = v.capacity;
      ++routes;
      continue;
    }
    out.push_back(best);
    const auto& s = v.sites[static_cast<size_t>(best)];
    clock = std::max(clock + v.dist(at, best), s.open);
    cap -= s.demand;
    pending[static_cast<size_t>(best)] = false;
    --left;
    at = best;
  }
  if (at != 0 && left == 0 && clock + v.dist(at, 0) < v.closes_at(at, 0)) out.push_back(0);
  return out;
}

// (customers left unserved, travel cost) of following `t` from the prompt
// state; legs the construction rules forbid count as unserved.
std::pair<int, double> judge(const PromptView& v, const Trajectory& t) {
  std::vector<bool> pending(v.sites.size(), false);
  int left = 0;
  for (size_t i = 1; i < v.sites.size(); ++i)
    if (v.sites[i].pending) pending[i] = true, ++left;
  int at = v.position;
  double clock = v.clock, cap = v.remaining, cost = 0.0;
  for (int node : t) {
    if (node < 0 || static_cast<size_t>(node) >= v.sites.size()) break;
    const double arrive = clock + v.dist(at, node);
    if (arrive >= v.closes_at(at, node)) break;
    cost += 4.5 * v.dist(at, node);
    if (node == 0) {
      if (at == 0) break;
      cap = v.capacity;
      clock = arrive;
    } else {
      const auto& s = v.sites[static_cast<size_t>(node)];
      if (!pending[static_cast<size_t>(node)] || s.demand > cap || arrive > s.close) break;
      if (at == 0) cost += 65.0;
      pending[static_cast<size_t>(node)] = false;
      --left;
      cap -= s.demand;
      clock = std::max(arrive, s.open);
    }
    at = node;
  }
  return {left, cost};
}

Trajectory from_memory(const PromptView& v, const Trajectory& remembered) {
  Trajectory out;
  for (int node : remembered) {
    if (node < 0 || static_cast<size_t>(node) >= v.sites.size()) continue;
    if (node != 0 && !v.sites[static_cast<size_t>(node)].pending) continue;
    if (node == 0 && (out.empty() ? v.position == 0 : out.back() == 0)) continue;
    out.push_back(node);
  }
  return out;
}

std::string render(const std::vector<Trajectory>& cands) {
  std::string out = "[";
  for (size_t i = 0; i < cands.size(); ++i) {
    if (i) out += ",";
    out += list_text(cands[i]);
  }
  return out + "]";
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, FaultMode fault, double noise)
    : seed_(seed), fault_(fault), noise_(noise) {}

std::string MockBackend::complete(const std::string& prompt, const DecodeParams&) {
  ++calls_;
  std::mt19937_64 rng(seed_ ^ fnv1a(prompt));
  if (fault_ == FaultMode::SyntaxGarbage)
    return "The vehicle should go 1 -> 3 -> 2 and then return to the depot.";

  const PromptView v = read_prompt(prompt);
  std::vector<Trajectory> cands;
  auto add = [&](Trajectory t) {
    if (t.empty() || std::find(cands.begin(), cands.end(), t) != cands.end()) return;
    cands.push_back(std::move(t));
  };
  // Sample a pool of constructions (and the best remembered trajectory), keep
  // the ones that serve the most customers at the lowest travel cost.
  std::vector<Trajectory> pool;
  if (!v.memory.empty()) pool.push_back(from_memory(v, v.memory.front()));
  pool.push_back(construct(v, 1.0, 0.0, 0.0, kNever, rng));
  pool.push_back(construct(v, 1.0, 1.0, 0.0, kNever, rng));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 32; ++i) {
    const double wd = unit(rng), ws = 2.0 * unit(rng), back = 2.0 * unit(rng);
    pool.push_back(construct(v, wd, ws, noise_, back, rng));
  }
  std::vector<std::pair<std::pair<int, double>, size_t>> ranked;
  for (size_t i = 0; i < pool.size(); ++i) ranked.push_back({judge(v, pool[i]), i});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  // only the constructions that leave the fewest customers behind
  for (const auto& r : ranked)
    if (r.first.first == ranked.front().first.first) add(pool[r.second]);
  if (cands.empty()) {
    // nothing fits: still answer, the filters will explain why
    if (v.position != 0) {
      cands.push_back({0});
    } else {
      int latest = -1;
      for (size_t i = 1; i < v.sites.size(); ++i)
        if (v.sites[i].pending && (latest < 0 || v.sites[i].close > v.sites[static_cast<size_t>(latest)].close))
          latest = static_cast<int>(i);
      if (latest > 0) cands.push_back({latest});
    }
  }
  if (cands.size() > static_cast<size_t>(kCandidatesRequested)) cands.resize(kCandidatesRequested);

  const int n_nodes = static_cast<int>(v.sites.size());
  if (fault_ == FaultMode::HallucinatedNode) {
    if (cands.empty()) cands.push_back({});
    for (size_t i = 0; i < cands.size(); ++i)
      cands[i].insert(cands[i].begin(), n_nodes + static_cast<int>(i) + 3);
  } else if (fault_ == FaultMode::InfeasibleLeg) {
    std::vector<int> pending;
    double demand = 0.0;
    for (int i = 1; i < n_nodes; ++i)
      if (v.sites[static_cast<size_t>(i)].pending) pending.push_back(i), demand += v.sites[static_cast<size_t>(i)].demand;
    const double room = v.position == 0 ? v.capacity : v.remaining;
    cands.clear();
    for (int c = 0; c < kCandidatesRequested; ++c) {
      Trajectory t;
      if (demand > room && !pending.empty()) {
        t = pending;
        std::rotate(t.begin(), t.begin() + (c % static_cast<int>(t.size())), t.end());
      } else {
        // A depot-to-depot leg is never a legal move.
        if (v.position != 0) t.push_back(0);
        t.push_back(0);
        if (!pending.empty()) t.push_back(pending[static_cast<size_t>(c) % pending.size()]);
      }
      cands.push_back(t);
    }
  }

  std::ostringstream reply;
  reply << "Reasoning: at node " << v.position << " with remaining capacity " << num(v.remaining)
        << " at time " << num(v.clock) << ", pick the nearest customer that still fits, is reachable "
        << "before its window closes and whose road is open; return to the depot when none fits.\n";
  reply << "Answer: " << render(cands) << "\n";
  return reply.str();
}

}  // namespace lqvrp
