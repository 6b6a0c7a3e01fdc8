#include "lqvrp/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lqvrp {

using nlohmann::json;

InstanceError::InstanceError(Kind kind, std::string message, int position)
    : std::runtime_error(position >= 0 ? message + " (at " + std::to_string(position) + ")"
                                       : message),
      kind_(kind),
      position_(position) {}

double euclidean(const Node& a, const Node& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Instance::Instance(std::string name, std::vector<Node> nodes, double capacity, int max_routes,
                   std::uint64_t rng_seed)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      capacity_(capacity),
      max_routes_(max_routes),
      rng_seed_(rng_seed) {
  if (nodes_.empty()) throw InstanceError(InstanceError::Kind::InvalidConfig, "instance has no depot");
  for (size_t i = 0; i < nodes_.size(); ++i) nodes_[i].id = static_cast<int>(i);
  build_edges();
}

void Instance::build_edges() {
  const size_t n = nodes_.size();
  edges_.assign(n * n, EdgeSpec{});
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      auto& e = edges_[i * n + j];
      e.from = static_cast<int>(i);
      e.to = static_cast<int>(j);
      e.cost = euclidean(nodes_[i], nodes_[j]);
      e.travel_time = e.cost;
    }
  }
}

double Instance::total_demand() const {
  double total = 0.0;
  for (const auto& n : nodes_) total += n.demand;
  return total;
}

bool Instance::capacity_feasible() const {
  if (total_demand() > capacity_ * max_routes_) return false;
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [&](const Node& n) { return n.demand <= capacity_; });
}

double Instance::horizon() const {
  const int n = size();
  std::vector<bool> seen(static_cast<size_t>(n), false);
  int at = 0;
  double tour = 0.0;
  for (int step = 1; step < n; ++step) {
    int best = -1;
    for (int j = 1; j < n; ++j) {
      if (seen[static_cast<size_t>(j)]) continue;
      if (best < 0 || cost(at, j) < cost(at, best)) best = j;
    }
    seen[static_cast<size_t>(best)] = true;
    tour += cost(at, best);
    at = best;
  }
  tour += cost(at, 0);
  return 2.0 * tour;
}

void Instance::set_window(int i, TimeWindow w) { nodes_.at(static_cast<size_t>(i)).window = w; }

void Instance::set_break(int i, int j, double t) {
  const size_t n = nodes_.size();
  edges_.at(static_cast<size_t>(i) * n + static_cast<size_t>(j)).break_time = t;
  edges_.at(static_cast<size_t>(j) * n + static_cast<size_t>(i)).break_time = t;
}

int Instance::broken_edge_count() const {
  int count = 0;
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j)
      if (edge(i, j).breaks()) ++count;
  return count;
}

// ---------------------------------------------------------------------------
// TSPLIB parsing

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

template <typename T>
T parse_number(const std::string& tok, int line_no) {
  T value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw InstanceError(InstanceError::Kind::MalformedLine, "bad number '" + tok + "'", line_no);
  return value;
}

std::optional<int> routes_hint(const std::map<std::string, std::string>& header) {
  if (auto it = header.find("VEHICLES"); it != header.end()) return std::stoi(it->second);
  static const std::regex name_k(R"(-k(\d+))");
  static const std::regex trucks(R"(trucks:\s*(\d+))", std::regex::icase);
  std::smatch m;
  if (auto it = header.find("NAME"); it != header.end() && std::regex_search(it->second, m, name_k))
    return std::stoi(m[1]);
  if (auto it = header.find("COMMENT");
      it != header.end() && std::regex_search(it->second, m, trucks))
    return std::stoi(m[1]);
  return std::nullopt;
}

}  // namespace

Instance parse_vrp(std::string_view text) {
  using K = InstanceError::Kind;
  std::map<std::string, std::string> header;
  std::map<int, std::pair<double, double>> coords;
  std::map<int, double> demands;
  std::vector<int> depots;
  std::set<std::string> sections;
  std::string section;

  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line == "EOF") break;
    if (line.ends_with("_SECTION")) {
      section = line;
      sections.insert(section);
      continue;
    }
    if (const auto colon = line.find(':'); colon != std::string::npos && section.empty()) {
      header[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
      continue;
    }
    const auto toks = tokens(line);
    if (section == "NODE_COORD_SECTION") {
      if (toks.size() != 3) throw InstanceError(K::MalformedLine, "expected 'id x y'", line_no);
      const int id = parse_number<int>(toks[0], line_no);
      if (coords.contains(id))
        throw InstanceError(K::DuplicateNodeId, "node " + toks[0] + " listed twice", line_no);
      coords[id] = {parse_number<double>(toks[1], line_no), parse_number<double>(toks[2], line_no)};
    } else if (section == "DEMAND_SECTION") {
      if (toks.size() != 2) throw InstanceError(K::MalformedLine, "expected 'id demand'", line_no);
      const int id = parse_number<int>(toks[0], line_no);
      if (demands.contains(id))
        throw InstanceError(K::DuplicateNodeId, "demand for " + toks[0] + " listed twice", line_no);
      demands[id] = parse_number<double>(toks[1], line_no);
    } else if (section == "DEPOT_SECTION") {
      for (const auto& t : toks) {
        const int id = parse_number<int>(t, line_no);
        if (id == -1) {
          section = "DEPOT_SECTION_DONE";
          break;
        }
        depots.push_back(id);
      }
    } else if (section == "DEPOT_SECTION_DONE") {
      throw InstanceError(K::MalformedLine, "data after depot terminator", line_no);
    } else {
      throw InstanceError(K::MalformedLine, "unexpected line '" + line + "'", line_no);
    }
  }

  for (const char* key : {"DIMENSION", "CAPACITY"})
    if (!header.contains(key)) throw InstanceError(K::MissingSection, std::string("missing ") + key);
  for (const char* sec : {"NODE_COORD_SECTION", "DEMAND_SECTION", "DEPOT_SECTION"})
    if (!sections.contains(sec)) throw InstanceError(K::MissingSection, std::string("missing ") + sec);
  if (auto it = header.find("EDGE_WEIGHT_TYPE"); it != header.end() && it->second != "EUC_2D")
    throw InstanceError(K::UnsupportedFormat, "edge weight type " + it->second + " not supported");
  if (depots.size() != 1) throw InstanceError(K::MalformedLine, "exactly one depot required");

  const int dim = parse_number<int>(header["DIMENSION"], -1);
  const double capacity = parse_number<double>(header["CAPACITY"], -1);
  if (static_cast<int>(coords.size()) != dim || static_cast<int>(demands.size()) != dim)
    throw InstanceError(K::MalformedLine, "node count does not match DIMENSION " +
                                              std::to_string(dim));
  for (const auto& [id, _] : coords)
    if (!demands.contains(id))
      throw InstanceError(K::MalformedLine, "node " + std::to_string(id) + " has no demand");

  const int depot = depots.front();
  if (!coords.contains(depot)) throw InstanceError(K::MalformedLine, "depot id not a node");
  if (demands[depot] != 0.0) throw InstanceError(K::DepotDemandNonzero, "depot demand must be 0");

  std::vector<Node> nodes;
  nodes.reserve(static_cast<size_t>(dim));
  auto push = [&](int id) {
    Node n;
    n.x = coords[id].first;
    n.y = coords[id].second;
    n.demand = demands[id];
    nodes.push_back(n);
  };
  push(depot);
  for (const auto& [id, _] : coords)
    if (id != depot) push(id);

  const int routes = routes_hint(header).value_or(std::max(1, dim - 1));
  return Instance(header.contains("NAME") ? header["NAME"] : std::string("unnamed"),
                  std::move(nodes), capacity, routes);
}

// ---------------------------------------------------------------------------
// Augmentation

std::vector<double> earliest_arrivals(const Instance& inst) {
  const int n = inst.size();
  std::vector<double> best(static_cast<size_t>(n), kNever);
  best[0] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  open.push({0.0, 0});
  while (!open.empty()) {
    auto [t, i] = open.top();
    open.pop();
    if (t > best[static_cast<size_t>(i)]) continue;
    const double depart = std::max(t, inst.node(i).window.open);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto& e = inst.edge(i, j);
      const double arrive = depart + e.travel_time;
      if (e.broken_at(arrive)) continue;
      if (j != 0 && arrive > inst.node(j).window.close) continue;
      if (arrive < best[static_cast<size_t>(j)]) {
        best[static_cast<size_t>(j)] = arrive;
        open.push({arrive, j});
      }
    }
  }
  return best;
}

bool passes_solvability_screen(const Instance& inst) {
  const auto reach = earliest_arrivals(inst);
  for (int i = 1; i < inst.size(); ++i) {
    if (reach[static_cast<size_t>(i)] > inst.node(i).window.close) return false;
    const double arrive = inst.travel_time(0, i);
    if (inst.edge(0, i).broken_at(arrive) || arrive > inst.node(i).window.close) return false;
    const double back = std::max(arrive, inst.node(i).window.open) + inst.travel_time(i, 0);
    if (inst.edge(i, 0).broken_at(back)) return false;
  }
  return true;
}

Instance augment(const Instance& inst, const AugmentConfig& cfg) {
  using K = InstanceError::Kind;
  if (!(cfg.break_fraction >= 0.0 && cfg.break_fraction < 1.0))
    throw InstanceError(K::InvalidConfig, "break_fraction must lie in [0, 1)");
  if (!(cfg.window_tightness >= 0.0))
    throw InstanceError(K::InvalidConfig, "window_tightness must be non-negative");

  const double horizon = inst.horizon();
  const double width = cfg.window_tightness * horizon;
  const int n = inst.size();

  std::vector<std::pair<int, int>> inner_edges;
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) inner_edges.emplace_back(i, j);
  const double undirected = static_cast<double>(n) * (n - 1) / 2.0;
  const auto wanted = static_cast<size_t>(std::ceil(cfg.break_fraction * undirected - 1e-12));
  const size_t n_breaks = std::min(wanted, inner_edges.size());

  std::mt19937_64 rng(cfg.seed);
  for (int attempt = 0; attempt < std::max(1, cfg.max_retries); ++attempt) {
    Instance out = inst;
    out.set_rng_seed(cfg.seed);
    for (int i = 0; i < n; ++i) out.set_window(i, TimeWindow{});
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out.set_break(i, j, kNever);

    for (int i = 1; i < n; ++i) {
      const double direct = inst.travel_time(0, i);
      std::uniform_real_distribution<double> visit(direct, std::max(direct, horizon));
      const double u = visit(rng);
      out.set_window(i, TimeWindow{std::max(0.0, u - width / 2.0), u + width / 2.0});
    }

    auto pool = inner_edges;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::uniform_real_distribution<double> when(0.3 * horizon, 0.9 * horizon);
    for (size_t k = 0; k < n_breaks; ++k) out.set_break(pool[k].first, pool[k].second, when(rng));

    if (passes_solvability_screen(out)) return out;
  }
  throw InstanceError(K::InfeasibleAugmentation,
                      "no solvable augmentation found within retry budget");
}

// ---------------------------------------------------------------------------
// Canonical text format

namespace {

json time_json(double t) { return t == kNever ? json("inf") : json(t); }

double time_from(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "inf") throw InstanceError(InstanceError::Kind::ParseError, "bad time");
    return kNever;
  }
  return j.get<double>();
}

void require_keys(const json& obj, std::initializer_list<const char*> keys, const char* what) {
  using K = InstanceError::Kind;
  if (!obj.is_object()) throw InstanceError(K::ParseError, std::string(what) + " must be an object");
  std::set<std::string> expected(keys.begin(), keys.end());
  for (const auto& [k, _] : obj.items())
    if (!expected.contains(k))
      throw InstanceError(K::ParseError, std::string("unknown field '") + k + "' in " + what);
  for (const auto& k : expected)
    if (!obj.contains(k))
      throw InstanceError(K::ParseError, std::string("missing field '") + k + "' in " + what);
}

}  // namespace

std::string serialize(const Instance& inst) {
  json nodes = json::array();
  for (const auto& n : inst.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"x", n.x},
                     {"y", n.y},
                     {"demand", n.demand},
                     {"window", json::array({time_json(n.window.open), time_json(n.window.close)})}});
  }
  json breaks = json::array();
  for (int i = 0; i < inst.size(); ++i)
    for (int j = i + 1; j < inst.size(); ++j)
      if (inst.edge(i, j).breaks()) breaks.push_back(json::array({i, j, inst.edge(i, j).break_time}));

  json doc = {{"format_version", kInstanceFormatVersion},
              {"name", inst.name()},
              {"capacity", inst.capacity()},
              {"max_routes", inst.max_routes()},
              {"rng_seed", inst.rng_seed()},
              {"nodes", nodes},
              {"breaks", breaks}};
  return doc.dump(1) + "\n";
}

Instance deserialize(std::string_view text) {
  using K = InstanceError::Kind;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError(K::ParseError, e.what(), static_cast<int>(e.byte));
  }
  try {
    if (doc.is_object() && doc.contains("format_version") &&
        doc["format_version"] != kInstanceFormatVersion)
      throw InstanceError(K::SchemaVersionMismatch,
                          "format_version " + doc["format_version"].dump() + " unsupported");
    require_keys(doc, {"format_version", "name", "capacity", "max_routes", "rng_seed", "nodes", "breaks"},
                 "instance");
    std::vector<Node> nodes;
    for (const auto& jn : doc["nodes"]) {
      require_keys(jn, {"id", "x", "y", "demand", "window"}, "node");
      Node n;
      n.id = jn["id"].get<int>();
      if (n.id != static_cast<int>(nodes.size()))
        throw InstanceError(K::ParseError, "node ids must be 0..N in order");
      n.x = jn["x"].get<double>();
      n.y = jn["y"].get<double>();
      n.demand = jn["demand"].get<double>();
      const auto& w = jn["window"];
      if (!w.is_array() || w.size() != 2) throw InstanceError(K::ParseError, "window must be [a, b]");
      n.window = TimeWindow{time_from(w[0]), time_from(w[1])};
      nodes.push_back(n);
    }
    Instance inst(doc["name"].get<std::string>(), std::move(nodes), doc["capacity"].get<double>(),
                  doc["max_routes"].get<int>(), doc["rng_seed"].get<std::uint64_t>());
    for (const auto& b : doc["breaks"]) {
      if (!b.is_array() || b.size() != 3) throw InstanceError(K::ParseError, "break must be [i, j, t]");
      const int i = b[0].get<int>();
      const int j = b[1].get<int>();
      if (!inst.contains(i) || !inst.contains(j) || i == j)
        throw InstanceError(K::ParseError, "break references unknown edge");
      inst.set_break(i, j, b[2].get<double>());
    }
    return inst;
  } catch (const json::exception& e) {
    throw InstanceError(K::ParseError, e.what());
  }
}

}  // namespace lqvrp
