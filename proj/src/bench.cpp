#include "lqvrp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "lqvrp/chat_backend.hpp"

namespace lqvrp {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::Dqn: return "dqn";
    case Method::LlmDqnMock: return "llm-dqn";
    case Method::LlmDqnRemote: return "llm-dqn-remote";
  }
  return "dqn";
}

Method method_from_string(const std::string& s) {
  if (s == "dqn") return Method::Dqn;
  if (s == "llm-dqn" || s == "llm-dqn-mock") return Method::LlmDqnMock;
  if (s == "llm-dqn-remote") return Method::LlmDqnRemote;
  throw BenchError(BenchError::Kind::Usage, "unknown method '" + s + "' (dqn, llm-dqn, llm-dqn-remote)");
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw BenchError(BenchError::Kind::BadPath, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw BenchError(BenchError::Kind::BadPath, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BenchError(BenchError::Kind::BadPath, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

// ---------------------------------------------------------------------------

Instance make_synthetic(std::uint64_t seed, int customers, const AugmentConfig& aug) {
  if (customers < 1) throw std::invalid_argument("make_synthetic: need at least one customer");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(0, 100);
  std::uniform_int_distribution<int> dem(1, 30);
  std::vector<Node> nodes;
  nodes.push_back({0, 50.0, 50.0, 0.0, {}});
  double total = 0.0, biggest = 0.0;
  for (int i = 1; i <= customers; ++i) {
    Node n;
    n.id = i;
    n.x = coord(rng);
    n.y = coord(rng);
    n.demand = dem(rng);
    total += n.demand;
    biggest = std::max(biggest, n.demand);
    nodes.push_back(n);
  }
  std::uniform_real_distribution<double> trips(2.0, 3.0);
  const double capacity = std::max(biggest, std::ceil(total / trips(rng)));
  const int k = static_cast<int>(std::ceil(total / capacity)) + 1;
  Instance base("desk-s" + std::to_string(seed) + "-n" + std::to_string(customers), nodes, capacity, k,
                seed);
  AugmentConfig a = aug;
  a.seed = seed;
  return augment(base, a);
}

std::vector<Instance> desk_corpus(int count, std::uint64_t base_seed) {
  std::vector<Instance> out;
  for (int i = 0; i < count; ++i) out.push_back(make_synthetic(base_seed + i, 5 + i % 4));
  return out;
}

const ManifestEntry* Manifest::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

double Manifest::reference_cost(const std::string& name) const {
  const ManifestEntry* e = find(name);
  if (e != nullptr && e->oracle_cost) return *e->oracle_cost;
  if (e != nullptr && e->best_known) return *e->best_known;
  throw BenchError(BenchError::Kind::MissingOracle,
                   "no oracle or best-known cost for instance '" + name + "'");
}

json to_json(const Manifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json j{{"name", e.name}, {"file", e.file}, {"sha256", e.sha256}, {"seed", e.seed},
           {"customers", e.customers}};
    j["oracle_cost"] = e.oracle_cost ? json(*e.oracle_cost) : json(nullptr);
    j["oracle_plan"] = e.oracle_plan ? to_json(*e.oracle_plan) : json(nullptr);
    j["best_known"] = e.best_known ? json(*e.best_known) : json(nullptr);
    entries.push_back(j);
  }
  return json{{"format_version", kManifestFormatVersion},
              {"augment",
               {{"window_tightness", m.augment.window_tightness},
                {"break_fraction", m.augment.break_fraction},
                {"seed", m.augment.seed},
                {"max_retries", m.augment.max_retries}}},
              {"entries", entries}};
}

Manifest manifest_from_json(const json& j) {
  if (j.value("format_version", 0) != kManifestFormatVersion)
    throw BenchError(BenchError::Kind::BadPath, "unsupported manifest format version");
  Manifest m;
  const auto& a = j.at("augment");
  m.augment.window_tightness = a.at("window_tightness").get<double>();
  m.augment.break_fraction = a.at("break_fraction").get<double>();
  m.augment.seed = a.at("seed").get<std::uint64_t>();
  m.augment.max_retries = a.at("max_retries").get<int>();
  for (const auto& e : j.at("entries")) {
    ManifestEntry me;
    me.name = e.at("name").get<std::string>();
    me.file = e.at("file").get<std::string>();
    me.sha256 = e.at("sha256").get<std::string>();
    me.seed = e.at("seed").get<std::uint64_t>();
    me.customers = e.at("customers").get<int>();
    if (!e.at("oracle_cost").is_null()) me.oracle_cost = e.at("oracle_cost").get<double>();
    if (!e.at("oracle_plan").is_null()) me.oracle_plan = plan_from_json(e.at("oracle_plan"));
    if (!e.at("best_known").is_null()) me.best_known = e.at("best_known").get<double>();
    m.entries.push_back(std::move(me));
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  try {
    return manifest_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw BenchError(BenchError::Kind::BadPath, "malformed manifest " + path.string() + ": " + e.what());
  }
}

std::optional<ExactResult> oracle_for(const Instance& inst, int limit, ClockMode clock) {
  if (inst.customer_count() > limit) return std::nullopt;
  try {
    return exact_solve(inst, limit, CostWeights::freight(), clock);
  } catch (const ModelError& e) {
    if (e.kind() == ModelError::Kind::Infeasible) return std::nullopt;
    throw;
  }
}

Manifest prepare(const std::vector<Instance>& instances, const fs::path& out_dir,
                 const AugmentConfig& aug, bool force, int oracle_limit) {
  const fs::path manifest_path = out_dir / "manifest.json";
  if (fs::exists(manifest_path) && !force)
    throw BenchError(BenchError::Kind::AlreadyExists,
                     manifest_path.string() + " exists; pass --force to overwrite");
  Manifest m;
  m.augment = aug;
  for (const auto& inst : instances) {
    ManifestEntry e;
    e.name = inst.name();
    e.file = inst.name() + ".json";
    const std::string text = serialize(inst);
    e.sha256 = sha256_hex(text);
    e.seed = inst.rng_seed();
    e.customers = inst.customer_count();
    if (auto o = oracle_for(inst, oracle_limit)) {
      e.oracle_cost = o->cost;
      e.oracle_plan = o->plan;
    }
    write_atomic(out_dir / e.file, text);
    m.entries.push_back(std::move(e));
  }
  write_atomic(manifest_path, to_json(m).dump(1) + "\n");
  return m;
}

// ---------------------------------------------------------------------------

void RunSpec::validate() const {
  if (seeds.empty()) throw BenchError(BenchError::Kind::Usage, "at least one seed is required");
  if (instances.empty()) throw BenchError(BenchError::Kind::Usage, "no instances given");
  if (out_dir.empty()) throw BenchError(BenchError::Kind::Usage, "no output directory given");
  if (jobs < 1) throw BenchError(BenchError::Kind::Usage, "--jobs must be positive");
  if (method == Method::Dqn && config.use_advisor)
    throw BenchError(BenchError::Kind::Usage, "method dqn cannot use the advisor");
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw BenchError(BenchError::Kind::Usage, e.what());
  }
}

std::string run_stem(const std::string& instance, Method method, const std::string& label,
                     std::uint64_t seed) {
  return instance + "__" + to_string(method) + "__" + label + "__seed" + std::to_string(seed);
}

RunRecord run_one(const Instance& inst, const RunSpec& spec, std::uint64_t seed) {
  RunRecord rec;
  rec.instance = inst.name();
  rec.method = to_string(spec.method);
  rec.label = spec.label;
  rec.seed = seed;
  const std::string stem = run_stem(inst.name(), spec.method, spec.label, seed);
  rec.report_path = spec.out_dir / (stem + ".jsonl");

  TrainConfig cfg = spec.config;
  cfg.seed = seed;
  cfg.use_advisor = spec.method != Method::Dqn;

  std::unique_ptr<AdvisorBackend> backend;
  if (spec.method == Method::LlmDqnMock) {
    backend = std::make_unique<MockBackend>(seed, spec.mock_fault);
  } else if (spec.method == Method::LlmDqnRemote) {
    ChatBackendConfig bc = ChatBackendConfig::from_env();
    bc.log_path = (spec.out_dir / (stem + ".advisor.jsonl")).string();
    backend = std::make_unique<ChatCompletionsBackend>(bc);
  }

  std::vector<std::string> log_lines;
  log_lines.push_back("advisor: " + (backend ? backend->name() : std::string("none")));
  log_lines.push_back("switches: " + to_json(cfg).at("switches").dump());
  TrainHooks hooks;
  hooks.on_log = [&](const std::string& m) { log_lines.push_back(m); };
  hooks.on_checkpoint = [&](int episode, const QNet& net) {
    write_atomic(spec.out_dir / (stem + ".ep" + std::to_string(episode) + ".ckpt.json"),
                 checkpoint_to_text(net));
  };

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const TrainResult res = train(inst, cfg, backend.get(), hooks);
    TrainConfig eval_cfg = cfg;
    eval_cfg.env.reward.shaping = cfg.switches.reward_shaping;
    const PolicyEvaluation ev = evaluate_policy(inst, res.final_net, spec.eval_episodes, eval_cfg.env,
                                                cfg.resolved_horizon(inst));
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string out;
    out += json{{"kind", "run"},
                {"instance", inst.name()},
                {"instance_sha256", sha256_hex(serialize(inst))},
                {"method", rec.method},
                {"label", spec.label},
                {"seed", seed},
                {"advisor", backend ? backend->name() : std::string("none")},
                {"config", to_json(cfg)}}
               .dump();
    out += "\n";
    int feasible = 0;
    for (const auto& r : res.reports) {
      json j = to_json(r);
      j["kind"] = "episode";
      out += j.dump();
      out += "\n";
      feasible += r.feasible ? 1 : 0;
    }
    rec.ok = true;
    rec.episodes = static_cast<int>(res.reports.size());
    rec.best_episode = res.best_episode;
    if (res.best_plan) rec.best_cost = res.best_cost;
    rec.satisfaction_rate = ev.satisfaction_rate;
    rec.eval_cost = ev.mean_cost;
    rec.train_feasible_rate = rec.episodes > 0 ? static_cast<double>(feasible) / rec.episodes : 0.0;

    json summary{{"kind", "summary"},
                 {"best_cost", rec.best_cost ? json(*rec.best_cost) : json(nullptr)},
                 {"best_plan", res.best_plan ? to_json(*res.best_plan) : json(nullptr)},
                 {"best_episode", res.best_episode},
                 {"satisfaction_rate", ev.satisfaction_rate},
                 {"eval_cost", ev.mean_cost},
                 {"eval_plan", to_json(ev.last_plan)},
                 {"train_feasible_rate", rec.train_feasible_rate},
                 {"phase_switch", res.phase_switch},
                 {"backend_calls", res.backend_calls},
                 {"backend_failures", res.backend_failures},
                 {"llm_flagged_transitions", res.llm_flagged_stored}};
    out += summary.dump();
    out += "\n";

    write_atomic(rec.report_path, out);
    write_atomic(spec.out_dir / (stem + ".ckpt.json"), checkpoint_to_text(res.final_net));
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    log_lines.push_back(std::string("run failed: ") + e.what());
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  std::string log_text;
  for (const auto& l : log_lines) log_text += l + "\n";
  write_atomic(spec.out_dir / (stem + ".log"), log_text);
  write_atomic(spec.out_dir / (stem + ".timing.json"),
               json{{"wall_seconds", rec.wall_seconds}}.dump() + "\n");
  return rec;
}

std::vector<RunRecord> run_batch(const RunSpec& spec) {
  spec.validate();
  struct Task {
    size_t instance;
    std::uint64_t seed;
  };
  std::vector<Instance> instances;
  for (const auto& p : spec.instances) instances.push_back(deserialize(read_file(p)));
  std::vector<Task> tasks;
  for (size_t i = 0; i < instances.size(); ++i)
    for (auto s : spec.seeds) tasks.push_back({i, s});

  std::vector<RunRecord> out(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < tasks.size(); k = next++)
      out[k] = run_one(instances[tasks[k].instance], spec, tasks[k].seed);
  };
  const int n = std::min<int>(spec.jobs, static_cast<int>(tasks.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------

RunSummary parse_report(const std::string& text) {
  RunSummary s;
  std::istringstream in(text);
  std::string line;
  bool header = false, summary = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "run") {
      header = true;
      s.instance = j.at("instance").get<std::string>();
      s.method = j.at("method").get<std::string>();
      s.label = j.at("label").get<std::string>();
      s.seed = j.at("seed").get<std::uint64_t>();
    } else if (kind == "episode") {
      s.returns.push_back(j.at("return").get<double>());
    } else if (kind == "summary") {
      summary = true;
      if (!j.at("best_cost").is_null()) s.best_cost = j.at("best_cost").get<double>();
      s.best_episode = j.at("best_episode").get<int>();
      s.satisfaction_rate = j.at("satisfaction_rate").get<double>();
    }
  }
  if (!header || !summary) throw BenchError(BenchError::Kind::BadPath, "incomplete report file");
  return s;
}

std::vector<RunSummary> load_runs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw BenchError(BenchError::Kind::BadPath, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl" &&
        e.path().filename().string().find(".advisor.") == std::string::npos)
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RunSummary> out;
  for (const auto& f : files) {
    RunSummary s = parse_report(read_file(f));
    fs::path timing = f;
    timing.replace_extension(".timing.json");
    if (fs::exists(timing)) s.wall_seconds = json::parse(read_file(timing)).at("wall_seconds").get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct Acc {
  std::vector<double> gaps;
  int found = 0;
  double satisfaction = 0.0, episodes_to_best = 0.0, wall = 0.0;
  int runs = 0;
};

TableRow finish(const std::string& instance, const std::string& method, const std::string& label,
                const Acc& a) {
  TableRow r;
  r.instance = instance;
  r.method = method;
  r.label = label;
  r.runs = a.runs;
  r.found = a.found;
  if (a.runs > 0) {
    double sum = 0.0;
    for (double g : a.gaps) sum += g;
    r.gap_mean = sum / a.runs;
    double var = 0.0;
    for (double g : a.gaps) var += (g - r.gap_mean) * (g - r.gap_mean);
    r.gap_std = std::sqrt(var / a.runs);
    r.satisfaction = 100.0 * a.satisfaction / a.runs;
    r.wall_seconds = a.wall / a.runs;
  }
  if (a.found > 0) r.episodes_to_best = a.episodes_to_best / a.found;
  return r;
}

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

ResultTable build_table(const std::vector<RunSummary>& runs, const Manifest& manifest) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, Acc> per;
  std::vector<Key> order;
  for (const auto& r : runs) {
    const Key k{r.instance, r.method, r.label};
    if (!per.count(k)) order.push_back(k);
    Acc& a = per[k];
    const double ref = manifest.reference_cost(r.instance);
    ++a.runs;
    if (r.best_cost) {
      ++a.found;
      a.gaps.push_back(gap(*r.best_cost, ref));
      a.episodes_to_best += r.best_episode + 1;
    } else {
      a.gaps.push_back(kNoPlanGap);
    }
    a.satisfaction += r.satisfaction_rate;
    a.wall += r.wall_seconds;
  }
  std::sort(order.begin(), order.end());

  ResultTable t;
  std::map<std::pair<std::string, std::string>, std::vector<TableRow>> by_config;
  std::vector<std::pair<std::string, std::string>> config_order;
  for (const auto& k : order) {
    TableRow row = finish(std::get<0>(k), std::get<1>(k), std::get<2>(k), per[k]);
    const std::pair<std::string, std::string> ck{row.method, row.label};
    if (!by_config.count(ck)) config_order.push_back(ck);
    by_config[ck].push_back(row);
    t.rows.push_back(row);
  }
  std::sort(config_order.begin(), config_order.end());
  for (const auto& ck : config_order) {
    const auto& rows = by_config[ck];
    TableRow agg;
    agg.instance = "mean";
    agg.method = ck.first;
    agg.label = ck.second;
    for (const auto& r : rows) {
      agg.runs += r.runs;
      agg.found += r.found;
      agg.gap_mean += r.gap_mean;
      agg.gap_std += r.gap_std;
      agg.satisfaction += r.satisfaction;
      agg.episodes_to_best += r.episodes_to_best;
      agg.wall_seconds += r.wall_seconds;
    }
    const double n = static_cast<double>(rows.size());
    agg.gap_mean /= n;
    agg.gap_std /= n;
    agg.satisfaction /= n;
    agg.episodes_to_best /= n;
    agg.wall_seconds /= n;
    t.rows.push_back(agg);
  }
  return t;
}

namespace {

const std::vector<std::string> kColumns{"instance", "method",       "config",           "runs",
                                        "found",    "gap_mean_pct", "gap_std_pct",      "satisfaction_pct",
                                        "episodes_to_best", "wall_s"};

// shortest text that parses back to the same double
std::string exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// CSV cells are exact so the file re-parses to identical values; the text
// table rounds for reading.
std::vector<std::string> cells(const TableRow& r, bool for_csv) {
  if (r.dashed)
    return {r.instance, r.method, r.label, "-", "-", "-", "-", "-", "-", "-"};
  auto f = [&](double v, int digits) { return for_csv ? exact(v) : fmt(v, digits); };
  return {r.instance,           r.method,           r.label,
          std::to_string(r.runs), std::to_string(r.found), f(r.gap_mean, 2),
          f(r.gap_std, 2),      f(r.satisfaction, 2), f(r.episodes_to_best, 1),
          f(r.wall_seconds, 1)};
}

}  // namespace

std::string table_text(const ResultTable& t) {
  std::vector<std::vector<std::string>> grid{kColumns};
  for (const auto& r : t.rows) grid.push_back(cells(r, false));
  std::vector<size_t> width(kColumns.size(), 0);
  for (const auto& row : grid)
    for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : grid) {
    std::string line;
    for (size_t c = 0; c < row.size(); ++c) {
      const bool left = c < 3;
      const std::string pad(width[c] - row[c].size(), ' ');
      line += left ? row[c] + pad : pad + row[c];
      if (c + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string table_csv(const ResultTable& t) {
  std::string out;
  for (size_t c = 0; c < kColumns.size(); ++c) out += (c ? "," : "") + kColumns[c];
  out += "\n";
  for (const auto& r : t.rows) {
    const auto row = cells(r, true);
    for (size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += "\n";
  }
  return out;
}

ResultTable table_from_csv(const std::string& csv) {
  ResultTable t;
  std::istringstream in(csv);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (first) {
      first = false;
      if (f != kColumns) throw BenchError(BenchError::Kind::BadPath, "unexpected CSV header");
      continue;
    }
    if (f.size() != kColumns.size()) throw BenchError(BenchError::Kind::BadPath, "short CSV row");
    TableRow r;
    r.instance = f[0];
    r.method = f[1];
    r.label = f[2];
    if (f[3] == "-") {
      r.dashed = true;
    } else {
      r.runs = std::stoi(f[3]);
      r.found = std::stoi(f[4]);
      r.gap_mean = std::stod(f[5]);
      r.gap_std = std::stod(f[6]);
      r.satisfaction = std::stod(f[7]);
      r.episodes_to_best = std::stod(f[8]);
      r.wall_seconds = std::stod(f[9]);
    }
    t.rows.push_back(r);
  }
  return t;
}

std::string curves_csv(const std::vector<RunSummary>& runs) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<const RunSummary*>> groups;
  for (const auto& r : runs) groups[{r.instance, r.method, r.label}].push_back(&r);
  size_t longest = 0;
  for (const auto& r : runs) longest = std::max(longest, r.returns.size());

  std::string out = "episode";
  for (const auto& [k, _] : groups)
    out += "," + std::get<0>(k) + "/" + std::get<1>(k) + "/" + std::get<2>(k);
  out += "\n";
  for (size_t e = 0; e < longest; ++e) {
    out += std::to_string(e);
    for (const auto& [k, members] : groups) {
      double sum = 0.0;
      int n = 0;
      for (const auto* m : members)
        if (e < m->returns.size()) {
          sum += m->returns[e];
          ++n;
        }
      out += ",";
      if (n > 0) out += fmt(sum / n, 4);
    }
    out += "\n";
  }
  return out;
}

std::vector<AblationRow> ablation_rows() {
  std::vector<AblationRow> rows;
  rows.push_back({"all", Ablation{}, false});
  Ablation a;
  a.llm_memory = false;
  rows.push_back({"no-llm-memory", a, true});
  a = {};
  a.llm_per_boost = false;
  rows.push_back({"no-llm-per", a, true});
  a = {};
  a.double_q = false;
  rows.push_back({"no-double", a, false});
  a = {};
  a.dueling = false;
  rows.push_back({"no-dueling", a, false});
  a = {};
  a.reward_shaping = false;
  rows.push_back({"no-reward-reshape", a, false});
  return rows;
}

}  // namespace lqvrp
