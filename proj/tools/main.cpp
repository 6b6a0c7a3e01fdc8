// lqvrp command line: prepare instances, train, report, ablate, oracle.

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lqvrp/bench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lqvrp;

namespace {

struct TrainFlags {
  std::string config_file;
  std::optional<int> episodes, warmup, batch, horizon, update_period, checkpoint_every;
  std::optional<double> lr, tau, eps_llm, reward_scale;
  bool no_double = false, no_dueling = false, no_per = false, no_memory = false, no_boost = false,
       no_shaping = false, per_route_clock = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON file with training settings")->check(CLI::ExistingFile);
    app->add_option("--episodes", episodes);
    app->add_option("--warmup", warmup);
    app->add_option("--batch-size", batch);
    app->add_option("--horizon", horizon);
    app->add_option("--update-period", update_period);
    app->add_option("--checkpoint-every", checkpoint_every);
    app->add_option("--lr", lr);
    app->add_option("--tau", tau);
    app->add_option("--eps-llm", eps_llm);
    app->add_option("--reward-scale", reward_scale);
    app->add_flag("--no-double", no_double);
    app->add_flag("--no-dueling", no_dueling);
    app->add_flag("--no-per", no_per);
    app->add_flag("--no-llm-memory", no_memory);
    app->add_flag("--no-llm-per", no_boost);
    app->add_flag("--no-reward-shaping", no_shaping);
    app->add_flag("--per-route-clock", per_route_clock);
  }

  TrainConfig resolve() const {
    TrainConfig c;
    if (!config_file.empty()) c = train_config_from_json(json::parse(read_file(config_file)));
    if (episodes) c.episodes = *episodes;
    if (warmup) c.warmup = *warmup;
    if (batch) c.batch_size = *batch;
    if (horizon) c.horizon = *horizon;
    if (update_period) c.update_period = *update_period;
    if (checkpoint_every) c.checkpoint_every = *checkpoint_every;
    if (lr) c.lr = *lr;
    if (tau) c.tau = *tau;
    if (eps_llm) c.eps_llm = *eps_llm;
    if (reward_scale) c.reward_scale = *reward_scale;
    if (no_double) c.switches.double_q = false;
    if (no_dueling) c.switches.dueling = false;
    if (no_per) c.switches.per = false;
    if (no_memory) c.switches.llm_memory = false;
    if (no_boost) c.switches.llm_per_boost = false;
    if (no_shaping) c.switches.reward_shaping = false;
    if (per_route_clock) c.env.clock = ClockMode::PerRoute;
    return c;
  }
};

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw BenchError(BenchError::Kind::Usage, "bad seed '" + tok + "'");
    }
  }
  return out;
}

FaultMode parse_fault(const std::string& s) {
  if (s == "none") return FaultMode::None;
  if (s == "syntax") return FaultMode::SyntaxGarbage;
  if (s == "hallucinate") return FaultMode::HallucinatedNode;
  if (s == "infeasible") return FaultMode::InfeasibleLeg;
  throw BenchError(BenchError::Kind::Usage, "unknown fault mode '" + s + "'");
}

Instance load_instance(const fs::path& p, const AugmentConfig& aug) {
  const std::string text = read_file(p);
  if (p.extension() == ".vrp") return augment(parse_vrp(text), aug);
  return deserialize(text);
}

std::vector<fs::path> instance_paths(const std::string& manifest, const std::vector<std::string>& files) {
  std::vector<fs::path> out;
  if (!manifest.empty()) {
    const Manifest m = load_manifest(manifest);
    const fs::path dir = fs::path(manifest).parent_path();
    for (const auto& e : m.entries) out.push_back(dir / e.file);
  }
  for (const auto& f : files) out.emplace_back(f);
  return out;
}

int print_runs(const std::vector<RunRecord>& recs) {
  int failed = 0;
  for (const auto& r : recs) {
    std::cout << r.instance << " " << r.method << " " << r.label << " seed " << r.seed << ": ";
    if (!r.ok) {
      ++failed;
      std::cout << "FAILED " << r.error << "\n";
      continue;
    }
    std::cout << "best "
              << (r.best_cost ? std::to_string(*r.best_cost) : std::string("none"))
              << " satisfaction " << r.satisfaction_rate << " (" << r.wall_seconds << " s)\n";
  }
  return failed == 0 ? 0 : 1;
}

void write_report(const ResultTable& t, const std::vector<RunSummary>& runs, const fs::path& out,
                  const std::string& prefix) {
  write_atomic(out / (prefix + ".txt"), table_text(t));
  write_atomic(out / (prefix + ".csv"), table_csv(t));
  write_atomic(out / (prefix + "_curves.csv"), curves_csv(runs));
  std::cout << table_text(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Routing with path breaks: instance preparation, training and reporting"};
  app.require_subcommand(1);

  // prepare
  auto* prep = app.add_subcommand("prepare", "augment instances and write a manifest");
  std::vector<std::string> prep_inputs;
  std::string prep_out;
  bool prep_force = false;
  int desk = 0;
  std::uint64_t desk_seed = 1000;
  int oracle_limit = kDefaultOracleLimit;
  AugmentConfig aug;
  std::vector<std::string> best_known;
  prep->add_option("inputs", prep_inputs, ".vrp or canonical .json files");
  prep->add_option("-o,--out", prep_out)->required();
  prep->add_flag("--force", prep_force, "overwrite an existing manifest");
  prep->add_option("--desk", desk, "add N synthetic instances (5 to 8 customers)");
  prep->add_option("--desk-seed", desk_seed);
  prep->add_option("--oracle-limit", oracle_limit);
  prep->add_option("--seed", aug.seed);
  prep->add_option("--window-tightness", aug.window_tightness)->check(CLI::PositiveNumber);
  prep->add_option("--break-fraction", aug.break_fraction)->check(CLI::Range(0.0, 1.0));
  prep->add_option("--best-known", best_known, "NAME=COST reference for instances beyond the oracle");

  // augment
  auto* augc = app.add_subcommand("augment", "add windows and breaks to one .vrp file");
  std::string aug_in, aug_out;
  AugmentConfig aug1;
  augc->add_option("input", aug_in)->required()->check(CLI::ExistingFile);
  augc->add_option("-o,--out", aug_out);
  augc->add_option("--seed", aug1.seed);
  augc->add_option("--window-tightness", aug1.window_tightness)->check(CLI::PositiveNumber);
  augc->add_option("--break-fraction", aug1.break_fraction)->check(CLI::Range(0.0, 1.0));

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact solution of a small instance");
  std::string orc_in, orc_weights = "freight";
  int orc_limit = kDefaultOracleLimit;
  bool orc_per_route = false;
  orc->add_option("instance", orc_in)->required()->check(CLI::ExistingFile);
  orc->add_option("--limit", orc_limit);
  orc->add_option("--weights", orc_weights)->check(CLI::IsMember({"freight", "distance"}));
  orc->add_flag("--per-route-clock", orc_per_route);

  // train
  auto* trn = app.add_subcommand("train", "train over instances and seeds");
  std::string trn_manifest, trn_method = "llm-dqn", trn_seeds = "0,1,2", trn_out, trn_fault = "none";
  std::vector<std::string> trn_files;
  int trn_jobs = 1, trn_eval = 1;
  TrainFlags trn_flags;
  trn->add_option("instances", trn_files);
  trn->add_option("--manifest", trn_manifest)->check(CLI::ExistingFile);
  trn->add_option("--method", trn_method)->check(CLI::IsMember({"dqn", "llm-dqn", "llm-dqn-mock", "llm-dqn-remote"}));
  trn->add_option("--seeds", trn_seeds);
  trn->add_option("-o,--out", trn_out)->required();
  trn->add_option("--jobs", trn_jobs);
  trn->add_option("--eval-episodes", trn_eval);
  trn->add_option("--mock-fault", trn_fault)->check(CLI::IsMember({"none", "syntax", "hallucinate", "infeasible"}));
  trn_flags.attach(trn);

  // report
  auto* rep = app.add_subcommand("report", "tabulate gaps and satisfaction from run files");
  std::string rep_runs, rep_manifest, rep_out;
  rep->add_option("--runs", rep_runs)->required();
  rep->add_option("--manifest", rep_manifest)->required()->check(CLI::ExistingFile);
  rep->add_option("-o,--out", rep_out);

  // ablate
  auto* abl = app.add_subcommand("ablate", "run the six component configurations");
  std::string abl_manifest, abl_methods = "dqn,llm-dqn", abl_seeds = "0,1,2", abl_out;
  int abl_jobs = 1;
  TrainFlags abl_flags;
  abl->add_option("--manifest", abl_manifest)->required()->check(CLI::ExistingFile);
  abl->add_option("--methods", abl_methods);
  abl->add_option("--seeds", abl_seeds);
  abl->add_option("-o,--out", abl_out)->required();
  abl->add_option("--jobs", abl_jobs);
  abl_flags.attach(abl);

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "greedy rollouts of a checkpoint");
  std::string evl_ckpt, evl_inst;
  int evl_episodes = 1;
  evl->add_option("--checkpoint", evl_ckpt)->required()->check(CLI::ExistingFile);
  evl->add_option("--instance", evl_inst)->required()->check(CLI::ExistingFile);
  evl->add_option("--episodes", evl_episodes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*prep) {
      std::vector<Instance> instances;
      for (const auto& f : prep_inputs) instances.push_back(load_instance(f, aug));
      for (const auto& inst : desk_corpus(desk, desk_seed)) instances.push_back(inst);
      if (instances.empty()) throw BenchError(BenchError::Kind::Usage, "nothing to prepare");
      Manifest m = prepare(instances, prep_out, aug, prep_force, oracle_limit);
      if (!best_known.empty()) {
        for (const auto& kv : best_known) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw BenchError(BenchError::Kind::Usage, "--best-known wants NAME=COST");
          bool hit = false;
          for (auto& e : m.entries)
            if (e.name == kv.substr(0, eq)) {
              e.best_known = std::stod(kv.substr(eq + 1));
              hit = true;
            }
          if (!hit) throw BenchError(BenchError::Kind::Usage, "unknown instance in --best-known: " + kv);
        }
        write_atomic(fs::path(prep_out) / "manifest.json", to_json(m).dump(1) + "\n");
      }
      std::cout << "prepared " << m.entries.size() << " instance(s) in " << prep_out << "\n";
      return 0;
    }
    if (*augc) {
      const std::string text = serialize(augment(parse_vrp(read_file(aug_in)), aug1));
      if (aug_out.empty()) std::cout << text;
      else write_atomic(aug_out, text);
      return 0;
    }
    if (*orc) {
      const Instance inst = deserialize(read_file(orc_in));
      const CostWeights w = orc_weights == "freight" ? CostWeights::freight() : CostWeights::distance_only();
      const ExactResult r =
          exact_solve(inst, orc_limit, w, orc_per_route ? ClockMode::PerRoute : ClockMode::Global);
      std::cout << json{{"instance", inst.name()}, {"cost", r.cost}, {"plan", to_json(r.plan)},
                        {"distance", r.verdict.distance}, {"routes", r.verdict.routes}}
                       .dump(1)
                << "\n";
      return 0;
    }
    if (*trn) {
      RunSpec spec;
      spec.instances = instance_paths(trn_manifest, trn_files);
      spec.method = method_from_string(trn_method);
      spec.config = trn_flags.resolve();
      spec.config.use_advisor = spec.method != Method::Dqn;
      spec.seeds = parse_seeds(trn_seeds);
      spec.out_dir = trn_out;
      spec.jobs = trn_jobs;
      spec.eval_episodes = trn_eval;
      spec.mock_fault = parse_fault(trn_fault);
      return print_runs(run_batch(spec));
    }
    if (*rep) {
      const auto runs = load_runs(rep_runs);
      const ResultTable t = build_table(runs, load_manifest(rep_manifest));
      write_report(t, runs, rep_out.empty() ? fs::path(rep_runs) : fs::path(rep_out), "table");
      return 0;
    }
    if (*abl) {
      std::vector<Method> methods;
      std::stringstream ss(abl_methods);
      for (std::string tok; std::getline(ss, tok, ',');) methods.push_back(method_from_string(tok));
      const fs::path out = abl_out;
      const Manifest manifest = load_manifest(abl_manifest);
      int rc = 0;
      std::vector<TableRow> dashed;
      for (Method m : methods) {
        for (const auto& row : ablation_rows()) {
          if (row.needs_advisor && m == Method::Dqn) {
            TableRow d;
            d.instance = "mean";
            d.method = to_string(m);
            d.label = row.name;
            d.dashed = true;
            dashed.push_back(d);
            continue;
          }
          RunSpec spec;
          spec.instances = instance_paths(abl_manifest, {});
          spec.method = m;
          spec.config = abl_flags.resolve();
          spec.config.switches = row.switches;
          spec.config.use_advisor = m != Method::Dqn;
          spec.seeds = parse_seeds(abl_seeds);
          spec.out_dir = out / "runs";
          spec.label = row.name;
          spec.jobs = abl_jobs;
          rc = std::max(rc, print_runs(run_batch(spec)));
        }
      }
      const auto runs = load_runs(out / "runs");
      ResultTable t = build_table(runs, manifest);
      std::erase_if(t.rows, [](const TableRow& r) { return r.instance != "mean"; });
      t.rows.insert(t.rows.end(), dashed.begin(), dashed.end());
      std::stable_sort(t.rows.begin(), t.rows.end(),
                       [](const TableRow& a, const TableRow& b) { return a.method < b.method; });
      write_report(t, runs, out, "ablation");
      return rc;
    }
    if (*evl) {
      const Instance inst = deserialize(read_file(evl_inst));
      const PolicyEvaluation ev = evaluate_policy(inst, read_file(evl_ckpt), evl_episodes);
      std::cout << json{{"mean_cost", ev.mean_cost}, {"satisfaction_rate", ev.satisfaction_rate},
                        {"plan", to_json(ev.last_plan)}}
                       .dump(1)
                << "\n";
      return 0;
    }
  } catch (const BenchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == BenchError::Kind::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
