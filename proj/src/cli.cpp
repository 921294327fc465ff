#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ucdw/bench.hpp"

namespace ucdw {

namespace {

namespace fs = std::filesystem;

// Failures of a solve itself (as opposed to bad input) map to exit code 3.
struct SolveFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string runs_root(const std::string& flag) {
  if (const char* env = std::getenv("UCDW_RUNS_DIR"); env && *env) return env;
  return flag;
}

void write_text(const std::string& path, const std::string& text) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write " + path);
  os << text;
}

std::vector<int> parse_hidden(const std::string& s) {
  if (s == "desk") return MlpPolicy::desk_hidden();
  if (s == "paper") return MlpPolicy::paper_hidden();
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw InputError("bad --hidden value: " + s);
    }
  }
  if (out.empty()) throw InputError("bad --hidden value: " + s);
  return out;
}

struct GenerateArgs {
  int size = 5, periods = 24, count = 1;
  std::uint64_t seed = 42;
  std::uint64_t demand_seed = 0;
  std::string out;
};

struct TrainArgs {
  int size = 10, periods = 24, n_train = 200, n_val = 8;
  std::uint64_t fleet_seed = 42, train_seed = 43, val_seed = 45;
  std::string hidden = "desk";
  TrainConfig cfg;
  std::string out;
};

struct DatasetArgs {
  int size = 10, periods = 24, n_train = 200;
  std::uint64_t fleet_seed = 42, train_seed = 43;
  DatasetBudget budget;
  std::string out;
};

struct ForestArgs {
  std::string dataset, out;
  ForestOptions opt;
};

struct SolveArgs {
  std::string instance, init = "coldstart", policy, dataset, forest, out, log;
  double tol = 0.0025, time_limit = 300.0;
  std::vector<double> report_tols;
  bool timings = false;
};

struct BenchArgs {
  std::string config, preset, id, artifacts, runs = "runs";
  std::vector<int> sizes;
  std::vector<std::string> methods;
  int instances = 0, reference_instances = -1;
  double time_limit = 0.0, reference_time_limit = 0.0;
};

int do_generate(const GenerateArgs& a, std::ostream& out) {
  const std::uint64_t dseed = a.demand_seed ? a.demand_seed : a.seed + 1;
  const auto insts = make_instances(a.size, a.periods, a.count, a.seed, dseed);
  fs::create_directories(a.out);
  for (int i = 0; i < a.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "instance_%03d.json", i);
    write_instance(insts[i], (fs::path(a.out) / name).string());
  }
  out << "wrote " << a.count << " instance(s) to " << a.out << '\n';
  return 0;
}

int do_train(const TrainArgs& a, std::ostream& out) {
  a.cfg.validate();
  const auto fit = make_instances(a.size, a.periods, a.n_train, a.fleet_seed, a.train_seed);
  const auto val = make_instances(a.size, a.periods, a.n_val, a.fleet_seed, a.val_seed);
  auto p = MlpPolicy::create(fit.front().generators, a.periods, parse_hidden(a.hidden), a.cfg.seed);
  std::vector<Eigen::VectorXd> feats;
  for (const auto& inst : fit) feats.push_back(featurize(inst));
  p.fit_normalization(feats);
  const auto res = train(p, fit, val, a.cfg);
  res.best.save(a.out);
  nlohmann::ordered_json j;
  j["size"] = a.size;
  j["n_periods"] = a.periods;
  j["hidden"] = parse_hidden(a.hidden);
  j["lr"] = a.cfg.lr;
  j["batch"] = a.cfg.batch;
  j["seed"] = a.cfg.seed;
  j["steps"] = res.steps;
  auto& curve = j["curve"] = nlohmann::ordered_json::array();
  for (const auto& e : res.curve) {
    nlohmann::ordered_json point;
    point["step"] = e.step;
    point["metric"] = e.metric;
    point["lr"] = e.lr;
    curve.push_back(point);
  }
  write_text(a.out + ".json", j.dump(2) + "\n");
  out << "trained " << res.steps << " steps; best held-out bound " << res.curve.front().metric << " -> ";
  double best = res.curve.front().metric;
  for (const auto& e : res.curve) best = std::max(best, e.metric);
  out << best << '\n';
  return 0;
}

int do_dataset(const DatasetArgs& a, std::ostream& out, std::ostream& err) {
  const auto train = make_instances(a.size, a.periods, a.n_train, a.fleet_seed, a.train_seed);
  const auto d = build_dataset(train, a.budget, &err);
  if (d.records.empty()) throw SolveFailure("no training instance converged; dataset is empty");
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  d.save_jsonl(a.out);
  out << "stored " << d.records.size() << " dual(s) in " << a.out << '\n';
  return 0;
}

int do_forest(const ForestArgs& a, std::ostream& out) {
  const auto d = DualDataset::load_jsonl(a.dataset);
  const auto f = train_random_forest(d, a.opt);
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  f.save(a.out);
  out << "trained " << f.trees().size() << " trees on " << d.records.size() << " record(s)\n";
  return 0;
}

int do_solve(const SolveArgs& a, std::ostream& out) {
  const auto inst = read_instance(a.instance);
  const auto m = parse_init_method(a.init);
  InitArtifacts art;
  if (!a.policy.empty()) art.policy = MlpPolicy::load(a.policy);
  if (!a.dataset.empty()) art.dataset = DualDataset::load_jsonl(a.dataset);
  if (!a.forest.empty()) art.forest = RandomForest::load(a.forest);
  ColGenConfig cfg;
  cfg.gap_tolerance = a.tol;
  cfg.report_tolerances = a.report_tols;
  cfg.time_limit_seconds = a.time_limit;
  cfg.validate();
  InitDual init;
  ColGenResult res;
  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::trunc);
    if (!log_file) throw InputError("cannot write " + a.log);
  }
  try {
    init = initial_dual(m, inst, art);
    res = run_column_generation(inst, init.y, cfg, {}, init.seconds, a.log.empty() ? nullptr : &log_file);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw SolveFailure(e.what());
  }
  const auto text = solve_result_json(res, m, a.tol, init, a.timings);
  if (a.out.empty()) out << text;
  else write_text(a.out, text);
  if (res.status != ColGenStatus::Solved)
    throw SolveFailure("column generation ended with status " + to_string(res.status));
  return 0;
}

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchmarkConfig cfg;
  if (!a.config.empty()) {
    std::ifstream is(a.config);
    if (!is) throw InputError("cannot read " + a.config);
    std::stringstream ss;
    ss << is.rdbuf();
    cfg = BenchmarkConfig::from_json(ss.str());
  } else if (a.preset == "paper") {
    cfg = BenchmarkConfig::paper_preset();
  } else if (!a.preset.empty() && a.preset != "desk") {
    throw InputError("unknown preset: " + a.preset);
  }
  if (!a.id.empty()) cfg.bench_id = a.id;
  if (!a.sizes.empty()) cfg.sizes = a.sizes;
  if (!a.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(parse_init_method(m));
  }
  if (a.instances > 0) cfg.n_test_instances = a.instances;
  if (a.time_limit > 0.0) cfg.time_limit_seconds = a.time_limit;
  if (a.reference_instances >= 0) cfg.reference_instances = a.reference_instances;
  if (a.reference_time_limit > 0.0) cfg.reference_time_limit = a.reference_time_limit;
  if (!a.artifacts.empty()) cfg.artifacts_dir = a.artifacts;
  const auto rep = run_benchmark(cfg, runs_root(a.runs), &err);
  out << rep.markdown;
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Column generation for unit commitment with learned dual warmstarts"};
  app.require_subcommand(1);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "write seeded instances as JSON");
  gen->add_option("--size", ga.size, "generators")->capture_default_str();
  gen->add_option("--periods", ga.periods, "horizon (multiple of 24)")->capture_default_str();
  gen->add_option("--count", ga.count, "instances")->capture_default_str();
  gen->add_option("--seed", ga.seed, "fleet seed")->capture_default_str();
  gen->add_option("--demand-seed", ga.demand_seed, "demand seed (default: seed + 1)");
  gen->add_option("--out", ga.out, "output directory")->required();

  TrainArgs ta;
  ta.cfg.workers = 1;
  auto* tr = app.add_subcommand("train-policy", "train the dual policy network");
  tr->add_option("--size", ta.size)->capture_default_str();
  tr->add_option("--periods", ta.periods)->capture_default_str();
  tr->add_option("--fleet-seed", ta.fleet_seed)->capture_default_str();
  tr->add_option("--train-seed", ta.train_seed, "training demand pool")->capture_default_str();
  tr->add_option("--n-train", ta.n_train)->capture_default_str();
  tr->add_option("--val-seed", ta.val_seed, "validation demand pool for checkpoint selection")->capture_default_str();
  tr->add_option("--n-val", ta.n_val)->capture_default_str();
  tr->add_option("--hidden", ta.hidden, "desk, paper, or comma-separated widths")->capture_default_str();
  tr->add_option("--steps", ta.cfg.max_steps)->capture_default_str();
  tr->add_option("--max-seconds", ta.cfg.max_seconds, "wall budget, 0 = none")->capture_default_str();
  tr->add_option("--eval-every", ta.cfg.eval_every)->capture_default_str();
  tr->add_option("--patience", ta.cfg.plateau_patience)->capture_default_str();
  tr->add_option("--lr", ta.cfg.lr)->capture_default_str();
  tr->add_option("--batch", ta.cfg.batch)->capture_default_str();
  tr->add_option("--seed", ta.cfg.seed)->capture_default_str();
  tr->add_option("--workers", ta.cfg.workers, "only 1 is supported")->capture_default_str();
  tr->add_option("--out", ta.out, "checkpoint path (summary goes to <out>.json)")->required();

  DatasetArgs da;
  auto* ds = app.add_subcommand("build-dataset", "solve training instances and store their duals");
  ds->add_option("--size", da.size)->capture_default_str();
  ds->add_option("--periods", da.periods)->capture_default_str();
  ds->add_option("--fleet-seed", da.fleet_seed)->capture_default_str();
  ds->add_option("--train-seed", da.train_seed)->capture_default_str();
  ds->add_option("--n-train", da.n_train)->capture_default_str();
  ds->add_option("--max-seconds", da.budget.max_seconds, "total budget, 0 = none")->capture_default_str();
  ds->add_option("--tol", da.budget.gap_tolerance)->capture_default_str();
  ds->add_option("--time-limit", da.budget.time_limit_per_instance)->capture_default_str();
  ds->add_option("--out", da.out, "JSON-lines path")->required();

  ForestArgs fa;
  auto* fo = app.add_subcommand("train-forest", "fit the random-forest dual predictor");
  fo->add_option("--dataset", fa.dataset)->required()->check(CLI::ExistingFile);
  fo->add_option("--trees", fa.opt.n_trees)->capture_default_str();
  fo->add_option("--depth", fa.opt.max_depth)->capture_default_str();
  fo->add_option("--min-leaf", fa.opt.min_leaf)->capture_default_str();
  fo->add_option("--seed", fa.opt.seed)->capture_default_str();
  fo->add_option("--out", fa.out)->required();

  SolveArgs sa;
  auto* so = app.add_subcommand("solve", "run column generation on one instance");
  so->add_option("--instance", sa.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  so->add_option("--init", sa.init, "coldstart, lpr, nearest, forest or network")->capture_default_str();
  so->add_option("--tol", sa.tol, "relative gap tolerance")->capture_default_str();
  so->add_option("--report-tol", sa.report_tols, "looser tolerances to record crossings for");
  so->add_option("--time-limit", sa.time_limit)->capture_default_str();
  so->add_option("--policy", sa.policy)->check(CLI::ExistingFile);
  so->add_option("--dataset", sa.dataset)->check(CLI::ExistingFile);
  so->add_option("--forest", sa.forest)->check(CLI::ExistingFile);
  so->add_option("--out", sa.out, "result JSON (default: stdout)");
  so->add_option("--log", sa.log, "per-iteration JSON lines");
  so->add_flag("--timings", sa.timings, "include wall times in the result");

  BenchArgs ba;
  auto* be = app.add_subcommand("bench", "run the benchmark protocol (resumable)");
  be->add_option("--config", ba.config, "JSON config file")->check(CLI::ExistingFile);
  be->add_option("--preset", ba.preset, "desk or paper");
  be->add_option("--id", ba.id, "bench id (run directory name)");
  be->add_option("--sizes", ba.sizes);
  be->add_option("--methods", ba.methods);
  be->add_option("--instances", ba.instances);
  be->add_option("--time-limit", ba.time_limit);
  be->add_option("--reference-instances", ba.reference_instances);
  be->add_option("--reference-time-limit", ba.reference_time_limit);
  be->add_option("--artifacts", ba.artifacts);
  be->add_option("--runs-dir", ba.runs, "run root (UCDW_RUNS_DIR overrides)")->capture_default_str();

  std::string report_id, report_runs = "runs";
  auto* re = app.add_subcommand("report", "aggregate stored runs into report.csv and report.md");
  re->add_option("--id", report_id)->required();
  re->add_option("--runs-dir", report_runs, "run root (UCDW_RUNS_DIR overrides)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return do_generate(ga, out);
    if (*tr) return do_train(ta, out);
    if (*ds) return do_dataset(da, out, err);
    if (*fo) return do_forest(fa, out);
    if (*so) return do_solve(sa, out);
    if (*be) return do_bench(ba, out, err);
    if (*re) {
      const auto rep = emit_report((fs::path(runs_root(report_runs)) / report_id).string());
      out << rep.markdown;
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const SolveFailure& e) {
    err << "solve failed: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "solve failed: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace ucdw
