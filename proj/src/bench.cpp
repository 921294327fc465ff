#include "ucdw/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "ucdw/extensive_uc.hpp"

namespace ucdw {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

double num_or(const nlohmann::json& j, const char* key, double fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<double>();
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw InputError("cannot read " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Write-then-rename so an interrupted benchmark never leaves a half-written cell behind.
void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot write " + tmp.string());
    os << text;
    if (!os) throw InputError("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

void check_schema(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kRunSchemaVersion)
    throw InputError("schema version mismatch (expected " + std::to_string(kRunSchemaVersion) + ")");
}

std::string fmt(double v, int prec = 6) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

std::string cell_name(int instance) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03d.json", instance);
  return buf;
}

}  // namespace

std::string to_string(InitMethod m) {
  switch (m) {
    case InitMethod::Coldstart: return "coldstart";
    case InitMethod::Lpr: return "lpr";
    case InitMethod::Nearest: return "nearest";
    case InitMethod::Forest: return "forest";
    case InitMethod::Network: return "network";
  }
  return "?";
}

InitMethod parse_init_method(const std::string& name) {
  for (auto m : all_init_methods())
    if (to_string(m) == name) return m;
  throw InputError("unknown init method: " + name);
}

const std::vector<InitMethod>& all_init_methods() {
  static const std::vector<InitMethod> all{InitMethod::Coldstart, InitMethod::Lpr, InitMethod::Nearest,
                                           InitMethod::Forest, InitMethod::Network};
  return all;
}

BenchmarkConfig BenchmarkConfig::paper_preset() {
  BenchmarkConfig c;
  c.bench_id = "paper";
  c.sizes = {200, 600, 1000};
  c.n_periods = 48;
  return c;
}

void BenchmarkConfig::validate() const {
  if (bench_id.empty() || bench_id.find('/') != std::string::npos || bench_id == "." || bench_id == "..")
    throw InputError("bench id must be a plain directory name");
  if (sizes.empty()) throw InputError("no fleet sizes");
  for (int s : sizes)
    if (s <= 0) throw InputError("fleet sizes must be positive");
  if (n_periods <= 0 || n_periods % 24 != 0) throw InputError("n_periods must be a positive multiple of 24");
  if (n_test_instances <= 0) throw InputError("n_test_instances must be positive");
  if (tolerances.empty()) throw InputError("no tolerances");
  for (std::size_t i = 0; i < tolerances.size(); ++i) {
    if (!(tolerances[i] > 0.0)) throw InputError("tolerances must be positive");
    if (i > 0 && !(tolerances[i] < tolerances[i - 1])) throw InputError("tolerances must be strictly descending");
  }
  if (!(time_limit_seconds > 0.0)) throw InputError("time limit must be positive");
  if (methods.empty()) throw InputError("no methods");
  if (reference_instances < 0 || !(reference_time_limit > 0.0)) throw InputError("bad reference settings");
}

std::string BenchmarkConfig::to_json() const {
  ordered_json j;
  j["bench_id"] = bench_id;
  j["sizes"] = sizes;
  j["n_periods"] = n_periods;
  j["n_test_instances"] = n_test_instances;
  j["tolerances"] = tolerances;
  j["time_limit_seconds"] = time_limit_seconds;
  std::vector<std::string> ms;
  for (auto m : methods) ms.push_back(to_string(m));
  j["methods"] = ms;
  j["fleet_seed"] = fleet_seed;
  j["train_seed"] = train_seed;
  j["test_seed"] = test_seed;
  j["reference_instances"] = reference_instances;
  j["reference_time_limit"] = reference_time_limit;
  j["artifacts_dir"] = artifacts_dir;
  return j.dump(2) + "\n";
}

BenchmarkConfig BenchmarkConfig::from_json(const std::string& text) {
  BenchmarkConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw InputError("benchmark config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      if (k == "bench_id") c.bench_id = v.get<std::string>();
      else if (k == "sizes") c.sizes = v.get<std::vector<int>>();
      else if (k == "n_periods") c.n_periods = v.get<int>();
      else if (k == "n_test_instances") c.n_test_instances = v.get<int>();
      else if (k == "tolerances") c.tolerances = v.get<std::vector<double>>();
      else if (k == "time_limit_seconds") c.time_limit_seconds = v.get<double>();
      else if (k == "methods") {
        c.methods.clear();
        for (const auto& m : v.get<std::vector<std::string>>()) c.methods.push_back(parse_init_method(m));
      } else if (k == "fleet_seed") c.fleet_seed = v.get<std::uint64_t>();
      else if (k == "train_seed") c.train_seed = v.get<std::uint64_t>();
      else if (k == "test_seed") c.test_seed = v.get<std::uint64_t>();
      else if (k == "reference_instances") c.reference_instances = v.get<int>();
      else if (k == "reference_time_limit") c.reference_time_limit = v.get<double>();
      else if (k == "artifacts_dir") c.artifacts_dir = v.get<std::string>();
      else throw InputError("unknown config key: " + k);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed benchmark config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<UcInstance> make_instances(int size, int n_periods, int count, std::uint64_t fleet_seed,
                                       std::uint64_t demand_seed) {
  auto fleet = generate_fleet(size, fleet_seed);
  const auto pool = generate_demand(fleet, n_periods, count, demand_seed);
  std::vector<UcInstance> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(make_instance(fleet, pool.profiles[i], demand_seed * 100003ULL + i, pool.scaling));
  return out;
}

std::string artifact_path(const std::string& dir, int size, InitMethod m) {
  const fs::path base = fs::path(dir) / std::to_string(size);
  switch (m) {
    case InitMethod::Network: return (base / "policy.bin").string();
    case InitMethod::Nearest: return (base / "dataset.jsonl").string();
    case InitMethod::Forest: return (base / "forest.bin").string();
    default: return "";
  }
}

InitArtifacts InitArtifacts::load(const std::string& dir, int size) {
  InitArtifacts a;
  if (const auto p = artifact_path(dir, size, InitMethod::Network); fs::exists(p)) a.policy = MlpPolicy::load(p);
  if (const auto p = artifact_path(dir, size, InitMethod::Nearest); fs::exists(p))
    a.dataset = DualDataset::load_jsonl(p);
  if (const auto p = artifact_path(dir, size, InitMethod::Forest); fs::exists(p)) a.forest = RandomForest::load(p);
  return a;
}

bool InitArtifacts::has(InitMethod m) const {
  switch (m) {
    case InitMethod::Network: return policy.has_value();
    case InitMethod::Nearest: return dataset.has_value() && !dataset->records.empty();
    case InitMethod::Forest: return forest.has_value();
    default: return true;
  }
}

InitDual initial_dual(InitMethod m, const UcInstance& inst, const InitArtifacts& a) {
  if (!a.has(m)) throw InputError("no trained artifact for method " + to_string(m));
  InitDual out;
  const auto t0 = Clock::now();
  switch (m) {
    case InitMethod::Coldstart: out.y = coldstart_dual(inst); break;
    case InitMethod::Lpr: {
      const auto r = lpr_dual(inst);
      out.y = r.y;
      break;
    }
    case InitMethod::Nearest: out.y = nearest_neighbour_dual(*a.dataset, inst); break;
    case InitMethod::Forest: out.y = rf_predict(*a.forest, inst); break;
    case InitMethod::Network:
      a.policy->check_instance(inst);
      out.y = forward(*a.policy, featurize(inst));
      break;
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

std::string to_json(const RunRecord& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["bench_id"] = r.bench_id;
  j["size"] = r.size;
  j["method"] = r.method;
  j["instance"] = r.instance;
  j["time_limit"] = r.time_limit;
  j["status"] = r.status;
  j["error"] = r.error;
  j["iterations"] = r.iterations;
  j["seconds"] = r.seconds;
  j["init_seconds"] = r.init_seconds;
  j["lb"] = num(r.lb);
  j["ub"] = num(r.ub);
  j["first_lb"] = num(r.first_lb);
  j["first_ub"] = num(r.first_ub);
  auto& cs = j["crossings"] = ordered_json::array();
  for (const auto& c : r.crossings) {
    ordered_json e;
    e["tolerance"] = c.tolerance;
    e["reached"] = c.reached;
    e["iteration"] = c.iteration;
    e["seconds"] = c.seconds;
    e["t_rmp"] = c.t_rmp;
    e["t_pricing"] = c.t_pricing;
    e["t_heuristic"] = c.t_heuristic;
    cs.push_back(e);
  }
  return j.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
  RunRecord r;
  try {
    const auto j = nlohmann::json::parse(text);
    check_schema(j);
    r.bench_id = j.at("bench_id").get<std::string>();
    r.size = j.at("size").get<int>();
    r.method = j.at("method").get<std::string>();
    r.instance = j.at("instance").get<int>();
    r.time_limit = j.at("time_limit").get<double>();
    r.status = j.at("status").get<std::string>();
    r.error = j.at("error").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.seconds = j.at("seconds").get<double>();
    r.init_seconds = j.at("init_seconds").get<double>();
    r.lb = num_or(j, "lb", kNoBound);
    r.ub = num_or(j, "ub", std::numeric_limits<double>::infinity());
    r.first_lb = num_or(j, "first_lb", kNoBound);
    r.first_ub = num_or(j, "first_ub", std::numeric_limits<double>::infinity());
    for (const auto& e : j.at("crossings")) {
      CrossingRecord c;
      c.tolerance = e.at("tolerance").get<double>();
      c.reached = e.at("reached").get<bool>();
      c.iteration = e.at("iteration").get<int>();
      c.seconds = e.at("seconds").get<double>();
      c.t_rmp = e.at("t_rmp").get<double>();
      c.t_pricing = e.at("t_pricing").get<double>();
      c.t_heuristic = e.at("t_heuristic").get<double>();
      r.crossings.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed run record: ") + e.what());
  }
  return r;
}

RunRecord make_run_record(const ColGenResult& res, double init_seconds, const std::vector<double>& tolerances) {
  if (res.crossings.size() != tolerances.size()) throw InputError("crossings do not match the tolerances");
  RunRecord r;
  r.status = to_string(res.status);
  r.iterations = res.iterations;
  r.seconds = res.seconds + init_seconds;
  r.init_seconds = init_seconds;
  r.lb = res.best_lower_bound;
  r.ub = res.best_solution ? res.best_solution->total_cost : std::numeric_limits<double>::infinity();
  if (!res.log.empty()) {
    r.first_lb = res.log.front().lb;
    r.first_ub = res.log.front().ub;
  }
  for (std::size_t i = 0; i < tolerances.size(); ++i) {
    const auto& x = res.crossings[i];
    CrossingRecord c;
    c.tolerance = tolerances[i];
    c.reached = x.iteration >= 0;
    c.iteration = c.reached ? x.iteration : res.iterations;
    c.seconds = c.reached ? x.seconds : r.seconds;
    for (const auto& rec : res.log) {
      if (rec.iter > c.iteration) break;
      c.t_rmp += rec.t_rmp;
      c.t_pricing += rec.t_pricing;
      c.t_heuristic += rec.t_heuristic;
    }
    r.crossings.push_back(c);
  }
  return r;
}

std::string to_json(const ReferenceRecord& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["size"] = r.size;
  j["instance"] = r.instance;
  j["lower_bound"] = num(r.lower_bound);
  j["objective"] = num(r.objective);
  j["status"] = r.status;
  j["seconds"] = r.seconds;
  return j.dump(2) + "\n";
}

ReferenceRecord reference_record_from_json(const std::string& text) {
  ReferenceRecord r;
  try {
    const auto j = nlohmann::json::parse(text);
    check_schema(j);
    r.size = j.at("size").get<int>();
    r.instance = j.at("instance").get<int>();
    r.lower_bound = num_or(j, "lower_bound", kNoBound);
    r.objective = num_or(j, "objective", std::numeric_limits<double>::infinity());
    r.status = j.at("status").get<std::string>();
    r.seconds = j.at("seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed reference record: ") + e.what());
  }
  return r;
}

ReferenceRecord compute_reference(const UcInstance& inst, double time_limit) {
  const auto t0 = Clock::now();
  ExtensiveOptions opt;
  opt.time_limit = time_limit;
  const auto m = solve_extensive_uc(inst, opt);
  ReferenceRecord r;
  r.size = inst.n_generators();
  r.status = to_string(m.status);
  r.lower_bound = m.status == lp::MilpStatus::Optimal ? m.objective : m.bound;
  if (m.has_incumbent) r.objective = m.objective;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

RunRecord run_cell(const BenchmarkConfig& cfg, int size, int index, const UcInstance& inst, InitMethod m,
                   const InitArtifacts& artifacts) {
  RunRecord r;
  try {
    const auto init = initial_dual(m, inst, artifacts);
    ColGenConfig cc;
    cc.gap_tolerance = cfg.tolerances.back();
    cc.report_tolerances.assign(cfg.tolerances.begin(), cfg.tolerances.end() - 1);
    cc.time_limit_seconds = cfg.time_limit_seconds;
    const auto res = run_column_generation(inst, init.y, cc, {}, init.seconds);
    r = make_run_record(res, init.seconds, cfg.tolerances);
  } catch (const std::exception& e) {
    r = RunRecord{};
    r.status = "error";
    r.error = e.what();
    for (double tol : cfg.tolerances) r.crossings.push_back({tol, false, 0, cfg.time_limit_seconds, 0, 0, 0});
  }
  r.bench_id = cfg.bench_id;
  r.size = size;
  r.method = to_string(m);
  r.instance = index;
  r.time_limit = cfg.time_limit_seconds;
  return r;
}

BenchmarkReport emit_report(const std::string& bench_dir) {
  const fs::path root(bench_dir);
  if (!fs::is_directory(root)) throw InputError("no run directory: " + bench_dir);
  std::map<std::pair<int, int>, ReferenceRecord> refs;
  std::map<std::pair<int, std::string>, std::vector<RunRecord>> runs;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".json" && e.path().parent_path() != root)
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const std::string text = read_file(p);
    if (p.parent_path().filename() == "reference") {
      const auto r = reference_record_from_json(text);
      refs[{r.size, r.instance}] = r;
    } else {
      auto r = run_record_from_json(text);
      runs[{r.size, r.method}].push_back(std::move(r));
    }
  }
  if (runs.empty()) throw InputError("no runs under " + bench_dir);

  BenchmarkReport rep;
  for (auto& [key, list] : runs) {
    std::sort(list.begin(), list.end(), [](const RunRecord& a, const RunRecord& b) { return a.instance < b.instance; });
    double slb = 0.0, sub = 0.0, init = 0.0;
    int nlb = 0, nub = 0;
    for (const auto& r : list) {
      init += r.init_seconds;
      const auto it = refs.find({r.size, r.instance});
      if (it == refs.end() || !std::isfinite(it->second.lower_bound) || it->second.lower_bound <= 0.0) continue;
      if (std::isfinite(r.first_lb)) {
        slb += r.first_lb / it->second.lower_bound;
        ++nlb;
      }
      if (std::isfinite(r.first_ub)) {
        sub += r.first_ub / it->second.lower_bound;
        ++nub;
      }
    }
    const std::size_t n_tol = list.front().crossings.size();
    for (std::size_t k = 0; k < n_tol; ++k) {
      ReportRow row;
      row.size = key.first;
      row.method = key.second;
      row.tolerance = list.front().crossings[k].tolerance;
      row.runs = static_cast<int>(list.size());
      for (const auto& r : list) {
        if (r.crossings.size() != n_tol || r.crossings[k].tolerance != row.tolerance)
          throw InputError("runs of " + key.second + " disagree on tolerances");
        const auto& c = r.crossings[k];
        // Unsolved runs count at the time limit, without penalty.
        row.solved += c.reached;
        row.mean_time_s += c.reached ? c.seconds : r.time_limit;
        row.mean_iters += c.iteration;
        row.t_rmp += c.t_rmp;
        row.t_pricing += c.t_pricing;
        row.t_heuristic += c.t_heuristic;
      }
      const double n = static_cast<double>(list.size());
      row.mean_time_s /= n;
      row.mean_iters /= n;
      row.t_rmp /= n;
      row.t_pricing /= n;
      row.t_heuristic /= n;
      row.init_time_s = init / n;
      row.mean_scaled_lb = nlb ? slb / nlb : std::nan("");
      row.mean_scaled_ub = nub ? sub / nub : std::nan("");
      rep.rows.push_back(row);
    }
  }
  std::stable_sort(rep.rows.begin(), rep.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.size != b.size) return a.size < b.size;
    if (a.method != b.method) return a.method < b.method;
    return a.tolerance > b.tolerance;
  });

  std::ostringstream csv;
  csv << kReportColumns << '\n';
  for (const auto& r : rep.rows)
    csv << r.size << ',' << r.method << ',' << fmt(r.tolerance) << ',' << r.solved << ',' << fmt(r.mean_time_s) << ','
        << fmt(r.mean_iters) << ',' << fmt(r.mean_scaled_lb, 8) << ',' << fmt(r.mean_scaled_ub, 8) << ','
        << fmt(r.init_time_s) << ',' << fmt(r.t_rmp) << ',' << fmt(r.t_pricing) << ',' << fmt(r.t_heuristic) << '\n';
  rep.csv = csv.str();

  std::ostringstream md;
  md << "## Bounds after one iteration (scaled by the reference lower bound)\n\n"
     << "| size | method | lb | ub | init (s) |\n|---:|---|---:|---:|---:|\n";
  std::set<std::pair<int, std::string>> shown;
  for (const auto& r : rep.rows)
    if (shown.insert({r.size, r.method}).second)
      md << "| " << r.size << " | " << r.method << " | " << fmt(r.mean_scaled_lb, 5) << " | "
         << fmt(r.mean_scaled_ub, 5) << " | " << fmt(r.init_time_s, 3) << " |\n";
  md << "\n## Solved instances, mean time and iterations\n\n"
     << "| size | tolerance | method | solved | time (s) | iterations |\n|---:|---:|---|---:|---:|---:|\n";
  for (const auto& r : rep.rows)
    md << "| " << r.size << " | " << fmt(100.0 * r.tolerance, 3) << "% | " << r.method << " | " << r.solved << "/"
       << r.runs << " | " << fmt(r.mean_time_s, 4) << " | " << fmt(r.mean_iters, 4) << " |\n";
  md << "\n## Time breakdown (s)\n\n"
     << "| size | tolerance | method | init | rmp | pricing | heuristic |\n|---:|---:|---|---:|---:|---:|---:|\n";
  for (const auto& r : rep.rows)
    md << "| " << r.size << " | " << fmt(100.0 * r.tolerance, 3) << "% | " << r.method << " | " << fmt(r.init_time_s, 3)
       << " | " << fmt(r.t_rmp, 3) << " | " << fmt(r.t_pricing, 3) << " | " << fmt(r.t_heuristic, 3) << " |\n";
  rep.markdown = md.str();

  write_file(root / "report.csv", rep.csv);
  write_file(root / "report.md", rep.markdown);
  return rep;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const std::string& runs_root, std::ostream* log) {
  cfg.validate();
  const fs::path bench = fs::path(runs_root) / cfg.bench_id;
  const fs::path cfg_path = bench / "config.json";
  const std::string cfg_text = cfg.to_json();
  if (fs::exists(cfg_path)) {
    if (read_file(cfg_path) != cfg_text)
      throw InputError("run directory " + bench.string() + " holds a different config; use another bench id");
  } else {
    write_file(cfg_path, cfg_text);
  }
  for (int size : cfg.sizes) {
    const auto tests = make_instances(size, cfg.n_periods, cfg.n_test_instances, cfg.fleet_seed, cfg.test_seed);
    const auto artifacts = InitArtifacts::load(cfg.artifacts_dir, size);
    std::vector<InitMethod> methods;
    for (auto m : cfg.methods) {
      if (artifacts.has(m)) methods.push_back(m);
      else if (log) *log << "warning: size " << size << ": no artifact for " << to_string(m) << ", skipped\n";
    }
    const fs::path sdir = bench / std::to_string(size);
    for (int i = 0; i < std::min(cfg.reference_instances, cfg.n_test_instances); ++i) {
      const fs::path p = sdir / "reference" / cell_name(i);
      if (fs::exists(p)) continue;
      auto ref = compute_reference(tests[i], cfg.reference_time_limit);
      ref.instance = i;
      write_file(p, to_json(ref));
      if (log) *log << "reference size " << size << " instance " << i << ": " << ref.status << '\n';
    }
    for (int i = 0; i < cfg.n_test_instances; ++i)
      for (auto m : methods) {
        const fs::path p = sdir / to_string(m) / cell_name(i);
        if (fs::exists(p)) {
          try {
            run_record_from_json(read_file(p));
            continue;
          } catch (const InputError&) {
            // rerun unreadable cells
          }
        }
        const auto r = run_cell(cfg, size, i, tests[i], m, artifacts);
        write_file(p, to_json(r));
        if (log)
          *log << "size " << size << " instance " << i << ' ' << r.method << ": " << r.status << " iters "
               << r.iterations << '\n';
      }
  }
  return emit_report(bench.string());
}

std::string solve_result_json(const ColGenResult& res, InitMethod m, double tolerance, const InitDual& init,
                              bool timings) {
  ordered_json j;
  j["init"] = to_string(m);
  j["tolerance"] = tolerance;
  j["status"] = to_string(res.status);
  j["lower_bound"] = num(res.best_lower_bound);
  j["upper_bound"] = num(res.best_solution ? res.best_solution->total_cost : std::numeric_limits<double>::infinity());
  j["gap"] = num(res.gap);
  j["iterations"] = res.iterations;
  auto& cs = j["crossings"] = ordered_json::array();
  for (const auto& c : res.crossings) {
    ordered_json e;
    e["tolerance"] = c.tolerance;
    e["iteration"] = c.iteration;
    if (timings) e["seconds"] = c.seconds;
    cs.push_back(e);
  }
  auto& lg = j["log"] = ordered_json::array();
  for (const auto& r : res.log) {
    ordered_json e;
    e["iter"] = r.iter;
    e["y_hash"] = r.y_hash;
    e["lb"] = num(r.lb);
    e["ub"] = num(r.ub);
    e["mu"] = r.mu;
    if (timings) {
      e["t_init"] = r.t_init;
      e["t_rmp"] = r.t_rmp;
      e["t_pricing"] = r.t_pricing;
      e["t_heuristic"] = r.t_heuristic;
    }
    lg.push_back(e);
  }
  j["initial_dual"] = {{"y_load", init.y.y_load}, {"y_reserve", init.y.y_reserve}};
  if (res.best_solution) {
    ordered_json on = ordered_json::array(), p = ordered_json::array();
    for (const auto& sc : res.best_solution->schedules) {
      on.push_back(sc.on);
      p.push_back(sc.power);
    }
    ordered_json s;
    s["total_cost"] = res.best_solution->total_cost;
    s["on"] = std::move(on);
    s["power"] = std::move(p);
    j["solution"] = std::move(s);
  } else {
    j["solution"] = nullptr;
  }
  if (timings) {
    j["init_seconds"] = init.seconds;
    j["seconds"] = res.seconds;
  }
  return j.dump(2) + "\n";
}

}  // namespace ucdw
