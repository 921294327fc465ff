#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "ucdw/bench.hpp"

using namespace ucdw;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ucdw_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "ucdw");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::string slurp(const std::string& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void put(const std::string& p, const std::string& text) {
  fs::create_directories(fs::path(p).parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// Without fixed costs or sizeable minimum outputs the decomposition bound is tight.
UcInstance gapless_instance() {
  auto fleet = generate_fleet(3, 5);
  for (auto& g : fleet) {
    g.no_load_cost = 0.0;
    g.startup_cost = 0.0;
    g.p_min = 0.01 * g.p_max;
  }
  const auto pool = generate_demand(fleet, 24, 1, 6);
  return make_instance(fleet, pool.profiles[0], 6, pool.scaling);
}

RunRecord fixture_run(int instance, double first_lb, double first_ub, bool reached, double secs, int iters,
                      double init) {
  RunRecord r;
  r.bench_id = "fx";
  r.size = 5;
  r.method = "network";
  r.instance = instance;
  r.time_limit = 300.0;
  r.status = reached ? "solved" : "time-limit";
  r.iterations = iters;
  r.seconds = reached ? secs : 300.0;
  r.init_seconds = init;
  r.first_lb = first_lb;
  r.first_ub = first_ub;
  r.crossings.push_back({0.01, true, 2, 1.0, 0.5, 0.25, 0.125});
  r.crossings.push_back({0.0025, reached, iters, reached ? secs : 300.0, 1.0, 2.0, 3.0});
  return r;
}

}  // namespace

TEST_CASE("generate is deterministic") {
  TempDir d("gen");
  REQUIRE(cli({"generate", "--size", "4", "--seed", "7", "--count", "2", "--out", d / "a"}) == 0);
  REQUIRE(cli({"generate", "--size", "4", "--seed", "7", "--count", "2", "--out", d / "b"}) == 0);
  CHECK(slurp(d / "a/instance_000.json") == slurp(d / "b/instance_000.json"));
  CHECK(slurp(d / "a/instance_001.json") == slurp(d / "b/instance_001.json"));
  CHECK(slurp(d / "a/instance_000.json") != slurp(d / "a/instance_001.json"));
  CHECK(read_instance(d / "a/instance_000.json").n_generators() == 4);
}

TEST_CASE("config errors exit with 2") {
  TempDir d("err");
  CHECK(cli({"solve", "--bogus"}) == 2);
  CHECK(cli({"solve", "--instance", d / "missing.json"}) == 2);
  CHECK(cli({}) == 2);
  CHECK(cli({"report", "--id", "nothing", "--runs-dir", d / "runs"}) == 2);
  fs::create_directories(d / "runs/empty");
  CHECK(cli({"report", "--id", "empty", "--runs-dir", d / "runs"}) == 2);
  REQUIRE(cli({"generate", "--size", "3", "--out", d / "g"}) == 0);
  CHECK(cli({"solve", "--instance", d / "g/instance_000.json", "--init", "telepathy"}) == 2);
  CHECK(cli({"solve", "--instance", d / "g/instance_000.json", "--init", "network"}) == 2);
  CHECK(cli({"train-policy", "--workers", "2", "--out", d / "p.bin"}) == 2);
  std::string help;
  CHECK(cli({"--help"}, &help) == 0);
  CHECK(help.find("train-policy") != std::string::npos);
}

TEST_CASE("solve on a tiny instance succeeds and is byte-reproducible") {
  TempDir d("solve");
  write_instance(gapless_instance(), d / "inst.json");
  REQUIRE(cli({"solve", "--instance", d / "inst.json", "--init", "coldstart", "--tol", "0.01", "--out", d / "a.json"}) == 0);
  REQUIRE(cli({"solve", "--instance", d / "inst.json", "--init", "coldstart", "--tol", "0.01", "--out", d / "b.json"}) == 0);
  CHECK(slurp(d / "a.json") == slurp(d / "b.json"));
  const auto j = nlohmann::json::parse(slurp(d / "a.json"));
  CHECK(j.at("status") == "solved");
  CHECK(j.at("gap").get<double>() <= 0.01);
  CHECK(j.find("seconds") == j.end());
  REQUIRE(cli({"solve", "--instance", d / "inst.json", "--init", "lpr", "--timings", "--out", d / "c.json"}) == 0);
  CHECK(nlohmann::json::parse(slurp(d / "c.json")).at("init_seconds").get<double>() > 0.0);

  // A real fleet has a decomposition gap far above 0.25% at three units.
  REQUIRE(cli({"generate", "--size", "3", "--out", d / "g"}) == 0);
  CHECK(cli({"solve", "--instance", d / "g/instance_000.json", "--out", d / "e.json"}) == 3);
  CHECK(nlohmann::json::parse(slurp(d / "e.json")).at("status") == "mp-optimal");
}

TEST_CASE("train-policy is byte-reproducible") {
  TempDir d("train");
  const std::vector<std::string> base{"train-policy", "--size", "3", "--n-train", "4", "--n-val", "2",
                                      "--hidden", "8,8", "--steps", "20", "--eval-every", "10", "--lr", "1e-3"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", d / "a.bin"});
  b.insert(b.end(), {"--out", d / "b.bin"});
  REQUIRE(cli(a) == 0);
  REQUIRE(cli(b) == 0);
  CHECK(slurp(d / "a.bin") == slurp(d / "b.bin"));
  CHECK(slurp(d / "a.bin.json") == slurp(d / "b.bin.json"));
  CHECK(MlpPolicy::load(d / "a.bin").dims() == std::vector<int>{6 * 8, 8, 8, 6 * 8});
}

TEST_CASE("dataset and forest commands chain") {
  TempDir d("chain");
  REQUIRE(cli({"build-dataset", "--size", "3", "--n-train", "3", "--tol", "0.3", "--out", d / "a/3/dataset.jsonl"}) == 0);
  REQUIRE(cli({"train-forest", "--dataset", d / "a/3/dataset.jsonl", "--trees", "5", "--out", d / "a/3/forest.bin"}) == 0);
  const auto art = InitArtifacts::load(d / "a", 3);
  CHECK(art.has(InitMethod::Nearest));
  CHECK(art.has(InitMethod::Forest));
  CHECK_FALSE(art.has(InitMethod::Network));
  const auto inst = make_instances(3, 24, 1, 42, 44).front();
  for (auto m : {InitMethod::Nearest, InitMethod::Forest}) {
    const auto y = initial_dual(m, inst, art);
    for (double v : y.y.y_load) CHECK(v >= 0.0);
  }
}

TEST_CASE("benchmark config json") {
  BenchmarkConfig c;
  c.sizes = {3, 4};
  c.methods = {InitMethod::Lpr, InitMethod::Network};
  const auto back = BenchmarkConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(BenchmarkConfig::from_json("{}").sizes == std::vector<int>{5, 10, 20});
  CHECK_THROWS_AS(BenchmarkConfig::from_json(R"({"typo": 1})"), InputError);
  CHECK_THROWS_AS(BenchmarkConfig::from_json(R"({"tolerances": [0.001, 0.01]})"), InputError);
  CHECK_THROWS_AS(BenchmarkConfig::from_json(R"({"methods": []})"), InputError);
  CHECK_THROWS_AS(BenchmarkConfig::from_json("[1"), InputError);
  CHECK(BenchmarkConfig::paper_preset().sizes == std::vector<int>{200, 600, 1000});
}

TEST_CASE("run records sum phase times up to each crossing") {
  ColGenResult res;
  res.iterations = 3;
  res.seconds = 2.0;
  res.best_lower_bound = 9.0;
  for (int k = 1; k <= 3; ++k) {
    IterationRecord r;
    r.iter = k;
    r.lb = k;
    r.ub = 20 - k;
    r.t_rmp = 1.0 * k;
    r.t_pricing = 10.0 * k;
    r.t_heuristic = 100.0 * k;
    res.log.push_back(r);
  }
  res.crossings = {{0.01, 2, 1.5}, {0.0025, -1, 0.0}};
  const auto r = make_run_record(res, 0.5, {0.01, 0.0025});
  CHECK(r.first_lb == 1.0);
  CHECK(r.first_ub == 19.0);
  CHECK(r.seconds == 2.5);
  CHECK(r.crossings[0].reached);
  CHECK(r.crossings[0].iteration == 2);
  CHECK(r.crossings[0].t_rmp == 3.0);
  CHECK(r.crossings[0].t_pricing == 30.0);
  CHECK(r.crossings[0].t_heuristic == 300.0);
  CHECK_FALSE(r.crossings[1].reached);
  CHECK(r.crossings[1].iteration == 3);
  CHECK(r.crossings[1].seconds == 2.5);
  CHECK(r.crossings[1].t_rmp == 6.0);
  const auto back = run_record_from_json(to_json(r));
  CHECK(to_json(back) == to_json(r));
  CHECK(std::isinf(run_record_from_json(to_json(RunRecord{})).ub));
}

TEST_CASE("report aggregates a three-run fixture") {
  TempDir d("report");
  const std::string bench = d / "fx";
  put(bench + "/5/network/000.json", to_json(fixture_run(0, 90.0, 120.0, true, 4.0, 6, 0.01)));
  put(bench + "/5/network/001.json", to_json(fixture_run(1, 95.0, 110.0, true, 8.0, 10, 0.03)));
  put(bench + "/5/network/002.json", to_json(fixture_run(2, 80.0, 130.0, false, 0.0, 50, 0.02)));
  ReferenceRecord a, b;
  a.size = b.size = 5;
  a.instance = 0;
  a.lower_bound = 100.0;
  b.instance = 1;
  b.lower_bound = 100.0;
  put(bench + "/5/reference/000.json", to_json(a));
  put(bench + "/5/reference/001.json", to_json(b));

  const auto rep = emit_report(bench);
  REQUIRE(rep.rows.size() == 2);
  const auto& loose = rep.rows[0];
  const auto& tight = rep.rows[1];
  CHECK(loose.tolerance == 0.01);
  CHECK(loose.solved == 3);
  CHECK(loose.mean_time_s == doctest::Approx(1.0));
  CHECK(tight.tolerance == 0.0025);
  CHECK(tight.runs == 3);
  CHECK(tight.solved == 2);
  CHECK(tight.mean_time_s == doctest::Approx((4.0 + 8.0 + 300.0) / 3));
  CHECK(tight.mean_iters == doctest::Approx((6.0 + 10.0 + 50.0) / 3));
  // Only instances 0 and 1 have references.
  CHECK(tight.mean_scaled_lb == doctest::Approx((0.90 + 0.95) / 2));
  CHECK(tight.mean_scaled_ub == doctest::Approx((1.20 + 1.10) / 2));
  CHECK(tight.init_time_s == doctest::Approx(0.02));
  CHECK(tight.t_heuristic == doctest::Approx(3.0));
  CHECK(rep.csv.substr(0, rep.csv.find('\n')) == kReportColumns);
  CHECK(rep.csv.find("5,network,0.0025,2,104,22,0.925,1.15,0.02,1,2,3\n") != std::string::npos);

  const auto csv = slurp(bench + "/report.csv");
  const auto again = emit_report(bench);
  CHECK(again.csv == rep.csv);
  CHECK(slurp(bench + "/report.csv") == csv);

  auto bad = nlohmann::json::parse(to_json(fixture_run(3, 1, 1, true, 1, 1, 0)));
  bad["schema_version"] = 99;
  put(bench + "/5/network/003.json", bad.dump());
  CHECK_THROWS_AS(emit_report(bench), InputError);
}

TEST_CASE("benchmark runs, resumes and refuses a changed config") {
  TempDir d("bench");
  BenchmarkConfig c;
  c.bench_id = "tiny";
  c.sizes = {3};
  c.n_test_instances = 2;
  c.methods = {InitMethod::Coldstart, InitMethod::Lpr, InitMethod::Network};
  c.time_limit_seconds = 20.0;
  c.reference_instances = 1;
  c.reference_time_limit = 20.0;
  c.artifacts_dir = d / "none";
  std::ostringstream log;
  const auto rep = run_benchmark(c, d / "runs", &log);
  CHECK(log.str().find("no artifact for network") != std::string::npos);
  CHECK(rep.rows.size() == 2 * 3);
  CHECK(fs::exists(d / "runs/tiny/3/coldstart/001.json"));
  CHECK(fs::exists(d / "runs/tiny/3/lpr/000.json"));
  CHECK(fs::exists(d / "runs/tiny/3/reference/000.json"));
  CHECK_FALSE(fs::exists(d / "runs/tiny/3/reference/001.json"));
  for (const auto& r : rep.rows) {
    CHECK(r.runs == 2);
    CHECK(r.mean_scaled_ub >= 1.0 - 1e-9);
    CHECK(r.mean_scaled_lb <= 1.0 + 1e-9);
  }
  const auto lpr = run_record_from_json(slurp(d / "runs/tiny/3/lpr/000.json"));
  const auto cold = run_record_from_json(slurp(d / "runs/tiny/3/coldstart/000.json"));
  CHECK(lpr.init_seconds > cold.init_seconds);
  CHECK(cold.first_lb == doctest::Approx(0.0));

  const auto before = slurp(d / "runs/tiny/3/lpr/000.json");
  fs::remove(d / "runs/tiny/3/coldstart/001.json");
  std::ostringstream log2;
  run_benchmark(c, d / "runs", &log2);
  CHECK(slurp(d / "runs/tiny/3/lpr/000.json") == before);
  CHECK(log2.str().find("instance 1 coldstart") != std::string::npos);
  CHECK(log2.str().find("lpr") == std::string::npos);

  c.time_limit_seconds = 10.0;
  CHECK_THROWS_AS(run_benchmark(c, d / "runs"), InputError);

  ::setenv("UCDW_RUNS_DIR", (d / "runs").c_str(), 1);
  std::string md;
  CHECK(cli({"report", "--id", "tiny"}, &md) == 0);
  ::unsetenv("UCDW_RUNS_DIR");
  CHECK(md.find("coldstart") != std::string::npos);
}
