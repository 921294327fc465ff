#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ucdw/baselines.hpp"
#include "ucdw/extensive_uc.hpp"
#include "ucdw/policy.hpp"

using namespace ucdw;

namespace {

std::vector<UcInstance> instances(int S, int n, int count, std::uint64_t seed) {
  auto fleet = generate_fleet(S, seed);
  auto pool = generate_demand(fleet, 24, count, seed + 1);
  std::vector<UcInstance> out;
  for (int i = 0; i < count; ++i) {
    auto prof = pool.profiles[i];
    prof.demand.resize(n);
    prof.reserve.resize(n);
    out.push_back(make_instance(fleet, prof, seed + i, pool.scaling));
  }
  return out;
}

DualDataset synthetic_dataset(int n_records, int n_periods, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DualDataset d;
  d.fleet_fingerprint = 77;
  d.n_periods = n_periods;
  for (int i = 0; i < n_records; ++i) {
    DualRecord r;
    r.id = i;
    for (int k = 0; k < 2 * n_periods; ++k) r.features.push_back(u(rng));
    r.dual = DualPoint::zeros(n_periods);
    for (int t = 0; t < n_periods; ++t) {
      r.dual.y_load[t] = 10.0 * u(rng);
      r.dual.y_reserve[t] = u(rng);
    }
    r.status = "solved";
    r.lower_bound = u(rng);
    r.upper_bound = r.lower_bound + u(rng);
    r.iterations = i;
    d.records.push_back(r);
  }
  return d;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("LP relaxation duals bound the optimum") {
  for (const auto& inst : instances(4, 6, 3, 40)) {
    const auto opt = solve_extensive_uc(inst);
    REQUIRE(opt.status == lp::MilpStatus::Optimal);
    const auto lpr = lpr_dual(inst);
    CHECK(lpr.objective <= opt.objective + 1e-6 * (1.0 + opt.objective));
    // The relaxation's duals are a Lagrangian point, so their bound is at least the LP value.
    const double lb = compute_lower_bound(inst, lpr.y);
    CHECK(lb >= lpr.objective - 1e-6 * (1.0 + std::abs(lpr.objective)));
    CHECK(lb <= opt.objective + 1e-6 * (1.0 + opt.objective));
    for (int t = 0; t < 6; ++t) {
      CHECK(lpr.y.y_load[t] >= 0.0);
      CHECK(lpr.y.y_reserve[t] >= 0.0);
    }
  }
}

TEST_CASE("coldstart is all zeros") {
  const auto inst = instances(2, 24, 1, 1).front();
  CHECK(coldstart_dual(inst) == DualPoint::zeros(24));
}

TEST_CASE("nearest neighbour agrees with a plain scan") {
  const auto insts = instances(3, 24, 12, 50);
  DualDataset d;
  d.fleet_fingerprint = fleet_fingerprint(insts.front().generators);
  d.n_periods = 24;
  for (int i = 0; i < 8; ++i) {
    DualRecord r;
    r.id = i;
    const auto f = featurize(insts[i]);
    r.features.assign(f.data(), f.data() + f.size());
    r.dual = DualPoint::zeros(24);
    r.dual.y_load[0] = i;
    d.records.push_back(r);
  }
  for (int i = 0; i < 8; ++i) CHECK(nearest_neighbour_dual(d, insts[i]).y_load[0] == i);
  for (int q = 8; q < 12; ++q) {
    const auto f = featurize(insts[q]);
    int best = -1;
    double bd = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double dist = (featurize(insts[i]) - f).squaredNorm();
      if (best < 0 || dist < bd) {
        best = i;
        bd = dist;
      }
    }
    CHECK(nearest_neighbour_dual(d, insts[q]).y_load[0] == best);
  }
  // Duplicate features: lowest id wins regardless of order.
  auto dup = d.records[3];
  dup.id = 1000;
  dup.dual.y_load[0] = 99;
  d.records.insert(d.records.begin(), dup);
  CHECK(nearest_neighbour_dual(d, insts[3]).y_load[0] == 3);

  const auto other = instances(3, 24, 1, 51).front();
  CHECK_THROWS_AS(nearest_neighbour_dual(d, other), InputError);
}

TEST_CASE("dataset jsonl round trip") {
  const auto d = synthetic_dataset(5, 6, 3);
  const auto path = temp_path("ucdw_dataset_test.jsonl");
  d.save_jsonl(path);
  const auto e = DualDataset::load_jsonl(path);
  CHECK(e.fleet_fingerprint == d.fleet_fingerprint);
  CHECK(e.n_periods == d.n_periods);
  REQUIRE(e.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    CHECK(e.records[i].features == d.records[i].features);
    CHECK(e.records[i].dual == d.records[i].dual);
    CHECK(e.records[i].lower_bound == d.records[i].lower_bound);
    CHECK(e.records[i].status == d.records[i].status);
  }
  {
    std::ofstream os(path, std::ios::app);
    os << "{\"id\": 1}\n";
  }
  CHECK_THROWS_AS(DualDataset::load_jsonl(path), InputError);
  std::remove(path.c_str());
}

TEST_CASE("building a dataset keeps converged runs") {
  const auto insts = instances(4, 24, 2, 60);
  DatasetBudget budget;
  budget.gap_tolerance = 0.02;
  const auto d = build_dataset(insts, budget);
  REQUIRE(!d.records.empty());
  for (const auto& r : d.records) {
    CHECK((r.status == "solved" || r.status == "mp-optimal"));
    CHECK(compute_lower_bound(insts[r.id], r.dual) == doctest::Approx(r.lower_bound));
    CHECK(r.lower_bound <= r.upper_bound + 1e-6);
  }
  DatasetBudget one = budget;
  one.max_instances = 1;
  CHECK(build_dataset(insts, one).records.size() <= 1);
}

TEST_CASE("a single unsplit tree predicts the dataset mean") {
  const auto d = synthetic_dataset(9, 4, 5);
  ForestOptions opt;
  opt.n_trees = 1;
  opt.max_depth = 0;
  opt.bootstrap = false;
  const auto f = train_random_forest(d, opt);
  std::vector<double> mean(8, 0.0);
  for (const auto& r : d.records)
    for (int t = 0; t < 4; ++t) {
      mean[t] += r.dual.y_load[t] / 9.0;
      mean[4 + t] += r.dual.y_reserve[t] / 9.0;
    }
  const auto y = f.predict(d.records[0].features);
  for (int k = 0; k < 8; ++k) CHECK(y[k] == doctest::Approx(mean[k]));
}

TEST_CASE("forest predictions stay inside the target range") {
  const auto d = synthetic_dataset(40, 3, 6);
  ForestOptions opt;
  opt.n_trees = 20;
  opt.seed = 4;
  const auto f = train_random_forest(d, opt);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int q = 0; q < 50; ++q) {
    std::vector<double> x(6);
    for (auto& v : x) v = u(rng);
    const auto y = f.predict(x);
    for (int t = 0; t < 3; ++t) {
      double lo = 1e300, hi = -1e300;
      for (const auto& r : d.records) {
        lo = std::min(lo, r.dual.y_load[t]);
        hi = std::max(hi, r.dual.y_load[t]);
      }
      CHECK(y[t] >= lo - 1e-12);
      CHECK(y[t] <= hi + 1e-12);
    }
  }
}

TEST_CASE("forest recovers two clusters") {
  std::vector<std::vector<double>> x, y;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    const bool hi = i % 2 == 0;
    x.push_back({u(rng), hi ? 0.8 + 0.1 * u(rng) : 0.1 * u(rng), u(rng), u(rng)});
    y.push_back({hi ? 5.0 : 1.0, hi ? -2.0 : 3.0});
  }
  ForestOptions opt;
  opt.n_trees = 30;
  opt.seed = 8;
  const auto f = RandomForest::fit(x, y, opt);
  const auto a = f.predict({0.5, 0.85, 0.5, 0.5});
  const auto b = f.predict({0.5, 0.05, 0.5, 0.5});
  CHECK(a[0] == doctest::Approx(5.0).epsilon(0.1));
  CHECK(a[1] == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(b[0] == doctest::Approx(1.0).epsilon(0.1));
  CHECK(b[1] == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("forest files round trip and reject damage") {
  const auto d = synthetic_dataset(30, 4, 7);
  ForestOptions opt;
  opt.n_trees = 5;
  opt.seed = 1;
  const auto f = train_random_forest(d, opt);
  const auto g = train_random_forest(d, opt);
  const auto path = temp_path("ucdw_forest_test.bin");
  f.save(path);
  const auto h = RandomForest::load(path);
  CHECK(h.fleet_fingerprint == f.fleet_fingerprint);
  CHECK(h.n_periods == 4);
  for (const auto& r : d.records) {
    CHECK(h.predict(r.features) == f.predict(r.features));
    CHECK(g.predict(r.features) == f.predict(r.features));
  }
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  CHECK_THROWS_AS(RandomForest::load(path), InputError);
  std::remove(path.c_str());
}
