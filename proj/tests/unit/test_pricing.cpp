#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ucdw/extensive_uc.hpp"
#include "ucdw/lp_core.hpp"
#include "ucdw/pricing.hpp"

using namespace ucdw;

namespace {

GeneratorSpec random_generator(std::mt19937_64& rng, int n) {
  auto g = generate_fleet(1, rng())[0];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  g.min_up = 1 + static_cast<int>(rng() % n);
  g.min_down = 1 + static_cast<int>(rng() % n);
  g.initial_on = rng() % 2;
  g.initial_power = g.initial_on ? g.p_min + u(rng) * (g.p_max - g.p_min) : 0.0;
  return g;
}

DualPoint random_dual(std::mt19937_64& rng, const GeneratorSpec& g, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DualPoint y = DualPoint::zeros(n);
  const double scale = rng() % 2 ? 1.0 : 3.0;
  for (int t = 0; t < n; ++t) {
    y.y_load[t] = u(rng) * scale * (g.marginal_cost + g.no_load_cost / g.p_max);
    y.y_reserve[t] = rng() % 3 == 0 ? 0.0 : u(rng) * g.no_load_cost / g.p_max;
  }
  return y;
}

}  // namespace

TEST_CASE("zero duals give raw cost coefficients") {
  const auto g = generate_fleet(1, 3)[0];
  const auto rc = reduced_cost_coefficients(g, DualPoint::zeros(4));
  for (int t = 0; t < 4; ++t) {
    CHECK(rc.power[t] == g.marginal_cost);
    CHECK(rc.on[t] == g.no_load_cost);
  }
  CHECK(rc.startup == g.startup_cost);
}

TEST_CASE("load dual equal to marginal cost zeroes the power coefficient") {
  const auto g = generate_fleet(1, 4)[0];
  auto y = DualPoint::zeros(3);
  y.y_load[1] = g.marginal_cost;
  CHECK(reduced_cost_coefficients(g, y).power[1] == 0.0);
}

TEST_CASE("coefficients reproduce c^T x - y^T A x") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5;
    const auto g = random_generator(rng, n);
    const auto y = random_dual(rng, g, n);
    const auto s = brute_force_pricing(g, DualPoint::zeros(n), n).schedule;
    const auto lc = linking_contribution(g, s);
    double direct = schedule_cost(g, s);
    for (int t = 0; t < n; ++t) direct -= y.y_load[t] * lc.load[t] + y.y_reserve[t] * lc.reserve[t];
    CHECK(reduced_objective(g, y, s) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("initially off at zero duals stays off") {
  auto g = generate_fleet(1, 5, FleetOptions{false})[0];
  const auto r = solve_pricing(g, DualPoint::zeros(6), 6);
  CHECK(r.reduced_objective == 0.0);
  CHECK(r.schedule.on_count() == 0);
}

TEST_CASE("very high load duals keep the unit on at a ramp-feasible profile") {
  auto g = generate_fleet(1, 6)[0];
  const int n = 6;
  auto y = DualPoint::zeros(n);
  for (int t = 0; t < n; ++t) y.y_load[t] = 100.0 * (g.marginal_cost + g.no_load_cost);
  const auto r = solve_pricing(g, y, n);
  CHECK(r.schedule.on_count() == n);
  CHECK(r.reduced_objective < 0.0);
  CHECK(validate_schedule(g, r.schedule, n).empty());
  CHECK(r.reduced_objective == doctest::Approx(brute_force_pricing(g, y, n).reduced_objective));
}

TEST_CASE("full-horizon min-up leaves only all-off and on-suffix patterns") {
  // Min-up rows only cover in-horizon periods, so a block running to the horizon end is legal
  // at any start.
  auto g = generate_fleet(1, 8, FleetOptions{false})[0];
  const int n = 5;
  g.min_up = n;
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const auto r = brute_force_pricing(g, random_dual(rng, g, n), n);
    int first_on = n;
    for (int t = n - 1; t >= 0; --t)
      if (r.schedule.on[t]) first_on = t;
    for (int t = first_on; t < n; ++t) CHECK(r.schedule.on[t] == 1);
    CHECK(validate_schedule(g, r.schedule, n).empty());
  }
  // A block that ends before the horizon is refused.
  auto s = schedule_from_commitment(g, {0, 1, 1, 1, 0}, {0, g.p_min, g.p_min, g.p_min, 0});
  CHECK_FALSE(validate_schedule(g, s, n).empty());
  CHECK(brute_force_pricing(g, DualPoint::zeros(n), n).reduced_objective == 0.0);
}

TEST_CASE("interval DP matches commitment enumeration") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const auto g = random_generator(rng, n);
    const auto y = random_dual(rng, g, n);
    const auto fast = solve_pricing(g, y, n);
    const auto slow = brute_force_pricing(g, y, n);
    CAPTURE(trial);
    CHECK(fast.reduced_objective ==
          doctest::Approx(slow.reduced_objective).epsilon(1e-6).scale(1.0));
    CHECK(validate_schedule(g, fast.schedule, n).empty());
    CHECK(reduced_objective(g, y, fast.schedule) ==
          doctest::Approx(fast.reduced_objective).epsilon(1e-9));
  }
}

TEST_CASE("interval dispatch agrees with its LP") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-20.0, 40.0);
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    auto g = random_generator(rng, n);
    std::vector<double> cp(n);
    for (auto& c : cp) c = u(rng);
    const bool startup = !g.initial_on || rng() % 2;
    const int first = startup ? static_cast<int>(rng() % n) : 0;
    const int last = first + static_cast<int>(rng() % (n - first));
    std::vector<double> power;
    const double fast = interval_dispatch(g, cp, first, last, n, startup, &power);

    lp::LpProblem p;
    for (int t = first; t <= last; ++t) p.add_variable(cp[t], g.p_min, g.p_max);
    if (startup) p.add_row({{0, 1.0}}, lp::RowSense::LessEqual, g.startup_ramp);
    else {
      p.add_row({{0, 1.0}}, lp::RowSense::LessEqual, g.initial_power + g.ramp_up);
      p.add_row({{0, 1.0}}, lp::RowSense::GreaterEqual, g.initial_power - g.ramp_down);
    }
    for (int k = 1; k <= last - first; ++k) {
      p.add_row({{k, 1.0}, {k - 1, -1.0}}, lp::RowSense::LessEqual, g.ramp_up);
      p.add_row({{k - 1, 1.0}, {k, -1.0}}, lp::RowSense::LessEqual, g.ramp_down);
    }
    if (last + 1 < n) p.add_row({{last - first, 1.0}}, lp::RowSense::LessEqual, g.shutdown_ramp);
    const auto sol = lp::solve_lp(p);
    if (sol.status != lp::LpStatus::Optimal) {
      CHECK(!std::isfinite(fast));
      continue;
    }
    ++feasible;
    REQUIRE(std::isfinite(fast));
    CHECK(fast == doctest::Approx(sol.objective).epsilon(1e-9).scale(1.0));
    double recomputed = 0.0;
    for (int t = first; t <= last; ++t) recomputed += cp[t] * power[t];
    CHECK(recomputed == doctest::Approx(fast).epsilon(1e-9).scale(1.0));
  }
  CHECK(feasible > 100);
}

TEST_CASE("reduced cost is concave in y") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 8;
    const auto g = random_generator(rng, n);
    const auto y1 = random_dual(rng, g, n), y2 = random_dual(rng, g, n);
    const double lam = u(rng);
    DualPoint ym = DualPoint::zeros(n);
    for (int t = 0; t < n; ++t) {
      ym.y_load[t] = lam * y1.y_load[t] + (1 - lam) * y2.y_load[t];
      ym.y_reserve[t] = lam * y1.y_reserve[t] + (1 - lam) * y2.y_reserve[t];
    }
    const double r1 = solve_pricing(g, y1, n).reduced_objective;
    const double r2 = solve_pricing(g, y2, n).reduced_objective;
    const double rm = solve_pricing(g, ym, n).reduced_objective;
    CHECK(rm >= lam * r1 + (1 - lam) * r2 - 1e-6);
  }
}

TEST_CASE("supporting hyperplane of the minimizing schedule") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 12;
    const auto g = random_generator(rng, n);
    const auto y = random_dual(rng, g, n);
    const auto r = solve_pricing(g, y, n);
    DualPoint y2 = y;
    double shift = 0.0;
    for (int t = 0; t < n; ++t) {
      const double dl = d(rng), dr = 0.01 * d(rng);
      y2.y_load[t] += dl;
      y2.y_reserve[t] += dr;
      shift += dl * r.contribution.load[t] + dr * r.contribution.reserve[t];
    }
    CHECK(solve_pricing(g, y2, n).reduced_objective <= r.reduced_objective - shift + 1e-6);
  }
}

TEST_CASE("pricing is never beaten by extensive-form schedules") {
  // Any feasible schedule, here drawn from small full-MILP solutions, prices no lower.
  std::mt19937_64 rng(55);
  const auto fleet = generate_fleet(2, 12);
  const auto pool = generate_demand(fleet, 24, 2, 13);
  UcInstance inst = make_instance(fleet, pool.profiles[0]);
  inst.n_periods = 4;
  inst.profile.demand.resize(4);
  inst.profile.reserve.resize(4);
  const auto prog = build_uc_program(inst);
  const auto res = solve_extensive_uc(inst);
  REQUIRE(res.has_incumbent);
  const auto sol = decode_uc_solution(inst, prog, res.x);
  for (int trial = 0; trial < 30; ++trial) {
    for (int g = 0; g < 2; ++g) {
      const auto y = random_dual(rng, fleet[g], 4);
      CHECK(solve_pricing(fleet[g], y, 4).reduced_objective <=
            reduced_objective(fleet[g], y, sol.schedules[g]) + 1e-6);
    }
  }
}

TEST_CASE("sweep sums per-generator results in index order") {
  const auto fleet = generate_fleet(3, 21);
  const auto pool = generate_demand(fleet, 24, 1, 22);
  const auto inst = make_instance(fleet, pool.profiles[0]);
  std::mt19937_64 rng(3);
  const auto y = random_dual(rng, fleet[0], 24);
  const auto sweep = solve_all_pricing(inst, y);
  REQUIRE(sweep.results.size() == 3);
  double sum = 0.0;
  for (int g = 0; g < 3; ++g) {
    const auto r = solve_pricing(fleet[g], y, 24);
    CHECK(r.reduced_objective == sweep.results[g].reduced_objective);
    sum += r.reduced_objective;
  }
  CHECK(sum == sweep.total_reduced);
}

TEST_CASE("bad inputs are refused") {
  const auto g = generate_fleet(1, 2)[0];
  CHECK_THROWS_AS(brute_force_pricing(g, DualPoint::zeros(9), 9), InputError);
  CHECK_THROWS_AS(solve_pricing(g, DualPoint::zeros(3), 4), InputError);
  auto y = DualPoint::zeros(3);
  y.y_load[0] = std::nan("");
  CHECK_THROWS_AS(solve_pricing(g, y, 3), InputError);
}
