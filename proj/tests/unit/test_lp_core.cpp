#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "ucdw/lp_core.hpp"
#include "ucdw/uc_model.hpp"

using namespace ucdw::lp;

namespace {

// Standard-form oracle: min c^T x, A x = b, x >= 0. Enumerates every m-column basis.
double enumerate_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  double best = kInf;
  std::vector<int> pick(n, 0);
  std::fill(pick.end() - m, pick.end(), 1);
  do {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j)
      if (pick[j]) cols.push_back(j);
    Eigen::MatrixXd bm(m, m);
    for (int k = 0; k < m; ++k) bm.col(k) = a.col(cols[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bm);
    if (lu.rank() < m) continue;
    const Eigen::VectorXd xb = lu.solve(b);
    if (xb.minCoeff() < -1e-9) continue;
    double obj = 0.0;
    for (int k = 0; k < m; ++k) obj += c[cols[k]] * xb[k];
    best = std::min(best, obj);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// General oracle for tiny problems: every vertex is the solution of n active constraints
// drawn from the rows and the finite bounds.
double enumerate_vertices(const LpProblem& p) {
  const int n = p.n_vars();
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> levels;
  for (int r = 0; r < p.n_rows(); ++r) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int k = p.row_start[r]; k < p.row_start[r + 1]; ++k) v[p.col_index[k]] += p.value[k];
    normals.push_back(v);
    levels.push_back(p.rhs[r]);
  }
  for (int j = 0; j < n; ++j) {
    for (double bnd : {p.lower[j], p.upper[j]}) {
      if (!std::isfinite(bnd)) continue;
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      v[j] = 1.0;
      normals.push_back(v);
      levels.push_back(bnd);
    }
  }
  const int k = static_cast<int>(normals.size());
  double best = kInf;
  std::vector<int> pick(k, 0);
  std::fill(pick.end() - n, pick.end(), 1);
  do {
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rhs(n);
    int row = 0;
    for (int i = 0; i < k; ++i)
      if (pick[i]) {
        m.row(row) = normals[i].transpose();
        rhs[row++] = levels[i];
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    std::vector<double> xv(x.data(), x.data() + n);
    if (!is_feasible(p, xv, 1e-9)) continue;
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += p.cost[j] * xv[j];
    best = std::min(best, obj);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

void check_kkt(const LpProblem& p, const LpSolution& s) {
  const auto k = kkt_report(p, s);
  CHECK(k.primal_residual <= 1e-7);
  CHECK(k.dual_residual <= 1e-7);
  CHECK(k.complementarity <= 1e-6);
  CHECK(k.duality_gap <= 1e-6);
}

}  // namespace

TEST_CASE("single bound row reports unit dual") {
  LpProblem p;
  const int x = p.add_variable(1.0, 0.0, 10.0);
  p.add_row({{x, 1.0}}, RowSense::GreaterEqual, 3.0);
  const auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.duals[0] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(3.0));
}

TEST_CASE("contradictory rows are infeasible") {
  LpProblem p;
  const int x = p.add_variable(0.0, -kInf, kInf);
  p.add_row({{x, 1.0}}, RowSense::GreaterEqual, 2.0);
  p.add_row({{x, 1.0}}, RowSense::LessEqual, 1.0);
  CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded ray") {
  LpProblem p;
  const int x = p.add_variable(-1.0, 0.0, kInf);
  const int y = p.add_variable(0.0, 0.0, kInf);
  p.add_row({{x, 1.0}, {y, -1.0}}, RowSense::LessEqual, 1.0);
  CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("malformed input is rejected") {
  LpProblem p;
  p.add_variable(std::nan(""), 0.0, 1.0);
  CHECK_THROWS_AS(solve_lp(p), ucdw::InputError);
  LpProblem q;
  q.add_variable(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(solve_lp(q), ucdw::InputError);
}

TEST_CASE("random 8x12 standard-form LPs match basis enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd a(8, 12);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 12; ++j) a(i, j) = (rng() % 3 == 0) ? 0.0 : u(rng);
    Eigen::VectorXd x0(12), c(12);
    for (int j = 0; j < 12; ++j) {
      x0[j] = (rng() % 2) ? pos(rng) : 0.0;
      c[j] = pos(rng);
    }
    const Eigen::VectorXd b = a * x0;
    LpProblem p;
    for (int j = 0; j < 12; ++j) p.add_variable(c[j], 0.0, kInf);
    for (int i = 0; i < 8; ++i) {
      std::vector<int> idx;
      std::vector<double> val;
      for (int j = 0; j < 12; ++j) {
        idx.push_back(j);
        val.push_back(a(i, j));
      }
      p.add_row(idx, val, RowSense::Equal, b[i]);
    }
    const auto s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    const double oracle = enumerate_standard_form(a, b, c);
    CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-6));
    check_kkt(p, s);
  }
}

TEST_CASE("random bounded mixed-sense LPs match vertex enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    LpProblem p;
    for (int j = 0; j < 5; ++j) {
      const double lo = -2.0 * std::abs(u(rng));
      p.add_variable(u(rng), lo, 2.0 + std::abs(u(rng)));
    }
    for (int r = 0; r < 4; ++r) {
      std::vector<int> idx{0, 1, 2, 3, 4};
      std::vector<double> val;
      for (int j = 0; j < 5; ++j) val.push_back(u(rng));
      const auto sense = static_cast<RowSense>(rng() % 3);
      p.add_row(idx, val, sense, 0.3 * u(rng));
    }
    const double oracle = enumerate_vertices(p);
    const auto s = solve_lp(p);
    if (!std::isfinite(oracle)) {
      CHECK(s.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-6));
    check_kkt(p, s);
    ++solved;
  }
  CHECK(solved > 20);
}

TEST_CASE("warm-started bound changes agree with cold solves") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LpProblem p;
  for (int j = 0; j < 10; ++j) p.add_variable(-u(rng) - 0.1, 0.0, 1.0);
  for (int r = 0; r < 5; ++r) {
    std::vector<int> idx;
    std::vector<double> val;
    for (int j = 0; j < 10; ++j) {
      idx.push_back(j);
      val.push_back(u(rng));
    }
    p.add_row(idx, val, RowSense::LessEqual, 2.0);
  }
  SimplexSolver warm(p);
  REQUIRE(warm.solve().status == LpStatus::Optimal);
  LpProblem q = p;
  for (int step = 0; step < 15; ++step) {
    const int j = static_cast<int>(rng() % 10);
    const double v = static_cast<double>(rng() % 2);
    warm.set_bounds(j, v, v);
    q.lower[j] = q.upper[j] = v;
    const auto a = warm.solve();
    const auto b = solve_lp(q);
    REQUIRE(a.status == b.status);
    if (a.status == LpStatus::Optimal) CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
  }
}

TEST_CASE("degenerate assignment polytope terminates") {
  // 6x6 assignment: highly degenerate vertices.
  LpProblem p;
  const int n = 6;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.add_variable(static_cast<double>((i * 7 + j * 3) % 5), 0.0, kInf);
  for (int i = 0; i < n; ++i) {
    std::vector<int> idx;
    std::vector<double> val(n, 1.0);
    for (int j = 0; j < n; ++j) idx.push_back(i * n + j);
    p.add_row(idx, val, RowSense::Equal, 1.0);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<int> idx;
    std::vector<double> val(n, 1.0);
    for (int i = 0; i < n; ++i) idx.push_back(i * n + j);
    p.add_row(idx, val, RowSense::Equal, 1.0);
  }
  const auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(0.0).epsilon(1e-9));
  check_kkt(p, s);
}

TEST_CASE("iteration limit is reported explicitly") {
  LpProblem p;
  for (int j = 0; j < 6; ++j) p.add_variable(-1.0 - j, 0.0, kInf);
  for (int r = 0; r < 6; ++r) {
    std::vector<int> idx{0, 1, 2, 3, 4, 5};
    std::vector<double> val{1.0 + r, 2.0, 1.0, 3.0 - 0.1 * r, 1.0, 2.0 + r};
    p.add_row(idx, val, RowSense::LessEqual, 10.0 + r);
  }
  LpOptions opt;
  opt.max_iterations = 1;
  CHECK(solve_lp(p, opt).status == LpStatus::IterationLimit);
}

TEST_CASE("dump is stable text") {
  LpProblem p;
  p.add_variable(1.5, 0.0, kInf);
  p.add_row({{0, 2.0}}, RowSense::GreaterEqual, 1.0);
  CHECK(dump_lp(p) == "LP 1 1\nV 0 1.5 0 inf\nR 0 G 1 0:2\n");
}

TEST_CASE("binary knapsack") {
  LpProblem p;
  const int x = p.add_variable(-3.0, 0.0, 1.0);
  const int y = p.add_variable(-2.0, 0.0, 1.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.0);
  const std::vector<int> ints{x, y};
  const auto r = solve_milp(p, ints);
  REQUIRE(r.status == MilpStatus::Optimal);
  CHECK(-r.objective == doctest::Approx(3.0));
  CHECK(r.x[x] == doctest::Approx(1.0));
}

TEST_CASE("LP-integral MILP stops at the root") {
  LpProblem p;
  const int x = p.add_variable(1.0, 0.0, 5.0);
  const int y = p.add_variable(2.0, 0.0, 5.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, RowSense::GreaterEqual, 3.0);
  const std::vector<int> ints{x, y};
  const auto r = solve_milp(p, ints);
  REQUIRE(r.status == MilpStatus::Optimal);
  CHECK(r.nodes == 1);
  CHECK(r.objective == doctest::Approx(3.0));
}

TEST_CASE("random small integer programs match enumeration") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    LpProblem p;
    const int n = 6;
    for (int j = 0; j < n; ++j) p.add_variable(-u(rng) * 10.0, 0.0, 2.0);
    for (int r = 0; r < 3; ++r) {
      std::vector<int> idx;
      std::vector<double> val;
      for (int j = 0; j < n; ++j) {
        idx.push_back(j);
        val.push_back(u(rng) * 3.0);
      }
      p.add_row(idx, val, RowSense::LessEqual, 4.0 + u(rng) * 4.0);
    }
    std::vector<int> ints(n);
    for (int j = 0; j < n; ++j) ints[j] = j;
    const auto r = solve_milp(p, ints);
    double best = kInf;
    std::vector<double> x(n);
    for (int code = 0; code < 729; ++code) {
      int c = code;
      for (int j = 0; j < n; ++j) {
        x[j] = c % 3;
        c /= 3;
      }
      if (!is_feasible(p, x, 1e-12)) continue;
      double o = 0.0;
      for (int j = 0; j < n; ++j) o += p.cost[j] * x[j];
      best = std::min(best, o);
    }
    REQUIRE(r.status == MilpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-6));
    CHECK(r.bound <= r.objective + 1e-9 * std::abs(r.objective));
    CHECK(r.gap() <= 1e-6);
  }
}

TEST_CASE("integer-infeasible MILP") {
  LpProblem p;
  const int x = p.add_variable(1.0, 0.0, 1.0);
  p.add_row({{x, 2.0}}, RowSense::Equal, 1.0);
  const std::vector<int> ints{x};
  CHECK(solve_milp(p, ints).status == MilpStatus::Infeasible);
}
