#include "ucdw/master.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "ucdw/lp_core.hpp"

namespace ucdw {

namespace {

std::uint64_t schedule_key(const Schedule& s) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix(s.on.data(), s.on.size());
  for (double p : s.power) {
    const double q = p == 0.0 ? 0.0 : p;  // fold -0
    mix(&q, sizeof q);
  }
  return h;
}

bool same_schedule(const Schedule& a, const Schedule& b) {
  return a.on == b.on && a.power == b.power;
}

double mean_marginal_cost(const UcInstance& inst) {
  double s = 0.0;
  for (const auto& g : inst.generators) s += g.marginal_cost;
  return std::max(s / inst.n_generators(), 1e-12);
}

}  // namespace

Column make_column(const GeneratorSpec& gen, int generator, const Schedule& sched, int iteration) {
  Column c;
  c.generator = generator;
  c.cost = schedule_cost(gen, sched);
  const auto lc = linking_contribution(gen, sched);
  c.load = lc.load;
  c.reserve = lc.reserve;
  c.iteration = iteration;
  c.schedule = sched;
  return c;
}

bool ColumnPool::add(const GeneratorSpec& gen, Column c) {
  if (c.generator < 0 || c.generator >= n_generators())
    throw InputError("column generator index out of range");
  const int n = c.schedule.n_periods();
  if (static_cast<int>(c.load.size()) != n || static_cast<int>(c.reserve.size()) != n)
    throw IntegrityError("column contribution length mismatch");
  const auto lc = linking_contribution(gen, c.schedule);
  for (int t = 0; t < n; ++t) {
    const double tol = 1e-9 * (1.0 + gen.p_max);
    if (std::abs(lc.load[t] - c.load[t]) > tol || std::abs(lc.reserve[t] - c.reserve[t]) > tol)
      throw IntegrityError("column contributions disagree with its schedule");
  }
  const double cost = schedule_cost(gen, c.schedule);
  if (std::abs(cost - c.cost) > 1e-9 * (1.0 + std::abs(cost)) || c.cost < 0.0)
    throw IntegrityError("column cost disagrees with its schedule");
  if (keys_.size() != columns_.size()) keys_.resize(columns_.size());
  const auto key = schedule_key(c.schedule);
  auto& list = columns_[c.generator];
  if (keys_[c.generator].count(key)) {
    for (const auto& existing : list)
      if (same_schedule(existing.schedule, c.schedule)) return false;
  }
  keys_[c.generator].insert(key);
  list.push_back(std::move(c));
  return true;
}

std::size_t ColumnPool::size() const {
  std::size_t n = 0;
  for (const auto& l : columns_) n += l.size();
  return n;
}

bool ColumnPool::covers_all() const {
  for (const auto& l : columns_)
    if (l.empty()) return false;
  return true;
}

int add_columns(ColumnPool& pool, const UcInstance& inst, const std::vector<PricingResult>& results,
                int iteration) {
  if (static_cast<int>(results.size()) != inst.n_generators())
    throw InputError("one pricing result per generator expected");
  int added = 0;
  for (int s = 0; s < inst.n_generators(); ++s) {
    const auto& gen = inst.generators[s];
    Column c = make_column(gen, s, results[s].schedule, iteration);
    // The pricing result carries its own contribution copy; it must agree too.
    c.load = results[s].contribution.load;
    c.reserve = results[s].contribution.reserve;
    if (pool.add(gen, std::move(c))) ++added;
  }
  return added;
}

double artificial_cost(const UcInstance& inst) {
  double max_mr = 0.0;
  for (const auto& g : inst.generators) max_mr = std::max(max_mr, g.marginal_cost);
  return 1e4 * max_mr * inst.total_capacity();
}

double linking_value(const UcInstance& inst, const DualPoint& y) {
  double v = 0.0;
  for (int t = 0; t < inst.n_periods; ++t)
    v += inst.profile.demand[t] * y.y_load[t] + inst.profile.reserve[t] * y.y_reserve[t];
  return v;
}

MasterSolution solve_rmp(const UcInstance& inst, const ColumnPool& pool) {
  if (!pool.covers_all()) throw InputError("every generator needs at least one column");
  const int n = inst.n_periods, S = inst.n_generators();
  const double big_m = artificial_cost(inst);
  lp::LpProblem p;
  std::vector<std::vector<int>> var(S);
  for (int s = 0; s < S; ++s)
    for (const auto& c : pool.columns(s)) var[s].push_back(p.add_variable(c.cost, 0.0, lp::kInf));
  std::vector<int> art(2 * n);
  for (int k = 0; k < 2 * n; ++k) art[k] = p.add_variable(big_m, 0.0, lp::kInf);
  std::vector<int> idx;
  std::vector<double> val;
  for (int row = 0; row < 2 * n; ++row) {
    const int t = row % n;
    const bool load = row < n;
    idx.clear();
    val.clear();
    for (int s = 0; s < S; ++s) {
      const auto& cols = pool.columns(s);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const double v = load ? cols[i].load[t] : cols[i].reserve[t];
        if (v == 0.0) continue;
        idx.push_back(var[s][i]);
        val.push_back(v);
      }
    }
    idx.push_back(art[row]);
    val.push_back(1.0);
    p.add_row(idx, val, lp::RowSense::GreaterEqual,
              load ? inst.profile.demand[t] : inst.profile.reserve[t]);
  }
  for (int s = 0; s < S; ++s) {
    val.assign(var[s].size(), 1.0);
    p.add_row(var[s], val, lp::RowSense::Equal, 1.0);
  }
  const auto sol = lp::solve_lp(p);
  if (sol.status != lp::LpStatus::Optimal)
    throw std::runtime_error(std::string("RMP solve failed: ") + lp::to_string(sol.status));
  MasterSolution out;
  out.iterations = sol.iterations;
  out.objective = sol.objective;
  out.weights.resize(S);
  for (int s = 0; s < S; ++s)
    for (int j : var[s]) out.weights[s].push_back(std::max(0.0, sol.x[j]));
  for (int k = 0; k < 2 * n; ++k) out.artificial.push_back(sol.x[art[k]]);
  out.duals = DualPoint::zeros(n);
  for (int t = 0; t < n; ++t) {
    out.duals.y_load[t] = std::max(0.0, sol.duals[t]);
    out.duals.y_reserve[t] = std::max(0.0, sol.duals[n + t]);
  }
  out.duals.sigma.resize(S);
  for (int s = 0; s < S; ++s) out.duals.sigma[s] = sol.duals[2 * n + s];
  return out;
}

MasterSolution solve_regularized_rmp(const UcInstance& inst, const ColumnPool& pool,
                                     const DualPoint& center, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("mu must be positive and finite");
  if (!pool.covers_all()) throw InputError("every generator needs at least one column");
  const int n = inst.n_periods, S = inst.n_generators(), m = 2 * n;
  center.validate(n);
  for (int t = 0; t < n; ++t)
    if (center.y_load[t] < 0.0 || center.y_reserve[t] < 0.0)
      throw InputError("regularization center must be nonnegative");

  // Scaled units: costs and duals divided by kappa.
  const double kappa = mean_marginal_cost(inst);
  const double mu_s = mu * kappa;
  const double ub = artificial_cost(inst) / kappa;
  Eigen::VectorXd a(m), ybar(m);
  for (int t = 0; t < n; ++t) {
    a[t] = inst.profile.demand[t];
    a[n + t] = inst.profile.reserve[t];
    ybar[t] = center.y_load[t] / kappa;
    ybar[n + t] = center.y_reserve[t] / kappa;
  }

  // Constraint rows: columns (g^T y + sigma_s <= c), then -y <= 0, then y <= ub.
  struct Row {
    int s;
    const Column* col;
    double c;
  };
  std::vector<Row> rows;
  for (int s = 0; s < S; ++s)
    for (const auto& c : pool.columns(s)) rows.push_back({s, &c, c.cost / kappa});
  const int nc = static_cast<int>(rows.size());
  const int K = nc + 2 * m;
  const int N = m + S;

  auto g_of = [&](const Column& c, int j) { return j < n ? c.load[j] : c.reserve[j - n]; };
  auto row_dot = [&](int k, const Eigen::VectorXd& z) {
    if (k < nc) {
      double v = z[m + rows[k].s];
      for (int j = 0; j < m; ++j) v += g_of(*rows[k].col, j) * z[j];
      return v;
    }
    if (k < nc + m) return -z[k - nc];
    return z[k - nc - m];
  };
  auto row_rhs = [&](int k) { return k < nc ? rows[k].c : (k < nc + m ? 0.0 : ub); };
  // out += w * row_k
  auto add_row_t = [&](int k, double w, Eigen::VectorXd& out) {
    if (k < nc) {
      out[m + rows[k].s] += w;
      for (int j = 0; j < m; ++j) out[j] += w * g_of(*rows[k].col, j);
    } else if (k < nc + m) {
      out[k - nc] -= w;
    } else {
      out[k - nc - m] += w;
    }
  };

  // Objective: 1/2 mu |y|^2 - (a + mu ybar)^T y - sum sigma.
  Eigen::VectorXd q(N);
  q.head(m) = -(a + mu_s * ybar);
  q.tail(S).setConstant(-1.0);
  auto q_times = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(N);
    r.head(m) = mu_s * z.head(m);
    return r;
  };

  Eigen::VectorXd z = Eigen::VectorXd::Zero(N);
  for (int j = 0; j < m; ++j) z[j] = std::clamp(ybar[j], 1e-3, 0.5 * ub);
  for (int s = 0; s < S; ++s) z[m + s] = lp::kInf;
  for (int k = 0; k < nc; ++k) {
    double v = rows[k].c;
    for (int j = 0; j < m; ++j) v -= g_of(*rows[k].col, j) * z[j];
    z[m + rows[k].s] = std::min(z[m + rows[k].s], v);
  }
  for (int s = 0; s < S; ++s) z[m + s] -= 1.0;

  Eigen::VectorXd sl(K), lam(K);
  double bnorm = 1.0;
  for (int k = 0; k < K; ++k) {
    sl[k] = std::max(row_rhs(k) - row_dot(k, z), 1.0);
    lam[k] = 1.0;
    if (k < nc + m) bnorm = std::max(bnorm, std::abs(row_rhs(k)));
  }
  const double qnorm = std::max(1.0, q.cwiseAbs().maxCoeff());

  MasterSolution out;
  out.status = MasterStatus::NotConverged;
  Eigen::MatrixXd H(N, N);
  Eigen::VectorXd rd(N), rp(K), dz(N), dl(K), ds(K), rhs(N), tmp(N);
  auto objective_scaled = [&]() {
    return -(0.5 * mu_s * z.head(m).squaredNorm() + q.dot(z));
  };
  double last_obj = 0.0;
  for (int it = 0; it < 200; ++it) {
    out.iterations = it + 1;
    rd = q_times(z) + q;
    for (int k = 0; k < K; ++k) add_row_t(k, lam[k], rd);
    for (int k = 0; k < K; ++k) rp[k] = row_dot(k, z) + sl[k] - row_rhs(k);
    const double gap = sl.dot(lam);
    const double obj = objective_scaled();
    const double pres = rp.head(nc + m).cwiseAbs().maxCoeff() / bnorm;
    const double dres = rd.cwiseAbs().maxCoeff() / qnorm;
    const bool tight = pres < 1e-9 && dres < 1e-9 && gap < 1e-10 * (1.0 + std::abs(obj));
    // Stalled iterates are accepted once the residuals are well inside the KKT tolerance.
    const bool stalled = it > 0 && std::abs(obj - last_obj) <= 1e-15 * (1.0 + std::abs(obj)) &&
                         pres < 1e-7 && dres < 1e-7 && gap < 1e-8 * (1.0 + std::abs(obj));
    if (tight || stalled) {
      out.status = MasterStatus::Optimal;
      break;
    }
    last_obj = obj;

    // Normal matrix Q + A^T D A.
    H.setZero();
    for (int j = 0; j < m; ++j) H(j, j) = mu_s;
    Eigen::VectorXd d = lam.cwiseQuotient(sl);
    for (int k = 0; k < K; ++k) {
      if (k < nc) {
        const auto& c = *rows[k].col;
        const int sj = m + rows[k].s;
        const double w = d[k];
        for (int i = 0; i < m; ++i) {
          const double gi = g_of(c, i);
          if (gi == 0.0) continue;
          const double wg = w * gi;
          for (int j = 0; j <= i; ++j) H(i, j) += wg * g_of(c, j);
          H(sj, i) += wg;
        }
        H(sj, sj) += w;
      } else {
        const int j = k < nc + m ? k - nc : k - nc - m;
        H(j, j) += d[k];
      }
    }
    H = H.selfadjointView<Eigen::Lower>();
    for (int j = 0; j < N; ++j) H(j, j) += 1e-12 * (1.0 + H(j, j));
    Eigen::LDLT<Eigen::MatrixXd> fact(H);

    auto solve_dir = [&](const Eigen::VectorXd& rc) {
      // rhs = -rd - A^T (D rp - S^{-1} rc)
      rhs = -rd;
      for (int k = 0; k < K; ++k) add_row_t(k, -(d[k] * rp[k] - rc[k] / sl[k]), rhs);
      dz = fact.solve(rhs);
      for (int k = 0; k < K; ++k) {
        dl[k] = d[k] * (row_dot(k, dz) + rp[k]) - rc[k] / sl[k];
        ds[k] = (-rc[k] - sl[k] * dl[k]) / lam[k];
      }
    };
    auto max_step = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (int k = 0; k < K; ++k)
        if (dv[k] < 0.0) a = std::min(a, -v[k] / dv[k]);
      return a;
    };
    // Predictor.
    Eigen::VectorXd rc = sl.cwiseProduct(lam);
    solve_dir(rc);
    const double ap = max_step(sl, ds), ad = max_step(lam, dl);
    const double mu_aff = (sl + ap * ds).dot(lam + ad * dl) / K;
    const double mu_cur = gap / K;
    const double sigma_c = std::pow(mu_aff / mu_cur, 3.0);
    // Corrector.
    rc = sl.cwiseProduct(lam) + ds.cwiseProduct(dl);
    rc.array() -= sigma_c * mu_cur;
    solve_dir(rc);
    const double step_p = std::min(1.0, 0.995 * max_step(sl, ds));
    const double step_d = std::min(1.0, 0.995 * max_step(lam, dl));
    const double step = std::min(step_p, step_d);
    z += step * dz;
    sl += step * ds;
    lam += step * dl;
    for (int k = 0; k < K; ++k) {
      sl[k] = std::max(sl[k], 1e-300);
      lam[k] = std::max(lam[k], 1e-300);
    }
  }

  out.duals = DualPoint::zeros(n);
  for (int t = 0; t < n; ++t) {
    out.duals.y_load[t] = std::max(0.0, z[t]) * kappa;
    out.duals.y_reserve[t] = std::max(0.0, z[n + t]) * kappa;
  }
  out.duals.sigma.resize(S);
  for (int s = 0; s < S; ++s) out.duals.sigma[s] = z[m + s] * kappa;
  out.weights.assign(S, {});
  std::vector<double> totals(S, 0.0);
  for (int k = 0; k < nc; ++k) {
    out.weights[rows[k].s].push_back(lam[k]);
    totals[rows[k].s] += lam[k];
  }
  for (int s = 0; s < S; ++s)
    for (auto& w : out.weights[s]) w /= totals[s] > 0.0 ? totals[s] : 1.0;
  for (int j = 0; j < m; ++j) out.artificial.push_back(lam[nc + m + j]);
  double reg = 0.0;
  for (int t = 0; t < n; ++t) {
    reg += std::pow(out.duals.y_load[t] - center.y_load[t], 2) +
           std::pow(out.duals.y_reserve[t] - center.y_reserve[t], 2);
  }
  double sig = 0.0;
  for (double s : out.duals.sigma) sig += s;
  out.objective = linking_value(inst, out.duals) + sig - 0.5 * mu * reg;
  return out;
}

}  // namespace ucdw
