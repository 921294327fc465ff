#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lp_basis.hpp"
#include "ucdw/lp_core.hpp"
#include "ucdw/uc_model.hpp"

namespace ucdw::lp {

using detail::BasisFactor;
using detail::SparseColumn;

// ---------------------------------------------------------------------------
// LpProblem

int LpProblem::add_variable(double c, double lo, double hi) {
  cost.push_back(c);
  lower.push_back(lo);
  upper.push_back(hi);
  return n_vars() - 1;
}

int LpProblem::add_row(std::span<const int> index, std::span<const double> coef, RowSense s,
                       double b) {
  if (index.size() != coef.size()) throw InputError("row index/coef length mismatch");
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (coef[k] == 0.0) continue;
    col_index.push_back(index[k]);
    value.push_back(coef[k]);
  }
  row_start.push_back(static_cast<int>(col_index.size()));
  sense.push_back(s);
  rhs.push_back(b);
  return n_rows() - 1;
}

int LpProblem::add_row(std::initializer_list<std::pair<int, double>> terms, RowSense s, double b) {
  std::vector<int> idx;
  std::vector<double> val;
  for (const auto& [j, v] : terms) {
    idx.push_back(j);
    val.push_back(v);
  }
  return add_row(idx, val, s, b);
}

void LpProblem::validate() const {
  const int n = n_vars();
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
    throw InputError("bound vectors must match variable count");
  if (static_cast<int>(row_start.size()) != n_rows() + 1 ||
      static_cast<int>(sense.size()) != n_rows())
    throw InputError("row structure inconsistent");
  if (col_index.size() != value.size()) throw InputError("row storage inconsistent");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(cost[j])) throw InputError("non-finite cost");
    if (std::isnan(lower[j]) || std::isnan(upper[j])) throw InputError("NaN bound");
    if (lower[j] == kInf || upper[j] == -kInf) throw InputError("bound at wrong infinity");
    if (lower[j] > upper[j]) throw InputError("lower bound exceeds upper bound");
  }
  for (std::size_t k = 0; k < col_index.size(); ++k) {
    if (col_index[k] < 0 || col_index[k] >= n) throw InputError("column index out of range");
    if (!std::isfinite(value[k])) throw InputError("non-finite coefficient");
  }
  for (double b : rhs)
    if (!std::isfinite(b)) throw InputError("non-finite rhs");
}

double LpProblem::row_activity(int r, std::span<const double> x) const {
  double s = 0.0;
  for (int k = row_start[r]; k < row_start[r + 1]; ++k) s += value[k] * x[col_index[k]];
  return s;
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Simplex engine

namespace {

enum State : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kAtZero = 3 };

enum class Outcome { Optimal, Infeasible, Unbounded, IterationLimit, NotDualFeasible, Restart };

}  // namespace

class SimplexSolver::Impl {
 public:
  Impl(const LpProblem& p, LpOptions opt);

  void set_bounds(int j, double lo, double hi);
  double lower(int j) const { return lo_[j] * colscale_[j]; }
  double upper(int j) const { return hi_[j] * colscale_[j]; }
  LpSolution solve();
  Basis basis() const { return Basis{head_, state_}; }
  void set_basis(const Basis& b);

 private:
  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) f(cind_[k], cval_[k]);
    } else {
      f(j - n_, -1.0);
    }
  }
  double dot_column(int j, const std::vector<double>& v) const {
    if (j >= n_) return -v[j - n_];
    double s = 0.0;
    for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) s += cval_[k] * v[cind_[k]];
    return s;
  }

  void refactor();
  void place_nonbasic(int j);
  void compute_xb();
  double infeasibility(int j) const;
  double max_basic_infeasibility() const;
  void compute_duals(std::vector<double>& pi, std::vector<double>& d, bool phase1) const;
  void pivot(int r, int q, const std::vector<double>& alpha, int leaving_state);

  Outcome primal();
  Outcome dual();
  LpSolution extract(LpStatus status) const;

  LpOptions opt_;
  int n_ = 0, m_ = 0, total_ = 0;
  std::vector<int> cstart_, cind_;
  std::vector<double> cval_;
  std::vector<int> rstart_, rind_;
  std::vector<double> rval_;
  std::vector<double> rowscale_, colscale_;
  std::vector<double> cost_, lo_, hi_, x_;
  std::vector<int> head_, where_;
  std::vector<std::int8_t> state_;
  BasisFactor factor_;
  bool factored_ = false;
  int iterations_ = 0;
  int max_iterations_ = 0;
  double offset_ = 0.0;
};

SimplexSolver::Impl::Impl(const LpProblem& p, LpOptions opt) : opt_(opt) {
  p.validate();
  n_ = p.n_vars();
  m_ = p.n_rows();
  total_ = n_ + m_;
  offset_ = p.objective_offset;

  // Equilibration: rows then columns by max-abs, twice.
  rowscale_.assign(m_, 1.0);
  colscale_.assign(total_, 1.0);
  if (opt_.scale) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int r = 0; r < m_; ++r) {
        double mx = 0.0;
        for (int k = p.row_start[r]; k < p.row_start[r + 1]; ++k)
          mx = std::max(mx, std::abs(p.value[k]) * rowscale_[r] * colscale_[p.col_index[k]]);
        if (mx > 0.0) rowscale_[r] /= mx;
      }
      std::vector<double> cmax(n_, 0.0);
      for (int r = 0; r < m_; ++r)
        for (int k = p.row_start[r]; k < p.row_start[r + 1]; ++k) {
          const int j = p.col_index[k];
          cmax[j] = std::max(cmax[j], std::abs(p.value[k]) * rowscale_[r] * colscale_[j]);
        }
      for (int j = 0; j < n_; ++j)
        if (cmax[j] > 0.0) colscale_[j] /= cmax[j];
    }
    // Powers of two keep the scaling exact.
    for (auto& s : rowscale_) s = std::exp2(std::round(std::log2(s)));
    for (auto& s : colscale_) s = std::exp2(std::round(std::log2(s)));
  }

  // Row-major (scaled, duplicates merged) then column-major copy.
  rstart_.assign(1, 0);
  std::vector<double> acc(n_, 0.0);
  std::vector<int> mark(n_, -1), touched;
  for (int r = 0; r < m_; ++r) {
    touched.clear();
    for (int k = p.row_start[r]; k < p.row_start[r + 1]; ++k) {
      const int j = p.col_index[k];
      if (mark[j] != r) {
        mark[j] = r;
        acc[j] = 0.0;
        touched.push_back(j);
      }
      acc[j] += p.value[k];
    }
    std::sort(touched.begin(), touched.end());
    for (int j : touched) {
      if (acc[j] == 0.0) continue;
      rind_.push_back(j);
      rval_.push_back(acc[j] * rowscale_[r] * colscale_[j]);
    }
    rstart_.push_back(static_cast<int>(rind_.size()));
  }
  cstart_.assign(n_ + 1, 0);
  for (int j : rind_) ++cstart_[j + 1];
  for (int j = 0; j < n_; ++j) cstart_[j + 1] += cstart_[j];
  cind_.resize(rind_.size());
  cval_.resize(rind_.size());
  std::vector<int> fill(cstart_.begin(), cstart_.end() - 1);
  for (int r = 0; r < m_; ++r)
    for (int k = rstart_[r]; k < rstart_[r + 1]; ++k) {
      const int pos = fill[rind_[k]]++;
      cind_[pos] = r;
      cval_[pos] = rval_[k];
    }

  cost_.assign(total_, 0.0);
  lo_.assign(total_, 0.0);
  hi_.assign(total_, 0.0);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = p.cost[j] * colscale_[j];
    lo_[j] = p.lower[j] / colscale_[j];
    hi_[j] = p.upper[j] / colscale_[j];
  }
  for (int r = 0; r < m_; ++r) {
    const int j = n_ + r;
    const double b = p.rhs[r] * rowscale_[r];
    switch (p.sense[r]) {
      case RowSense::LessEqual: lo_[j] = -kInf; hi_[j] = b; break;
      case RowSense::GreaterEqual: lo_[j] = b; hi_[j] = kInf; break;
      case RowSense::Equal: lo_[j] = b; hi_[j] = b; break;
    }
  }

  // Slack basis.
  x_.assign(total_, 0.0);
  head_.resize(m_);
  where_.assign(total_, -1);
  state_.assign(total_, kAtLower);
  for (int r = 0; r < m_; ++r) {
    head_[r] = n_ + r;
    where_[n_ + r] = r;
    state_[n_ + r] = kBasic;
  }
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations : 20 * (total_ + m_) + 1000;
}

void SimplexSolver::Impl::place_nonbasic(int j) {
  auto& s = state_[j];
  if (s == kBasic) return;
  const bool has_lo = std::isfinite(lo_[j]), has_hi = std::isfinite(hi_[j]);
  if (s == kAtLower && !has_lo) s = has_hi ? kAtUpper : kAtZero;
  if (s == kAtUpper && !has_hi) s = has_lo ? kAtLower : kAtZero;
  if (s == kAtZero && (has_lo || has_hi)) s = has_lo ? kAtLower : kAtUpper;
  x_[j] = s == kAtLower ? lo_[j] : s == kAtUpper ? hi_[j] : 0.0;
}

void SimplexSolver::Impl::set_bounds(int j, double lo, double hi) {
  if (j < 0 || j >= n_) throw InputError("set_bounds: variable out of range");
  if (lo > hi) throw InputError("set_bounds: lo > hi");
  lo_[j] = lo / colscale_[j];
  hi_[j] = hi / colscale_[j];
  place_nonbasic(j);
}

void SimplexSolver::Impl::set_basis(const Basis& b) {
  if (static_cast<int>(b.head.size()) != m_ || static_cast<int>(b.state.size()) != total_)
    throw InputError("basis shape mismatch");
  head_ = b.head;
  state_ = b.state;
  std::fill(where_.begin(), where_.end(), -1);
  for (int r = 0; r < m_; ++r) where_[head_[r]] = r;
  for (int j = 0; j < total_; ++j) {
    if (where_[j] < 0 && state_[j] == kBasic) state_[j] = kAtLower;
    if (where_[j] >= 0) state_[j] = kBasic;
    place_nonbasic(j);
  }
  factored_ = false;
}

void SimplexSolver::Impl::refactor() {
  std::vector<SparseColumn> cols(m_);
  std::vector<int> dependent, uncovered;
  for (int attempt = 0; attempt < 4; ++attempt) {
    for (int r = 0; r < m_; ++r) {
      cols[r].clear();
      for_column(head_[r], [&](int i, double v) { cols[r].emplace_back(i, v); });
    }
    if (factor_.factor(m_, cols, dependent, uncovered)) {
      factored_ = true;
      return;
    }
    // Swap dependent columns for logicals of the rows nobody pivots on.
    const std::size_t k = std::min(dependent.size(), uncovered.size());
    if (k == 0) break;
    for (std::size_t t = 0; t < k; ++t) {
      const int pos = dependent[t];
      const int out = head_[pos];
      const int in = n_ + uncovered[t];
      if (where_[in] >= 0) continue;
      where_[out] = -1;
      state_[out] = kAtLower;
      place_nonbasic(out);
      head_[pos] = in;
      where_[in] = pos;
      state_[in] = kBasic;
    }
  }
  // Fall back to the slack basis.
  for (int j = 0; j < total_; ++j)
    if (state_[j] == kBasic) {
      state_[j] = kAtLower;
      where_[j] = -1;
    }
  for (int r = 0; r < m_; ++r) {
    head_[r] = n_ + r;
    where_[n_ + r] = r;
    state_[n_ + r] = kBasic;
  }
  for (int j = 0; j < total_; ++j) place_nonbasic(j);
  for (int r = 0; r < m_; ++r) {
    cols[r].assign(1, {r, -1.0});
  }
  factor_.factor(m_, cols, dependent, uncovered);
  factored_ = true;
}

void SimplexSolver::Impl::compute_xb() {
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == kBasic || x_[j] == 0.0) continue;
    const double xj = x_[j];
    for_column(j, [&](int i, double v) { rhs[i] -= v * xj; });
  }
  factor_.ftran(rhs);
  for (int r = 0; r < m_; ++r) x_[head_[r]] = rhs[r];
}

double SimplexSolver::Impl::infeasibility(int j) const {
  if (x_[j] < lo_[j]) return lo_[j] - x_[j];
  if (x_[j] > hi_[j]) return x_[j] - hi_[j];
  return 0.0;
}

double SimplexSolver::Impl::max_basic_infeasibility() const {
  double mx = 0.0;
  for (int r = 0; r < m_; ++r) mx = std::max(mx, infeasibility(head_[r]));
  return mx;
}

void SimplexSolver::Impl::compute_duals(std::vector<double>& pi, std::vector<double>& d,
                                        bool phase1) const {
  pi.assign(m_, 0.0);
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    if (phase1) {
      if (x_[j] < lo_[j] - opt_.feas_tol) pi[r] = -1.0;
      else if (x_[j] > hi_[j] + opt_.feas_tol) pi[r] = 1.0;
    } else {
      pi[r] = cost_[j];
    }
  }
  factor_.btran(pi);
  d.assign(total_, 0.0);
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == kBasic) continue;
    d[j] = (phase1 ? 0.0 : cost_[j]) - dot_column(j, pi);
  }
}

void SimplexSolver::Impl::pivot(int r, int q, const std::vector<double>& alpha,
                                int leaving_state) {
  const int out = head_[r];
  state_[out] = static_cast<std::int8_t>(leaving_state);
  where_[out] = -1;
  head_[r] = q;
  where_[q] = r;
  state_[q] = kBasic;
  factor_.update(r, alpha);
  ++iterations_;
  if (factor_.updates() >= opt_.refactor_every) {
    refactor();
    compute_xb();
  }
}

Outcome SimplexSolver::Impl::primal() {
  std::vector<double> pi, d, alpha(m_);
  int degenerate_run = 0;
  bool bland = false;
  const double ftol = opt_.feas_tol;
  while (true) {
    if (iterations_ >= max_iterations_) return Outcome::IterationLimit;
    bool phase1 = false;
    for (int r = 0; r < m_ && !phase1; ++r) phase1 = infeasibility(head_[r]) > ftol;
    compute_duals(pi, d, phase1);

    int q = -1;
    double best = 0.0;
    int dir = 0;
    for (int j = 0; j < total_; ++j) {
      const auto s = state_[j];
      if (s == kBasic || lo_[j] == hi_[j]) continue;
      int dj_dir = 0;
      if (d[j] < -opt_.opt_tol && (s == kAtLower || s == kAtZero)) dj_dir = 1;
      else if (d[j] > opt_.opt_tol && (s == kAtUpper || s == kAtZero)) dj_dir = -1;
      if (!dj_dir) continue;
      if (bland) {
        q = j;
        dir = dj_dir;
        break;
      }
      if (std::abs(d[j]) > best) {
        best = std::abs(d[j]);
        q = j;
        dir = dj_dir;
      }
    }
    if (q < 0) {
      if (!phase1) return Outcome::Optimal;
      // Make sure this is not drift before declaring infeasibility.
      refactor();
      compute_xb();
      if (max_basic_infeasibility() <= ftol) continue;
      compute_duals(pi, d, true);
      bool any = false;
      for (int j = 0; j < total_ && !any; ++j) {
        const auto s = state_[j];
        if (s == kBasic || lo_[j] == hi_[j]) continue;
        any = (d[j] < -opt_.opt_tol && (s == kAtLower || s == kAtZero)) ||
              (d[j] > opt_.opt_tol && (s == kAtUpper || s == kAtZero));
      }
      if (!any) return Outcome::Infeasible;
      continue;
    }

    std::fill(alpha.begin(), alpha.end(), 0.0);
    for_column(q, [&](int i, double v) { alpha[i] = v; });
    factor_.ftran(alpha);

    // Basic i moves at rate delta_i = -dir * alpha_i per unit step of the entering variable.
    auto gap_of = [&](int r, double delta, double& gap) -> bool {
      const int j = head_[r];
      double lo = lo_[j], hi = hi_[j];
      if (phase1) {
        if (x_[j] < lo - ftol) {
          hi = lo;
          lo = -kInf;
        } else if (x_[j] > hi + ftol) {
          lo = hi;
          hi = kInf;
        }
      }
      if (delta > 0) {
        if (!std::isfinite(hi)) return false;
        gap = std::max(hi - x_[j], 0.0);
      } else {
        if (!std::isfinite(lo)) return false;
        gap = std::max(x_[j] - lo, 0.0);
      }
      return true;
    };
    double tmax = kInf;
    for (int r = 0; r < m_; ++r) {
      const double delta = -dir * alpha[r];
      if (std::abs(delta) < opt_.pivot_tol) continue;
      double gap;
      if (!gap_of(r, delta, gap)) continue;
      tmax = std::min(tmax, (gap + ftol) / std::abs(delta));
    }
    int leave = -1;
    double step = kInf;
    if (std::isfinite(tmax)) {
      double best_piv = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double delta = -dir * alpha[r];
        if (std::abs(delta) < opt_.pivot_tol) continue;
        double gap;
        if (!gap_of(r, delta, gap)) continue;
        const double ratio = gap / std::abs(delta);
        if (ratio > tmax) continue;
        const bool better = bland ? (leave < 0 || head_[r] < head_[leave])
                                  : std::abs(delta) > best_piv;
        if (better) {
          best_piv = std::abs(delta);
          leave = r;
          step = ratio;
        }
      }
    }
    const double range = hi_[q] - lo_[q];
    if (std::isfinite(range) && range <= step) {
      // Bound flip, no basis change.
      for (int r = 0; r < m_; ++r) x_[head_[r]] += -dir * alpha[r] * range;
      state_[q] = dir > 0 ? kAtUpper : kAtLower;
      x_[q] = dir > 0 ? hi_[q] : lo_[q];
      ++iterations_;
      degenerate_run = 0;
      bland = false;
      continue;
    }
    if (leave < 0) {
      if (phase1) {
        refactor();
        compute_xb();
        continue;
      }
      return Outcome::Unbounded;
    }

    step = std::max(step, 0.0);
    for (int r = 0; r < m_; ++r) x_[head_[r]] += -dir * alpha[r] * step;
    x_[q] += dir * step;
    // The leaving variable sits at (or, in phase one, just reached) one of its bounds.
    const int out = head_[leave];
    int leaving_state = kAtZero;
    const double xo = x_[out];
    if (std::isfinite(lo_[out]) && std::isfinite(hi_[out]))
      leaving_state = std::abs(xo - lo_[out]) <= std::abs(xo - hi_[out]) ? kAtLower : kAtUpper;
    else if (std::isfinite(lo_[out]))
      leaving_state = kAtLower;
    else if (std::isfinite(hi_[out]))
      leaving_state = kAtUpper;

    if (step <= 1e-12) {
      if (++degenerate_run > opt_.degenerate_stall) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    pivot(leave, q, alpha, leaving_state);
    place_nonbasic(out);
  }
}

Outcome SimplexSolver::Impl::dual() {
  std::vector<double> pi, d;
  compute_duals(pi, d, false);
  const double otol = opt_.opt_tol, ftol = opt_.feas_tol;
  bool flipped = false;
  for (int j = 0; j < total_; ++j) {
    const auto s = state_[j];
    if (s == kBasic || lo_[j] == hi_[j]) continue;
    const bool boxed = std::isfinite(lo_[j]) && std::isfinite(hi_[j]);
    const bool wrong = (s == kAtLower && d[j] < -otol) || (s == kAtUpper && d[j] > otol) ||
                       (s == kAtZero && std::abs(d[j]) > otol);
    if (!wrong) continue;
    if (!boxed) return Outcome::NotDualFeasible;
    state_[j] = s == kAtLower ? kAtUpper : kAtLower;
    place_nonbasic(j);
    flipped = true;
  }
  if (flipped) compute_xb();

  std::vector<double> rho(m_), row(total_, 0.0), alpha(m_);
  std::vector<int> touched;
  int degenerate_run = 0;
  bool bland = false;
  int since_dual_refresh = 0;
  while (true) {
    if (iterations_ >= max_iterations_) return Outcome::IterationLimit;
    int r = -1;
    double worst = ftol;
    for (int i = 0; i < m_; ++i) {
      const double inf = infeasibility(head_[i]);
      if (inf <= ftol) continue;
      if (bland ? (r < 0 || head_[i] < head_[r]) : inf > worst) {
        worst = inf;
        r = i;
      }
    }
    if (r < 0) return Outcome::Optimal;
    const int out = head_[r];
    const bool to_lower = x_[out] < lo_[out];
    const double target = to_lower ? lo_[out] : hi_[out];

    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r] = 1.0;
    factor_.btran(rho);
    touched.clear();
    for (int i = 0; i < m_; ++i) {
      const double ri = rho[i];
      if (std::abs(ri) < 1e-14) continue;
      for (int k = rstart_[i]; k < rstart_[i + 1]; ++k) {
        const int j = rind_[k];
        if (row[j] == 0.0) touched.push_back(j);
        row[j] += ri * rval_[k];
      }
      const int lj = n_ + i;
      if (row[lj] == 0.0) touched.push_back(lj);
      row[lj] += -ri;
    }

    // Eligible entering: moving it in its feasible direction pushes x_out toward target.
    auto eligible = [&](int j, double a) {
      const auto s = state_[j];
      if (s == kBasic || lo_[j] == hi_[j] || std::abs(a) < opt_.pivot_tol) return false;
      if (s == kAtZero) return true;
      const bool inc = s == kAtLower;
      // dx_out = -a * dx_j
      return to_lower ? (inc ? a < 0 : a > 0) : (inc ? a > 0 : a < 0);
    };
    double tmax = kInf;
    for (int j : touched) {
      const double a = row[j];
      if (!eligible(j, a)) continue;
      tmax = std::min(tmax, (std::abs(d[j]) + otol) / std::abs(a));
    }
    int q = -1;
    double best = 0.0;
    for (int j : touched) {
      const double a = row[j];
      if (!eligible(j, a)) continue;
      const double ratio = std::abs(d[j]) / std::abs(a);
      if (ratio > tmax) continue;
      const bool better = bland ? (q < 0 || j < q) : std::abs(a) > best;
      if (better) {
        best = std::abs(a);
        q = j;
      }
    }
    if (q < 0) {
      for (int j : touched) row[j] = 0.0;
      return Outcome::Infeasible;
    }
    const double arq = row[q];
    const double theta = d[q] / arq;

    std::fill(alpha.begin(), alpha.end(), 0.0);
    for_column(q, [&](int i, double v) { alpha[i] = v; });
    factor_.ftran(alpha);
    if (std::abs(alpha[r] - arq) > 1e-6 * (1.0 + std::abs(arq))) {
      // Numerical trouble: refresh everything and retry.
      for (int j : touched) row[j] = 0.0;
      refactor();
      compute_xb();
      compute_duals(pi, d, false);
      continue;
    }
    const double dxq = (x_[out] - target) / alpha[r];
    for (int i = 0; i < m_; ++i) x_[head_[i]] -= alpha[i] * dxq;
    x_[q] += dxq;
    x_[out] = target;

    for (int j : touched) {
      if (state_[j] != kBasic) d[j] -= theta * row[j];
      row[j] = 0.0;
    }
    d[q] = 0.0;
    d[out] = -theta;

    if (std::abs(theta) <= 1e-12) {
      if (++degenerate_run > opt_.degenerate_stall) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    const int before = factor_.updates();
    pivot(r, q, alpha, to_lower ? kAtLower : kAtUpper);
    place_nonbasic(out);
    if (factor_.updates() < before || ++since_dual_refresh >= opt_.refactor_every) {
      compute_duals(pi, d, false);
      since_dual_refresh = 0;
    }
  }
}

LpSolution SimplexSolver::Impl::solve() {
  iterations_ = 0;
  for (int j = 0; j < total_; ++j) place_nonbasic(j);
  refactor();
  compute_xb();

  Outcome out = Outcome::Restart;
  for (int round = 0; round < 4; ++round) {
    if (max_basic_infeasibility() > opt_.feas_tol) {
      out = dual();
      if (out == Outcome::NotDualFeasible || out == Outcome::Infeasible) {
        // Dual infeasibility claims are confirmed by the primal phase one.
        out = primal();
      }
    } else {
      out = primal();
    }
    if (out != Outcome::Optimal) break;
    // Fresh factorization and a final consistency check.
    refactor();
    compute_xb();
    if (max_basic_infeasibility() > opt_.feas_tol) continue;
    std::vector<double> pi, d;
    compute_duals(pi, d, false);
    bool dual_ok = true;
    for (int j = 0; j < total_ && dual_ok; ++j) {
      const auto s = state_[j];
      if (s == kBasic || lo_[j] == hi_[j]) continue;
      if ((s == kAtLower && d[j] < -opt_.opt_tol) || (s == kAtUpper && d[j] > opt_.opt_tol) ||
          (s == kAtZero && std::abs(d[j]) > opt_.opt_tol))
        dual_ok = false;
    }
    if (dual_ok) break;
  }
  LpStatus status = LpStatus::IterationLimit;
  switch (out) {
    case Outcome::Optimal: status = LpStatus::Optimal; break;
    case Outcome::Infeasible: status = LpStatus::Infeasible; break;
    case Outcome::Unbounded: status = LpStatus::Unbounded; break;
    default: status = LpStatus::IterationLimit; break;
  }
  return extract(status);
}

LpSolution SimplexSolver::Impl::extract(LpStatus status) const {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations_;
  sol.x.resize(n_);
  for (int j = 0; j < n_; ++j) sol.x[j] = x_[j] * colscale_[j];
  std::vector<double> pi, d;
  compute_duals(pi, d, false);
  sol.duals.resize(m_);
  for (int r = 0; r < m_; ++r) sol.duals[r] = pi[r] * rowscale_[r];
  sol.reduced_costs.resize(n_);
  for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = state_[j] == kBasic ? 0.0 : d[j] / colscale_[j];
  double obj = offset_;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  sol.objective = obj;
  return sol;
}

SimplexSolver::SimplexSolver(const LpProblem& p, LpOptions o)
    : impl_(std::make_unique<Impl>(p, o)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;
void SimplexSolver::set_bounds(int j, double lo, double hi) { impl_->set_bounds(j, lo, hi); }
double SimplexSolver::lower(int j) const { return impl_->lower(j); }
double SimplexSolver::upper(int j) const { return impl_->upper(j); }
LpSolution SimplexSolver::solve() { return impl_->solve(); }
SimplexSolver::Basis SimplexSolver::basis() const { return impl_->basis(); }
void SimplexSolver::set_basis(const Basis& b) { impl_->set_basis(b); }

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  SimplexSolver solver(problem, options);
  return solver.solve();
}

// ---------------------------------------------------------------------------

KktReport kkt_report(const LpProblem& p, const LpSolution& s) {
  KktReport k;
  const int n = p.n_vars(), m = p.n_rows();
  double dual_obj = p.objective_offset;
  for (int r = 0; r < m; ++r) {
    const double act = p.row_activity(r, s.x);
    const double b = p.rhs[r];
    const double scale = 1.0 + std::abs(b);
    double viol = 0.0;
    switch (p.sense[r]) {
      case RowSense::LessEqual: viol = std::max(0.0, act - b); break;
      case RowSense::GreaterEqual: viol = std::max(0.0, b - act); break;
      case RowSense::Equal: viol = std::abs(act - b); break;
    }
    k.primal_residual = std::max(k.primal_residual, viol / scale);
    const double y = s.duals[r];
    double sign_viol = 0.0;
    if (p.sense[r] == RowSense::LessEqual) sign_viol = std::max(0.0, y);
    if (p.sense[r] == RowSense::GreaterEqual) sign_viol = std::max(0.0, -y);
    k.dual_residual = std::max(k.dual_residual, sign_viol);
    k.complementarity = std::max(k.complementarity, std::abs((act - b) * y) / scale);
    dual_obj += b * y;
  }
  for (int j = 0; j < n; ++j) {
    const double xj = s.x[j];
    const double scale = 1.0 + std::abs(xj);
    k.primal_residual = std::max(k.primal_residual, std::max(0.0, p.lower[j] - xj) / scale);
    k.primal_residual = std::max(k.primal_residual, std::max(0.0, xj - p.upper[j]) / scale);
  }
  std::vector<double> d(p.cost);
  for (int r = 0; r < m; ++r)
    for (int t = p.row_start[r]; t < p.row_start[r + 1]; ++t) d[p.col_index[t]] -= s.duals[r] * p.value[t];
  for (int j = 0; j < n; ++j) {
    const double xj = s.x[j];
    const bool at_lo = std::isfinite(p.lower[j]) && std::abs(xj - p.lower[j]) <= 1e-7 * (1 + std::abs(xj));
    const bool at_hi = std::isfinite(p.upper[j]) && std::abs(xj - p.upper[j]) <= 1e-7 * (1 + std::abs(xj));
    double viol = 0.0;
    if (at_lo && at_hi) viol = 0.0;
    else if (at_lo) viol = std::max(0.0, -d[j]);
    else if (at_hi) viol = std::max(0.0, d[j]);
    else viol = std::abs(d[j]);
    k.dual_residual = std::max(k.dual_residual, viol / (1.0 + std::abs(p.cost[j])));
    if (at_lo) dual_obj += d[j] * p.lower[j];
    else if (at_hi) dual_obj += d[j] * p.upper[j];
    else dual_obj += d[j] * xj;
  }
  double primal_obj = p.objective_offset;
  for (int j = 0; j < n; ++j) primal_obj += p.cost[j] * s.x[j];
  k.duality_gap = std::abs(primal_obj - dual_obj) / (1.0 + std::abs(primal_obj));
  return k;
}

std::string dump_lp(const LpProblem& p) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "LP " << p.n_vars() << " " << p.n_rows() << "\n";
  for (int j = 0; j < p.n_vars(); ++j)
    os << "V " << j << " " << num(p.cost[j]) << " " << num(p.lower[j]) << " " << num(p.upper[j])
       << "\n";
  for (int r = 0; r < p.n_rows(); ++r) {
    const char* s = p.sense[r] == RowSense::LessEqual ? "L" : p.sense[r] == RowSense::GreaterEqual ? "G" : "E";
    os << "R " << r << " " << s << " " << num(p.rhs[r]);
    for (int k = p.row_start[r]; k < p.row_start[r + 1]; ++k)
      os << " " << p.col_index[k] << ":" << num(p.value[k]);
    os << "\n";
  }
  return os.str();
}

bool is_feasible(const LpProblem& p, std::span<const double> x, double tol) {
  if (static_cast<int>(x.size()) != p.n_vars()) return false;
  for (int j = 0; j < p.n_vars(); ++j) {
    if (!std::isfinite(x[j])) return false;
    if (x[j] < p.lower[j] - tol * (1 + std::abs(p.lower[j]))) return false;
    if (x[j] > p.upper[j] + tol * (1 + std::abs(p.upper[j]))) return false;
  }
  for (int r = 0; r < p.n_rows(); ++r) {
    const double a = p.row_activity(r, x), b = p.rhs[r], t = tol * (1 + std::abs(b));
    if (p.sense[r] != RowSense::GreaterEqual && a > b + t) return false;
    if (p.sense[r] != RowSense::LessEqual && a < b - t) return false;
  }
  return true;
}

}  // namespace ucdw::lp
