#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "ucdw/lp_core.hpp"
#include "ucdw/uc_model.hpp"

namespace ucdw::lp {

const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::Unbounded: return "unbounded";
    case MilpStatus::TimeLimit: return "time-limit";
    case MilpStatus::NodeLimit: return "node-limit";
  }
  return "?";
}

double MilpResult::gap() const {
  if (!has_incumbent) return kInf;
  const double denom = std::max(std::abs(objective), 1e-10);
  return std::max(0.0, objective - bound) / denom;
}

namespace {

struct BoundChange {
  int var;
  double lo, hi;
};

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;  // relative to the root bounds, applied in order
  std::shared_ptr<const SimplexSolver::Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node* a, const Node* b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    if (a->depth != b->depth) return a->depth < b->depth;
    return a->id > b->id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const LpProblem& p, std::span<const int> ints, const MilpOptions& o)
      : p_(p), ints_(ints.begin(), ints.end()), opt_(o), lp_(p, o.lp) {
    for (int j : ints_) {
      if (j < 0 || j >= p.n_vars()) throw InputError("integer variable index out of range");
      root_lo_.push_back(std::ceil(p.lower[j] - opt_.integrality_tol));
      root_hi_.push_back(std::floor(p.upper[j] + opt_.integrality_tol));
    }
    pos_.assign(p.n_vars(), -1);
    for (std::size_t k = 0; k < ints_.size(); ++k) pos_[ints_[k]] = static_cast<int>(k);
    start_ = std::chrono::steady_clock::now();
  }

  MilpResult run();

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void apply(const std::vector<BoundChange>& changes) {
    cur_lo_ = root_lo_;
    cur_hi_ = root_hi_;
    for (const auto& c : changes) {
      cur_lo_[pos_[c.var]] = c.lo;
      cur_hi_[pos_[c.var]] = c.hi;
    }
    for (std::size_t k = 0; k < ints_.size(); ++k) lp_.set_bounds(ints_[k], cur_lo_[k], cur_hi_[k]);
  }
  bool integral(const std::vector<double>& x) const {
    for (int j : ints_)
      if (std::abs(x[j] - std::round(x[j])) > opt_.integrality_tol) return false;
    return true;
  }
  void offer(const std::vector<double>& x, double obj) {
    if (obj >= result_.objective) return;
    std::vector<double> xr = x;
    for (int j : ints_) xr[j] = std::round(xr[j]);
    if (!is_feasible(p_, xr, 1e-6)) return;
    double o = p_.objective_offset;
    for (int j = 0; j < p_.n_vars(); ++j) o += p_.cost[j] * xr[j];
    if (o >= result_.objective) return;
    result_.has_incumbent = true;
    result_.objective = o;
    result_.x = std::move(xr);
  }
  bool prunable(double bound) const {
    if (!result_.has_incumbent) return false;
    return bound >= result_.objective - opt_.gap_tol * std::max(std::abs(result_.objective), 1e-10);
  }
  void dive(const std::vector<BoundChange>& base, const std::vector<double>& x0);

  const LpProblem& p_;
  std::vector<int> ints_;
  MilpOptions opt_;
  SimplexSolver lp_;
  std::vector<double> root_lo_, root_hi_, cur_lo_, cur_hi_;
  std::vector<int> pos_;
  std::chrono::steady_clock::time_point start_;
  MilpResult result_;
};

void BranchAndBound::dive(const std::vector<BoundChange>& base, const std::vector<double>& x0) {
  const auto saved = lp_.basis();
  std::vector<BoundChange> changes = base;
  std::vector<double> x = x0;
  for (int step = 0; step < 4 * static_cast<int>(ints_.size()) + 10; ++step) {
    if (elapsed() > opt_.time_limit) break;
    std::vector<std::pair<double, int>> frac;
    for (int j : ints_) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > opt_.integrality_tol) frac.emplace_back(f, j);
    }
    if (frac.empty()) break;
    std::sort(frac.begin(), frac.end());
    const std::size_t k = std::max<std::size_t>(1, frac.size() / 4);
    const std::size_t mark = changes.size();
    for (std::size_t t = 0; t < k; ++t) {
      const int j = frac[t].second;
      const double v = std::round(x[j]);
      changes.push_back({j, v, v});
    }
    apply(changes);
    auto sol = lp_.solve();
    if (sol.status != LpStatus::Optimal) {
      // Retry with the single least fractional variable rounded the other way.
      changes.resize(mark);
      const int j = frac[0].second;
      const double v = std::round(x[j]) > x[j] ? std::floor(x[j]) : std::ceil(x[j]);
      changes.push_back({j, v, v});
      apply(changes);
      sol = lp_.solve();
      if (sol.status != LpStatus::Optimal) break;
    }
    if (prunable(sol.objective)) break;
    x = std::move(sol.x);
    if (integral(x)) {
      offer(x, sol.objective);
      break;
    }
  }
  lp_.set_basis(saved);
}

MilpResult BranchAndBound::run() {
  for (std::size_t k = 0; k < ints_.size(); ++k)
    if (root_lo_[k] > root_hi_[k]) {
      result_.status = MilpStatus::Infeasible;
      return result_;
    }
  if (!opt_.initial_solution.empty() &&
      static_cast<int>(opt_.initial_solution.size()) == p_.n_vars() &&
      integral(opt_.initial_solution))
    offer(opt_.initial_solution, -kInf);

  using NodePtr = std::unique_ptr<Node>;
  std::vector<NodePtr> open;
  const auto heap_cmp = [](const NodePtr& a, const NodePtr& b) { return NodeOrder{}(a.get(), b.get()); };
  long next_id = 0;
  open.push_back(std::make_unique<Node>());
  open.back()->id = next_id++;
  bool limit_hit = false;
  bool dominated = false;
  MilpStatus limit_status = MilpStatus::NodeLimit;
  long since_dive = 0;

  while (!open.empty()) {
    if (prunable(open.front()->bound)) {
      dominated = true;
      break;
    }
    if (result_.nodes >= opt_.node_limit) {
      limit_hit = true;
      limit_status = MilpStatus::NodeLimit;
      break;
    }
    if (elapsed() > opt_.time_limit) {
      limit_hit = true;
      limit_status = MilpStatus::TimeLimit;
      break;
    }
    std::pop_heap(open.begin(), open.end(), heap_cmp);
    NodePtr node = std::move(open.back());
    open.pop_back();
    ++result_.nodes;

    apply(node->changes);
    if (node->basis) lp_.set_basis(*node->basis);
    const auto sol = lp_.solve();
    if (sol.status == LpStatus::Unbounded && node->depth == 0) {
      result_.status = MilpStatus::Unbounded;
      return result_;
    }
    if (sol.status != LpStatus::Optimal) {
      if (sol.status == LpStatus::IterationLimit && node->depth == 0) {
        limit_hit = true;
        limit_status = MilpStatus::NodeLimit;
        break;
      }
      continue;
    }
    const double bound = std::max(node->bound, sol.objective);
    if (node->depth == 0) result_.bound = bound;
    if (prunable(bound)) continue;
    if (integral(sol.x)) {
      offer(sol.x, sol.objective);
      continue;
    }

    const bool do_dive = opt_.diving && (node->depth == 0 || ++since_dive >= opt_.dive_every);
    const auto basis = std::make_shared<const SimplexSolver::Basis>(lp_.basis());
    if (do_dive) {
      since_dive = 0;
      dive(node->changes, sol.x);
      if (prunable(bound)) continue;
      apply(node->changes);
    }

    int branch = -1;
    double best_score = -1.0;
    for (int j : ints_) {
      const double f = sol.x[j] - std::floor(sol.x[j]);
      const double score = std::min(f, 1.0 - f);
      if (score <= opt_.integrality_tol) continue;
      if (score > best_score + 1e-12) {
        best_score = score;
        branch = j;
      }
    }
    const double v = sol.x[branch];
    const int q = pos_[branch];
    for (int side = 0; side < 2; ++side) {
      auto child = std::make_unique<Node>();
      child->id = next_id++;
      child->depth = node->depth + 1;
      child->bound = bound;
      child->changes = node->changes;
      if (side == 0) child->changes.push_back({branch, cur_lo_[q], std::floor(v)});
      else child->changes.push_back({branch, std::ceil(v), cur_hi_[q]});
      child->basis = basis;
      open.push_back(std::move(child));
      std::push_heap(open.begin(), open.end(), heap_cmp);
    }
  }

  if (limit_hit) {
    double lb = result_.has_incumbent ? result_.objective : kInf;
    if (!open.empty()) lb = std::min(lb, open.front()->bound);
    result_.bound = std::max(result_.bound, lb);
    result_.status = limit_status;
    return result_;
  }
  if (!result_.has_incumbent) {
    result_.status = MilpStatus::Infeasible;
    return result_;
  }
  result_.status = MilpStatus::Optimal;
  result_.bound = dominated ? std::min(result_.objective, std::max(result_.bound, open.front()->bound))
                            : result_.objective;
  return result_;
}

}  // namespace

MilpResult solve_milp(const LpProblem& problem, std::span<const int> integer_vars,
                      const MilpOptions& options) {
  BranchAndBound bb(problem, integer_vars, options);
  return bb.run();
}

}  // namespace ucdw::lp
