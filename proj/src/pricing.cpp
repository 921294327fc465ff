#include "ucdw/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ucdw/extensive_uc.hpp"
#include "ucdw/lp_core.hpp"

namespace ucdw {

namespace {

constexpr double kInfCost = std::numeric_limits<double>::infinity();

// Convex piecewise-linear function on a closed interval, as breakpoints with increasing x.
struct Pwl {
  std::vector<double> x, v;

  bool empty() const { return x.empty(); }
  double lo() const { return x.front(); }
  double hi() const { return x.back(); }

  void push(double px, double pv) {
    if (!x.empty() && px - x.back() <= 1e-12 * (1.0 + std::abs(px))) {
      v.back() = std::min(v.back(), pv);
      return;
    }
    x.push_back(px);
    v.push_back(pv);
  }

  double at(double q) const {
    if (q <= x.front()) return v.front();
    if (q >= x.back()) return v.back();
    const auto k = std::upper_bound(x.begin(), x.end(), q) - x.begin();
    const double w = (q - x[k - 1]) / (x[k] - x[k - 1]);
    return v[k - 1] + w * (v[k] - v[k - 1]);
  }

  // Leftmost and rightmost breakpoints attaining the minimum.
  std::pair<int, int> argmin() const {
    int k1 = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
      if (v[i] < v[k1]) k1 = i;
    int k2 = k1;
    const double tol = 1e-12 * (1.0 + std::abs(v[k1]));
    while (k2 + 1 < static_cast<int>(v.size()) && v[k2 + 1] <= v[k1] + tol) ++k2;
    return {k1, k2};
  }

  // Minimum over [a, b] intersected with the domain, and its location.
  double min_on(double a, double b, double* where) const {
    a = std::max(a, lo());
    b = std::min(b, hi());
    if (a > b + 1e-9) return kInfCost;
    if (a > b) a = b;
    const double q = std::clamp(x[argmin().first], a, b);
    if (where) *where = q;
    return at(q);
  }
};

// q -> min { V(p) : q - ru <= p <= q + rd }
Pwl window_min(const Pwl& f, double ru, double rd) {
  const auto [k1, k2] = f.argmin();
  Pwl g;
  for (int i = 0; i <= k1; ++i) g.push(f.x[i] - rd, f.v[i]);
  for (int i = k2; i < static_cast<int>(f.x.size()); ++i) g.push(f.x[i] + ru, f.v[i]);
  return g;
}

Pwl clip(const Pwl& f, double a, double b) {
  Pwl g;
  a = std::max(a, f.lo());
  b = std::min(b, f.hi());
  if (a > b + 1e-9) return g;
  if (a > b) a = b;
  g.push(a, f.at(a));
  for (std::size_t i = 0; i < f.x.size(); ++i)
    if (f.x[i] > a && f.x[i] < b) g.push(f.x[i], f.v[i]);
  g.push(b, f.at(b));
  return g;
}

void add_linear(Pwl& f, double c) {
  for (std::size_t i = 0; i < f.x.size(); ++i) f.v[i] += c * f.x[i];
}

// Forward value functions of the dispatch problem for intervals starting at `first`.
struct DispatchSweep {
  int first = 0;
  std::vector<Pwl> value;  // value[k] covers period first + k
};

DispatchSweep sweep_from(const GeneratorSpec& gen, const std::vector<double>& cp, int first,
                         int n, bool startup) {
  DispatchSweep s;
  s.first = first;
  Pwl f;
  double lo = gen.p_min, hi = gen.p_max;
  if (startup) {
    hi = std::min(hi, gen.startup_ramp);
  } else {
    lo = std::max(lo, gen.initial_power - gen.ramp_down);
    hi = std::min(hi, gen.initial_power + gen.ramp_up);
  }
  if (lo > hi + 1e-9) return s;
  hi = std::max(lo, hi);
  f.push(lo, cp[first] * lo);
  f.push(hi, cp[first] * hi);
  s.value.push_back(f);
  for (int t = first + 1; t < n; ++t) {
    Pwl g = clip(window_min(s.value.back(), gen.ramp_up, gen.ramp_down), gen.p_min, gen.p_max);
    if (g.empty()) break;
    add_linear(g, cp[t]);
    s.value.push_back(std::move(g));
  }
  return s;
}

// Cost of ending the interval at `last`; fills powers when requested.
double finish(const GeneratorSpec& gen, const DispatchSweep& s, int last, int n,
              std::vector<double>* power) {
  const int k = last - s.first;
  if (k < 0 || k >= static_cast<int>(s.value.size())) return kInfCost;
  const double cap = last + 1 < n ? gen.shutdown_ramp : gen.p_max;
  double q = 0.0;
  const double best = s.value[k].min_on(-kInfCost, cap, &q);
  if (!std::isfinite(best) || !power) return best;
  (*power)[last] = q;
  for (int j = k - 1; j >= 0; --j) {
    double p = 0.0;
    s.value[j].min_on(q - gen.ramp_up, q + gen.ramp_down, &p);
    (*power)[s.first + j] = p;
    q = p;
  }
  return best;
}

struct Label {
  double cost = kInfCost;
  int on_periods = 0;
  std::vector<std::uint8_t> starts;  // startup indicator prefix
  std::vector<std::pair<int, int>> intervals;
  std::vector<std::uint8_t> interval_startup;

  bool better_than(const Label& o) const {
    const double tol = 1e-9 * (1.0 + std::abs(cost) + std::abs(o.cost));
    if (cost < o.cost - tol) return true;
    if (cost > o.cost + tol) return false;
    if (on_periods != o.on_periods) return on_periods < o.on_periods;
    // Earliest startup first.
    const std::size_t m = std::min(starts.size(), o.starts.size());
    for (std::size_t i = 0; i < m; ++i)
      if (starts[i] != o.starts[i]) return starts[i] > o.starts[i];
    return false;
  }
};

}  // namespace

DualPoint DualPoint::zeros(int n) {
  DualPoint y;
  y.y_load.assign(n, 0.0);
  y.y_reserve.assign(n, 0.0);
  return y;
}

void DualPoint::validate(int n) const {
  if (static_cast<int>(y_load.size()) != n || static_cast<int>(y_reserve.size()) != n)
    throw InputError("dual vector length does not match the horizon");
  for (int t = 0; t < n; ++t)
    if (!std::isfinite(y_load[t]) || !std::isfinite(y_reserve[t]))
      throw InputError("non-finite dual value");
  for (double s : sigma)
    if (!std::isfinite(s)) throw InputError("non-finite convexity dual");
}

ReducedCosts reduced_cost_coefficients(const GeneratorSpec& gen, const DualPoint& y) {
  ReducedCosts rc;
  const int n = y.n_periods();
  rc.power.resize(n);
  rc.on.resize(n);
  for (int t = 0; t < n; ++t) {
    rc.power[t] = gen.marginal_cost - y.y_load[t] + y.y_reserve[t];
    rc.on[t] = gen.no_load_cost - y.y_reserve[t] * gen.p_max;
  }
  rc.startup = gen.startup_cost;
  return rc;
}

double reduced_objective(const GeneratorSpec& gen, const DualPoint& y, const Schedule& s) {
  const auto rc = reduced_cost_coefficients(gen, y);
  double r = 0.0;
  for (int t = 0; t < s.n_periods(); ++t)
    r += rc.power[t] * s.power[t] + rc.on[t] * s.on[t] + rc.startup * s.startup[t];
  return r;
}

double interval_dispatch(const GeneratorSpec& gen, const std::vector<double>& cp, int first,
                         int last, int n, bool startup, std::vector<double>* power) {
  if (first < 0 || last < first || last >= n || static_cast<int>(cp.size()) < n)
    throw InputError("interval out of range");
  if (!startup && first != 0) throw InputError("continuation intervals start at period 1");
  const auto s = sweep_from(gen, cp, first, n, startup);
  if (power) power->assign(n, 0.0);
  return finish(gen, s, last, n, power);
}

PricingResult solve_pricing(const GeneratorSpec& gen, const DualPoint& y, int n) {
  if (n < 1) throw InputError("horizon must be positive");
  y.validate(n);
  const auto rc = reduced_cost_coefficients(gen, y);
  std::vector<double> on_prefix(n + 1, 0.0);
  for (int t = 0; t < n; ++t) on_prefix[t + 1] = on_prefix[t] + rc.on[t];

  // interval_cost[a][b] for startup intervals; continuation handled separately.
  std::vector<DispatchSweep> sweeps(n);
  for (int a = 0; a < n; ++a) sweeps[a] = sweep_from(gen, rc.power, a, n, true);
  auto startup_interval = [&](int a, int b) {
    const double d = finish(gen, sweeps[a], b, n, nullptr);
    if (!std::isfinite(d)) return kInfCost;
    return rc.startup + on_prefix[b + 1] - on_prefix[a] + d;
  };

  // ended[b]: best label whose last on-interval ends at period b < n - 1 (shutdown at b + 1).
  std::vector<Label> ended(n);
  Label init_shutdown;
  Label best_total;  // complete schedules

  auto extend = [](const Label& base, int a, int b, double cost, bool is_startup, int n_) {
    Label l = base;
    l.cost += cost;
    l.on_periods += b - a + 1;
    l.starts.resize(n_, 0);
    if (is_startup) l.starts[a] = 1;
    l.intervals.emplace_back(a, b);
    l.interval_startup.push_back(is_startup ? 1 : 0);
    return l;
  };
  auto offer_total = [&](const Label& l) {
    if (!std::isfinite(best_total.cost) || l.better_than(best_total)) best_total = l;
  };
  auto offer_ended = [&](int b, const Label& l) {
    if (!std::isfinite(ended[b].cost) || l.better_than(ended[b])) ended[b] = l;
  };

  Label root;
  root.cost = 0.0;
  root.starts.assign(n, 0);

  auto starts_after = [&](const Label& base, int earliest) {
    for (int a = earliest; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        const bool to_end = b == n - 1;
        if (!to_end && b - a + 1 < gen.min_up) continue;
        const double c = startup_interval(a, b);
        if (!std::isfinite(c)) continue;
        const Label l = extend(base, a, b, c, true, n);
        if (to_end) offer_total(l);
        else offer_ended(b, l);
      }
    }
  };

  if (gen.initial_on) {
    const auto cont = sweep_from(gen, rc.power, 0, n, false);
    for (int b = 0; b < n; ++b) {
      const double d = finish(gen, cont, b, n, nullptr);
      if (!std::isfinite(d)) continue;
      const Label l = extend(root, 0, b, on_prefix[b + 1] + d, false, n);
      if (b == n - 1) offer_total(l);
      else offer_ended(b, l);
    }
    if (gen.initial_power <= gen.shutdown_ramp + kFeasTol) {
      offer_total(root);
      init_shutdown = root;
    }
  } else {
    offer_total(root);
    starts_after(root, 0);
  }
  // Process ended labels in increasing b; later states only depend on earlier ones.
  if (std::isfinite(init_shutdown.cost)) starts_after(init_shutdown, gen.min_down);
  for (int b = 0; b < n; ++b) {
    if (!std::isfinite(ended[b].cost)) continue;
    const Label base = ended[b];
    offer_total(base);
    starts_after(base, b + 1 + gen.min_down);
  }
  if (!std::isfinite(best_total.cost)) throw InputError("generator has no feasible schedule");

  std::vector<std::uint8_t> on(n, 0);
  std::vector<double> power(n, 0.0), seg;
  for (std::size_t k = 0; k < best_total.intervals.size(); ++k) {
    const auto [a, b] = best_total.intervals[k];
    const bool st = best_total.interval_startup[k];
    const auto sw = st ? sweeps[a] : sweep_from(gen, rc.power, 0, n, false);
    seg.assign(n, 0.0);
    finish(gen, sw, b, n, &seg);
    for (int t = a; t <= b; ++t) {
      on[t] = 1;
      power[t] = seg[t];
    }
  }
  PricingResult res;
  res.schedule = schedule_from_commitment(gen, on, std::move(power));
  res.reduced_objective = reduced_objective(gen, y, res.schedule);
  res.contribution = linking_contribution(gen, res.schedule);
  return res;
}

PricingResult brute_force_pricing(const GeneratorSpec& gen, const DualPoint& y, int n) {
  if (n < 1 || n > 8) throw InputError("brute force pricing supports 1..8 periods");
  y.validate(n);
  const auto rc = reduced_cost_coefficients(gen, y);
  UcLayout layout;
  layout.n_generators = 1;
  layout.n_periods = n;
  lp::LpProblem base;
  for (int t = 0; t < n; ++t) {
    base.add_variable(rc.power[t], 0.0, gen.p_max);
    base.add_variable(rc.on[t], 0.0, 1.0);
    base.add_variable(rc.startup, 0.0, 1.0);
    base.add_variable(0.0, 0.0, 1.0);
  }
  add_generator_rows(base, layout, 0, gen);

  PricingResult best;
  bool found = false;
  int best_on = 0;
  for (int code = 0; code < (1 << n); ++code) {
    std::vector<std::uint8_t> on(n);
    for (int t = 0; t < n; ++t) on[t] = (code >> t) & 1;
    const auto pattern = schedule_from_commitment(gen, on, std::vector<double>(n, 0.0));
    lp::LpProblem p = base;
    for (int t = 0; t < n; ++t) {
      p.lower[layout.on(0, t)] = p.upper[layout.on(0, t)] = pattern.on[t];
      p.lower[layout.start(0, t)] = p.upper[layout.start(0, t)] = pattern.startup[t];
      p.lower[layout.stop(0, t)] = p.upper[layout.stop(0, t)] = pattern.shutdown[t];
    }
    const auto sol = lp::solve_lp(p);
    if (sol.status != lp::LpStatus::Optimal) continue;
    const int on_count = pattern.on_count();
    const double tol = 1e-9 * (1.0 + std::abs(sol.objective));
    if (found && (sol.objective > best.reduced_objective + tol ||
                  (sol.objective > best.reduced_objective - tol && on_count >= best_on)))
      continue;
    std::vector<double> power(n);
    for (int t = 0; t < n; ++t) power[t] = pattern.on[t] ? sol.x[layout.power(0, t)] : 0.0;
    best.schedule = schedule_from_commitment(gen, on, std::move(power));
    best.reduced_objective = sol.objective;
    best_on = on_count;
    found = true;
  }
  if (!found) throw InputError("generator has no feasible schedule");
  best.contribution = linking_contribution(gen, best.schedule);
  return best;
}

PricingSweep solve_all_pricing(const UcInstance& inst, const DualPoint& y) {
  PricingSweep out;
  out.results.reserve(inst.generators.size());
  for (const auto& g : inst.generators) {
    out.results.push_back(solve_pricing(g, y, inst.n_periods));
    out.total_reduced += out.results.back().reduced_objective;
  }
  return out;
}

}  // namespace ucdw
