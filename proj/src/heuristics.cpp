#include "ucdw/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucdw/lp_core.hpp"

namespace ucdw {

namespace {

using Pattern = std::vector<std::uint8_t>;

bool pattern_ok(const GeneratorSpec& g, const Pattern& on) {
  const int n = static_cast<int>(on.size());
  const auto s = schedule_from_commitment(g, on, std::vector<double>(n, 0.0));
  for (int t = 0; t < n; ++t) {
    int starts = 0, stops = 0;
    for (int i = std::max(t - g.min_up + 1, 0); i <= t; ++i) starts += s.startup[i];
    for (int i = std::max(t - g.min_down + 1, 0); i <= t; ++i) stops += s.shutdown[i];
    if (starts > on[t] || stops > 1 - on[t]) return false;
  }
  return true;
}

// Adds on-periods until min-up and min-down hold; only ever turns units on.
void repair_pattern(const GeneratorSpec& g, Pattern& on, int anchor) {
  const int n = static_cast<int>(on.size());
  for (int guard = 0; guard < 4 * n + 4; ++guard) {
    bool changed = false;
    for (int a = 0; a < n && !changed; ++a) {
      if (!on[a] || (a > 0 && on[a - 1])) continue;
      int b = a;
      while (b + 1 < n && on[b + 1]) ++b;
      const bool continuation = a == 0 && g.initial_on;
      if (continuation || b == n - 1 || b - a + 1 >= g.min_up) continue;
      // Grow alternately right and left, starting on the side away from the anchor's edge.
      bool right = anchor <= a || anchor >= b ? anchor <= a : true;
      while (b - a + 1 < g.min_up && b < n - 1) {
        if (right || a == 0) {
          on[++b] = 1;
        } else {
          on[--a] = 1;
        }
        right = !right;
      }
      changed = true;
    }
    for (int c = 0; c < n && !changed; ++c) {
      if (on[c] || (c > 0 && !on[c - 1])) continue;
      const bool after_on = c > 0 || g.initial_on;
      if (!after_on) continue;
      int d = c;
      while (d + 1 < n && !on[d + 1]) ++d;
      if (d == n - 1 || d - c + 1 >= g.min_down) continue;
      for (int t = c; t <= d; ++t) on[t] = 1;
      changed = true;
    }
    if (!changed) return;
  }
}

// Upper limits on output implied by startup/shutdown ramps along each on-block.
std::vector<double> ramp_limited_capacity(const GeneratorSpec& g, const Pattern& on) {
  const int n = static_cast<int>(on.size());
  std::vector<double> cap(n, 0.0);
  for (int a = 0; a < n; ++a) {
    if (!on[a] || (a > 0 && on[a - 1])) continue;
    int b = a;
    while (b + 1 < n && on[b + 1]) ++b;
    const bool continuation = a == 0 && g.initial_on;
    for (int t = a; t <= b; ++t) {
      double c = g.p_max;
      if (continuation) c = std::min(c, g.initial_power + (t + 1) * g.ramp_up);
      else c = std::min(c, g.startup_ramp + (t - a) * g.ramp_up);
      if (b < n - 1) c = std::min(c, g.shutdown_ramp + (b - t) * g.ramp_down);
      cap[t] = c;
    }
  }
  return cap;
}

}  // namespace

void CandidateSet::push(int generator, const Schedule& sched) {
  auto& q = items_.at(generator);
  q.push_back(sched);
  while (static_cast<int>(q.size()) > depth_) q.pop_front();
}

void CandidateSet::push_all(const std::vector<Schedule>& schedules) {
  if (static_cast<int>(schedules.size()) != n_generators())
    throw InputError("one schedule per generator expected");
  for (int s = 0; s < n_generators(); ++s) push(s, schedules[s]);
}

bool CandidateSet::populated() const {
  if (items_.empty()) return false;
  for (const auto& q : items_)
    if (q.empty()) return false;
  return true;
}

double commit_priority(const GeneratorSpec& g) { return g.no_load_cost / g.p_max + g.marginal_cost; }

std::optional<UcSolution> economic_dispatch(const UcInstance& inst,
                                            const std::vector<std::vector<std::uint8_t>>& on) {
  const int n = inst.n_periods, S = inst.n_generators();
  if (static_cast<int>(on.size()) != S) throw InputError("one pattern per generator expected");
  for (int s = 0; s < S; ++s) {
    if (static_cast<int>(on[s].size()) != n) throw InputError("pattern length mismatch");
    if (!pattern_ok(inst.generators[s], on[s])) return std::nullopt;
  }
  lp::LpProblem p;
  std::vector<std::vector<int>> var(S, std::vector<int>(n, -1));
  for (int s = 0; s < S; ++s) {
    const auto& g = inst.generators[s];
    for (int t = 0; t < n; ++t)
      if (on[s][t]) var[s][t] = p.add_variable(g.marginal_cost, g.p_min, g.p_max);
  }
  std::vector<int> idx;
  std::vector<double> val;
  for (int t = 0; t < n; ++t) {
    idx.clear();
    val.clear();
    double committed = 0.0;
    for (int s = 0; s < S; ++s)
      if (on[s][t]) {
        idx.push_back(var[s][t]);
        val.push_back(1.0);
        committed += inst.generators[s].p_max;
      }
    if (idx.empty()) {
      if (inst.profile.demand[t] > kFeasTol || inst.profile.reserve[t] > kFeasTol) return std::nullopt;
      continue;
    }
    p.add_row(idx, val, lp::RowSense::GreaterEqual, inst.profile.demand[t]);
    p.add_row(idx, val, lp::RowSense::LessEqual, committed - inst.profile.reserve[t]);
  }
  for (int s = 0; s < S; ++s) {
    const auto& g = inst.generators[s];
    const auto sched = schedule_from_commitment(g, on[s], std::vector<double>(n, 0.0));
    for (int t = 0; t < n; ++t) {
      const double a_prev = t == 0 ? (g.initial_on ? 1.0 : 0.0) : on[s][t - 1];
      const double p_prev_const = t == 0 ? (g.initial_on ? g.initial_power : 0.0) : 0.0;
      const int v_prev = t == 0 ? -1 : var[s][t - 1];
      const int v = var[s][t];
      const double up = g.ramp_up * a_prev + g.startup_ramp * sched.startup[t];
      const double down = g.ramp_down * on[s][t] + g.shutdown_ramp * sched.shutdown[t];
      // p_t - p_{t-1} <= up ; p_{t-1} - p_t <= down
      idx.clear();
      val.clear();
      double k = 0.0;  // constant part of p_t - p_{t-1}
      if (v >= 0) {
        idx.push_back(v);
        val.push_back(1.0);
      }
      if (v_prev >= 0) {
        idx.push_back(v_prev);
        val.push_back(-1.0);
      } else {
        k -= p_prev_const;
      }
      if (idx.empty()) {
        if (k > up + kFeasTol || -k > down + kFeasTol) return std::nullopt;
        continue;
      }
      p.add_row(idx, val, lp::RowSense::LessEqual, up - k);
      p.add_row(idx, val, lp::RowSense::GreaterEqual, -down - k);
    }
  }
  const auto sol = lp::solve_lp(p);
  if (sol.status != lp::LpStatus::Optimal) return std::nullopt;
  UcSolution out;
  for (int s = 0; s < S; ++s) {
    const auto& g = inst.generators[s];
    std::vector<double> power(n, 0.0);
    for (int t = 0; t < n; ++t)
      if (var[s][t] >= 0) power[t] = std::clamp(sol.x[var[s][t]], g.p_min, g.p_max);
    out.schedules.push_back(schedule_from_commitment(g, on[s], std::move(power)));
  }
  if (!check_system_feasibility(inst, out).empty()) return std::nullopt;
  out.total_cost = evaluate_cost(inst, out);
  return out;
}

std::optional<UcSolution> local_search_commit(const UcInstance& inst,
                                              const std::vector<Schedule>& schedules) {
  const int n = inst.n_periods, S = inst.n_generators();
  if (static_cast<int>(schedules.size()) != S) throw InputError("one schedule per generator expected");
  std::vector<Pattern> on(S);
  for (int s = 0; s < S; ++s) on[s] = schedules[s].on;
  std::vector<int> order(S);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return commit_priority(inst.generators[a]) < commit_priority(inst.generators[b]);
  });

  std::vector<std::vector<double>> cap(S);
  for (int s = 0; s < S; ++s) cap[s] = ramp_limited_capacity(inst.generators[s], on[s]);
  auto shortfall = [&](int t) {
    double pmax = 0.0, avail = 0.0;
    for (int s = 0; s < S; ++s) {
      if (!on[s][t]) continue;
      pmax += inst.generators[s].p_max;
      avail += cap[s][t];
    }
    const double need = inst.profile.demand[t] + inst.profile.reserve[t];
    return std::max(need - pmax, inst.profile.demand[t] - avail);
  };
  for (int t = 0; t < n; ++t) {
    while (shortfall(t) > kFeasTol) {
      bool committed = false;
      for (int s : order) {
        if (on[s][t]) continue;
        Pattern trial = on[s];
        trial[t] = 1;
        repair_pattern(inst.generators[s], trial, t);
        if (!pattern_ok(inst.generators[s], trial)) continue;
        on[s] = std::move(trial);
        cap[s] = ramp_limited_capacity(inst.generators[s], on[s]);
        committed = true;
        break;
      }
      // Everyone is on but ramping limits output: start a block earlier or end it later.
      for (int s : order) {
        if (committed) break;
        const auto& g = inst.generators[s];
        if (!on[s][t] || cap[s][t] >= g.p_max - kFeasTol) continue;
        int a = t, b = t;
        while (a > 0 && on[s][a - 1]) --a;
        while (b + 1 < n && on[s][b + 1]) ++b;
        for (int edge : {a - 1, b + 1}) {
          if (edge < 0 || edge >= n) continue;
          Pattern trial = on[s];
          trial[edge] = 1;
          repair_pattern(g, trial, edge);
          if (!pattern_ok(g, trial)) continue;
          auto c = ramp_limited_capacity(g, trial);
          if (c[t] <= cap[s][t] + kFeasTol) continue;
          on[s] = std::move(trial);
          cap[s] = std::move(c);
          committed = true;
          break;
        }
      }
      if (!committed) return std::nullopt;
    }
  }
  return economic_dispatch(inst, on);
}

std::optional<UcSolution> column_combination(const UcInstance& inst, const CandidateSet& cand,
                                             const CombinationOptions& opt) {
  const int n = inst.n_periods, S = inst.n_generators();
  if (cand.n_generators() != S || !cand.populated()) throw InputError("candidate set not populated");
  // Distinct candidates per generator.
  std::vector<std::vector<const Schedule*>> pick(S);
  for (int s = 0; s < S; ++s)
    for (const auto& sc : cand.at(s)) {
      bool dup = false;
      for (const auto* q : pick[s]) dup = dup || (q->on == sc.on && q->power == sc.power);
      if (!dup) pick[s].push_back(&sc);
    }
  lp::LpProblem p;
  std::vector<std::vector<int>> var(S);
  std::vector<int> ints;
  for (int s = 0; s < S; ++s)
    for (const auto* sc : pick[s]) {
      var[s].push_back(p.add_variable(schedule_cost(inst.generators[s], *sc), 0.0, 1.0));
      ints.push_back(var[s].back());
    }
  std::vector<int> idx;
  std::vector<double> val;
  for (int row = 0; row < 2 * n; ++row) {
    const int t = row % n;
    const bool load = row < n;
    idx.clear();
    val.clear();
    for (int s = 0; s < S; ++s) {
      const auto& g = inst.generators[s];
      for (std::size_t i = 0; i < pick[s].size(); ++i) {
        const auto& sc = *pick[s][i];
        const double v = load ? sc.power[t] : g.p_max * sc.on[t] - sc.power[t];
        if (v == 0.0) continue;
        idx.push_back(var[s][i]);
        val.push_back(v);
      }
    }
    const double rhs = load ? inst.profile.demand[t] : inst.profile.reserve[t];
    if (idx.empty()) {
      if (rhs > kFeasTol) return std::nullopt;
      continue;
    }
    p.add_row(idx, val, lp::RowSense::GreaterEqual, rhs);
  }
  for (int s = 0; s < S; ++s) {
    val.assign(var[s].size(), 1.0);
    p.add_row(var[s], val, lp::RowSense::Equal, 1.0);
  }
  lp::MilpOptions mo;
  mo.node_limit = opt.node_limit;
  mo.time_limit = opt.time_limit;
  mo.gap_tol = 1e-9;
  const auto r = lp::solve_milp(p, ints, mo);
  if (!r.has_incumbent) return std::nullopt;
  std::vector<Pattern> on(S);
  for (int s = 0; s < S; ++s)
    for (std::size_t i = 0; i < pick[s].size(); ++i)
      if (r.x[var[s][i]] > 0.5) on[s] = pick[s][i]->on;
  auto redispatched = economic_dispatch(inst, on);
  if (redispatched) return redispatched;
  // Selected power profiles are feasible by construction of the rows; keep them verbatim.
  UcSolution verbatim;
  for (int s = 0; s < S; ++s)
    for (std::size_t i = 0; i < pick[s].size(); ++i)
      if (r.x[var[s][i]] > 0.5) verbatim.schedules.push_back(*pick[s][i]);
  if (!check_system_feasibility(inst, verbatim).empty()) return std::nullopt;
  verbatim.total_cost = evaluate_cost(inst, verbatim);
  return verbatim;
}

}  // namespace ucdw
