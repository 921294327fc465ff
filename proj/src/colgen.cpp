#include "ucdw/colgen.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <json.hpp>

#include "ucdw/heuristics.hpp"
#include "ucdw/master.hpp"

namespace ucdw {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mean_marginal_cost(const UcInstance& inst) {
  double s = 0.0;
  for (const auto& g : inst.generators) s += g.marginal_cost;
  return std::max(s / inst.n_generators(), 1e-12);
}

}  // namespace

void ColGenConfig::validate() const {
  if (!(mu_decrease_factor > 1.0) || !(mu_increase_factor > 1.0))
    throw InputError("mu factors must exceed 1");
  if (!(gap_tolerance > 0.0)) throw InputError("gap tolerance must be positive");
  if (!(initial_mu > 0.0) || !std::isfinite(initial_mu)) throw InputError("initial mu must be positive");
  if (max_iterations < 0 || time_limit_seconds < 0.0) throw InputError("limits must be nonnegative");
}

std::string to_string(ColGenStatus s) {
  switch (s) {
    case ColGenStatus::Solved: return "solved";
    case ColGenStatus::MpOptimal: return "mp-optimal";
    case ColGenStatus::TimeLimit: return "time-limit";
    case ColGenStatus::IterLimit: return "iter-limit";
  }
  return "?";
}

std::string to_json_line(const IterationRecord& r) {
  nlohmann::ordered_json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
  j["iter"] = r.iter;
  j["y_hash"] = r.y_hash;
  j["lb"] = num(r.lb);
  j["ub"] = num(r.ub);
  j["gap"] = num(r.gap);
  j["mu"] = r.mu;
  j["t_init"] = r.t_init;
  j["t_rmp"] = r.t_rmp;
  j["t_pricing"] = r.t_pricing;
  j["t_heuristic"] = r.t_heuristic;
  return j.dump();
}

double compute_lower_bound(const UcInstance& inst, const DualPoint& y) {
  y.validate(inst.n_periods);
  return linking_value(inst, y) + solve_all_pricing(inst, y).total_reduced;
}

double relative_gap(double lb, double ub) {
  if (!std::isfinite(lb) || !std::isfinite(ub)) return std::numeric_limits<double>::infinity();
  return std::max(0.0, ub - lb) / std::max(std::abs(ub), 1e-12);
}

std::uint64_t dual_hash(const DualPoint& y) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](double v) {
    if (v == 0.0) v = 0.0;
    unsigned char b[sizeof v];
    std::memcpy(b, &v, sizeof v);
    for (unsigned char c : b) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (double v : y.y_load) mix(v);
  for (double v : y.y_reserve) mix(v);
  return h;
}

ColGenResult run_column_generation(const UcInstance& inst, const DualPoint& y0,
                                   const ColGenConfig& cfg, const HeuristicSwitches& heur,
                                   double init_seconds, std::ostream* log) {
  cfg.validate();
  inst.validate();
  const int n = inst.n_periods, S = inst.n_generators();
  y0.validate(n);
  for (int t = 0; t < n; ++t)
    if (y0.y_load[t] < 0.0 || y0.y_reserve[t] < 0.0) throw InputError("initial dual must be nonnegative");

  const auto t0 = Clock::now();
  ColGenResult res;
  res.best_dual = y0;
  double ub = std::numeric_limits<double>::infinity();
  auto offer = [&](std::optional<UcSolution> sol) {
    if (!sol || !check_system_feasibility(inst, *sol).empty()) return;
    sol->total_cost = evaluate_cost(inst, *sol);
    if (sol->total_cost < ub) {
      ub = sol->total_cost;
      res.best_solution = std::move(sol);
    }
  };

  for (double tol : cfg.report_tolerances) res.crossings.push_back({tol, -1, 0.0});
  res.crossings.push_back({cfg.gap_tolerance, -1, 0.0});
  ColumnPool pool(S);
  CandidateSet candidates(S);
  DualPoint y = y0;
  y.sigma.clear();
  DualPoint center = y;
  const double kappa = mean_marginal_cost(inst);
  double mu = cfg.initial_mu / kappa;
  const double mu_lo = 1e-10 / kappa, mu_hi = 1e10 / kappa;

  auto mark_crossings = [&](int k) {
    const double gap = relative_gap(res.best_lower_bound, ub);
    for (auto& c : res.crossings)
      if (c.iteration < 0 && gap <= c.tolerance) {
        c.iteration = k;
        c.seconds = seconds_since(t0) + init_seconds;
      }
  };
  auto finish = [&](ColGenStatus st) {
    mark_crossings(res.iterations);
    res.status = st;
    res.gap = relative_gap(res.best_lower_bound, ub);
    res.seconds = seconds_since(t0);
    return res;
  };

  for (int k = 1;; ++k) {
    if (seconds_since(t0) >= cfg.time_limit_seconds) return finish(ColGenStatus::TimeLimit);
    if (k > cfg.max_iterations) return finish(ColGenStatus::IterLimit);
    IterationRecord rec;
    rec.iter = k;
    rec.y_hash = dual_hash(y);
    rec.t_init = k == 1 ? init_seconds : 0.0;

    auto tp = Clock::now();
    auto sweep = solve_all_pricing(inst, y);
    const double lb = linking_value(inst, y) + sweep.total_reduced;
    rec.t_pricing = seconds_since(tp);
    if (lb > res.best_lower_bound) {
      res.best_lower_bound = lb;
      res.best_dual = y;
      center = y;
      mu = std::max(mu_lo, mu / cfg.mu_decrease_factor);
    } else {
      mu = std::min(mu_hi, mu * cfg.mu_increase_factor);
    }
    const int added = add_columns(pool, inst, sweep.results, k);
    std::vector<Schedule> scheds;
    scheds.reserve(S);
    for (auto& r : sweep.results) scheds.push_back(r.schedule);
    candidates.push_all(scheds);

    auto th = Clock::now();
    if (heur.local_search) offer(local_search_commit(inst, scheds));
    const auto within = [&] { return relative_gap(res.best_lower_bound, ub) <= cfg.gap_tolerance; };
    if (heur.column_combination && k >= cfg.heuristic_escalation_iteration && !within()) {
      CombinationOptions co;
      co.time_limit = std::max(0.0, cfg.time_limit_seconds - seconds_since(t0));
      offer(column_combination(inst, candidates, co));
    }
    rec.t_heuristic = seconds_since(th);

    // The RMP value bounds the master from above, so lb >= RMP value certifies the master optimum.
    auto tr = Clock::now();
    bool mp_optimal = false;
    if (!within()) {
      const auto rmp = solve_rmp(inst, pool);
      const auto converged = [&] {
        return res.best_lower_bound >= rmp.objective - 1e-9 * (1.0 + std::abs(rmp.objective));
      };
      mp_optimal = converged();
      if (!mp_optimal && added == 0) {
        // Nothing new at y: take a plain column-generation step at the RMP duals.
        DualPoint y_rmp = rmp.duals;
        y_rmp.sigma.clear();
        const auto rmp_sweep = solve_all_pricing(inst, y_rmp);
        const double lb_rmp = linking_value(inst, y_rmp) + rmp_sweep.total_reduced;
        if (lb_rmp > res.best_lower_bound) {
          res.best_lower_bound = lb_rmp;
          res.best_dual = y_rmp;
          center = y_rmp;
        }
        mp_optimal = converged();
        if (!mp_optimal) add_columns(pool, inst, rmp_sweep.results, k);
      }
    }
    rec.t_rmp = seconds_since(tr);

    res.iterations = k;
    rec.lb = res.best_lower_bound;
    rec.ub = ub;
    rec.gap = relative_gap(res.best_lower_bound, ub);
    rec.mu = mu;
    mark_crossings(k);
    if (within() || mp_optimal || k >= cfg.max_iterations) {
      res.log.push_back(rec);
      if (log) *log << to_json_line(rec) << '\n';
      if (within()) return finish(ColGenStatus::Solved);
      if (mp_optimal) {
        if (heur.column_combination) offer(column_combination(inst, candidates));
        return finish(within() ? ColGenStatus::Solved : ColGenStatus::MpOptimal);
      }
      return finish(ColGenStatus::IterLimit);
    }

    tr = Clock::now();
    const auto reg = solve_regularized_rmp(inst, pool, center, mu);
    y = reg.duals;
    y.sigma.clear();
    rec.t_rmp += seconds_since(tr);
    res.log.push_back(rec);
    if (log) *log << to_json_line(rec) << '\n';
  }
}

}  // namespace ucdw
