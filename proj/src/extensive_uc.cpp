#include "ucdw/extensive_uc.hpp"

#include <algorithm>
#include <cmath>

namespace ucdw {

using lp::RowSense;

void add_generator_rows(lp::LpProblem& lp, const UcLayout& L, int g, const GeneratorSpec& gen) {
  const int n = L.n_periods;
  const double a0 = gen.initial_on ? 1.0 : 0.0;
  const double p0 = gen.initial_on ? gen.initial_power : 0.0;
  for (int t = 0; t < n; ++t) {
    const int p = L.power(g, t), a = L.on(g, t), s = L.start(g, t), e = L.stop(g, t);
    lp.add_row({{p, 1.0}, {a, -gen.p_min}}, RowSense::GreaterEqual, 0.0);
    lp.add_row({{p, 1.0}, {a, -gen.p_max}}, RowSense::LessEqual, 0.0);
    if (t == 0) {
      lp.add_row({{p, 1.0}, {s, -gen.startup_ramp}}, RowSense::LessEqual, p0 + gen.ramp_up * a0);
      lp.add_row({{p, -1.0}, {a, -gen.ramp_down}, {e, -gen.shutdown_ramp}}, RowSense::LessEqual,
                 -p0);
      lp.add_row({{a, 1.0}, {s, -1.0}, {e, 1.0}}, RowSense::Equal, a0);
    } else {
      const int pp = L.power(g, t - 1), ap = L.on(g, t - 1);
      lp.add_row({{p, 1.0}, {pp, -1.0}, {ap, -gen.ramp_up}, {s, -gen.startup_ramp}},
                 RowSense::LessEqual, 0.0);
      lp.add_row({{pp, 1.0}, {p, -1.0}, {a, -gen.ramp_down}, {e, -gen.shutdown_ramp}},
                 RowSense::LessEqual, 0.0);
      lp.add_row({{a, 1.0}, {ap, -1.0}, {s, -1.0}, {e, 1.0}}, RowSense::Equal, 0.0);
    }
    std::vector<int> idx;
    std::vector<double> val;
    for (int i = std::max(t - gen.min_up + 1, 0); i <= t; ++i) {
      idx.push_back(L.start(g, i));
      val.push_back(1.0);
    }
    idx.push_back(a);
    val.push_back(-1.0);
    lp.add_row(idx, val, RowSense::LessEqual, 0.0);
    idx.clear();
    val.clear();
    for (int i = std::max(t - gen.min_down + 1, 0); i <= t; ++i) {
      idx.push_back(L.stop(g, i));
      val.push_back(1.0);
    }
    idx.push_back(a);
    val.push_back(1.0);
    lp.add_row(idx, val, RowSense::LessEqual, 1.0);
    lp.add_row({{s, 1.0}, {e, 1.0}}, RowSense::LessEqual, 1.0);
  }
}

UcProgram build_uc_program(const UcInstance& inst) {
  inst.validate();
  UcProgram out;
  auto& L = out.layout;
  L.n_generators = inst.n_generators();
  L.n_periods = inst.n_periods;
  auto& lp = out.problem;
  for (int g = 0; g < L.n_generators; ++g) {
    const auto& gen = inst.generators[g];
    for (int t = 0; t < L.n_periods; ++t) {
      lp.add_variable(gen.marginal_cost, 0.0, gen.p_max);
      lp.add_variable(gen.no_load_cost, 0.0, 1.0);
      lp.add_variable(gen.startup_cost, 0.0, 1.0);
      lp.add_variable(0.0, 0.0, 1.0);
      out.binaries.push_back(L.on(g, t));
      out.binaries.push_back(L.start(g, t));
      out.binaries.push_back(L.stop(g, t));
    }
  }
  std::vector<int> idx;
  std::vector<double> val;
  for (int t = 0; t < L.n_periods; ++t) {
    idx.clear();
    val.clear();
    for (int g = 0; g < L.n_generators; ++g) {
      idx.push_back(L.power(g, t));
      val.push_back(1.0);
    }
    lp.add_row(idx, val, RowSense::GreaterEqual, inst.profile.demand[t]);
  }
  for (int t = 0; t < L.n_periods; ++t) {
    idx.clear();
    val.clear();
    for (int g = 0; g < L.n_generators; ++g) {
      idx.push_back(L.on(g, t));
      val.push_back(inst.generators[g].p_max);
      idx.push_back(L.power(g, t));
      val.push_back(-1.0);
    }
    lp.add_row(idx, val, RowSense::GreaterEqual, inst.profile.reserve[t]);
  }
  for (int g = 0; g < L.n_generators; ++g) add_generator_rows(lp, L, g, inst.generators[g]);
  return out;
}

UcSolution decode_uc_solution(const UcInstance& inst, const UcProgram& prog,
                              const std::vector<double>& x) {
  const auto& L = prog.layout;
  UcSolution sol;
  for (int g = 0; g < L.n_generators; ++g) {
    Schedule s;
    for (int t = 0; t < L.n_periods; ++t) {
      s.on.push_back(x[L.on(g, t)] > 0.5 ? 1 : 0);
      s.startup.push_back(x[L.start(g, t)] > 0.5 ? 1 : 0);
      s.shutdown.push_back(x[L.stop(g, t)] > 0.5 ? 1 : 0);
      s.power.push_back(s.on.back() ? std::max(0.0, x[L.power(g, t)]) : 0.0);
    }
    sol.schedules.push_back(std::move(s));
  }
  sol.total_cost = evaluate_cost(inst, sol);
  return sol;
}

std::vector<double> encode_uc_solution(const UcProgram& prog, const UcSolution& sol) {
  const auto& L = prog.layout;
  std::vector<double> x(prog.problem.n_vars(), 0.0);
  for (int g = 0; g < L.n_generators; ++g) {
    const auto& s = sol.schedules.at(g);
    for (int t = 0; t < L.n_periods; ++t) {
      x[L.power(g, t)] = s.power[t];
      x[L.on(g, t)] = s.on[t];
      x[L.start(g, t)] = s.startup[t];
      x[L.stop(g, t)] = s.shutdown[t];
    }
  }
  return x;
}

lp::MilpResult solve_extensive_uc(const UcInstance& inst, const ExtensiveOptions& opt) {
  const auto prog = build_uc_program(inst);
  lp::MilpOptions mo;
  mo.gap_tol = opt.gap_tol;
  mo.time_limit = opt.time_limit;
  mo.node_limit = opt.node_limit;
  if (opt.initial) mo.initial_solution = encode_uc_solution(prog, *opt.initial);
  return lp::solve_milp(prog.problem, prog.binaries, mo);
}

}  // namespace ucdw
