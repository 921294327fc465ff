#pragma once

#include <vector>

#include "ucdw/lp_core.hpp"
#include "ucdw/uc_model.hpp"

namespace ucdw {

/// Column layout of the full UC program: per (generator, period) the variables p, on, start, stop.
struct UcLayout {
  int n_generators = 0;
  int n_periods = 0;

  int power(int g, int t) const { return 4 * (g * n_periods + t); }
  int on(int g, int t) const { return power(g, t) + 1; }
  int start(int g, int t) const { return power(g, t) + 2; }
  int stop(int g, int t) const { return power(g, t) + 3; }
  int load_row(int t) const { return t; }
  int reserve_row(int t) const { return n_periods + t; }
};

struct UcProgram {
  lp::LpProblem problem;
  std::vector<int> binaries;
  UcLayout layout;
};

/// Assembles the full UC MILP: linking rows first (load then reserve per period), then every
/// per-generator constraint instance, including the period-1 rows tied to the initial state.
UcProgram build_uc_program(const UcInstance& instance);

/// Appends the per-generator constraints of generator g to `problem`, with variables laid out
/// as in `layout`. Used by the full program and by single-generator subproblems.
void add_generator_rows(lp::LpProblem& problem, const UcLayout& layout, int g,
                        const GeneratorSpec& gen);

/// Reads schedules out of a primal vector (binaries rounded).
UcSolution decode_uc_solution(const UcInstance& instance, const UcProgram& program,
                              const std::vector<double>& x);

/// Primal vector for a given solution (inverse of decode_uc_solution).
std::vector<double> encode_uc_solution(const UcProgram& program, const UcSolution& solution);

struct ExtensiveOptions {
  double gap_tol = 1e-6;
  double time_limit = lp::kInf;
  long node_limit = 1'000'000;
  const UcSolution* initial = nullptr;  // optional feasible start
};

lp::MilpResult solve_extensive_uc(const UcInstance& instance, const ExtensiveOptions& options = {});

}  // namespace ucdw
