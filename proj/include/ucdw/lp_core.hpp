#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ucdw::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : std::uint8_t { LessEqual, GreaterEqual, Equal };

/// Minimization LP with sparse rows and variable bounds (bounds may be infinite).
struct LpProblem {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;

  std::vector<int> row_start{0};
  std::vector<int> col_index;
  std::vector<double> value;
  std::vector<RowSense> sense;
  std::vector<double> rhs;

  double objective_offset = 0.0;

  int n_vars() const { return static_cast<int>(cost.size()); }
  int n_rows() const { return static_cast<int>(rhs.size()); }

  int add_variable(double cost, double lo, double hi);
  int add_row(std::span<const int> index, std::span<const double> coef, RowSense sense,
              double rhs);
  int add_row(std::initializer_list<std::pair<int, double>> terms, RowSense sense, double rhs);

  /// Throws ucdw::InputError on inconsistent dimensions or NaN/Inf in finite data.
  void validate() const;

  /// Row activity a_r^T x.
  double row_activity(int r, std::span<const double> x) const;
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };
const char* to_string(LpStatus s);

struct LpOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  int refactor_every = 50;
  int max_iterations = 0;  // 0 = automatic (proportional to problem size)
  int degenerate_stall = 50;
  bool scale = true;
};

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;
  std::vector<double> duals;  // one per row; >= 0 on >= rows and <= 0 on <= rows at optimum
  std::vector<double> reduced_costs;
  double objective = 0.0;
  int iterations = 0;
};

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

/// KKT residuals of an LP solution in original units.
struct KktReport {
  double primal_residual = 0.0;  // max row/bound violation relative to 1+|rhs|
  double dual_residual = 0.0;    // max sign violation of duals/reduced costs
  double complementarity = 0.0;  // max |slack * dual| relative
  double duality_gap = 0.0;      // |primal obj - dual obj| / (1+|obj|)
};
KktReport kkt_report(const LpProblem& problem, const LpSolution& solution);

/// Fixed-format text dump used when triaging solver failures.
std::string dump_lp(const LpProblem& problem);

/// Simplex engine that keeps its basis between solves so bound changes can be re-optimized
/// with the dual simplex. Single-use per thread.
class SimplexSolver {
 public:
  struct Basis {
    std::vector<int> head;
    std::vector<std::int8_t> state;
  };

  explicit SimplexSolver(const LpProblem& problem, LpOptions options = {});
  ~SimplexSolver();
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  /// Bounds of structural variable j in original units.
  void set_bounds(int j, double lo, double hi);
  double lower(int j) const;
  double upper(int j) const;

  LpSolution solve();

  Basis basis() const;
  void set_basis(const Basis& basis);

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Branch and bound

enum class MilpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, TimeLimit, NodeLimit };
const char* to_string(MilpStatus s);

struct MilpOptions {
  double gap_tol = 1e-6;
  double time_limit = kInf;  // seconds
  long node_limit = 1'000'000;
  double integrality_tol = 1e-6;
  bool diving = true;
  int dive_every = 200;  // nodes between dives after the root dive
  LpOptions lp;
  std::vector<double> initial_solution;  // optional feasible start, ignored if infeasible
};

struct MilpResult {
  MilpStatus status = MilpStatus::Infeasible;
  bool has_incumbent = false;
  std::vector<double> x;
  double objective = kInf;
  double bound = -kInf;
  long nodes = 0;  // processed nodes including the root

  double gap() const;
};

MilpResult solve_milp(const LpProblem& problem, std::span<const int> integer_vars,
                      const MilpOptions& options = {});

/// Checks row and bound feasibility of x within tol (absolute, scaled by 1+|rhs|).
bool is_feasible(const LpProblem& problem, std::span<const double> x, double tol = 1e-6);

}  // namespace ucdw::lp
