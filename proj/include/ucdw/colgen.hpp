#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ucdw/pricing.hpp"
#include "ucdw/uc_model.hpp"

namespace ucdw {

struct ColGenConfig {
  double initial_mu = 1.0;  // in units where costs are divided by the mean marginal cost
  double mu_decrease_factor = 2.0;
  double mu_increase_factor = 2.0;
  double gap_tolerance = 0.0025;
  double time_limit_seconds = 300.0;
  int max_iterations = 1000;
  int heuristic_escalation_iteration = 30;
  /// Looser tolerances whose first crossing (iteration, time) is recorded along the way.
  std::vector<double> report_tolerances;

  /// Throws InputError if a factor is <= 1 or the tolerance is not positive.
  void validate() const;
};

struct HeuristicSwitches {
  bool local_search = true;
  bool column_combination = true;
};

/// Solved: gap within tolerance. MpOptimal: the master LP is converged but its bound leaves the
/// gap open (no further progress possible without branching).
enum class ColGenStatus : std::uint8_t { Solved, MpOptimal, TimeLimit, IterLimit };
std::string to_string(ColGenStatus s);

struct IterationRecord {
  int iter = 0;
  std::uint64_t y_hash = 0;
  double lb = 0.0;  // best so far
  double ub = 0.0;  // +inf without an incumbent
  double gap = 0.0;
  double mu = 0.0;  // original cost units
  double t_init = 0.0;
  double t_rmp = 0.0;
  double t_pricing = 0.0;
  double t_heuristic = 0.0;
};

std::string to_json_line(const IterationRecord& r);

struct ToleranceCrossing {
  double tolerance = 0.0;
  int iteration = -1;  // -1: never reached
  double seconds = 0.0;
};

inline constexpr double kNoBound = -std::numeric_limits<double>::infinity();

struct ColGenResult {
  double best_lower_bound = kNoBound;
  std::optional<UcSolution> best_solution;
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  ColGenStatus status = ColGenStatus::IterLimit;
  std::vector<IterationRecord> log;
  DualPoint best_dual;  // dual point attaining best_lower_bound
  std::vector<ToleranceCrossing> crossings;  // report_tolerances, then gap_tolerance
  double seconds = 0.0;
};

/// a^T y plus the exact pricing value of every generator.
double compute_lower_bound(const UcInstance& instance, const DualPoint& y);

/// (ub - lb) / ub, or +inf if either side is missing.
double relative_gap(double lb, double ub);

std::uint64_t dual_hash(const DualPoint& y);

/// `init_seconds` is charged to the first log record (time spent producing y0).
/// When `log` is given, one JSON line per iteration is written to it.
ColGenResult run_column_generation(const UcInstance& instance, const DualPoint& y0,
                                   const ColGenConfig& config = {},
                                   const HeuristicSwitches& heuristics = {},
                                   double init_seconds = 0.0, std::ostream* log = nullptr);

}  // namespace ucdw
