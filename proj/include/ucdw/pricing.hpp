#pragma once

#include <vector>

#include "ucdw/uc_model.hpp"

namespace ucdw {

/// Duals of the linking rows (load and reserve per period), plus optional convexity duals.
struct DualPoint {
  std::vector<double> y_load;
  std::vector<double> y_reserve;
  std::vector<double> sigma;  // empty when y comes from a policy

  static DualPoint zeros(int n_periods);
  int n_periods() const { return static_cast<int>(y_load.size()); }
  /// Throws InputError on shape mismatch or non-finite entries.
  void validate(int n_periods) const;
  bool operator==(const DualPoint&) const = default;
};

struct ReducedCosts {
  std::vector<double> power;  // C_mr - y_load + y_reserve
  std::vector<double> on;     // C_nl - y_reserve * P_max
  double startup = 0.0;       // C_up
};

ReducedCosts reduced_cost_coefficients(const GeneratorSpec& gen, const DualPoint& y);

/// Reduced cost of a fixed schedule under y.
double reduced_objective(const GeneratorSpec& gen, const DualPoint& y, const Schedule& sched);

struct PricingResult {
  Schedule schedule;
  double reduced_objective = 0.0;
  LinkingContribution contribution;
};

/// Exact minimizer of the reduced cost over one generator's feasible schedules.
PricingResult solve_pricing(const GeneratorSpec& gen, const DualPoint& y, int n_periods);

/// Enumerates all commitment patterns and solves each dispatch LP. n_periods <= 8.
PricingResult brute_force_pricing(const GeneratorSpec& gen, const DualPoint& y, int n_periods);

/// Optimal dispatch cost over one on-interval [first, last] (0-based, inclusive) for
/// per-period power coefficients; `startup` selects the startup-ramp entry condition instead of
/// continuing from the initial state. Returns +inf when infeasible. Powers are written to `power`.
double interval_dispatch(const GeneratorSpec& gen, const std::vector<double>& power_cost,
                         int first, int last, int n_periods, bool startup,
                         std::vector<double>* power = nullptr);

struct PricingSweep {
  std::vector<PricingResult> results;
  double total_reduced = 0.0;
};

PricingSweep solve_all_pricing(const UcInstance& instance, const DualPoint& y);

}  // namespace ucdw
