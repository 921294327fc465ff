#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "ucdw/pricing.hpp"
#include "ucdw/uc_model.hpp"

namespace ucdw {

/// Raised when a column's stored contributions disagree with its schedule.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Column {
  int generator = 0;
  double cost = 0.0;
  std::vector<double> load;     // p_t
  std::vector<double> reserve;  // P_max * on_t - p_t
  int iteration = 0;
  Schedule schedule;
};

Column make_column(const GeneratorSpec& gen, int generator, const Schedule& sched, int iteration);

class ColumnPool {
 public:
  explicit ColumnPool(int n_generators = 0) : columns_(n_generators) {}

  /// Inserts a column unless an identical schedule is already stored for that generator.
  /// Throws IntegrityError if its contributions or cost do not match the schedule.
  bool add(const GeneratorSpec& gen, Column column);

  int n_generators() const { return static_cast<int>(columns_.size()); }
  const std::vector<Column>& columns(int s) const { return columns_.at(s); }
  std::size_t size() const;
  bool covers_all() const;

 private:
  std::vector<std::vector<Column>> columns_;
  std::vector<std::unordered_set<std::uint64_t>> keys_;
};

/// Inserts every pricing result as a column; returns how many were new.
int add_columns(ColumnPool& pool, const UcInstance& instance,
                const std::vector<PricingResult>& results, int iteration);

/// Cost of the artificial surplus on each linking row.
double artificial_cost(const UcInstance& instance);

enum class MasterStatus : std::uint8_t { Optimal, NotConverged };

struct MasterSolution {
  MasterStatus status = MasterStatus::Optimal;
  std::vector<std::vector<double>> weights;  // per generator, per column
  std::vector<double> artificial;            // load rows then reserve rows
  DualPoint duals;                           // includes sigma
  double objective = 0.0;
  int iterations = 0;
};

/// Unregularized RMP by simplex. Duals of the >= linking rows are >= 0.
MasterSolution solve_rmp(const UcInstance& instance, const ColumnPool& pool);

/// Proximal dual RMP: max a^T y + sum sigma - mu/2 |y - center|^2 subject to
/// sigma_s <= c_si - g_si^T y, 0 <= y <= artificial cost. `objective` reports that value.
MasterSolution solve_regularized_rmp(const UcInstance& instance, const ColumnPool& pool,
                                     const DualPoint& center, double mu);

/// a^T y over the linking rows.
double linking_value(const UcInstance& instance, const DualPoint& y);

}  // namespace ucdw
