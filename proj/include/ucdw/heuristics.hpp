#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "ucdw/uc_model.hpp"

namespace ucdw {

/// Most recent pricing schedules per generator (newest last), at most `depth` each.
class CandidateSet {
 public:
  explicit CandidateSet(int n_generators = 0, int depth = 3)
      : depth_(depth), items_(n_generators) {}

  void push(int generator, const Schedule& sched);
  void push_all(const std::vector<Schedule>& schedules);

  int n_generators() const { return static_cast<int>(items_.size()); }
  int depth() const { return depth_; }
  const std::deque<Schedule>& at(int generator) const { return items_.at(generator); }
  bool populated() const;

 private:
  int depth_;
  std::vector<std::deque<Schedule>> items_;
};

/// Minimum-cost dispatch for fixed on/off patterns. Returns none if the pattern breaks
/// min-up/down logic or no dispatch meets load, reserve and ramp rows.
std::optional<UcSolution> economic_dispatch(const UcInstance& instance,
                                            const std::vector<std::vector<std::uint8_t>>& on);

/// Ordering key for committing extra units (ascending).
double commit_priority(const GeneratorSpec& gen);

/// Commits additional units wherever the given schedules leave load or reserve short, then
/// re-dispatches. Returns none when repair fails.
std::optional<UcSolution> local_search_commit(const UcInstance& instance,
                                              const std::vector<Schedule>& schedules);

struct CombinationOptions {
  long node_limit = 10'000;
  double time_limit = 60.0;
};

/// Restricted master IP: picks one candidate schedule per generator so that linking rows hold,
/// minimizing cost; the chosen commitments are re-dispatched.
std::optional<UcSolution> column_combination(const UcInstance& instance,
                                             const CandidateSet& candidates,
                                             const CombinationOptions& options = {});

}  // namespace ucdw
