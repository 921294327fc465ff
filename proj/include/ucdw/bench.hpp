#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ucdw/baselines.hpp"
#include "ucdw/colgen.hpp"
#include "ucdw/policy.hpp"

namespace ucdw {

enum class InitMethod : std::uint8_t { Coldstart, Lpr, Nearest, Forest, Network };
std::string to_string(InitMethod m);
/// Accepts coldstart, lpr, nearest, forest, network.
InitMethod parse_init_method(const std::string& name);
const std::vector<InitMethod>& all_init_methods();

inline constexpr int kRunSchemaVersion = 1;

struct BenchmarkConfig {
  std::string bench_id = "desk";
  std::vector<int> sizes{5, 10, 20};
  int n_periods = 24;
  int n_test_instances = 40;
  std::vector<double> tolerances{0.01, 0.005, 0.0025};  // descending
  double time_limit_seconds = 300.0;
  std::vector<InitMethod> methods = all_init_methods();
  std::uint64_t fleet_seed = 42;
  std::uint64_t train_seed = 43;  // demand pool for training sets
  std::uint64_t test_seed = 44;   // demand pool for test instances
  int reference_instances = 8;    // first k test instances get an oracle scaling reference
  double reference_time_limit = 60.0;
  std::string artifacts_dir = "artifacts";  // <dir>/<size>/{policy.bin,dataset.jsonl,forest.bin}

  static BenchmarkConfig paper_preset();
  void validate() const;
  std::string to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static BenchmarkConfig from_json(const std::string& text);
};

/// Instances of one fleet size drawn from one demand pool (the split is set by the seed).
std::vector<UcInstance> make_instances(int size, int n_periods, int count, std::uint64_t fleet_seed,
                                       std::uint64_t demand_seed);

std::string artifact_path(const std::string& dir, int size, InitMethod m);

struct InitArtifacts {
  std::optional<MlpPolicy> policy;
  std::optional<DualDataset> dataset;
  std::optional<RandomForest> forest;

  /// Loads whatever exists under <dir>/<size>/; absent files leave the slot empty.
  static InitArtifacts load(const std::string& dir, int size);
  bool has(InitMethod m) const;
};

struct InitDual {
  DualPoint y;
  double seconds = 0.0;
};

/// Throws InputError if the method needs an artifact that is missing.
InitDual initial_dual(InitMethod m, const UcInstance& instance, const InitArtifacts& artifacts);

struct CrossingRecord {
  double tolerance = 0.0;
  bool reached = false;
  int iteration = 0;    // crossing iteration, or the final iteration if not reached
  double seconds = 0.0;  // wall time including initialization
  double t_rmp = 0.0, t_pricing = 0.0, t_heuristic = 0.0;  // summed up to `iteration`
};

struct RunRecord {
  int schema_version = kRunSchemaVersion;
  std::string bench_id;
  int size = 0;
  std::string method;
  int instance = 0;
  double time_limit = 0.0;
  std::string status;  // colgen status, or "error"
  std::string error;
  int iterations = 0;
  double seconds = 0.0;
  double init_seconds = 0.0;
  double lb = kNoBound;
  double ub = std::numeric_limits<double>::infinity();
  double first_lb = kNoBound;  // after exactly one iteration
  double first_ub = std::numeric_limits<double>::infinity();
  std::vector<CrossingRecord> crossings;  // same order as the config's tolerances
};

std::string to_json(const RunRecord& r);
RunRecord run_record_from_json(const std::string& text);

/// Fills the record from a colgen result whose config listed `tolerances` (descending) as
/// report_tolerances followed by gap_tolerance.
RunRecord make_run_record(const ColGenResult& result, double init_seconds,
                          const std::vector<double>& tolerances);

struct ReferenceRecord {
  int schema_version = kRunSchemaVersion;
  int size = 0;
  int instance = 0;
  double lower_bound = kNoBound;  // proven bound on the MILP optimum
  double objective = std::numeric_limits<double>::infinity();
  std::string status;
  double seconds = 0.0;
};

std::string to_json(const ReferenceRecord& r);
ReferenceRecord reference_record_from_json(const std::string& text);
ReferenceRecord compute_reference(const UcInstance& instance, double time_limit);

/// One colgen run from the method's initial dual, with the config's tolerances as crossings.
RunRecord run_cell(const BenchmarkConfig& cfg, int size, int instance_index, const UcInstance& instance,
                   InitMethod m, const InitArtifacts& artifacts);

struct ReportRow {
  int size = 0;
  std::string method;
  double tolerance = 0.0;
  int runs = 0;
  int solved = 0;
  double mean_time_s = 0.0;
  double mean_iters = 0.0;
  double mean_scaled_lb = 0.0;  // NaN without references
  double mean_scaled_ub = 0.0;
  double init_time_s = 0.0;
  double t_rmp = 0.0, t_pricing = 0.0, t_heuristic = 0.0;
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;  // sorted by size, method, descending tolerance
  std::string csv;
  std::string markdown;
};

inline constexpr const char* kReportColumns =
    "size,method,tolerance,solved,mean_time_s,mean_iters,mean_scaled_lb,mean_scaled_ub,init_time_s,"
    "t_rmp,t_pricing,t_heuristic";

/// Reads every run and reference under `bench_dir` and writes report.csv and report.md there.
/// Throws InputError if there are no runs or a file has another schema version.
BenchmarkReport emit_report(const std::string& bench_dir);

/// Runs all missing (size, instance, method) cells under <runs_root>/<bench_id>, then reports.
/// Methods whose artifacts are missing are skipped with a warning on `log`.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const std::string& runs_root,
                              std::ostream* log = nullptr);

/// Deterministic solve summary (no wall times unless `timings`).
std::string solve_result_json(const ColGenResult& result, InitMethod m, double tolerance,
                              const InitDual& init, bool timings);

/// Command-line entry point; returns 0 on success, 2 on config errors, 3 on solve failures.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ucdw
