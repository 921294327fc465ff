#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ucdw/colgen.hpp"
#include "ucdw/pricing.hpp"
#include "ucdw/uc_model.hpp"

namespace ucdw {

DualPoint coldstart_dual(const UcInstance& instance);

struct LprResult {
  DualPoint y;
  double objective = 0.0;
  double seconds = 0.0;
};

/// Duals of the load and reserve rows of the full program with binaries relaxed to [0, 1].
LprResult lpr_dual(const UcInstance& instance);

struct DualRecord {
  int id = 0;
  std::vector<double> features;
  DualPoint dual;
  std::string status;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

struct DualDataset {
  std::uint64_t fleet_fingerprint = 0;
  int n_periods = 0;
  std::vector<DualRecord> records;

  void save_jsonl(const std::string& path) const;
  static DualDataset load_jsonl(const std::string& path);
};

struct DatasetBudget {
  int max_instances = 1 << 30;
  double max_seconds = 0.0;  // 0 = unlimited
  double gap_tolerance = 0.0025;
  double time_limit_per_instance = 300.0;
};

/// Solves each training instance by column generation warmstarted from LPR duals, in order,
/// and stores the best dual. Instances that end with neither "solved" nor "mp-optimal" are
/// skipped (and logged to `log` if given).
DualDataset build_dataset(const std::vector<UcInstance>& training, const DatasetBudget& budget,
                          std::ostream* log = nullptr);

/// Stored dual of the record nearest in feature space (ties: lowest id).
DualPoint nearest_neighbour_dual(const DualDataset& dataset, const UcInstance& instance);

struct ForestOptions {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

/// Multi-output CART forest on bootstrap samples with sqrt(d) features tried per split.
class RandomForest {
 public:
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    std::vector<double> value;  // leaf mean
  };
  using Tree = std::vector<Node>;

  static RandomForest fit(const std::vector<std::vector<double>>& x,
                          const std::vector<std::vector<double>>& y, const ForestOptions& options);
  std::vector<double> predict(const std::vector<double>& x) const;

  const std::vector<Tree>& trees() const { return trees_; }
  std::uint64_t fleet_fingerprint = 0;
  int n_periods = 0;

  void save(const std::string& path) const;
  static RandomForest load(const std::string& path);

 private:
  std::vector<Tree> trees_;
  int n_features_ = 0, n_outputs_ = 0;
};

RandomForest train_random_forest(const DualDataset& dataset, const ForestOptions& options = {});
DualPoint rf_predict(const RandomForest& forest, const UcInstance& instance);

}  // namespace ucdw
