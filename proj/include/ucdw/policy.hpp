#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ucdw/pricing.hpp"
#include "ucdw/uc_model.hpp"

namespace ucdw {

/// Demand and reserve divided by fleet capacity, length 2*n_T.
Eigen::VectorXd featurize(const UcInstance& instance);

/// MLP dual policy. Hidden layers of equal width carry a residual matrix:
/// h' = tanh(W h + b) + R h. Output y = scale * softplus(W h + b).
/// All parameters live in one flat vector `theta`; layer blocks are views into it.
class MlpPolicy {
 public:
  MlpPolicy() = default;
  /// Fan-based (Glorot uniform) weights, zero biases, zero residual matrices.
  static MlpPolicy create(const std::vector<GeneratorSpec>& fleet, int n_periods,
                          const std::vector<int>& hidden, std::uint64_t seed);
  static std::vector<int> desk_hidden() { return {128, 128, 128, 128}; }
  static std::vector<int> paper_hidden() { return {1000, 1000, 1000, 1000}; }

  int n_inputs() const { return dims_.front(); }
  int n_outputs() const { return dims_.back(); }
  int n_periods() const { return n_periods_; }
  const std::vector<int>& dims() const { return dims_; }
  std::uint64_t fleet_fingerprint() const { return fingerprint_; }
  double output_scale() const { return out_scale_; }

  Eigen::VectorXd theta;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;

  /// Sets input normalization from a set of feature vectors (mean and std, std floored at 1e-3).
  void fit_normalization(const std::vector<Eigen::VectorXd>& features);

  /// Throws InputError if the instance's fleet differs from the one the policy was built for.
  void check_instance(const UcInstance& instance) const;

  struct Layer {
    int in = 0, out = 0;
    std::ptrdiff_t w = 0, b = 0, r = -1;  // offsets into theta; r < 0 when no residual
  };
  const std::vector<Layer>& layers() const { return layers_; }

  void save(const std::string& path) const;
  static MlpPolicy load(const std::string& path);

 private:
  void build_layout();

  std::vector<int> dims_;
  std::vector<Layer> layers_;
  int n_periods_ = 0;
  std::uint64_t fingerprint_ = 0;
  double out_scale_ = 1.0;
};

DualPoint forward(const MlpPolicy& policy, const Eigen::VectorXd& features);

/// Jacobian of the flattened output (y_load then y_reserve) w.r.t. the features.
Eigen::MatrixXd input_jacobian(const MlpPolicy& policy, const Eigen::VectorXd& features);

struct SampledBound {
  double value = 0.0;     // a^T y + |S| r_t(y)
  Eigen::VectorXd grad;   // d value / d theta
  DualPoint y;
};

SampledBound sample_gradient(const MlpPolicy& policy, const UcInstance& instance, int t);

/// Mean lower bound over instances at the policy's duals.
double mean_lower_bound(const MlpPolicy& policy, const std::vector<UcInstance>& instances);

struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;
  double lr = 1e-4;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit AdamState(Eigen::Index n = 0, double lr = 1e-4);
  /// Ascent step: theta += lr * mhat / (sqrt(vhat) + eps).
  void ascend(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);
};

struct TrainConfig {
  long max_steps = 2000;
  double max_seconds = 0.0;  // 0 = no wall limit
  int eval_every = 100;
  int plateau_patience = 3;
  double lr = 1e-4;
  double lr_decay_divisor = 1.5;
  int batch = 1;  // (instance, generator) samples averaged per step
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct EvalPoint {
  long step = 0;
  double metric = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  MlpPolicy best;
  std::vector<EvalPoint> curve;
  long steps = 0;
};

/// Stochastic ascent on the sampled bound over uniformly drawn training instances and
/// generators; returns the best checkpoint by held-out mean bound (step 0 included).
TrainResult train(MlpPolicy policy, const std::vector<UcInstance>& training,
                  const std::vector<UcInstance>& held_out, const TrainConfig& config);

}  // namespace ucdw
