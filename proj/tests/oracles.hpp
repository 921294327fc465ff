#pragma once

#include <Eigen/Dense>
#include <optional>
#include <random>

#include "ucdw/master.hpp"
#include "ucdw/pricing.hpp"

namespace ucdw::oracle {

// First n periods of a generated day.
inline UcInstance small_instance(int S, int n, std::uint64_t seed) {
  auto fleet = generate_fleet(S, seed);
  auto pool = generate_demand(fleet, 24, 1, seed + 1);
  auto prof = pool.profiles[0];
  prof.demand.resize(n);
  prof.reserve.resize(n);
  return make_instance(fleet, prof, seed, pool.scaling);
}

inline DualPoint random_dual(std::mt19937_64& rng, const UcInstance& inst) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto y = DualPoint::zeros(inst.n_periods);
  double mr = 0.0;
  for (const auto& g : inst.generators) mr = std::max(mr, g.marginal_cost);
  for (int t = 0; t < inst.n_periods; ++t) {
    y.y_load[t] = u(rng) * 2.0 * mr;
    y.y_reserve[t] = u(rng) * 0.5 * mr;
  }
  return y;
}

inline ColumnPool random_pool(const UcInstance& inst, std::mt19937_64& rng, int sweeps) {
  ColumnPool pool(inst.n_generators());
  for (int k = 0; k < sweeps; ++k)
    add_columns(pool, inst, solve_all_pricing(inst, random_dual(rng, inst)).results, k);
  return pool;
}

struct QpSolution {
  Eigen::VectorXd z;
  double objective;
};

// Dual regularized master by active-set enumeration over the column rows and y >= 0.
inline std::optional<QpSolution> dense_qp(const UcInstance& inst, const ColumnPool& pool, const DualPoint& c,
                                   double mu) {
  const int n = inst.n_periods, S = inst.n_generators(), m = 2 * n, N = m + S;
  std::vector<Eigen::VectorXd> A;
  std::vector<double> b;
  for (int s = 0; s < S; ++s)
    for (const auto& col : pool.columns(s)) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(N);
      for (int t = 0; t < n; ++t) {
        r[t] = col.load[t];
        r[n + t] = col.reserve[t];
      }
      r[m + s] = 1.0;
      A.push_back(r);
      b.push_back(col.cost);
    }
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(N);
    r[j] = -1.0;
    A.push_back(r);
    b.push_back(0.0);
  }
  const int K = static_cast<int>(A.size());
  if (K > 16) return std::nullopt;
  // min 1/2 mu |y|^2 + q^T z
  Eigen::VectorXd q(N);
  for (int t = 0; t < n; ++t) {
    q[t] = -(inst.profile.demand[t] + mu * c.y_load[t]);
    q[n + t] = -(inst.profile.reserve[t] + mu * c.y_reserve[t]);
  }
  q.tail(S).setConstant(-1.0);
  std::optional<QpSolution> best;
  for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
    const int w = __builtin_popcount(mask);
    if (w > N) continue;
    Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(N + w, N + w);
    Eigen::VectorXd rhs(N + w);
    for (int j = 0; j < m; ++j) KKT(j, j) = mu;
    rhs.head(N) = -q;
    int r = 0;
    std::vector<int> act;
    for (int k = 0; k < K; ++k)
      if (mask >> k & 1) {
        KKT.block(N + r, 0, 1, N) = A[k].transpose();
        KKT.block(0, N + r, N, 1) = A[k];
        rhs[N + r] = b[k];
        act.push_back(k);
        ++r;
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(KKT);
    if (lu.rank() < N + w) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(N);
    bool ok = true;
    for (int i = 0; i < w && ok; ++i) ok = sol[N + i] >= -1e-9;
    for (int k = 0; k < K && ok; ++k) ok = A[k].dot(z) <= b[k] + 1e-7 * (1.0 + std::abs(b[k]));
    if (!ok) continue;
    double obj = -(0.5 * mu * z.head(m).squaredNorm() + q.dot(z));
    for (int t = 0; t < n; ++t) obj -= 0.5 * mu * (c.y_load[t] * c.y_load[t] + c.y_reserve[t] * c.y_reserve[t]);
    if (!best || obj > best->objective) best = QpSolution{z, obj};
  }
  return best;
}

}  // namespace ucdw::oracle
