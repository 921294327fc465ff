#include "lp_basis.hpp"

#include <algorithm>
#include <cmath>

namespace ucdw::lp::detail {

namespace {

constexpr int kDenseLimit = 96;
constexpr double kSingularTol = 1e-11;
constexpr double kEtaDropTol = 1e-14;

}  // namespace

bool BasisFactor::factor(int m, const std::vector<SparseColumn>& cols, std::vector<int>& dependent,
                         std::vector<int>& uncovered) {
  m_ = m;
  etas_.clear();
  dependent.clear();
  uncovered.clear();
  dense_ = m <= kDenseLimit;
  const bool ok = dense_ ? factor_dense(cols) : factor_sparse(cols);
  if (ok) return true;
  find_dependent_columns(m, cols, dependent, uncovered);
  return false;
}

bool BasisFactor::factor_dense(const std::vector<SparseColumn>& cols) {
  const int m = m_;
  lu_.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int k = 0; k < m; ++k)
    for (const auto& [i, v] : cols[k]) lu_[i + static_cast<std::size_t>(k) * m] += v;
  perm_.resize(m);
  for (int i = 0; i < m; ++i) perm_[i] = i;
  auto at = [&](int i, int j) -> double& { return lu_[i + static_cast<std::size_t>(j) * m]; };
  for (int k = 0; k < m; ++k) {
    int p = k;
    double best = std::abs(at(k, k));
    for (int i = k + 1; i < m; ++i) {
      const double v = std::abs(at(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best < kSingularTol) return false;
    if (p != k) {
      for (int j = 0; j < m; ++j) std::swap(at(k, j), at(p, j));
      std::swap(perm_[k], perm_[p]);
    }
    const double piv = at(k, k);
    for (int i = k + 1; i < m; ++i) at(i, k) /= piv;
    for (int j = k + 1; j < m; ++j) {
      const double ukj = at(k, j);
      if (ukj == 0.0) continue;
      double* colj = &lu_[static_cast<std::size_t>(j) * m];
      const double* colk = &lu_[static_cast<std::size_t>(k) * m];
      for (int i = k + 1; i < m; ++i) colj[i] -= colk[i] * ukj;
    }
  }
  return true;
}

bool BasisFactor::factor_sparse(const std::vector<SparseColumn>& cols) {
  const int m = m_;
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < m; ++k)
    for (const auto& [i, v] : cols[k]) trip.emplace_back(i, k, v);
  Eigen::SparseMatrix<double> b(m, m);
  b.setFromTriplets(trip.begin(), trip.end());
  b.makeCompressed();
  sparse_ = std::make_unique<SparseLu>();
  sparse_->analyzePattern(b);
  sparse_->factorize(b);
  if (sparse_->info() != Eigen::Success) return false;
  // Residual probe: tiny pivots show up as a large error on B x = B 1.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd rhs = b * ones;
  Eigen::VectorXd sol = sparse_->solve(rhs);
  if (!sol.allFinite()) return false;
  return (sol - ones).cwiseAbs().maxCoeff() < 1e-6;
}

void BasisFactor::lu_solve(std::vector<double>& v) const {
  const int m = m_;
  if (dense_) {
    std::vector<double> w(m);
    for (int k = 0; k < m; ++k) w[k] = v[perm_[k]];
    for (int j = 0; j < m; ++j) {
      const double wj = w[j];
      if (wj == 0.0) continue;
      const double* col = &lu_[static_cast<std::size_t>(j) * m];
      for (int i = j + 1; i < m; ++i) w[i] -= col[i] * wj;
    }
    for (int j = m - 1; j >= 0; --j) {
      const double* col = &lu_[static_cast<std::size_t>(j) * m];
      w[j] /= col[j];
      const double wj = w[j];
      if (wj == 0.0) continue;
      for (int i = 0; i < j; ++i) w[i] -= col[i] * wj;
    }
    v.swap(w);
    return;
  }
  Eigen::Map<Eigen::VectorXd> b(v.data(), m);
  Eigen::VectorXd x = sparse_->solve(b);
  b = x;
}

void BasisFactor::lu_solve_transpose(std::vector<double>& v) const {
  const int m = m_;
  if (dense_) {
    // B^T y = c with PB = LU  =>  U^T z = c, L^T w = z, y = P^T w.
    std::vector<double> w(v);
    for (int j = 0; j < m; ++j) {
      const double* col = &lu_[static_cast<std::size_t>(j) * m];
      double s = w[j];
      for (int i = 0; i < j; ++i) s -= col[i] * w[i];
      w[j] = s / col[j];
    }
    for (int j = m - 1; j >= 0; --j) {
      const double* col = &lu_[static_cast<std::size_t>(j) * m];
      double s = w[j];
      for (int i = j + 1; i < m; ++i) s -= col[i] * w[i];
      w[j] = s;
    }
    for (int k = 0; k < m; ++k) v[perm_[k]] = w[k];
    return;
  }
  Eigen::Map<Eigen::VectorXd> b(v.data(), m);
  Eigen::VectorXd x = sparse_->transpose().solve(b);
  b = x;
}

void BasisFactor::ftran(std::vector<double>& v) const {
  lu_solve(v);
  for (const auto& e : etas_) {
    const double vr = v[e.r] / e.pivot;
    v[e.r] = vr;
    if (vr == 0.0) continue;
    for (const auto& [i, a] : e.entries) v[i] -= a * vr;
  }
}

void BasisFactor::btran(std::vector<double>& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->r];
    for (const auto& [i, a] : it->entries) s -= a * v[i];
    v[it->r] = s / it->pivot;
  }
  lu_solve_transpose(v);
}

void BasisFactor::update(int r, const std::vector<double>& alpha) {
  Eta e;
  e.r = r;
  e.pivot = alpha[r];
  for (int i = 0; i < m_; ++i)
    if (i != r && std::abs(alpha[i]) > kEtaDropTol) e.entries.emplace_back(i, alpha[i]);
  etas_.push_back(std::move(e));
}

void find_dependent_columns(int m, const std::vector<SparseColumn>& cols,
                            std::vector<int>& dependent, std::vector<int>& uncovered) {
  std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
  for (int k = 0; k < m; ++k)
    for (const auto& [i, v] : cols[k]) a[i + static_cast<std::size_t>(k) * m] += v;
  std::vector<char> pivoted(m, 0);
  for (int k = 0; k < m; ++k) {
    double* colk = &a[static_cast<std::size_t>(k) * m];
    double scale = 0.0;
    for (const auto& [i, v] : cols[k]) scale = std::max(scale, std::abs(v));
    int p = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (pivoted[i]) continue;
      if (std::abs(colk[i]) > best) {
        best = std::abs(colk[i]);
        p = i;
      }
    }
    if (p < 0 || best <= 1e-9 * std::max(1.0, scale)) {
      dependent.push_back(k);
      continue;
    }
    pivoted[p] = 1;
    for (int j = k + 1; j < m; ++j) {
      double* colj = &a[static_cast<std::size_t>(j) * m];
      const double f = colj[p] / colk[p];
      if (f == 0.0) continue;
      for (int i = 0; i < m; ++i)
        if (!pivoted[i]) colj[i] -= f * colk[i];
      colj[p] = 0.0;
    }
  }
  for (int i = 0; i < m; ++i)
    if (!pivoted[i]) uncovered.push_back(i);
}

}  // namespace ucdw::lp::detail
