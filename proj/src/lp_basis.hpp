#pragma once

// Basis factorization for the revised simplex: LU of the current basis plus a product-form
// eta file for the pivots since the last refactorization.

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ucdw::lp::detail {

/// Sparse column: (row, value) pairs.
using SparseColumn = std::vector<std::pair<int, double>>;

class BasisFactor {
 public:
  /// Factorizes the m x m matrix whose k-th column is cols[k]. On failure returns false and
  /// fills `dependent` with positions of linearly dependent columns and `uncovered` with rows
  /// that no independent column pivots on (same count).
  bool factor(int m, const std::vector<SparseColumn>& cols, std::vector<int>& dependent,
              std::vector<int>& uncovered);

  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;

  /// Records the pivot replacing basis position r, given alpha = B^{-1} a_q.
  void update(int r, const std::vector<double>& alpha);

  int updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int r = 0;
    double pivot = 1.0;
    SparseColumn entries;  // excludes row r
  };

  bool factor_dense(const std::vector<SparseColumn>& cols);
  bool factor_sparse(const std::vector<SparseColumn>& cols);
  void lu_solve(std::vector<double>& v) const;
  void lu_solve_transpose(std::vector<double>& v) const;

  int m_ = 0;
  bool dense_ = true;
  // Dense LU with row permutation, column-major, used for small bases.
  std::vector<double> lu_;
  std::vector<int> perm_;
  using SparseLu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;
  std::unique_ptr<SparseLu> sparse_;
  std::vector<Eta> etas_;
};

/// Gaussian elimination with partial pivoting that tolerates rank deficiency. Reports the
/// dependent column positions and the rows left without a pivot.
void find_dependent_columns(int m, const std::vector<SparseColumn>& cols,
                            std::vector<int>& dependent, std::vector<int>& uncovered);

}  // namespace ucdw::lp::detail
