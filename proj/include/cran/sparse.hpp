#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace cran {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Column-compressed matrix whose index arrays may be shared between copies.
///
/// Structure (col_ptr, row_idx) is immutable once built; values are owned
/// per instance. Equality is elementwise and bitwise on values.
class CscMatrix {
 public:
  CscMatrix() = default;
  CscMatrix(int rows, int cols, std::shared_ptr<const std::vector<int>> col_ptr,
            std::shared_ptr<const std::vector<int>> row_idx, std::vector<double> values);

  /// Wraps index arrays already known to be consistent; only sizes are checked.
  static CscMatrix from_trusted(int rows, int cols, std::shared_ptr<const std::vector<int>> col_ptr,
                                std::shared_ptr<const std::vector<int>> row_idx,
                                std::vector<double> values);

  /// Sums duplicates and, unless `keep_zeros`, drops exact zeros. Row indices
  /// are sorted within columns.
  static CscMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets,
                                 bool keep_zeros = false);
  static CscMatrix from_eigen(const SpMat& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  const std::vector<int>& col_ptr() const { return *col_ptr_; }
  const std::vector<int>& row_idx() const { return *row_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool shares_structure_with(const CscMatrix& other) const {
    return col_ptr_ == other.col_ptr_ && row_idx_ == other.row_idx_;
  }

  Eigen::Map<const SpMat> view() const;
  SpMat to_eigen() const { return SpMat(view()); }

  /// y = A x
  Vec multiply(const Vec& x) const;
  /// y = A^T x
  Vec multiply_transpose(const Vec& x) const;

  bool operator==(const CscMatrix& other) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::shared_ptr<const std::vector<int>> col_ptr_ =
      std::make_shared<const std::vector<int>>(1, 0);
  std::shared_ptr<const std::vector<int>> row_idx_ =
      std::make_shared<const std::vector<int>>();
  std::vector<double> values_;
};

}  // namespace cran
