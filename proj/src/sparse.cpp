#include "cran/sparse.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "cran/errors.hpp"

namespace cran {

CscMatrix::CscMatrix(int rows, int cols, std::shared_ptr<const std::vector<int>> col_ptr,
                     std::shared_ptr<const std::vector<int>> row_idx,
                     std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)) {
  if (rows_ < 0 || cols_ < 0) throw InvalidArgument("negative matrix dimension");
  if (static_cast<int>(col_ptr_->size()) != cols_ + 1)
    throw InvalidArgument("column pointer length must be cols + 1");
  if (row_idx_->size() != values_.size() ||
      static_cast<int>(row_idx_->size()) != col_ptr_->back())
    throw InvalidArgument("inconsistent nonzero count");
  for (int j = 0; j < cols_; ++j) {
    if ((*col_ptr_)[j] > (*col_ptr_)[j + 1])
      throw InvalidArgument("column pointers must be nondecreasing");
  }
  for (int r : *row_idx_)
    if (r < 0 || r >= rows_) throw InvalidArgument("row index out of range");
}

CscMatrix CscMatrix::from_trusted(int rows, int cols,
                                  std::shared_ptr<const std::vector<int>> col_ptr,
                                  std::shared_ptr<const std::vector<int>> row_idx,
                                  std::vector<double> values) {
  if (static_cast<int>(col_ptr->size()) != cols + 1 || row_idx->size() != values.size())
    throw InvalidArgument("shared structure does not match the value array");
  CscMatrix out;
  out.rows_ = rows;
  out.cols_ = cols;
  out.col_ptr_ = std::move(col_ptr);
  out.row_idx_ = std::move(row_idx);
  out.values_ = std::move(values);
  return out;
}

CscMatrix CscMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets,
                                   bool keep_zeros) {
  if (rows < 0 || cols < 0) throw InvalidArgument("negative matrix dimension");
  for (const auto& t : triplets)
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw InvalidArgument("triplet index out of range");

  std::vector<Eigen::Triplet<double, int>> et;
  et.reserve(triplets.size());
  for (const auto& t : triplets) et.emplace_back(t.row, t.col, t.value);
  SpMat m(rows, cols);
  m.setFromTriplets(et.begin(), et.end());
  if (!keep_zeros) m.prune(0.0);
  m.makeCompressed();
  return from_eigen(m);
}

CscMatrix CscMatrix::from_eigen(const SpMat& src) {
  SpMat m = src;
  m.makeCompressed();
  const int nnz = static_cast<int>(m.nonZeros());
  auto cp = std::make_shared<std::vector<int>>(m.outerIndexPtr(), m.outerIndexPtr() + m.cols() + 1);
  auto ri = std::make_shared<std::vector<int>>(m.innerIndexPtr(), m.innerIndexPtr() + nnz);
  std::vector<double> vals(m.valuePtr(), m.valuePtr() + nnz);
  return CscMatrix(static_cast<int>(m.rows()), static_cast<int>(m.cols()), std::move(cp),
                   std::move(ri), std::move(vals));
}

Eigen::Map<const SpMat> CscMatrix::view() const {
  return Eigen::Map<const SpMat>(rows_, cols_, nnz(), col_ptr_->data(), row_idx_->data(),
                                 values_.data());
}

Vec CscMatrix::multiply(const Vec& x) const {
  if (x.size() != cols_) throw InvalidArgument("multiply: dimension mismatch");
  Vec y = Vec::Zero(rows_);
  const auto& cp = *col_ptr_;
  const auto& ri = *row_idx_;
  for (int j = 0; j < cols_; ++j) {
    const double xj = x[j];
    for (int p = cp[j]; p < cp[j + 1]; ++p) y[ri[p]] += values_[p] * xj;
  }
  return y;
}

Vec CscMatrix::multiply_transpose(const Vec& x) const {
  if (x.size() != rows_) throw InvalidArgument("multiply_transpose: dimension mismatch");
  Vec y(cols_);
  const auto& cp = *col_ptr_;
  const auto& ri = *row_idx_;
  for (int j = 0; j < cols_; ++j) {
    double acc = 0.0;
    for (int p = cp[j]; p < cp[j + 1]; ++p) acc += values_[p] * x[ri[p]];
    y[j] = acc;
  }
  return y;
}

bool CscMatrix::operator==(const CscMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) return false;
  if (col_ptr() != other.col_ptr() || row_idx() != other.row_idx()) return false;
  if (values_.size() != other.values_.size()) return false;
  return values_.empty() ||
         std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0;
}

}  // namespace cran
