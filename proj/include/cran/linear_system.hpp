#pragma once

#include <Eigen/SparseCholesky>

#include <memory>

#include "cran/cone_program.hpp"

namespace cran {

/// Reusable solver for (I + Q) w = z, where Q is the skew-symmetric
/// embedding matrix
///
///     Q = [  0    A^T   c ]
///         [ -A    0     b ]
///         [ -c^T -b^T   0 ]
///
/// The (x, y) block is handled by one sparse LDL^T factorization of the
/// quasi-definite matrix [[I, A^T], [A, -I]]; the (c, b) border is folded in
/// with a rank-one correction using the precomputed solve g = M^{-1} (c; b).
class LinearSystemCache {
 public:
  /// Static diagonal regularization added before factoring.
  static constexpr double kRegularization = 1e-8;

  explicit LinearSystemCache(const ConeProgram& prog);

  /// w = (I + Q)^{-1} z for z of length n + m + 1.
  Vec apply(const Vec& z) const;
  void apply_inplace(Eigen::Ref<Vec> z) const;

  int n() const { return n_; }
  int m() const { return m_; }

 private:
  using Factor = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

  // Solves M [x; y] = [a; d] with M = [[I, A^T], [-A, I]], one refinement step.
  void solve_block(Eigen::Ref<Vec> xy) const;

  int n_ = 0;
  int m_ = 0;
  SpMat A_;
  SpMat At_;
  std::shared_ptr<Factor> factor_;
  Vec h_;  // (c; b)
  Vec g_;  // M^{-1} h
  double denom_ = 1.0;  // 1 + h^T g
};

LinearSystemCache factorize(const ConeProgram& prog);

}  // namespace cran
