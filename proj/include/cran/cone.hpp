#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace cran {

using Vec = Eigen::VectorXd;

/// Product cone {0}^zero x R+^nonneg x SOC(q1) x ... x SOC(qk).
///
/// Each second-order cone block of dimension q is {(t, z) : ||z||_2 <= t}
/// with the leading coordinate t.
struct ConeSpec {
  int zero_dim = 0;
  int nonneg_dim = 0;
  std::vector<int> soc_dims;

  int total_dim() const;
  /// Throws InvalidArgument when a dimension is negative or an SOC block is empty.
  void validate() const;

  bool operator==(const ConeSpec&) const = default;
};

// Projections onto K and K*. The in-place variants write into `x`.
void project_cone_inplace(Eigen::Ref<Vec> x, const ConeSpec& spec);
void project_dual_cone_inplace(Eigen::Ref<Vec> x, const ConeSpec& spec);

Vec project_cone(const Vec& x, const ConeSpec& spec);
Vec project_dual_cone(const Vec& x, const ConeSpec& spec);

/// Euclidean distance from x to K (or K* when `dual` is set).
double cone_distance(const Vec& x, const ConeSpec& spec, bool dual = false);

/// True when x lies in K (K*) up to an absolute tolerance per block.
bool in_cone(const Vec& x, const ConeSpec& spec, double tol, bool dual = false);

/// Projection of a single SOC block (t, z) in place.
void project_soc_inplace(Eigen::Ref<Vec> block);

}  // namespace cran
