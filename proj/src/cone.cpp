#include "cran/cone.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cran/errors.hpp"

namespace cran {

int ConeSpec::total_dim() const {
  int total = zero_dim + nonneg_dim;
  for (int q : soc_dims) total += q;
  return total;
}

void ConeSpec::validate() const {
  if (zero_dim < 0 || nonneg_dim < 0)
    throw InvalidArgument("cone dimensions must be nonnegative");
  for (int q : soc_dims)
    if (q < 1) throw InvalidArgument("second-order cone blocks need dimension >= 1");
}

namespace {

void check_dim(Eigen::Index n, const ConeSpec& spec) {
  if (n != spec.total_dim())
    throw InvalidArgument("vector length " + std::to_string(n) +
                          " does not match cone dimension " +
                          std::to_string(spec.total_dim()));
}

}  // namespace

void project_soc_inplace(Eigen::Ref<Vec> block) {
  const Eigen::Index q = block.size();
  const double t = block[0];
  if (q == 1) {
    block[0] = std::max(t, 0.0);
    return;
  }
  auto z = block.tail(q - 1);
  const double nz = z.norm();
  if (nz <= t) return;
  if (nz <= -t) {
    block.setZero();
    return;
  }
  // |t| < ||z||, so nz > 0 here.
  const double alpha = 0.5 * (nz + t);
  block[0] = alpha;
  z *= alpha / nz;
}

void project_cone_inplace(Eigen::Ref<Vec> x, const ConeSpec& spec) {
  check_dim(x.size(), spec);
  Eigen::Index off = 0;
  x.segment(off, spec.zero_dim).setZero();
  off += spec.zero_dim;
  x.segment(off, spec.nonneg_dim) = x.segment(off, spec.nonneg_dim).cwiseMax(0.0);
  off += spec.nonneg_dim;
  for (int q : spec.soc_dims) {
    project_soc_inplace(x.segment(off, q));
    off += q;
  }
}

void project_dual_cone_inplace(Eigen::Ref<Vec> x, const ConeSpec& spec) {
  check_dim(x.size(), spec);
  Eigen::Index off = spec.zero_dim;  // free block
  x.segment(off, spec.nonneg_dim) = x.segment(off, spec.nonneg_dim).cwiseMax(0.0);
  off += spec.nonneg_dim;
  for (int q : spec.soc_dims) {
    project_soc_inplace(x.segment(off, q));
    off += q;
  }
}

Vec project_cone(const Vec& x, const ConeSpec& spec) {
  Vec out = x;
  project_cone_inplace(out, spec);
  return out;
}

Vec project_dual_cone(const Vec& x, const ConeSpec& spec) {
  Vec out = x;
  project_dual_cone_inplace(out, spec);
  return out;
}

double cone_distance(const Vec& x, const ConeSpec& spec, bool dual) {
  const Vec p = dual ? project_dual_cone(x, spec) : project_cone(x, spec);
  return (x - p).norm();
}

bool in_cone(const Vec& x, const ConeSpec& spec, double tol, bool dual) {
  check_dim(x.size(), spec);
  Eigen::Index off = 0;
  if (!dual && spec.zero_dim > 0 &&
      x.segment(0, spec.zero_dim).cwiseAbs().maxCoeff() > tol)
    return false;
  off += spec.zero_dim;
  for (int i = 0; i < spec.nonneg_dim; ++i)
    if (x[off + i] < -tol) return false;
  off += spec.nonneg_dim;
  for (int q : spec.soc_dims) {
    const double t = x[off];
    const double nz = q > 1 ? x.segment(off + 1, q - 1).norm() : 0.0;
    if (nz - t > tol) return false;
    off += q;
  }
  return true;
}

}  // namespace cran
