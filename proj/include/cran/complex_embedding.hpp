#pragma once

#include <Eigen/Core>

namespace cran {

/// Complex vectors in C^d are carried as (Re v; Im v) in R^{2d}.
///
/// Under this map Re(h^H v) = (Re h; Im h)^T (Re v; Im v) and
/// Im(h^H v) = (-Im h; Re h)^T (Re v; Im v).
inline Eigen::VectorXd embed(const Eigen::VectorXcd& v) {
  Eigen::VectorXd out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

inline Eigen::VectorXcd unembed(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size() / 2;
  Eigen::VectorXcd v(d);
  v.real() = x.head(d);
  v.imag() = x.tail(d);
  return v;
}

/// Row functional of Re(h^H v) on the embedded vector.
inline Eigen::VectorXd real_part_functional(const Eigen::VectorXcd& h) {
  return embed(h);
}

/// Row functional of Im(h^H v) on the embedded vector.
inline Eigen::VectorXd imag_part_functional(const Eigen::VectorXcd& h) {
  Eigen::VectorXd out(2 * h.size());
  out.head(h.size()) = -h.imag();
  out.tail(h.size()) = h.real();
  return out;
}

}  // namespace cran
