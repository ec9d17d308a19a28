#include "cran/linear_system.hpp"

#include <cmath>
#include <vector>

#include "cran/errors.hpp"

namespace cran {

LinearSystemCache::LinearSystemCache(const ConeProgram& prog)
    : n_(prog.n()), m_(prog.m()), A_(prog.A.to_eigen()), At_(A_.transpose()) {
  const int dim = n_ + m_;
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(static_cast<std::size_t>(dim) + A_.nonZeros());
  for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, 1.0 + kRegularization);
  for (int i = 0; i < m_; ++i) trips.emplace_back(n_ + i, n_ + i, -(1.0 + kRegularization));
  for (int j = 0; j < A_.outerSize(); ++j)
    for (SpMat::InnerIterator it(A_, j); it; ++it)
      if (it.value() != 0.0) trips.emplace_back(n_ + it.row(), j, it.value());
  SpMat kkt(dim, dim);
  kkt.setFromTriplets(trips.begin(), trips.end());

  factor_ = std::make_shared<Factor>();
  factor_->compute(kkt);
  if (factor_->info() != Eigen::Success)
    throw FactorizationFailed("LDL^T factorization of the KKT matrix failed");
  const Vec dvec = factor_->vectorD();
  for (Eigen::Index i = 0; i < dvec.size(); ++i)
    if (!std::isfinite(dvec[i]) || std::abs(dvec[i]) < 1e-14)
      throw FactorizationFailed("KKT factorization produced a numerically zero pivot");

  h_.resize(dim);
  h_.head(n_) = prog.c;
  h_.tail(m_) = prog.b;
  g_ = h_;
  solve_block(g_);
  denom_ = 1.0 + h_.dot(g_);
  if (!(denom_ > 0.0) || !std::isfinite(denom_))
    throw FactorizationFailed("border correction is singular");
}

void LinearSystemCache::solve_block(Eigen::Ref<Vec> xy) const {
  // M [x; y] = [a; d]  <=>  K [x; y] = [a; -d],  K = [[I, A^T], [A, -I]].
  Vec rhs(n_ + m_);
  rhs.head(n_) = xy.head(n_);
  rhs.tail(m_) = -xy.tail(m_);
  Vec w = factor_->solve(rhs);

  // One step of iterative refinement against the unregularized K.
  Vec r(n_ + m_);
  r.head(n_) = rhs.head(n_) - w.head(n_) - At_ * w.tail(m_);
  r.tail(m_) = rhs.tail(m_) - A_ * w.head(n_) + w.tail(m_);
  w += factor_->solve(r);
  xy = w;
}

void LinearSystemCache::apply_inplace(Eigen::Ref<Vec> z) const {
  if (z.size() != n_ + m_ + 1) throw InvalidArgument("linear system: dimension mismatch");
  const double z_tau = z[n_ + m_];
  auto xy = z.head(n_ + m_);
  solve_block(xy);
  const double w_tau = (z_tau + h_.dot(xy)) / denom_;
  xy -= w_tau * g_;
  z[n_ + m_] = w_tau;
}

Vec LinearSystemCache::apply(const Vec& z) const {
  Vec w = z;
  apply_inplace(w);
  return w;
}

LinearSystemCache factorize(const ConeProgram& prog) {
  prog.validate();
  return LinearSystemCache(prog);
}

}  // namespace cran
