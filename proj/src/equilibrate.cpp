#include "cran/equilibrate.hpp"

#include <algorithm>
#include <cmath>

namespace cran {

namespace {

constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;

double step_scale(double norm) {
  if (!(norm > 0.0)) return 1.0;
  return std::clamp(1.0 / std::sqrt(norm), kMinScale, kMaxScale);
}

double vector_scale(double norm) {
  if (!(norm > 0.0)) return 1.0;
  return std::clamp(1.0 / norm, 1e-6, 1e6);
}

}  // namespace

Equilibration equilibrate(const ConeProgram& prog, int sweeps) {
  prog.validate();
  const int m = prog.m();
  const int n = prog.n();
  Equilibration eq;
  eq.row_scale = Vec::Ones(m);
  eq.col_scale = Vec::Ones(n);

  const auto& cp = prog.A.col_ptr();
  const auto& ri = prog.A.row_idx();
  std::vector<double> vals = prog.A.values();

  // Row groups: zero and nonneg rows alone, SOC blocks together.
  std::vector<int> group_of_row(m);
  int groups = 0;
  {
    int r = 0;
    for (int i = 0; i < prog.cone.zero_dim + prog.cone.nonneg_dim; ++i) group_of_row[r++] = groups++;
    for (int q : prog.cone.soc_dims) {
      for (int i = 0; i < q; ++i) group_of_row[r++] = groups;
      ++groups;
    }
  }

  std::vector<double> group_norm(groups);
  Vec d(m), e(n);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    std::fill(group_norm.begin(), group_norm.end(), 0.0);
    for (int j = 0; j < n; ++j)
      for (int p = cp[j]; p < cp[j + 1]; ++p) {
        double& g = group_norm[group_of_row[ri[p]]];
        g = std::max(g, std::abs(vals[p]));
      }
    for (int i = 0; i < m; ++i) d[i] = step_scale(group_norm[group_of_row[i]]);

    for (int j = 0; j < n; ++j) {
      double cn = 0.0;
      for (int p = cp[j]; p < cp[j + 1]; ++p) cn = std::max(cn, std::abs(vals[p]) * d[ri[p]]);
      e[j] = step_scale(cn);
    }
    for (int j = 0; j < n; ++j)
      for (int p = cp[j]; p < cp[j + 1]; ++p) vals[p] *= d[ri[p]] * e[j];
    eq.row_scale.array() *= d.array();
    eq.col_scale.array() *= e.array();
  }

  Vec db = eq.row_scale.cwiseProduct(prog.b);
  Vec ec = eq.col_scale.cwiseProduct(prog.c);
  eq.b_scale = vector_scale(db.size() ? db.cwiseAbs().maxCoeff() : 0.0);
  eq.cost_scale = vector_scale(ec.size() ? ec.cwiseAbs().maxCoeff() : 0.0);

  eq.scaled.A = CscMatrix(m, n, std::make_shared<const std::vector<int>>(cp),
                          std::make_shared<const std::vector<int>>(ri), std::move(vals));
  eq.scaled.b = eq.b_scale * db;
  eq.scaled.c = eq.cost_scale * ec;
  eq.scaled.cone = prog.cone;
  return eq;
}

ConeProgram unscale_program(const Equilibration& eq) {
  const ConeProgram& s = eq.scaled;
  std::vector<double> vals = s.A.values();
  const auto& cp = s.A.col_ptr();
  const auto& ri = s.A.row_idx();
  for (int j = 0; j < s.n(); ++j)
    for (int p = cp[j]; p < cp[j + 1]; ++p) vals[p] /= eq.row_scale[ri[p]] * eq.col_scale[j];
  ConeProgram out;
  out.A = CscMatrix(s.m(), s.n(), std::make_shared<const std::vector<int>>(cp),
                    std::make_shared<const std::vector<int>>(ri), std::move(vals));
  out.b = s.b.cwiseQuotient(eq.row_scale) / eq.b_scale;
  out.c = s.c.cwiseQuotient(eq.col_scale) / eq.cost_scale;
  out.cone = s.cone;
  return out;
}

Vec Equilibration::unscale_x(const Vec& x) const { return col_scale.cwiseProduct(x) / b_scale; }
Vec Equilibration::unscale_y(const Vec& y) const { return row_scale.cwiseProduct(y) / cost_scale; }
Vec Equilibration::unscale_s(const Vec& s) const { return s.cwiseQuotient(row_scale) / b_scale; }
Vec Equilibration::scale_x(const Vec& x) const { return x.cwiseQuotient(col_scale) * b_scale; }
Vec Equilibration::scale_y(const Vec& y) const { return y.cwiseQuotient(row_scale) * cost_scale; }
Vec Equilibration::scale_s(const Vec& s) const { return row_scale.cwiseProduct(s) * b_scale; }

}  // namespace cran
