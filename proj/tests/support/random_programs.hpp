#pragma once

// Random cone programs with a known primal-dual optimum.

#include <vector>

#include "cran/cone_program.hpp"
#include "cran/rng.hpp"

namespace cran::testing {

struct PlantedProgram {
  ConeProgram prog;
  Vec x;
  Vec y;
  Vec s;
  double objective;
};

/// Complementary (s, y) from the Moreau split of a random vector, a sparse
/// Gaussian A, then b = A x + s and c = -A^T y.
inline PlantedProgram planted_program(Rng& rng, int n, const ConeSpec& cone,
                                      double density = 0.3) {
  const int m = cone.total_dim();
  std::vector<Triplet> trips;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (rng.uniform() < density) trips.push_back({i, j, rng.normal()});
  // Keep every column nonempty.
  for (int j = 0; j < n; ++j) trips.push_back({j % m, j, rng.normal()});

  PlantedProgram p;
  p.prog.A = CscMatrix::from_triplets(m, n, trips);
  p.prog.cone = cone;
  p.x = Vec(n);
  for (int j = 0; j < n; ++j) p.x[j] = rng.normal();
  Vec w(m);
  for (int i = 0; i < m; ++i) w[i] = rng.normal();
  p.s = project_cone(w, cone);
  p.y = project_dual_cone(-w, cone);
  p.prog.b = p.prog.A.multiply(p.x) + p.s;
  p.prog.c = -p.prog.A.multiply_transpose(p.y);
  p.objective = p.prog.c.dot(p.x);
  return p;
}

inline ConeSpec soc_blocks(int blocks, int dim, int zero = 0, int nonneg = 0) {
  ConeSpec spec;
  spec.zero_dim = zero;
  spec.nonneg_dim = nonneg;
  spec.soc_dims.assign(blocks, dim);
  return spec;
}

}  // namespace cran::testing
