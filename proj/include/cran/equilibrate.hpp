#pragma once

#include "cran/cone_program.hpp"

namespace cran {

/// Diagonal scaling of a cone program.
///
/// The scaled program is  A~ = D A E,  b~ = b_scale * D b,  c~ = cost_scale * E c
/// with D = diag(row_scale), E = diag(col_scale). Rows of one second-order
/// cone block share a single factor so that K is preserved by D.
struct Equilibration {
  ConeProgram scaled;
  Vec row_scale;
  Vec col_scale;
  double b_scale = 1.0;
  double cost_scale = 1.0;

  // Map a solution of the scaled program back to the original one.
  Vec unscale_x(const Vec& x_scaled) const;
  Vec unscale_y(const Vec& y_scaled) const;
  Vec unscale_s(const Vec& s_scaled) const;
  // Inverse maps, used to warm start the scaled program.
  Vec scale_x(const Vec& x) const;
  Vec scale_y(const Vec& y) const;
  Vec scale_s(const Vec& s) const;
};

/// Ruiz-style iterative infinity-norm equilibration.
Equilibration equilibrate(const ConeProgram& prog, int sweeps = 10);

/// Recover the original program data from a scaled one.
ConeProgram unscale_program(const Equilibration& eq);

}  // namespace cran
