#pragma once

#include <string>

#include "cran/cone.hpp"
#include "cran/sparse.hpp"

namespace cran {

/// minimize c^T x  subject to  A x + s = b,  s in K.
///
/// Rows of A are ordered to match the cone blocks: zero rows first, then the
/// nonnegative rows, then each second-order cone block in turn. A stuffed
/// program may carry structural entries whose value happens to be zero.
struct ConeProgram {
  CscMatrix A;
  Vec b;
  Vec c;
  ConeSpec cone;

  int m() const { return A.rows(); }
  int n() const { return A.cols(); }

  /// Throws InvalidArgument on inconsistent dimensions or non-finite data.
  void validate() const;

  bool operator==(const ConeProgram& other) const;
};

/// JSON document {"m", "n", "A": {"rows", "cols", "vals"}, "b", "c",
/// "cone": {"zero", "nonneg", "soc"}} with 0-based indices.
ConeProgram program_from_json(const std::string& text);
std::string program_to_json(const ConeProgram& prog);

ConeProgram read_program_file(const std::string& path);
void write_program_file(const ConeProgram& prog, const std::string& path);

}  // namespace cran
