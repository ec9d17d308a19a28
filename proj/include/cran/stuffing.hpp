#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cran/cone_program.hpp"

namespace cran {

using CMat = Eigen::MatrixXcd;

/// Problem families with a fixed canonical form.
///
///   PowerMin           min t  s.t. SINR SOCs, per-RRH caps, t >= ||diag(1/sqrt(eta)) v||
///   GroupSparseStage1  min sum_l w_l t_l  s.t. SINR SOCs, caps, t_l >= ||v~_l||
///   FeasibilityCheck   min 0  s.t. SINR SOCs, caps
///   ScenarioScb        PowerMin with the K SINR blocks repeated for M channel samples
///   MaxMinProbe        FeasibilityCheck layout, used with a common SINR target
enum class ProblemFamily { PowerMin, GroupSparseStage1, FeasibilityCheck, ScenarioScb, MaxMinProbe };

std::string to_string(ProblemFamily f);
ProblemFamily family_from_string(const std::string& s);

struct FamilyDims {
  std::vector<int> antennas;  // N_l per RRH in the program
  int users = 0;
  int scenarios = 1;          // M, ScenarioScb only

  int num_rrhs() const { return static_cast<int>(antennas.size()); }
  int num_antennas() const;
  void validate(ProblemFamily f) const;

  auto operator<=>(const FamilyDims&) const = default;
};

/// Numbers that vary between instances of one family.
struct FamilyData {
  std::vector<CMat> channels;  // K x N each; M of them for ScenarioScb
  Eigen::VectorXd target_sinr;
  Eigen::VectorXd noise_power;
  Eigen::VectorXd max_tx_w;
  Eigen::VectorXd drain_efficiency;
  Eigen::VectorXd group_weight;  // GroupSparseStage1 only

  void validate(ProblemFamily f, const FamilyDims& dims) const;
};

/// Column indices of the canonical variable vector
/// nu = (epigraph variables; Re vec(V); Im vec(V)), vec(V) column-major.
struct VariableLayout {
  int epigraph = 0;
  int antennas = 0;
  int users = 0;

  VariableLayout(ProblemFamily f, const FamilyDims& dims);
  int re(int user, int antenna) const { return epigraph + user * antennas + antenna; }
  int im(int user, int antenna) const { return epigraph + antennas * users + user * antennas + antenna; }
  int size() const { return epigraph + 2 * antennas * users; }
};

/// Cone of a family: all second-order blocks, in the order
/// SINR (sample-major, then user), per-RRH caps, epigraph block(s).
ConeSpec family_cone(ProblemFamily f, const FamilyDims& dims);

/// Builds the program from scratch: fresh triplets, fresh compression.
ConeProgram canonicalize_reference(ProblemFamily f, const FamilyDims& dims, const FamilyData& data);

/// Precomputed structure of a family plus the map from instance data to
/// the positions of A, b and c they fill.
class StuffingTemplate {
 public:
  enum class Target : std::uint8_t { A, b, c };
  struct Slot {
    int datum;  // index into the flattened instance data
    Target target;
    int index;  // position in A.values(), b or c
    double multiplier;
  };

  static StuffingTemplate build(ProblemFamily f, const FamilyDims& dims);

  /// Copies instance numbers into a new program that shares this
  /// template's index arrays.
  ConeProgram stuff(const FamilyData& data) const;

  ProblemFamily family() const { return family_; }
  const FamilyDims& dims() const { return dims_; }
  const ConeSpec& cone() const { return cone_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int nnz() const { return static_cast<int>(a_src_.size()); }

  /// Every data-driven destination, ordered by target then index.
  std::vector<Slot> slots() const;
  /// Number of entries of the flattened instance data vector.
  int datum_count() const { return datum_count_; }

 private:
  // Flattened data: [0] = 1, then channel parts, signal parts, sigma,
  // sqrt(P^max), 1/sqrt(eta), group weights.
  void flatten(const FamilyData& data, std::vector<double>& out) const;

  ProblemFamily family_ = ProblemFamily::PowerMin;
  FamilyDims dims_;
  ConeSpec cone_;
  int n_ = 0;
  int m_ = 0;
  int datum_count_ = 0;
  std::shared_ptr<const std::vector<int>> col_ptr_;
  std::shared_ptr<const std::vector<int>> row_idx_;
  // Source of each destination: (datum << 1) | negate. Datum 0 is the constant 1.
  std::vector<std::int32_t> a_src_;
  std::vector<std::int32_t> b_src_;  // -1 where b is structurally zero
  std::vector<std::int32_t> c_src_;
};

}  // namespace cran
