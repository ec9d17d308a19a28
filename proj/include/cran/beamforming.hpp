#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "cran/network.hpp"
#include "cran/solver.hpp"
#include "cran/stuffing.hpp"

namespace cran {

enum class DesignStatus { Solved, Infeasible, Indeterminate };

std::string to_string(DesignStatus s);

struct BeamformingOptions {
  SolverSettings solver = default_solver();
  /// Stage-1 group weights w_l = (P^c_l)^weight_exponent.
  double weight_exponent = 0.5;
  /// Upper limit for bracket expansion in max-min bisection.
  double gamma_ceiling = 1e12;

  static SolverSettings default_solver();
};

/// Templates keyed by (family, dims). Not thread-safe; one per worker.
class TemplateCache {
 public:
  const StuffingTemplate& get(ProblemFamily f, const FamilyDims& dims);
  std::size_t size() const { return cache_.size(); }

 private:
  std::map<std::pair<ProblemFamily, FamilyDims>, std::unique_ptr<StuffingTemplate>> cache_;
};

struct PowerMinResult {
  DesignStatus status = DesignStatus::Indeterminate;
  CMat V;                       // N x K, zero rows on inactive RRHs
  double transmit_power = 0.0;  // sum (1/eta_l) ||v~_l||^2 over active RRHs
  double network_power_w = 0.0;
  SolveOutcome solve;
};

struct StageOneResult {
  DesignStatus status = DesignStatus::Indeterminate;
  CMat V;
  Vec group_norms;  // ||v~_l||
  Vec weights;      // w_l
};

struct SelectionResult {
  DesignStatus status = DesignStatus::Indeterminate;
  std::vector<int> active_set;  // sorted
  int probes = 0;
  int indeterminate_probes = 0;
};

struct GsbfResult {
  DesignStatus status = DesignStatus::Indeterminate;
  std::vector<int> active_set;
  CMat V_final;
  double network_power_w = 0.0;
  Vec stage1_group_norms;
  Vec ordering;  // theta_l = w_l ||v~_l^(1)||
  int feasibility_probe_count = 0;
  int indeterminate_probes = 0;
};

struct OracleResult {
  DesignStatus status = DesignStatus::Indeterminate;
  std::vector<int> active_set;
  CMat V;
  double network_power_w = 0.0;
  int sets_evaluated = 0;
};

struct MaxMinResult {
  double gamma = 0.0;            // min(certified_gamma, min_sinr)
  double certified_gamma = 0.0;  // largest target the bisection found feasible
  double min_sinr = 0.0;         // achieved by V
  CMat V;
  int probes = 0;
  int bracket_expansions = 0;
  int indeterminate_probes = 0;

  double rate() const;  // log2(1 + gamma)
};

enum class FixedDirection { MRT, ZF };

/// Group sparse beamforming and related coordinated beamforming designs.
///
/// Each program goes through a cached stuffing template and the ADMM cone
/// solver. Feasibility probes that end without a verdict count as infeasible.
class BeamformingDesigner {
 public:
  explicit BeamformingDesigner(BeamformingOptions options = {});

  /// Transmit power minimization over `active_set` with per-RRH caps.
  PowerMinResult powermin(const NetworkInstance& inst, const std::vector<int>& active_set);

  /// Can `active_set` meet every SINR target within the caps?
  DesignStatus feasible(const NetworkInstance& inst, const std::vector<int>& active_set);

  StageOneResult gsbf_stage1(const NetworkInstance& inst);

  /// Switches off RRHs in ascending `ordering`, keeping the largest prefix
  /// whose removal stays feasible; bisection over the prefix length.
  SelectionResult gsbf_select(const NetworkInstance& inst, const Vec& ordering);

  GsbfResult gsbf(const NetworkInstance& inst);

  /// Minimum network power over every nonempty active set (L <= 12).
  OracleResult exhaustive_oracle(const NetworkInstance& inst);

  /// Bisection on a common SINR target under per-RRH caps.
  MaxMinResult maxmin_rate(const NetworkInstance& inst, double tol);

  /// Same bisection with fixed unit beam directions; only powers are optimized.
  MaxMinResult fixed_direction_maxmin(const NetworkInstance& inst, FixedDirection dir, double tol);

  const BeamformingOptions& options() const { return options_; }
  TemplateCache& templates() { return cache_; }

 private:
  BeamformingOptions options_;
  TemplateCache cache_;
};

/// Unit-norm per-user directions (columns), N x K.
CMat beam_directions(const CMat& H, FixedDirection dir);

/// Initial bisection bracket max_k ||h_k||^2 sum_l P^max_l / sigma_k^2.
double sinr_upper_bound(const NetworkInstance& inst);

/// v_k <- v_k exp(-i arg(h_k^H v_k)), making each h_k^H v_k real nonnegative.
CMat rotate_phases(const CMat& H, const CMat& V);

/// Scales down any RRH group whose norm exceeds sqrt(P^max_l).
CMat enforce_caps(const NetworkInstance& inst, CMat V);

/// Restriction of an instance to the RRHs in `active_set`.
FamilyDims active_dims(const NetworkInstance& inst, const std::vector<int>& active_set,
                       int scenarios = 1);
FamilyData active_data(const NetworkInstance& inst, const std::vector<int>& active_set);

/// Reads V (N x K over the full antenna set) from a canonical solution vector.
CMat extract_beamformer(const NetworkInstance& inst, const std::vector<int>& active_set,
                        const VariableLayout& layout, const Vec& x);

}  // namespace cran
