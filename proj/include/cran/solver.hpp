#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cran/cone_program.hpp"
#include "cran/equilibrate.hpp"
#include "cran/linear_system.hpp"

namespace cran {

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxItersReached };

std::string to_string(SolveStatus s);

/// Primal-dual starting point in the units of the original program.
struct WarmStart {
  Vec x;
  Vec y;
  Vec s;
};

struct SolverSettings {
  int max_iters = 10000;
  double eps_primal = 1e-4;
  double eps_dual = 1e-4;
  double eps_gap = 1e-4;
  /// Over-relaxation factor, 0 < alpha < 2.
  double alpha = 1.5;
  bool equilibrate = true;
  int equilibration_sweeps = 10;
  std::optional<WarmStart> warm_start;
  /// Record max(residuals) per iteration in SolveOutcome::history.
  bool record_history = false;

  void validate() const;
};

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;

  double max() const;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::MaxItersReached;
  Vec x;
  Vec y;
  Vec s;
  double objective = 0.0;
  Residuals residuals;
  int iterations = 0;
  /// y for PrimalInfeasible, x for DualInfeasible.
  std::optional<Vec> certificate;
  std::vector<double> history;
};

/// Homogeneous iterate in original units: (x, y, tau) and (s, kappa).
struct Iterate {
  Vec x;
  Vec y;
  Vec s;
  double tau = 1.0;
  double kappa = 0.0;
};

struct TerminationCheck {
  std::optional<SolveStatus> status;  // empty means keep iterating
  Residuals residuals;
  std::optional<Vec> certificate;
};

/// Residuals of the normalized candidate (x, y, s) = (x, y, s) / tau.
Residuals compute_residuals(const ConeProgram& prog, const Vec& x, const Vec& y, const Vec& s);

/// Optimality test when tau is clearly positive; certificate tests otherwise.
TerminationCheck check_termination(const Iterate& it, const ConeProgram& prog,
                                   const SolverSettings& settings);

/// ADMM on the homogeneous self-dual embedding.
///
/// Equilibration and the KKT factorization are done once at construction and
/// reused by every call to solve(), so a sequence of warm-started solves of
/// the same program pays for one factorization.
class ConeSolver {
 public:
  ConeSolver(ConeProgram prog, bool equilibrate = true, int sweeps = 10);

  SolveOutcome solve(const SolverSettings& settings) const;

  const ConeProgram& program() const { return prog_; }
  const Equilibration& scaling() const { return eq_; }

 private:
  ConeProgram prog_;
  Equilibration eq_;
  LinearSystemCache cache_;
};

SolveOutcome solve(const ConeProgram& prog, const SolverSettings& settings = {});

}  // namespace cran
