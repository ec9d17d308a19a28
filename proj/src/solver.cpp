#include "cran/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cran/errors.hpp"

namespace cran {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SolveStatus::DualInfeasible: return "DualInfeasible";
    case SolveStatus::MaxItersReached: return "MaxItersReached";
  }
  return "Unknown";
}

void SolverSettings::validate() const {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(eps_primal > 0.0) || !(eps_dual > 0.0) || !(eps_gap > 0.0))
    throw InvalidArgument("solver tolerances must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("over-relaxation alpha must lie in (0, 2)");
  if (equilibration_sweeps < 0) throw InvalidArgument("equilibration_sweeps must be >= 0");
}

double Residuals::max() const { return std::max({primal, dual, gap}); }

Residuals compute_residuals(const ConeProgram& prog, const Vec& x, const Vec& y, const Vec& s) {
  Residuals r;
  r.primal = (prog.A.multiply(x) + s - prog.b).norm() / (1.0 + prog.b.norm());
  r.dual = (prog.A.multiply_transpose(y) + prog.c).norm() / (1.0 + prog.c.norm());
  const double cx = prog.c.dot(x);
  const double by = prog.b.dot(y);
  r.gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
  return r;
}

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

constexpr double kTauThreshold = 1e-9;

}  // namespace

TerminationCheck check_termination(const Iterate& it, const ConeProgram& prog,
                                   const SolverSettings& settings) {
  TerminationCheck out;
  const double inf = std::numeric_limits<double>::infinity();
  out.residuals = {inf, inf, inf};

  if (it.tau > kTauThreshold * std::max(it.kappa, 1.0)) {
    const Vec x = it.x / it.tau;
    const Vec y = it.y / it.tau;
    const Vec s = it.s / it.tau;
    out.residuals = compute_residuals(prog, x, y, s);
    if (out.residuals.primal <= settings.eps_primal && out.residuals.dual <= settings.eps_dual &&
        out.residuals.gap <= settings.eps_gap)
      out.status = SolveStatus::Optimal;
    return out;
  }
  if (!(it.kappa > 0.0)) return out;

  const double eps = settings.eps_primal;
  const double by = prog.b.dot(it.y);
  const double y_norm = inf_norm(it.y);
  if (by < 0.0 && y_norm > 0.0) {
    const double aty = inf_norm(prog.A.multiply_transpose(it.y));
    const double cone_gap = cone_distance(it.y, prog.cone, /*dual=*/true);
    if (aty <= eps * y_norm && cone_gap <= eps * y_norm) {
      out.status = SolveStatus::PrimalInfeasible;
      out.certificate = it.y / (-by);
      return out;
    }
  }
  const double cx = prog.c.dot(it.x);
  const double x_norm = inf_norm(it.x);
  if (cx < 0.0 && x_norm > 0.0) {
    const double axs = inf_norm(prog.A.multiply(it.x) + it.s);
    const double cone_gap = cone_distance(it.s, prog.cone);
    if (axs <= eps * x_norm && cone_gap <= eps * x_norm) {
      out.status = SolveStatus::DualInfeasible;
      out.certificate = it.x / (-cx);
    }
  }
  return out;
}

namespace {

Equilibration identity_scaling(const ConeProgram& prog) {
  Equilibration eq;
  eq.scaled = prog;
  eq.row_scale = Vec::Ones(prog.m());
  eq.col_scale = Vec::Ones(prog.n());
  return eq;
}

Equilibration prepare(const ConeProgram& prog, bool equilibrate_data, int sweeps) {
  prog.validate();
  return equilibrate_data ? equilibrate(prog, sweeps) : identity_scaling(prog);
}

}  // namespace

ConeSolver::ConeSolver(ConeProgram prog, bool equilibrate_data, int sweeps)
    : prog_(std::move(prog)),
      eq_(prepare(prog_, equilibrate_data, sweeps)),
      cache_(eq_.scaled) {}

SolveOutcome ConeSolver::solve(const SolverSettings& settings) const {
  settings.validate();
  const ConeProgram& sp = eq_.scaled;
  const int n = sp.n();
  const int m = sp.m();
  const int len = n + m + 1;
  const int tau_at = n + m;

  Vec u = Vec::Zero(len);
  Vec v = Vec::Zero(len);
  if (settings.warm_start) {
    const WarmStart& ws = *settings.warm_start;
    if (ws.x.size() != n || ws.y.size() != m || ws.s.size() != m)
      throw InvalidArgument("warm start dimensions do not match the program");
    u.head(n) = eq_.scale_x(ws.x);
    u.segment(n, m) = eq_.scale_y(ws.y);
    u[tau_at] = 1.0;
    v.segment(n, m) = eq_.scale_s(ws.s);
  } else {
    u[tau_at] = 1.0;
    v[tau_at] = 1.0;
  }

  const double alpha = settings.alpha;
  Vec ut(len);
  SolveOutcome out;
  Iterate it;
  TerminationCheck check;

  for (int k = 1; k <= settings.max_iters; ++k) {
    ut = u + v;
    cache_.apply_inplace(ut);
    ut = alpha * ut + (1.0 - alpha) * u;

    u = ut - v;
    project_dual_cone_inplace(u.segment(n, m), sp.cone);
    u[tau_at] = std::max(u[tau_at], 0.0);

    v += u - ut;
    v.head(n).setZero();

    it.x = eq_.unscale_x(u.head(n));
    it.y = eq_.unscale_y(u.segment(n, m));
    it.s = eq_.unscale_s(v.segment(n, m));
    it.tau = u[tau_at];
    it.kappa = v[tau_at];
    check = check_termination(it, prog_, settings);
    out.iterations = k;
    if (settings.record_history) out.history.push_back(check.residuals.max());
    if (check.status) break;
  }

  out.status = check.status.value_or(SolveStatus::MaxItersReached);
  out.residuals = check.residuals;
  out.certificate = check.certificate;
  if (out.status == SolveStatus::Optimal ||
      (out.status == SolveStatus::MaxItersReached && it.tau > 0.0)) {
    out.x = it.x / it.tau;
    out.y = it.y / it.tau;
    out.s = it.s / it.tau;
    out.objective = prog_.c.dot(out.x);
  } else {
    // Unnormalized rays for certificates or a degenerate iterate.
    out.x = it.x;
    out.y = it.y;
    out.s = it.s;
    const double inf = std::numeric_limits<double>::infinity();
    out.objective = out.status == SolveStatus::PrimalInfeasible ? inf
                    : out.status == SolveStatus::DualInfeasible ? -inf
                                                                : std::nan("");
  }
  return out;
}

SolveOutcome solve(const ConeProgram& prog, const SolverSettings& settings) {
  settings.validate();
  ConeSolver solver(prog, settings.equilibrate, settings.equilibration_sweeps);
  return solver.solve(settings);
}

}  // namespace cran
