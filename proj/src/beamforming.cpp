#include "cran/beamforming.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cran/errors.hpp"

namespace cran {

std::string to_string(DesignStatus s) {
  switch (s) {
    case DesignStatus::Solved: return "Solved";
    case DesignStatus::Infeasible: return "Infeasible";
    case DesignStatus::Indeterminate: return "Indeterminate";
  }
  return "Unknown";
}

SolverSettings BeamformingOptions::default_solver() {
  SolverSettings s;
  s.eps_primal = s.eps_dual = s.eps_gap = 1e-5;
  s.max_iters = 20000;
  return s;
}

double MaxMinResult::rate() const { return std::log2(1.0 + gamma); }

const StuffingTemplate& TemplateCache::get(ProblemFamily f, const FamilyDims& dims) {
  auto key = std::make_pair(f, dims);
  auto it = cache_.find(key);
  if (it == cache_.end())
    it = cache_.emplace(key, std::make_unique<StuffingTemplate>(StuffingTemplate::build(f, dims))).first;
  return *it->second;
}

namespace {

std::vector<int> normalized_set(const NetworkInstance& inst, std::vector<int> set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  if (set.empty()) throw InvalidArgument("active set must be nonempty");
  if (set.front() < 0 || set.back() >= inst.num_rrhs())
    throw InvalidArgument("active set index out of range");
  return set;
}

std::vector<int> all_rrhs(const NetworkInstance& inst) {
  std::vector<int> s(inst.num_rrhs());
  std::iota(s.begin(), s.end(), 0);
  return s;
}

DesignStatus classify(const SolveOutcome& out) {
  switch (out.status) {
    case SolveStatus::Optimal: return DesignStatus::Solved;
    case SolveStatus::PrimalInfeasible: return DesignStatus::Infeasible;
    default: return DesignStatus::Indeterminate;
  }
}

double fronthaul_sum(const NetworkInstance& inst, const std::vector<int>& set) {
  double total = 0.0;
  for (int l : set) total += inst.power.fronthaul_w[l];
  return total;
}

}  // namespace

FamilyDims active_dims(const NetworkInstance& inst, const std::vector<int>& active_set,
                       int scenarios) {
  FamilyDims dims;
  for (int l : active_set) dims.antennas.push_back(inst.antennas[l]);
  dims.users = inst.num_users();
  dims.scenarios = scenarios;
  return dims;
}

FamilyData active_data(const NetworkInstance& inst, const std::vector<int>& active_set) {
  const int L = static_cast<int>(active_set.size());
  int cols = 0;
  for (int l : active_set) cols += inst.antennas[l];
  CMat H(inst.num_users(), cols);
  FamilyData data;
  data.max_tx_w.resize(L);
  data.drain_efficiency.resize(L);
  int c = 0;
  for (int i = 0; i < L; ++i) {
    const int l = active_set[i];
    H.middleCols(c, inst.antennas[l]) = inst.H.middleCols(inst.antenna_offset(l), inst.antennas[l]);
    c += inst.antennas[l];
    data.max_tx_w[i] = inst.power.max_tx_w[l];
    data.drain_efficiency[i] = inst.power.drain_efficiency[l];
  }
  data.channels = {std::move(H)};
  data.target_sinr = inst.target_sinr;
  data.noise_power = inst.noise_power;
  return data;
}

CMat extract_beamformer(const NetworkInstance& inst, const std::vector<int>& active_set,
                        const VariableLayout& layout, const Vec& x) {
  const int K = inst.num_users();
  CMat V = CMat::Zero(inst.num_antennas(), K);
  int a = 0;
  for (int l : active_set) {
    const int row0 = inst.antenna_offset(l);
    for (int i = 0; i < inst.antennas[l]; ++i, ++a)
      for (int k = 0; k < K; ++k) V(row0 + i, k) = {x[layout.re(k, a)], x[layout.im(k, a)]};
  }
  return V;
}

CMat enforce_caps(const NetworkInstance& inst, CMat V) {
  for (int l = 0; l < inst.num_rrhs(); ++l) {
    auto block = V.middleRows(inst.antenna_offset(l), inst.antennas[l]);
    const double nrm = block.norm();
    const double cap = std::sqrt(inst.power.max_tx_w[l]);
    if (nrm > cap) block *= cap / nrm;
  }
  return V;
}

CMat rotate_phases(const CMat& H, const CMat& V) {
  CMat out = V;
  for (Eigen::Index k = 0; k < V.cols(); ++k) {
    std::complex<double> hv = 0.0;  // h_k^H v_k
    for (Eigen::Index n = 0; n < V.rows(); ++n) hv += std::conj(H(k, n)) * V(n, k);
    if (std::abs(hv) > 0.0) out.col(k) *= std::conj(hv) / std::abs(hv);
  }
  return out;
}

double sinr_upper_bound(const NetworkInstance& inst) {
  const double total_cap = inst.power.max_tx_w.sum();
  double best = 0.0;
  for (int k = 0; k < inst.num_users(); ++k)
    best = std::max(best, inst.H.row(k).squaredNorm() * total_cap / inst.noise_power[k]);
  return best;
}

CMat beam_directions(const CMat& H, FixedDirection dir) {
  const Eigen::Index K = H.rows();
  const Eigen::Index N = H.cols();
  CMat D(N, K);
  if (dir == FixedDirection::MRT) {
    D = H.transpose();
  } else {
    if (N < K) throw InvalidArgument("zero-forcing needs at least as many antennas as users");
    // conj(H) D = diagonal: D = H^T (conj(H) H^T)^{-1}.
    const CMat Hc = H.conjugate();
    D = H.transpose() * (Hc * H.transpose()).inverse();
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    const double nrm = D.col(k).norm();
    if (nrm > 0.0) D.col(k) /= nrm;
  }
  return D;
}

BeamformingDesigner::BeamformingDesigner(BeamformingOptions options) : options_(std::move(options)) {
  options_.solver.validate();
}

PowerMinResult BeamformingDesigner::powermin(const NetworkInstance& inst,
                                             const std::vector<int>& active_set) {
  const std::vector<int> set = normalized_set(inst, active_set);
  const FamilyDims dims = active_dims(inst, set);
  const StuffingTemplate& tpl = cache_.get(ProblemFamily::PowerMin, dims);
  const ConeProgram prog = tpl.stuff(active_data(inst, set));

  PowerMinResult res;
  res.solve = solve(prog, options_.solver);
  res.status = classify(res.solve);
  if (res.status != DesignStatus::Solved) return res;

  const VariableLayout layout(ProblemFamily::PowerMin, dims);
  res.V = enforce_caps(inst, rotate_phases(inst.H, extract_beamformer(inst, set, layout, res.solve.x)));
  const Vec gp = group_power(res.V, inst.antennas);
  for (int l : set) res.transmit_power += gp[l] / inst.power.drain_efficiency[l];
  res.network_power_w = res.transmit_power + fronthaul_sum(inst, set);
  return res;
}

DesignStatus BeamformingDesigner::feasible(const NetworkInstance& inst,
                                           const std::vector<int>& active_set) {
  const std::vector<int> set = normalized_set(inst, active_set);
  const FamilyDims dims = active_dims(inst, set);
  const StuffingTemplate& tpl = cache_.get(ProblemFamily::FeasibilityCheck, dims);
  return classify(solve(tpl.stuff(active_data(inst, set)), options_.solver));
}

StageOneResult BeamformingDesigner::gsbf_stage1(const NetworkInstance& inst) {
  const std::vector<int> set = all_rrhs(inst);
  const FamilyDims dims = active_dims(inst, set);
  FamilyData data = active_data(inst, set);
  StageOneResult res;
  res.weights = inst.power.fronthaul_w.array().pow(options_.weight_exponent);
  data.group_weight = res.weights;

  const StuffingTemplate& tpl = cache_.get(ProblemFamily::GroupSparseStage1, dims);
  const SolveOutcome out = solve(tpl.stuff(data), options_.solver);
  res.status = classify(out);
  if (res.status != DesignStatus::Solved) return res;
  const VariableLayout layout(ProblemFamily::GroupSparseStage1, dims);
  res.V = extract_beamformer(inst, set, layout, out.x);
  res.group_norms = group_power(res.V, inst.antennas).cwiseSqrt();
  return res;
}

SelectionResult BeamformingDesigner::gsbf_select(const NetworkInstance& inst, const Vec& ordering) {
  const int L = inst.num_rrhs();
  if (ordering.size() != L) throw InvalidArgument("ordering needs one entry per RRH");
  std::vector<int> order = all_rrhs(inst);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ordering[a] < ordering[b]; });

  // Active set after switching off the `off` lowest-ranked RRHs.
  auto active_after = [&](int off) {
    std::vector<int> s(order.begin() + off, order.end());
    std::sort(s.begin(), s.end());
    return s;
  };

  SelectionResult res;
  auto probe = [&](int off) {
    ++res.probes;
    const DesignStatus st = feasible(inst, active_after(off));
    if (st == DesignStatus::Indeterminate) ++res.indeterminate_probes;
    return st == DesignStatus::Solved;
  };

  if (!probe(0)) {
    res.status = DesignStatus::Infeasible;
    return res;
  }
  // Invariant: switching off `lo` RRHs is feasible, `hi` is not (or not allowed).
  int lo = 0;
  int hi = L;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (probe(mid))
      lo = mid;
    else
      hi = mid;
  }
  res.status = DesignStatus::Solved;
  res.active_set = active_after(lo);
  return res;
}

GsbfResult BeamformingDesigner::gsbf(const NetworkInstance& inst) {
  GsbfResult res;
  const StageOneResult s1 = gsbf_stage1(inst);
  res.status = s1.status;
  if (s1.status != DesignStatus::Solved) return res;
  res.stage1_group_norms = s1.group_norms;
  res.ordering = s1.weights.cwiseProduct(s1.group_norms);

  const SelectionResult sel = gsbf_select(inst, res.ordering);
  res.feasibility_probe_count = sel.probes;
  res.indeterminate_probes = sel.indeterminate_probes;
  if (sel.status != DesignStatus::Solved) {
    res.status = sel.status;
    return res;
  }

  // Stage 3. Should the final set fail here, re-admit RRHs in descending order.
  std::vector<int> order = all_rrhs(inst);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return res.ordering[a] < res.ordering[b]; });
  int off = inst.num_rrhs() - static_cast<int>(sel.active_set.size());
  for (; off >= 0; --off) {
    std::vector<int> set(order.begin() + off, order.end());
    std::sort(set.begin(), set.end());
    const PowerMinResult pm = powermin(inst, set);
    if (pm.status == DesignStatus::Solved) {
      res.status = DesignStatus::Solved;
      res.active_set = set;
      res.V_final = pm.V;
      res.network_power_w = pm.network_power_w;
      return res;
    }
  }
  res.status = DesignStatus::Indeterminate;
  return res;
}

OracleResult BeamformingDesigner::exhaustive_oracle(const NetworkInstance& inst) {
  const int L = inst.num_rrhs();
  if (L > 12) throw InvalidArgument("exhaustive oracle is limited to L <= 12");
  // Visit sets by increasing fronthaul power; the fronthaul sum lower-bounds
  // the network power, so the scan stops once it reaches the incumbent.
  std::vector<std::pair<double, unsigned>> sets;
  for (unsigned mask = 1; mask < (1u << L); ++mask) {
    std::vector<int> s;
    for (int l = 0; l < L; ++l)
      if (mask & (1u << l)) s.push_back(l);
    sets.emplace_back(fronthaul_sum(inst, s), mask);
  }
  std::stable_sort(sets.begin(), sets.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  OracleResult res;
  res.status = DesignStatus::Infeasible;
  bool any_indeterminate = false;
  for (const auto& [fronthaul, mask] : sets) {
    if (res.status == DesignStatus::Solved && fronthaul >= res.network_power_w) break;
    std::vector<int> s;
    for (int l = 0; l < L; ++l)
      if (mask & (1u << l)) s.push_back(l);
    const PowerMinResult pm = powermin(inst, s);
    ++res.sets_evaluated;
    if (pm.status == DesignStatus::Indeterminate) any_indeterminate = true;
    if (pm.status != DesignStatus::Solved) continue;
    if (res.status != DesignStatus::Solved || pm.network_power_w < res.network_power_w) {
      res.status = DesignStatus::Solved;
      res.active_set = s;
      res.V = pm.V;
      res.network_power_w = pm.network_power_w;
    }
  }
  if (res.status != DesignStatus::Solved && any_indeterminate) res.status = DesignStatus::Indeterminate;
  return res;
}

namespace {

/// Bisection on a common SINR target. `probe(gamma, settings)` returns the
/// solver outcome and the beamformer it implies.
template <typename Probe>
MaxMinResult bisect_common_target(const NetworkInstance& inst, double tol, double ceiling,
                                  const SolverSettings& base, Probe&& probe) {
  if (!(tol > 0.0)) throw InvalidArgument("bisection tolerance must be positive");
  MaxMinResult res;
  res.V = CMat::Zero(inst.num_antennas(), inst.num_users());
  std::optional<WarmStart> warm;

  auto attempt = [&](double gamma) {
    ++res.probes;
    SolverSettings s = base;
    s.warm_start = warm;
    auto [out, V] = probe(gamma, s);
    if (out.status == SolveStatus::Optimal) {
      warm = WarmStart{out.x, out.y, out.s};
      res.certified_gamma = gamma;
      res.V = std::move(V);
      return true;
    }
    if (out.status != SolveStatus::PrimalInfeasible) ++res.indeterminate_probes;
    return false;
  };

  double lo = 0.0;
  double hi = std::max(sinr_upper_bound(inst), tol);
  bool bracketed = true;
  while (attempt(hi)) {
    lo = hi;
    if (hi * 2.0 > ceiling) {
      bracketed = false;
      break;
    }
    hi *= 2.0;
    ++res.bracket_expansions;
  }
  while (bracketed && hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (attempt(mid))
      lo = mid;
    else
      hi = mid;
  }
  res.V = enforce_caps(inst, rotate_phases(inst.H, res.V));
  if (inst.num_users() > 0) res.min_sinr = evaluate_sinr(inst.H, res.V, inst.noise_power).minCoeff();
  res.gamma = inst.num_users() > 0 ? std::min(res.certified_gamma, res.min_sinr) : res.certified_gamma;
  return res;
}

}  // namespace

MaxMinResult BeamformingDesigner::maxmin_rate(const NetworkInstance& inst, double tol) {
  const std::vector<int> set = all_rrhs(inst);
  const FamilyDims dims = active_dims(inst, set);
  const StuffingTemplate& tpl = cache_.get(ProblemFamily::MaxMinProbe, dims);
  const VariableLayout layout(ProblemFamily::MaxMinProbe, dims);
  FamilyData data = active_data(inst, set);

  auto probe = [&](double gamma, const SolverSettings& s) {
    data.target_sinr.setConstant(gamma);
    SolveOutcome out = solve(tpl.stuff(data), s);
    CMat V;
    if (out.status == SolveStatus::Optimal) V = extract_beamformer(inst, set, layout, out.x);
    return std::make_pair(std::move(out), std::move(V));
  };
  return bisect_common_target(inst, tol, options_.gamma_ceiling, options_.solver, probe);
}

MaxMinResult BeamformingDesigner::fixed_direction_maxmin(const NetworkInstance& inst,
                                                         FixedDirection dir, double tol) {
  const int K = inst.num_users();
  const int L = inst.num_rrhs();
  const CMat D = beam_directions(inst.H, dir);
  const Mat gain = (inst.H.conjugate() * D).cwiseAbs();  // |h_k^H d_j|
  Mat share(L, K);                                     // ||d_{k,l}||
  for (int l = 0; l < L; ++l)
    share.row(l) = D.middleRows(inst.antenna_offset(l), inst.antennas[l]).colwise().norm();

  // Variables: per-user amplitudes a_k, v_k = a_k d_k.
  ConeSpec cone;
  cone.soc_dims.assign(K, K + 1);
  cone.soc_dims.insert(cone.soc_dims.end(), L, K + 1);
  const int m = cone.total_dim();

  auto probe = [&](double gamma, const SolverSettings& s) {
    std::vector<Triplet> trips;
    ConeProgram prog;
    prog.b = Vec::Zero(m);
    prog.c = Vec::Zero(K);
    prog.cone = cone;
    int row = 0;
    for (int k = 0; k < K; ++k) {
      trips.push_back({row++, k, -gain(k, k) / std::sqrt(gamma)});
      for (int j = 0; j < K; ++j)
        if (j != k) trips.push_back({row++, j, -gain(k, j)});
      prog.b[row++] = std::sqrt(inst.noise_power[k]);
    }
    for (int l = 0; l < L; ++l) {
      prog.b[row++] = std::sqrt(inst.power.max_tx_w[l]);
      for (int k = 0; k < K; ++k) trips.push_back({row++, k, -share(l, k)});
    }
    prog.A = CscMatrix::from_triplets(m, K, trips, /*keep_zeros=*/true);
    SolveOutcome out = solve(prog, s);
    CMat V;
    if (out.status == SolveStatus::Optimal) V = D * out.x.cwiseMax(0.0).asDiagonal();
    return std::make_pair(std::move(out), std::move(V));
  };
  return bisect_common_target(inst, tol, options_.gamma_ceiling, options_.solver, probe);
}

}  // namespace cran
