#include "cran/csi.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cran/errors.hpp"
#include "cran/stuffing.hpp"

namespace cran {

FadingProcess simulate_fading(const Vec& g, double eta, int length, Rng& rng) {
  if (!(eta >= 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in [0, 1)");
  if (length < 1) throw InvalidArgument("fading process needs at least one block");
  if ((g.array() < 0.0).any()) throw InvalidArgument("large-scale variances must be nonnegative");
  FadingProcess proc;
  proc.eta = eta;
  proc.g = g;
  const double innovation = std::sqrt(1.0 - eta * eta);
  const Eigen::Index d = g.size();
  for (int i = 0; i < length; ++i) {
    CVec z(d);
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.complex_normal(g[j]);
    proc.blocks.push_back(i == 0 ? z : CVec(eta * proc.blocks.back() + innovation * z));
  }
  return proc;
}

TrainingObservation observe(const CVec& h, const Vec& g, int pilots, double noise_variance,
                            Rng& rng) {
  if (pilots < 1) throw InvalidArgument("pilot length must be positive");
  if (!(noise_variance > 0.0)) throw InvalidArgument("noise variance must be positive");
  const Eigen::Index d = h.size();
  TrainingObservation obs;
  obs.X.resize(pilots, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (int i = 0; i < pilots; ++i) obs.X(i, j) = rng.complex_normal(1.0 / pilots);
  obs.y = obs.X * h;
  for (int i = 0; i < pilots; ++i) obs.y[i] += rng.complex_normal(noise_variance);
  obs.noise_variance = noise_variance;
  obs.snr_db = linear_to_db(g.sum() / pilots / noise_variance);
  return obs;
}

std::vector<int> select_relevant_links(const Vec& g, int budget) {
  const int d = static_cast<int>(g.size());
  if (budget < 0 || budget > d) throw InvalidArgument("link budget must lie in [0, d]");
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return g[a] > g[b]; });
  idx.resize(budget);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Vec link_weights(const Vec& g) {
  if (g.size() == 0) return g;
  const double floor = 1e-6 * g.maxCoeff();
  if (!(floor > 0.0)) throw InvalidArgument("link weights need a positive large-scale coefficient");
  return g.cwiseMax(floor).cwiseInverse();
}

void EstimationProblem::validate() const {
  const Eigen::Index d = X.cols();
  if (y.size() != X.rows()) throw InvalidArgument("observation length must match the pilot count");
  if (anchor.size() != d || weights.size() != d)
    throw InvalidArgument("anchor and weights need one entry per channel coefficient");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw InvalidArgument("regularization weights must be nonnegative");
  if ((weights.array() <= 0.0).any()) throw InvalidArgument("link weights must be positive");
}

double EstimationProblem::objective(const CVec& h) const {
  return 0.5 * (y - X * h).squaredNorm() + lambda1 * weights.dot(h.cwiseAbs()) +
         lambda2 * (h - anchor).squaredNorm();
}

CVec soft_threshold(const CVec& z, const Vec& threshold) {
  CVec out(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double mag = std::abs(z[j]);
    out[j] = mag > threshold[j] ? z[j] * (1.0 - threshold[j] / mag) : std::complex<double>(0.0);
  }
  return out;
}

EstimateResult estimate_block(const EstimationProblem& p, const EstimateSettings& settings) {
  p.validate();
  const double sigma = p.X.size() ? Eigen::BDCSVD<CMat>(p.X).singularValues()(0) : 0.0;
  const double lip = sigma * sigma + 2.0 * p.lambda2;
  EstimateResult res;
  // The anchor only enters the objective through lambda2.
  res.h = p.lambda2 > 0.0 ? p.anchor : CVec::Zero(p.dim());
  res.objective = p.objective(res.h);
  if (!(lip > 0.0)) {
    res.converged = true;
    return res;
  }
  const double step = 1.0 / lip;
  const Vec thresholds = step * p.lambda1 * p.weights;
  auto prox_grad = [&](const CVec& at) {
    const CVec grad = p.X.adjoint() * (p.X * at - p.y) + 2.0 * p.lambda2 * (at - p.anchor);
    return soft_threshold(at - step * grad, thresholds);
  };

  CVec x = res.h;
  CVec z = x;
  double fx = res.objective;
  double t = 1.0;
  for (int it = 1; it <= settings.max_iters; ++it) {
    res.iterations = it;
    CVec next = prox_grad(z);
    double fnext = p.objective(next);
    if (fnext > fx) {
      // Momentum overshot: restart from x with a plain proximal step.
      ++res.restarts;
      t = 1.0;
      next = prox_grad(x);
      fnext = p.objective(next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double change = (next - x).norm();
    const double scale = std::max(next.norm(), x.norm());
    z = next + ((t - 1.0) / t_next) * (next - x);
    if (fnext <= fx) {
      x = std::move(next);
      fx = fnext;
    }
    t = t_next;
    if (change <= settings.rel_tol * scale || scale == 0.0) {
      res.converged = true;
      break;
    }
  }
  res.h = std::move(x);
  res.objective = fx;
  return res;
}

CVec least_squares_estimate(const CVec& y, const CMat& X) {
  if (y.size() != X.rows()) throw InvalidArgument("observation length must match the pilot count");
  return X.completeOrthogonalDecomposition().solve(y);
}

ConeProgram estimation_cone_program(const EstimationProblem& p) {
  p.validate();
  const int d = p.dim();
  const int m = static_cast<int>(p.X.rows());
  const bool temporal = p.lambda2 > 0.0;
  const int col_t = 2 * d;
  const int col_u = 3 * d;
  const int col_q = 3 * d + 1;
  const int n = 3 * d + 1 + (temporal ? 1 : 0);

  ConeProgram prog;
  prog.cone.soc_dims.push_back(2 * m + 2);
  prog.cone.soc_dims.insert(prog.cone.soc_dims.end(), d, 3);
  if (temporal) prog.cone.soc_dims.push_back(2 * d + 2);
  const int rows = prog.cone.total_dim();
  prog.b = Vec::Zero(rows);
  prog.c = Vec::Zero(n);
  prog.c.segment(col_t, d) = p.lambda1 * p.weights;
  prog.c[col_u] = 1.0;
  if (temporal) prog.c[col_q] = 2.0 * p.lambda2;

  std::vector<Triplet> trips;
  int row = 0;
  // (1/2)||y - X h||^2 <= u  <=>  ||(y - X h, u - 1/2)|| <= u + 1/2.
  trips.push_back({row, col_u, -1.0});
  prog.b[row++] = 0.5;
  for (int i = 0; i < m; ++i, ++row) {
    prog.b[row] = p.y[i].real();
    for (int j = 0; j < d; ++j) {
      trips.push_back({row, j, p.X(i, j).real()});
      trips.push_back({row, d + j, -p.X(i, j).imag()});
    }
  }
  for (int i = 0; i < m; ++i, ++row) {
    prog.b[row] = p.y[i].imag();
    for (int j = 0; j < d; ++j) {
      trips.push_back({row, j, p.X(i, j).imag()});
      trips.push_back({row, d + j, p.X(i, j).real()});
    }
  }
  trips.push_back({row, col_u, -1.0});
  prog.b[row++] = -0.5;
  // |h_j| <= t_j.
  for (int j = 0; j < d; ++j) {
    trips.push_back({row++, col_t + j, -1.0});
    trips.push_back({row++, j, -1.0});
    trips.push_back({row++, d + j, -1.0});
  }
  // ||h - anchor||^2 <= 2 q.
  if (temporal) {
    trips.push_back({row, col_q, -1.0});
    prog.b[row++] = 0.5;
    for (int j = 0; j < d; ++j) {
      trips.push_back({row, j, -1.0});
      prog.b[row++] = -p.anchor[j].real();
    }
    for (int j = 0; j < d; ++j) {
      trips.push_back({row, d + j, -1.0});
      prog.b[row++] = -p.anchor[j].imag();
    }
    trips.push_back({row, col_q, -1.0});
    prog.b[row++] = -0.5;
  }
  prog.A = CscMatrix::from_triplets(rows, n, trips);
  return prog;
}

ConeEstimate estimate_with_cone_solver(const EstimationProblem& p, const SolverSettings& settings) {
  const ConeProgram prog = estimation_cone_program(p);
  const SolveOutcome out = solve(prog, settings);
  ConeEstimate res;
  res.status = out.status;
  res.iterations = out.iterations;
  const int d = p.dim();
  res.h.resize(d);
  for (int j = 0; j < d; ++j) res.h[j] = {out.x[j], out.x[d + j]};
  res.objective = p.objective(res.h);
  return res;
}

Vec sparse_profile(int dim, double strong_fraction, double weak_level, Rng& rng) {
  if (dim < 1) throw InvalidArgument("profile dimension must be positive");
  if (!(strong_fraction > 0.0 && strong_fraction <= 1.0))
    throw InvalidArgument("strong fraction must lie in (0, 1]");
  const int strong = std::max(1, static_cast<int>(std::lround(strong_fraction * dim)));
  std::vector<int> idx(dim);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  Vec g(dim);
  double peak = 0.0;
  for (int i = 0; i < strong; ++i) {
    g[idx[i]] = rng.uniform(0.5, 1.0);
    peak = std::max(peak, g[idx[i]]);
  }
  for (int i = strong; i < dim; ++i) g[idx[i]] = rng.uniform(0.1, 1.0) * weak_level * peak;
  return g;
}

double default_lambda2(double noise_variance, double eta, const Vec& g) {
  return noise_variance / (2.0 * (1.0 - eta * eta) * g.mean());
}

std::string to_string(EstimationRegime r) {
  switch (r) {
    case EstimationRegime::LeastSquares: return "least_squares";
    case EstimationRegime::Spatial: return "spatial";
    case EstimationRegime::SpatialTemporal: return "spatial_temporal";
  }
  return "unknown";
}

EstimationTrial run_estimation_trial(const EstimationExperimentConfig& cfg, std::uint64_t seed,
                                     EstimationRegime regime, double lambda1, double lambda2_scale) {
  if (cfg.blocks < 2) throw InvalidArgument("estimation experiment needs at least two blocks");
  const Rng master = Rng::stream(seed, "chanest");
  Rng profile_rng = master.substream("profile");
  Rng fading_rng = master.substream("fading");
  const Vec g = sparse_profile(cfg.dim, cfg.strong_fraction, cfg.weak_level, profile_rng);
  const FadingProcess proc = simulate_fading(g, cfg.eta, cfg.blocks, fading_rng);
  const int pilots = std::max(1, static_cast<int>(std::lround(cfg.pilot_ratio * cfg.dim)));
  const double noise = g.sum() / pilots / db_to_linear(cfg.snr_db);
  const Vec weights = link_weights(g);

  EstimationTrial trial;
  trial.seed = seed;
  trial.regime = regime;
  if (regime != EstimationRegime::LeastSquares) trial.lambda1 = lambda1 * noise;
  if (regime == EstimationRegime::SpatialTemporal)
    trial.lambda2 = lambda2_scale * default_lambda2(noise, cfg.eta, g);

  CVec previous = CVec::Zero(cfg.dim);
  double total = 0.0;
  for (int i = 0; i < cfg.blocks; ++i) {
    Rng pilot_rng = master.substream("pilots", static_cast<std::uint64_t>(i));
    const TrainingObservation obs = observe(proc.blocks[i], g, pilots, noise, pilot_rng);
    CVec estimate;
    if (regime == EstimationRegime::LeastSquares) {
      estimate = least_squares_estimate(obs.y, obs.X);
    } else {
      EstimationProblem p;
      p.y = obs.y;
      p.X = obs.X;
      p.anchor = regime == EstimationRegime::SpatialTemporal ? CVec(cfg.eta * previous)
                                                             : CVec(CVec::Zero(cfg.dim));
      p.lambda1 = trial.lambda1;
      p.lambda2 = trial.lambda2;
      p.weights = weights;
      EstimateResult r = estimate_block(p);
      if (!r.converged) ++trial.unconverged_blocks;
      estimate = std::move(r.h);
    }
    if (i > 0) total += (estimate - proc.blocks[i]).squaredNorm();
    previous = std::move(estimate);
  }
  trial.mse = total / (cfg.blocks - 1);
  return trial;
}

double EstimationExperimentResult::mean_mse(EstimationRegime r) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& t : trials)
    if (t.regime == r) {
      sum += t.mse;
      ++n;
    }
  return n ? sum / n : 0.0;
}

EstimationExperimentResult run_estimation_experiment(const EstimationExperimentConfig& cfg,
                                                     const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw InvalidArgument("estimation experiment needs at least one seed");
  if (cfg.lambda1_grid.empty() || cfg.lambda2_scale_grid.empty())
    throw InvalidArgument("regularization grids must be nonempty");
  if (cfg.tuning_seeds < 1) throw InvalidArgument("need at least one tuning seed");

  // Tuning trajectories come from their own seed family.
  std::vector<std::uint64_t> tuning;
  for (int i = 0; i < cfg.tuning_seeds; ++i)
    tuning.push_back(mix64(fnv1a64("chanest-tuning") + static_cast<std::uint64_t>(i)));
  auto tuning_mse = [&](EstimationRegime regime, double lambda1, double lambda2_scale) {
    double mse = 0.0;
    for (std::uint64_t s : tuning) mse += run_estimation_trial(cfg, s, regime, lambda1, lambda2_scale).mse;
    return mse;
  };

  EstimationExperimentResult res;
  double best = std::numeric_limits<double>::infinity();
  for (double l1 : cfg.lambda1_grid) {
    const double mse = tuning_mse(EstimationRegime::Spatial, l1, 0.0);
    if (mse < best) {
      best = mse;
      res.lambda1_spatial = l1;
    }
  }
  best = std::numeric_limits<double>::infinity();
  for (double l2 : cfg.lambda2_scale_grid)
    for (double l1 : cfg.lambda1_grid) {
      const double mse = tuning_mse(EstimationRegime::SpatialTemporal, l1, l2);
      if (mse < best) {
        best = mse;
        res.lambda1_spatial_temporal = l1;
        res.lambda2_scale = l2;
      }
    }
  for (std::uint64_t s : seeds) {
    res.trials.push_back(run_estimation_trial(cfg, s, EstimationRegime::LeastSquares, 0.0, 0.0));
    res.trials.push_back(
        run_estimation_trial(cfg, s, EstimationRegime::Spatial, res.lambda1_spatial, 0.0));
    res.trials.push_back(run_estimation_trial(cfg, s, EstimationRegime::SpatialTemporal,
                                              res.lambda1_spatial_temporal, res.lambda2_scale));
  }
  return res;
}

void MixedCsi::validate() const {
  const Eigen::Index d = static_cast<Eigen::Index>(users) * antennas;
  if (users < 0 || antennas < 1) throw InvalidArgument("mixed CSI needs K >= 0 and N >= 1");
  if (g.size() != d || estimate.size() != d || error_variance.size() != d)
    throw InvalidArgument("mixed CSI vectors need K * N entries");
  for (int j : relevant)
    if (j < 0 || j >= d) throw InvalidArgument("relevant link index out of range");
  if ((g.array() < 0.0).any() || (error_variance.array() < 0.0).any())
    throw InvalidArgument("variances must be nonnegative");
}

MixedCsi make_mixed_csi(const NetworkInstance& inst, int budget, double error_fraction, Rng& rng) {
  if (error_fraction < 0.0) throw InvalidArgument("error fraction must be nonnegative");
  MixedCsi csi;
  csi.users = inst.num_users();
  csi.antennas = inst.num_antennas();
  const int d = csi.users * csi.antennas;
  csi.g.resize(d);
  for (int k = 0; k < csi.users; ++k)
    for (int l = 0; l < inst.num_rrhs(); ++l)
      for (int a = 0; a < inst.antennas[l]; ++a)
        csi.g[k * csi.antennas + inst.antenna_offset(l) + a] = inst.large_scale(k, l);
  csi.relevant = select_relevant_links(csi.g, budget);
  csi.estimate = CVec::Zero(d);
  csi.error_variance = Vec::Zero(d);
  for (int j : csi.relevant) {
    const int k = j / csi.antennas;
    const int n = j % csi.antennas;
    csi.error_variance[j] = error_fraction * csi.g[j];
    csi.estimate[j] = inst.H(k, n) + rng.complex_normal(csi.error_variance[j]);
  }
  return csi;
}

CMat sample_mixed_channel(const MixedCsi& csi, Rng& rng) {
  std::vector<bool> relevant(csi.g.size(), false);
  for (int j : csi.relevant) relevant[j] = true;
  CMat H(csi.users, csi.antennas);
  for (int k = 0; k < csi.users; ++k)
    for (int n = 0; n < csi.antennas; ++n) {
      const int j = k * csi.antennas + n;
      H(k, n) = relevant[j] ? csi.estimate[j] + rng.complex_normal(csi.error_variance[j])
                            : rng.complex_normal(csi.g[j]);
    }
  return H;
}

int scenario_count(int num_variables, double epsilon, double beta) {
  if (num_variables < 1) throw InvalidArgument("scenario bound needs at least one variable");
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(beta > 0.0 && beta < 1.0))
    throw InvalidArgument("epsilon and beta must lie in (0, 1)");
  const double log_eps = std::log(epsilon);
  const double log_keep = std::log1p(-epsilon);
  auto tail = [&](int M) {
    double sum = 0.0;
    for (int i = 0; i < num_variables && i <= M; ++i) {
      const double log_term = std::lgamma(M + 1.0) - std::lgamma(i + 1.0) - std::lgamma(M - i + 1.0) +
                              i * log_eps + (M - i) * log_keep;
      sum += std::exp(log_term);
    }
    return sum;
  };
  int M = num_variables;
  while (tail(M) > beta) ++M;
  return M;
}

ScenarioResult scenario_scb(const MixedCsi& csi, int scenarios, const NetworkInstance& inst,
                            const Rng& rng, const ScenarioOptions& options) {
  csi.validate();
  if (scenarios < 1) throw InvalidArgument("scenario count must be positive");
  if (csi.users != inst.num_users() || csi.antennas != inst.num_antennas())
    throw InvalidArgument("mixed CSI does not match the instance dimensions");

  std::vector<int> all(inst.num_rrhs());
  std::iota(all.begin(), all.end(), 0);
  const FamilyDims dims = active_dims(inst, all, scenarios);
  FamilyData data = active_data(inst, all);
  data.channels.clear();
  for (int i = 0; i < scenarios; ++i) {
    Rng r = rng.substream("scenario", static_cast<std::uint64_t>(i));
    data.channels.push_back(sample_mixed_channel(csi, r));
  }

  ScenarioResult res;
  res.scenarios = scenarios;
  const StuffingTemplate tpl = StuffingTemplate::build(ProblemFamily::ScenarioScb, dims);
  res.solve = solve(tpl.stuff(data), options.solver);
  switch (res.solve.status) {
    case SolveStatus::Optimal: res.status = DesignStatus::Solved; break;
    case SolveStatus::PrimalInfeasible: res.status = DesignStatus::Infeasible; break;
    default: res.status = DesignStatus::Indeterminate; break;
  }
  if (res.status != DesignStatus::Solved) return res;

  const VariableLayout layout(ProblemFamily::ScenarioScb, dims);
  res.V = enforce_caps(inst, extract_beamformer(inst, all, layout, res.solve.x));
  const Vec gp = group_power(res.V, inst.antennas);
  res.transmit_power = gp.cwiseQuotient(inst.power.drain_efficiency).sum();

  res.worst_sampled_slack = std::numeric_limits<double>::infinity();
  for (const CMat& H : data.channels)
    res.worst_sampled_slack = std::min(
        res.worst_sampled_slack, (evaluate_sinr(H, res.V, inst.noise_power) - inst.target_sinr).minCoeff());

  for (int i = 0; i < options.evaluation_samples; ++i) {
    Rng r = rng.substream("evaluation", static_cast<std::uint64_t>(i));
    const Vec sinr = evaluate_sinr(sample_mixed_channel(csi, r), res.V, inst.noise_power);
    if ((sinr.array() < inst.target_sinr.array()).any()) ++res.outage_samples;
  }
  if (options.evaluation_samples > 0)
    res.empirical_outage = static_cast<double>(res.outage_samples) / options.evaluation_samples;
  return res;
}

}  // namespace cran
