#pragma once

#include <cstdint>
#include <vector>

#include "cran/beamforming.hpp"
#include "cran/cone_program.hpp"
#include "cran/network.hpp"
#include "cran/rng.hpp"

namespace cran {

/// h_i = eta h_{i-1} + sqrt(1 - eta^2) z_i, z_i ~ CN(0, diag(g)), h_1 ~ CN(0, diag(g)).
struct FadingProcess {
  double eta = 0.99;
  Vec g;
  std::vector<CVec> blocks;

  int length() const { return static_cast<int>(blocks.size()); }
};

FadingProcess simulate_fading(const Vec& g, double eta, int length, Rng& rng);

struct TrainingObservation {
  CMat X;  // m x d pilots
  CVec y;  // X h + n
  double noise_variance = 0.0;
  double snr_db = 0.0;  // E|x^T h|^2 / noise_variance per sample
};

/// Pilots with i.i.d. CN(0, 1/m) entries.
TrainingObservation observe(const CVec& h, const Vec& g, int pilots, double noise_variance, Rng& rng);

/// Indices of the `budget` largest entries of g; ties go to the lower index.
/// Returned in ascending index order.
std::vector<int> select_relevant_links(const Vec& g, int budget);

/// w_j = 1 / max(g_j, 1e-6 max g).
Vec link_weights(const Vec& g);

/// Minimizer of (1/2)||y - X h||^2 + lambda1 sum_j w_j |h_j| + lambda2 ||h - anchor||^2.
struct EstimationProblem {
  CVec y;
  CMat X;
  CVec anchor;  // eta * previous estimate; zero on the first block
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Vec weights;

  int dim() const { return static_cast<int>(X.cols()); }
  double objective(const CVec& h) const;
  void validate() const;
};

struct EstimateSettings {
  int max_iters = 5000;
  double rel_tol = 1e-8;
};

struct EstimateResult {
  CVec h;
  double objective = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

/// h_j <- h_j max(0, 1 - threshold_j / |h_j|).
CVec soft_threshold(const CVec& z, const Vec& threshold);

/// Accelerated proximal gradient with function-value restart.
EstimateResult estimate_block(const EstimationProblem& p, const EstimateSettings& settings = {});

/// Minimum-norm least squares X^+ y.
CVec least_squares_estimate(const CVec& y, const CMat& X);

/// Second-order cone form of the estimation problem over
/// x = (Re h, Im h, t_1..t_d, u, q): c^T x equals the objective at the optimum.
ConeProgram estimation_cone_program(const EstimationProblem& p);

struct ConeEstimate {
  SolveStatus status = SolveStatus::MaxItersReached;
  CVec h;
  double objective = 0.0;  // p.objective(h)
  int iterations = 0;
};

ConeEstimate estimate_with_cone_solver(const EstimationProblem& p, const SolverSettings& settings);

struct EstimationExperimentConfig {
  int dim = 100;
  double pilot_ratio = 0.5;       // m = round(pilot_ratio * dim)
  double eta = 0.99;
  int blocks = 10;
  double snr_db = 20.0;
  double strong_fraction = 0.2;   // share of links at full strength
  double weak_level = 0.01;       // weak links have g <= weak_level * max g
  // lambda1 candidates as multiples of the noise variance.
  std::vector<double> lambda1_grid = {0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0};
  // lambda2 candidates as multiples of default_lambda2.
  std::vector<double> lambda2_scale_grid = {0.01, 0.03, 0.1, 0.3, 1.0};
  int tuning_seeds = 5;
};

/// Large-scale profile: a `strong_fraction` share of links with g ~ U[0.5, 1],
/// the rest with g ~ U[0.1, 1] * weak_level.
Vec sparse_profile(int dim, double strong_fraction, double weak_level, Rng& rng);

/// Noise-based temporal weight sigma^2 / (2 (1 - eta^2) mean(g)).
double default_lambda2(double noise_variance, double eta, const Vec& g);

enum class EstimationRegime { LeastSquares, Spatial, SpatialTemporal };
std::string to_string(EstimationRegime r);

struct EstimationTrial {
  std::uint64_t seed = 0;
  EstimationRegime regime = EstimationRegime::LeastSquares;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mse = 0.0;  // mean ||h_hat - h||^2 over blocks 2..length
  int unconverged_blocks = 0;
};

/// One trajectory under one regime; lambda1 and lambda2_scale are grid multipliers.
EstimationTrial run_estimation_trial(const EstimationExperimentConfig& cfg, std::uint64_t seed,
                                     EstimationRegime regime, double lambda1, double lambda2_scale);

struct EstimationExperimentResult {
  double lambda1_spatial = 0.0;  // grid multipliers picked by tuning
  double lambda1_spatial_temporal = 0.0;
  double lambda2_scale = 0.0;
  std::vector<EstimationTrial> trials;  // seed-major, regime order A, B, C

  double mean_mse(EstimationRegime r) const;
};

/// Picks lambda1 (and lambda2 for the temporal regime) on dedicated tuning
/// seeds by grid search, then runs every seed.
EstimationExperimentResult run_estimation_experiment(const EstimationExperimentConfig& cfg,
                                                     const std::vector<std::uint64_t>& seeds);

/// Links are indexed j = k * N + n over the K x N channel matrix.
struct MixedCsi {
  int users = 0;
  int antennas = 0;
  std::vector<int> relevant;  // Omega
  CVec estimate;              // h_hat on Omega, zero elsewhere
  Vec error_variance;         // on Omega
  Vec g;                      // statistical CSI, every link

  void validate() const;
};

/// Estimates the `budget` strongest links of `inst` with per-link error
/// variance error_fraction * g_j; the rest keep statistical CSI only.
MixedCsi make_mixed_csi(const NetworkInstance& inst, int budget, double error_fraction, Rng& rng);

/// One channel draw from the mixed-CSI distribution, K x N.
CMat sample_mixed_channel(const MixedCsi& csi, Rng& rng);

/// Smallest M with sum_{i<n} C(M,i) eps^i (1-eps)^(M-i) <= beta.
int scenario_count(int num_variables, double epsilon, double beta = 0.01);

struct ScenarioResult {
  DesignStatus status = DesignStatus::Indeterminate;
  int scenarios = 0;
  CMat V;
  double transmit_power = 0.0;  // sum_l ||v~_l||^2 / eta_l
  double worst_sampled_slack = 0.0;  // min over samples and users of SINR - gamma
  double empirical_outage = 0.0;
  int outage_samples = 0;
  SolveOutcome solve;
};

struct ScenarioOptions {
  int evaluation_samples = 10000;
  SolverSettings solver = BeamformingOptions::default_solver();
};

/// Scenario program over M draws (draw i from substream("scenario", i)),
/// then empirical outage over fresh draws (substream("evaluation", i)).
ScenarioResult scenario_scb(const MixedCsi& csi, int scenarios, const NetworkInstance& inst,
                            const Rng& rng, const ScenarioOptions& options = {});

}  // namespace cran
