// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cran/beamforming.hpp"
#include "cran/cone.hpp"
#include "cran/csi.hpp"
#include "cran/harness.hpp"
#include "cran/solver.hpp"
#include "cran/stuffing.hpp"
#include "support/random_programs.hpp"

using namespace cran;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

std::string config_path(const std::string& name) {
  return std::string(CRAN_SOURCE_DIR) + "/configs/acceptance/" + name + ".json";
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), {});
}

/// First runs of the criterion 5-9 configs, kept for the determinism check.
struct RunLog {
  fs::path work;
  std::map<std::string, std::string> first_raw;

  RunResult run(const std::string& name) {
    RunOptions o;
    o.out_dir = (work / name / "run1").string();
    o.threads = 1;
    RunResult r = run_experiment(load_config(config_path(name)), o);
    first_raw[name] = r.raw_path;
    return r;
  }
};

std::vector<int> all_of(int L) {
  std::vector<int> s(L);
  for (int l = 0; l < L; ++l) s[l] = l;
  return s;
}

// 1. Cone projections.
Verdict projections() {
  Rng rng = Rng::stream(1, "acceptance-cones");
  std::vector<std::pair<std::string, ConeSpec>> cones;
  ConeSpec z;
  z.zero_dim = 6;
  cones.push_back({"zero", z});
  ConeSpec p;
  p.nonneg_dim = 6;
  cones.push_back({"nonneg", p});
  for (int q : {1, 2, 3, 8, 25}) {
    ConeSpec s;
    s.soc_dims = {q};
    cones.push_back({"soc" + std::to_string(q), s});
  }
  double worst = 0.0;
  int failures = 0;
  for (const auto& [name, k] : cones) {
    const int n = k.total_dim();
    for (int t = 0; t < 10000; ++t) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = rng.normal();
      const Vec px = project_cone(x, k);
      const Vec dx = project_dual_cone(-x, k);
      const double moreau = (x - (px - dx)).lpNorm<Eigen::Infinity>();
      const double idem = (project_cone(px, k) - px).lpNorm<Eigen::Infinity>();
      const double dual_idem = (project_dual_cone(dx, k) - dx).lpNorm<Eigen::Infinity>();
      const double member = std::max(cone_distance(px, k), cone_distance(dx, k, true));
      const double e = std::max({moreau, idem, dual_idem, member});
      worst = std::max(worst, e);
      if (e > 1e-12) ++failures;
    }
  }
  return {failures == 0, "worst deviation " + fmt(worst) + " over " + std::to_string(cones.size()) +
                             " cone types x 1e4 vectors"};
}

// 2. Solver optimality against the tight-tolerance self-oracle.
Verdict solver_optimality() {
  Rng rng = Rng::stream(2, "acceptance-socp");
  double worst_rel = 0.0;
  double worst_res = 0.0;
  int bad = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 10 + static_cast<int>(rng.uniform(0.0, 51.0));
    ConeSpec cone;
    cone.zero_dim = static_cast<int>(rng.uniform(0.0, 3.0));
    cone.nonneg_dim = static_cast<int>(rng.uniform(0.0, 10.0));
    const int blocks = 2 + static_cast<int>(rng.uniform(0.0, 6.0));
    for (int b = 0; b < blocks; ++b) cone.soc_dims.push_back(2 + static_cast<int>(rng.uniform(0.0, 10.0)));
    while (cone.total_dim() < n) cone.soc_dims.push_back(5);
    const auto planted = testing::planted_program(rng, n, cone);
    const SolveOutcome fast = solve(planted.prog);
    SolverSettings tight;
    tight.eps_primal = tight.eps_dual = tight.eps_gap = 1e-9;
    tight.max_iters = 1000000;
    const SolveOutcome ref = solve(planted.prog, tight);
    if (fast.status != SolveStatus::Optimal || ref.status != SolveStatus::Optimal) {
      ++bad;
      continue;
    }
    const double rel = std::abs(fast.objective - ref.objective) / std::max(1.0, std::abs(ref.objective));
    worst_rel = std::max(worst_rel, rel);
    worst_res = std::max(worst_res, fast.residuals.max());
    if (rel > 5e-3 || fast.residuals.max() > 1e-4) ++bad;
  }
  return {bad == 0, "worst relative gap " + fmt(worst_rel) + ", worst KKT residual " + fmt(worst_res) + ", " +
                        std::to_string(bad) + " of 50 out of tolerance"};
}

// 3. Infeasibility certificates on beamforming instances.
Verdict certificates() {
  int bad = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NetworkConfig c;
    c.num_rrhs = 4;
    c.antennas_per_rrh = 2;
    c.num_users = 4;
    NetworkInstance inst = make_instance(c, seed);
    inst.target_sinr.setConstant(4.0 * sinr_upper_bound(inst));
    const std::vector<int> set = all_of(inst.num_rrhs());
    const ConeProgram prog = StuffingTemplate::build(ProblemFamily::PowerMin, active_dims(inst, set))
                                 .stuff(active_data(inst, set));
    SolverSettings s;
    s.eps_primal = s.eps_dual = s.eps_gap = 1e-6;
    s.max_iters = 100000;
    const SolveOutcome o = solve(prog, s);
    if (o.status != SolveStatus::PrimalInfeasible || !o.certificate) {
      ++bad;
      continue;
    }
    const Vec& y = *o.certificate;
    const double ratio = prog.A.multiply_transpose(y).lpNorm<Eigen::Infinity>() / y.lpNorm<Eigen::Infinity>();
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 1e-6 || !(prog.b.dot(y) < 0.0)) ++bad;
  }
  return {bad == 0, "worst |A^T y|/|y| " + fmt(worst_ratio) + ", " + std::to_string(bad) + " of 20 failed"};
}

// 4. Matrix stuffing equality and modeling speed.
Verdict stuffing() {
  int unequal = 0;
  Rng rng = Rng::stream(4, "acceptance-stuffing");
  const std::vector<ProblemFamily> families = {ProblemFamily::PowerMin, ProblemFamily::GroupSparseStage1,
                                               ProblemFamily::FeasibilityCheck, ProblemFamily::MaxMinProbe,
                                               ProblemFamily::ScenarioScb};
  for (int t = 0; t < 50; ++t) {
    const ProblemFamily f = families[t % families.size()];
    NetworkConfig c;
    c.num_rrhs = 2 + t % 4;
    c.antennas_per_rrh = 1 + t % 3;
    c.num_users = 1 + t % 5;
    c.target_sinr_db = rng.uniform(-5.0, 10.0);
    const NetworkInstance inst = make_instance(c, 1000 + t);
    const std::vector<int> set = all_of(inst.num_rrhs());
    const int scenarios = f == ProblemFamily::ScenarioScb ? 3 : 1;
    const FamilyDims dims = active_dims(inst, set, scenarios);
    FamilyData data = active_data(inst, set);
    if (f == ProblemFamily::GroupSparseStage1) data.group_weight = Vec::Constant(inst.num_rrhs(), 1.5);
    for (int i = 1; i < scenarios; ++i) data.channels.push_back(data.channels.front() * rng.uniform(0.5, 2.0));
    const ConeProgram stuffed = StuffingTemplate::build(f, dims).stuff(data);
    if (!(stuffed == canonicalize_reference(f, dims, data))) ++unequal;
  }

  ExperimentConfig bench;
  bench.experiment = Experiment::BenchStuffing;
  bench.bench.sizes = {50};
  bench.bench.stuffs = 100;
  bench.bench.warmup = 3;
  bench.bench.repetitions = 3;
  bench.bench.solve = false;
  RunOptions o;
  o.write_files = false;
  const RunResult r = run_experiment(bench, o);
  const double speedup = r.raw.number(0, "speedup");
  const bool identical = r.raw.number(0, "identical") == 1.0;
  return {unequal == 0 && identical && speedup >= 10.0,
          std::to_string(50 - unequal) + "/50 bitwise equal, L=K=50 amortized speedup " + fmt(speedup, 3) + "x"};
}

// 5. GSBF against the exhaustive oracle.
Verdict gsbf_oracle(RunLog& log) {
  const RunResult r = log.run("gsbf_oracle");
  int below = 0;
  int compared = 0;
  double gap_sum = 0.0;
  for (std::size_t i = 0; i < r.raw.rows.size(); ++i) {
    const double g = r.raw.number(i, "gsbf_power_w");
    const double o = r.raw.number(i, "oracle_power_w");
    if (std::isnan(g) || std::isnan(o)) continue;
    ++compared;
    if (g < o * (1.0 - 1e-6)) ++below;
    gap_sum += (g - o) / o;
  }
  const double mean_gap = compared ? gap_sum / compared : INFINITY;
  return {compared == static_cast<int>(r.raw.rows.size()) && below == 0 && mean_gap <= 0.10,
          std::to_string(compared) + " seeds compared, GSBF below oracle in " + std::to_string(below) +
              ", mean relative gap " + fmt(100.0 * mean_gap, 3) + "%"};
}

// 6. GSBF power trend at L=10, N=2, K=15.
Verdict gsbf_trend(RunLog& log) {
  const RunResult r = log.run("gsbf_trend");
  std::map<double, std::map<double, double>> by_seed;  // seed -> sinr -> power
  std::map<double, double> all_active_0db;
  for (std::size_t i = 0; i < r.raw.rows.size(); ++i) {
    const double g = r.raw.number(i, "gsbf_power_w");
    if (std::isnan(g)) continue;
    by_seed[r.raw.number(i, "seed")][r.raw.number(i, "sinr_db")] = g;
    if (r.raw.number(i, "sinr_db") == 0.0) all_active_0db[r.raw.number(i, "seed")] = r.raw.number(i, "all_active_power_w");
  }
  std::set<double> sinrs;
  for (std::size_t i = 0; i < r.raw.rows.size(); ++i) sinrs.insert(r.raw.number(i, "sinr_db"));
  std::map<double, double> mean;
  int complete = 0;
  double gsbf0 = 0.0;
  double all0 = 0.0;
  for (const auto& [seed, row] : by_seed) {
    if (row.size() != sinrs.size()) continue;
    ++complete;
    for (const auto& [s, p] : row) mean[s] += p;
    gsbf0 += row.at(0.0);
    all0 += all_active_0db.at(seed);
  }
  bool monotone = complete > 0;
  std::string series;
  double prev = -INFINITY;
  for (auto& [s, total] : mean) {
    total /= complete;
    monotone = monotone && total >= prev;
    prev = total;
    series += (series.empty() ? "" : ", ") + fmt(s, 2) + " dB: " + fmt(total);
  }
  gsbf0 /= std::max(complete, 1);
  all0 /= std::max(complete, 1);
  return {monotone && gsbf0 <= all0 && complete >= 20,
          std::to_string(complete) + " seeds feasible at every target; mean W " + series + "; all-active at 0 dB " +
              fmt(all0)};
}

// 7. Channel estimation ordering and cross-solver agreement.
Verdict chanest(RunLog& log) {
  const RunResult r = log.run("chanest_mse");
  std::map<std::string, double> mse;
  for (std::size_t i = 0; i < r.aggregate.rows.size(); ++i)
    mse[r.aggregate.text(i, "regime")] = r.aggregate.number(i, "mse_mean");
  const double a = mse["least_squares"];
  const double b = mse["spatial"];
  const double c = mse["spatial_temporal"];
  const bool ordered = c <= 0.95 * b && b <= 0.95 * a;

  const ExperimentConfig cfg = load_config(config_path("chanest_mse"));
  const auto& ec = cfg.chanest;
  const double l1 = r.manifest["results"]["lambda1_spatial_temporal"].get<double>();
  const double l2s = r.manifest["results"]["lambda2_scale"].get<double>();
  double worst = 0.0;
  int agreed = 0;
  for (int t = 0; t < 10; ++t) {
    Rng rng = Rng::stream(static_cast<std::uint64_t>(t), "acceptance-chanest");
    const Vec g = sparse_profile(ec.dim, ec.strong_fraction, ec.weak_level, rng);
    const FadingProcess f = simulate_fading(g, ec.eta, 2, rng);
    const int m = static_cast<int>(std::lround(ec.pilot_ratio * ec.dim));
    const double noise = g.sum() / m / db_to_linear(ec.snr_db);
    const TrainingObservation prev = observe(f.blocks[0], g, m, noise, rng);
    const TrainingObservation obs = observe(f.blocks[1], g, m, noise, rng);
    EstimationProblem p;
    p.X = obs.X;
    p.y = obs.y;
    p.anchor = ec.eta * least_squares_estimate(prev.y, prev.X);
    p.lambda1 = l1 * noise;
    p.lambda2 = l2s * default_lambda2(noise, ec.eta, g);
    p.weights = link_weights(g);
    const EstimateResult fista = estimate_block(p, {50000, 1e-12});
    SolverSettings tight;
    tight.eps_primal = tight.eps_dual = tight.eps_gap = 1e-9;
    tight.max_iters = 200000;
    const ConeEstimate cone = estimate_with_cone_solver(p, tight);
    if (cone.status != SolveStatus::Optimal) continue;
    const double rel = std::abs(fista.objective - cone.objective) / std::abs(cone.objective);
    worst = std::max(worst, rel);
    if (rel <= 1e-4) ++agreed;
  }
  return {ordered && agreed == 10, "mean MSE LS " + fmt(a) + ", spatial " + fmt(b) + ", spatial+temporal " + fmt(c) +
                                       "; solvers agree on " + std::to_string(agreed) + "/10 (worst " + fmt(worst) +
                                       ")"};
}

// 8. Max-min dominance over fixed directions.
Verdict maxmin(RunLog& log) {
  const RunResult r = log.run("maxmin_vs_snr");
  const double tol = load_config(config_path("maxmin_vs_snr")).maxmin.bisection_tol;
  int violations = 0;
  int missing = 0;
  for (std::size_t i = 0; i < r.raw.rows.size(); ++i) {
    const double opt = r.raw.number(i, "optimal_gamma");
    const double mrt = r.raw.number(i, "mrt_gamma");
    const double zf = r.raw.number(i, "zf_gamma");
    if (std::isnan(opt) || std::isnan(mrt) || std::isnan(zf)) {
      ++missing;
      continue;
    }
    if (opt < mrt - tol || opt < zf - tol) ++violations;
  }
  return {violations == 0 && missing == 0,
          std::to_string(r.raw.rows.size()) + " (seed, SNR) points, " + std::to_string(violations) +
              " dominance violations, " + std::to_string(missing) + " incomplete"};
}

// 9. Scenario approach.
Verdict scenario(RunLog& log) {
  const RunResult r = log.run("scenario_scb");
  const ExperimentConfig cfg = load_config(config_path("scenario_scb"));
  const double gamma = db_to_linear(cfg.network.target_sinr_db);
  const int bound = r.manifest["results"]["scenario_bound"].get<int>();
  int slack_violations = 0;
  int decreases = 0;
  int solved_at_bound = 0;
  double outage_sum = 0.0;
  double worst_slack = INFINITY;
  std::map<double, std::vector<std::pair<double, double>>> by_seed;  // seed -> (M, power)
  for (std::size_t i = 0; i < r.raw.rows.size(); ++i) {
    if (r.raw.text(i, "status") != "Solved") continue;
    const double slack = r.raw.number(i, "worst_sampled_slack");
    worst_slack = std::min(worst_slack, slack);
    if (slack < -1e-3 * gamma) ++slack_violations;
    const double M = r.raw.number(i, "scenarios");
    by_seed[r.raw.number(i, "seed")].push_back({M, r.raw.number(i, "transmit_power_w")});
    if (static_cast<int>(M) == bound) {
      ++solved_at_bound;
      outage_sum += r.raw.number(i, "empirical_outage");
    }
  }
  for (auto& [seed, rows] : by_seed) {
    std::sort(rows.begin(), rows.end());
    for (std::size_t j = 1; j < rows.size(); ++j)
      if (rows[j].second < rows[j - 1].second * (1.0 - 1e-4)) ++decreases;
  }
  const int seeds = static_cast<int>(cfg.seeds.size());
  const double mean_outage = solved_at_bound ? outage_sum / solved_at_bound : 1.0;
  return {solved_at_bound == seeds && slack_violations == 0 && decreases == 0 && mean_outage <= 0.15,
          "M=" + std::to_string(bound) + " solved for " + std::to_string(solved_at_bound) + "/" +
              std::to_string(seeds) + " seeds, mean outage " + fmt(mean_outage) + ", worst sampled slack " +
              fmt(worst_slack) + ", power decreases " + std::to_string(decreases)};
}

// 10. Byte-identical reruns.
Verdict determinism(RunLog& log) {
  int same = 0;
  std::string differing;
  for (const auto& [name, first] : log.first_raw) {
    RunOptions o;
    o.out_dir = (log.work / name / "run2").string();
    o.threads = 1;
    const RunResult r = run_experiment(load_config(config_path(name)), o);
    if (slurp(first) == slurp(r.raw_path) && !slurp(first).empty())
      ++same;
    else
      differing += " " + name;
  }
  const int total = static_cast<int>(log.first_raw.size());
  return {total == 5 && same == total,
          std::to_string(same) + "/" + std::to_string(total) + " raw CSVs byte-identical" +
              (differing.empty() ? "" : "; differ:" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Directory for experiment outputs");
  app.add_option("--only", only, "Run only these criteria (5-9 feed 10)");
  CLI11_PARSE(app, argc, argv);

  RunLog log;
  log.work = work;
  fs::create_directories(log.work);

  struct Criterion {
    int id;
    double budget_s;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, 10, projections},
      {2, 120, solver_optimality},
      {3, 60, certificates},
      {4, 120, stuffing},
      {5, 300, [&] { return gsbf_oracle(log); }},
      {6, 600, [&] { return gsbf_trend(log); }},
      {7, 300, [&] { return chanest(log); }},
      {8, 300, [&] { return maxmin(log); }},
      {9, 300, [&] { return scenario(log); }},
      {10, INFINITY, [&] { return determinism(log); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %d: %s  %s  [%.1f s%s]\n", c.id, pass ? "PASS" : "FAIL", v.detail.c_str(), secs,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
