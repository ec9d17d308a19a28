#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cran/csi.hpp"
#include "cran/csv.hpp"
#include "cran/errors.hpp"
#include "cran/network.hpp"
#include "cran/solver.hpp"

namespace cran {

enum class Experiment { GsbfPowerVsSinr, MaxminVsSnr, ChanestMse, ScenarioScb, BenchStuffing, SolveFile };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);
const std::vector<std::string>& experiment_names();

/// Configuration error; the message starts with the JSON pointer of the
/// offending key.
struct ConfigError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct GsbfSweep {
  std::vector<double> sinr_db = {0.0, 2.0, 4.0, 6.0};
  double weight_exponent = 0.5;
  bool oracle = false;  // also run the exhaustive search (L <= 12)
};

/// Transmit SNR rho sets every cap to P^max = rho * sigma^2 / mean(g), i.e.
/// the mean received SNR of one RRH at full power.
struct MaxminSweep {
  std::vector<double> snr_db = {0.0, 10.0, 20.0};
  double bisection_tol = 1e-3;
  double gamma_ceiling = 1e12;
};

struct ScenarioSweep {
  double epsilon = 0.1;
  double beta = 0.01;
  std::vector<int> scenario_counts = {0};  // 0 means the scenario bound
  double link_budget_fraction = 0.75;
  double error_fraction = 0.05;
  int evaluation_samples = 10000;
};

struct BenchSettings {
  std::vector<int> sizes = {20, 50};  // L = K, one antenna per RRH
  int stuffs = 100;
  int warmup = 3;
  int repetitions = 3;
  bool solve = true;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::GsbfPowerVsSinr;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "results";
  int threads = 1;
  NetworkConfig network;
  SolverSettings solver = BeamformingOptions::default_solver();
  GsbfSweep gsbf;
  MaxminSweep maxmin;
  EstimationExperimentConfig chanest;
  ScenarioSweep scenario;
  BenchSettings bench;
  std::string program;  // solve_file input

  void validate() const;
};

/// Reads a config object; unknown keys and ill-typed values throw ConfigError.
/// A run manifest is accepted too; its embedded config is used.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct RunOptions {
  std::uint64_t seed_offset = 0;
  std::optional<std::string> out_dir;  // overrides the config
  std::optional<int> threads;          // overrides the config
  bool write_files = true;
};

struct RunResult {
  Table raw;
  Table aggregate;
  nlohmann::json manifest;
  std::string raw_path;
  std::string aggregate_path;
  std::string manifest_path;
};

/// Runs every seed of the configured experiment. Rows are merged in seed
/// order, so the raw table does not depend on the thread count.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Pivots an aggregate table into (series, x, y, y_std) rows.
Table emit_plot_data(const Table& aggregate);

}  // namespace cran
