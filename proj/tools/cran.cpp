#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cran/cone_program.hpp"
#include "cran/csv.hpp"
#include "cran/harness.hpp"
#include "cran/solver.hpp"

namespace {

int run_named(const std::string& name, const std::string& config_path, std::uint64_t seed_offset,
              const std::string& out_dir, int threads) {
  cran::ExperimentConfig cfg = cran::load_config(config_path);
  if (cran::to_string(cfg.experiment) != name)
    throw cran::ConfigError(config_path + ":1: /experiment: config is for '" +
                            cran::to_string(cfg.experiment) + "', not '" + name + "'");
  cran::RunOptions opt;
  opt.seed_offset = seed_offset;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  if (threads > 0) opt.threads = threads;
  const cran::RunResult res = cran::run_experiment(cfg, opt);
  std::cout << "raw:       " << res.raw_path << "\n"
            << "aggregate: " << res.aggregate_path << "\n"
            << "manifest:  " << res.manifest_path << "\n";
  std::cout << cran::to_csv(res.aggregate);
  return 0;
}

int run_solve(const std::string& path, int max_iters, double eps) {
  const cran::ConeProgram prog = cran::read_program_file(path);
  cran::SolverSettings s;
  if (max_iters > 0) s.max_iters = max_iters;
  if (eps > 0.0) s.eps_primal = s.eps_dual = s.eps_gap = eps;
  const cran::SolveOutcome o = cran::solve(prog, s);
  std::cout << "status " << cran::to_string(o.status) << "\n";
  if (o.status == cran::SolveStatus::Optimal) std::cout << "objective " << cran::format_double(o.objective) << "\n";
  std::cout << "iterations " << o.iterations << "\n"
            << "residuals " << cran::format_double(o.residuals.primal) << " "
            << cran::format_double(o.residuals.dual) << " " << cran::format_double(o.residuals.gap) << "\n";
  return o.status == cran::SolveStatus::Optimal || o.status == cran::SolveStatus::PrimalInfeasible ||
                 o.status == cran::SolveStatus::DualInfeasible
             ? 0
             : 3;
}

int run_plot(const std::string& path, const std::string& out) {
  const cran::Table plot = cran::emit_plot_data(cran::read_csv(path));
  if (out.empty()) {
    std::cout << cran::to_csv(plot);
  } else {
    cran::write_csv(out, plot);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cloud-RAN beamforming and estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_offset = 0;
  std::string out_dir;
  int threads = 0;
  std::string selected;
  for (const std::string& name : cran::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", config_path, "Experiment config JSON (or a run manifest)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed-offset", seed_offset, "Added to every configured seed");
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    sub->callback([&selected, name] { selected = name; });
  }

  std::string program_path;
  int max_iters = 0;
  double eps = 0.0;
  CLI::App* solve = app.add_subcommand("solve", "Solve a cone program stored as JSON");
  solve->add_option("program", program_path, "Cone program JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--max-iters", max_iters, "Iteration limit")->check(CLI::PositiveNumber);
  solve->add_option("--eps", eps, "Primal, dual and gap tolerance")->check(CLI::PositiveNumber);

  std::string aggregate_path;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot", "Pivot an aggregate CSV into series/x/y columns");
  plot->add_option("aggregate", aggregate_path, "Aggregate CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(program_path, max_iters, eps);
    if (plot->parsed()) return run_plot(aggregate_path, plot_out);
    return run_named(selected, config_path, seed_offset, out_dir, threads);
  } catch (const cran::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
