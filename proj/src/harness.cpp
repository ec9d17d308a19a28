#include "cran/harness.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "cran/beamforming.hpp"
#include "cran/cone_program.hpp"
#include "cran/stuffing.hpp"

namespace cran {

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
  static const std::vector<std::pair<Experiment, std::string>> table = {
      {Experiment::GsbfPowerVsSinr, "gsbf_power_vs_sinr"},
      {Experiment::MaxminVsSnr, "maxmin_vs_snr"},
      {Experiment::ChanestMse, "chanest_mse"},
      {Experiment::ScenarioScb, "scenario_scb"},
      {Experiment::BenchStuffing, "bench_stuffing"},
      {Experiment::SolveFile, "solve_file"},
  };
  return table;
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, name] : experiment_table())
    if (k == e) return name;
  return "unknown";
}

Experiment experiment_from_string(const std::string& s) {
  for (const auto& [k, name] : experiment_table())
    if (name == s) return k;
  throw InvalidArgument("unknown experiment '" + s + "'");
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : experiment_table()) out.push_back(entry.second);
    return out;
  }();
  return names;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

[[noreturn]] void config_fail(const std::string& pointer, const std::string& msg) {
  throw ConfigError((pointer.empty() ? std::string("/") : pointer) + ": " + msg);
}

/// Reads the keys of one JSON object and rejects whatever is left over.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
    if (!j.is_object()) config_fail(pointer_, "must be an object");
  }

  const json* find(const std::string& key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return pointer_ + "/" + key; }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) out = number(*v, at(key));
  }
  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) out = integer(*v, at(key));
  }
  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) config_fail(at(key), "must be a boolean");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) config_fail(at(key), "must be a string");
      out = v->get<std::string>();
    }
  }
  void read(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) config_fail(at(key), "must be an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(number((*v)[i], at(key) + "/" + std::to_string(i)));
    }
  }
  void read(const std::string& key, std::vector<int>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) config_fail(at(key), "must be an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(integer((*v)[i], at(key) + "/" + std::to_string(i)));
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        config_fail(pointer_ + "/" + it.key(), "unknown key");
  }

  static double number(const json& v, const std::string& pointer) {
    if (!v.is_number()) config_fail(pointer, "must be a number");
    return v.get<double>();
  }
  static int integer(const json& v, const std::string& pointer) {
    if (!v.is_number_integer()) config_fail(pointer, "must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      config_fail(pointer, "out of range");
    return static_cast<int>(x);
  }

 private:
  const json& j_;
  std::string pointer_;
  std::vector<std::string> seen_;
};

void read_seeds(const json& v, const std::string& pointer, std::vector<std::uint64_t>& seeds) {
  seeds.clear();
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<std::int64_t>() >= 0))
        config_fail(pointer + "/" + std::to_string(i), "must be a nonnegative integer");
      seeds.push_back(v[i].get<std::uint64_t>());
    }
    return;
  }
  if (v.is_object()) {
    ObjectReader r(v, pointer);
    int start = 0;
    int count = 0;
    r.read("start", start);
    r.read("count", count);
    r.finish();
    if (start < 0) config_fail(pointer + "/start", "must be nonnegative");
    if (count < 1) config_fail(pointer + "/count", "must be at least 1");
    for (int i = 0; i < count; ++i) seeds.push_back(static_cast<std::uint64_t>(start + i));
    return;
  }
  config_fail(pointer, "must be an array of seeds or {\"start\", \"count\"}");
}

void read_network(const json& v, const std::string& pointer, NetworkConfig& n) {
  ObjectReader r(v, pointer);
  r.read("num_rrhs", n.num_rrhs);
  r.read("antennas_per_rrh", n.antennas_per_rrh);
  r.read("num_users", n.num_users);
  r.read("half_width_m", n.half_width_m);
  r.read("fronthaul_w", n.fronthaul_w);
  r.read("max_tx_w", n.max_tx_w);
  r.read("drain_efficiency", n.drain_efficiency);
  r.read("target_sinr_db", n.target_sinr_db);
  r.read("noise_power", n.noise_power);
  if (const json* c = r.find("channel")) {
    ObjectReader cr(*c, r.at("channel"));
    cr.read("pathloss_intercept_db", n.channel.pathloss_intercept_db);
    cr.read("pathloss_slope_db", n.channel.pathloss_slope_db);
    cr.read("shadowing_std_db", n.channel.shadowing_std_db);
    cr.read("min_distance_m", n.channel.min_distance_m);
    cr.read("noise_reference_dbm", n.channel.noise_reference_dbm);
    cr.finish();
  }
  r.finish();
}

void read_solver(const json& v, const std::string& pointer, SolverSettings& s) {
  ObjectReader r(v, pointer);
  r.read("max_iters", s.max_iters);
  if (const json* e = r.find("eps")) s.eps_primal = s.eps_dual = s.eps_gap = ObjectReader::number(*e, r.at("eps"));
  r.read("eps_primal", s.eps_primal);
  r.read("eps_dual", s.eps_dual);
  r.read("eps_gap", s.eps_gap);
  r.read("alpha", s.alpha);
  r.read("equilibrate", s.equilibrate);
  r.read("equilibration_sweeps", s.equilibration_sweeps);
  r.finish();
}

}  // namespace

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& pointer, const std::string& msg) {
    if (!ok) config_fail(pointer, msg);
  };
  require(!seeds.empty(), "/seeds", "must list at least one seed");
  require(threads >= 1, "/threads", "must be at least 1");
  require(network.num_rrhs >= 1, "/network/num_rrhs", "must be at least 1");
  require(network.antennas_per_rrh >= 1, "/network/antennas_per_rrh", "must be at least 1");
  require(network.num_users >= 0, "/network/num_users", "must be nonnegative");
  require(network.half_width_m > 0.0, "/network/half_width_m", "must be positive");
  require(network.fronthaul_w.empty() ||
              static_cast<int>(network.fronthaul_w.size()) == network.num_rrhs,
          "/network/fronthaul_w", "needs one entry per RRH");
  require(network.max_tx_w > 0.0, "/network/max_tx_w", "must be positive");
  require(network.drain_efficiency > 0.0, "/network/drain_efficiency", "must be positive");
  require(network.noise_power > 0.0, "/network/noise_power", "must be positive");
  require(solver.max_iters >= 1, "/solver/max_iters", "must be at least 1");
  require(solver.eps_primal > 0.0 && solver.eps_dual > 0.0 && solver.eps_gap > 0.0, "/solver",
          "tolerances must be positive");
  require(solver.alpha > 0.0 && solver.alpha < 2.0, "/solver/alpha", "must lie in (0, 2)");
  switch (experiment) {
    case Experiment::GsbfPowerVsSinr:
      require(!gsbf.sinr_db.empty(), "/gsbf/sinr_db", "must be nonempty");
      require(!gsbf.oracle || network.num_rrhs <= 12, "/gsbf/oracle", "needs num_rrhs <= 12");
      break;
    case Experiment::MaxminVsSnr:
      require(!maxmin.snr_db.empty(), "/maxmin/snr_db", "must be nonempty");
      require(maxmin.bisection_tol > 0.0, "/maxmin/bisection_tol", "must be positive");
      break;
    case Experiment::ChanestMse:
      require(chanest.dim >= 1, "/chanest/dim", "must be at least 1");
      require(chanest.pilot_ratio > 0.0, "/chanest/pilot_ratio", "must be positive");
      require(chanest.eta >= 0.0 && chanest.eta < 1.0, "/chanest/eta", "must lie in [0, 1)");
      require(chanest.blocks >= 2, "/chanest/blocks", "must be at least 2");
      require(!chanest.lambda1_grid.empty(), "/chanest/lambda1_grid", "must be nonempty");
      require(!chanest.lambda2_scale_grid.empty(), "/chanest/lambda2_scale_grid", "must be nonempty");
      require(chanest.tuning_seeds >= 1, "/chanest/tuning_seeds", "must be at least 1");
      break;
    case Experiment::ScenarioScb:
      require(scenario.epsilon > 0.0 && scenario.epsilon < 1.0, "/scenario/epsilon", "must lie in (0, 1)");
      require(scenario.beta > 0.0 && scenario.beta < 1.0, "/scenario/beta", "must lie in (0, 1)");
      require(!scenario.scenario_counts.empty(), "/scenario/scenario_counts", "must be nonempty");
      for (int m : scenario.scenario_counts)
        require(m >= 0, "/scenario/scenario_counts", "entries must be nonnegative");
      require(scenario.link_budget_fraction >= 0.0 && scenario.link_budget_fraction <= 1.0,
              "/scenario/link_budget_fraction", "must lie in [0, 1]");
      require(scenario.error_fraction >= 0.0, "/scenario/error_fraction", "must be nonnegative");
      require(scenario.evaluation_samples >= 0, "/scenario/evaluation_samples", "must be nonnegative");
      break;
    case Experiment::BenchStuffing:
      require(!bench.sizes.empty(), "/bench/sizes", "must be nonempty");
      for (int s : bench.sizes) require(s >= 1, "/bench/sizes", "entries must be positive");
      require(bench.stuffs >= 1, "/bench/stuffs", "must be at least 1");
      require(bench.warmup >= 0, "/bench/warmup", "must be nonnegative");
      require(bench.repetitions >= 1, "/bench/repetitions", "must be at least 1");
      break;
    case Experiment::SolveFile:
      require(!program.empty(), "/program", "is required for solve_file");
      break;
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) config_fail("/config", "manifest has no embedded config");
    return config_from_json(j.at("config"));
  }
  ExperimentConfig cfg;
  ObjectReader r(j, "");
  std::string name;
  r.read("experiment", name);
  if (name.empty()) config_fail("/experiment", "is required");
  try {
    cfg.experiment = experiment_from_string(name);
  } catch (const InvalidArgument&) {
    config_fail("/experiment", "unknown experiment '" + name + "'");
  }
  if (const json* v = r.find("seeds")) read_seeds(*v, "/seeds", cfg.seeds);
  r.read("output_dir", cfg.output_dir);
  r.read("threads", cfg.threads);
  r.read("program", cfg.program);
  if (const json* v = r.find("network")) read_network(*v, "/network", cfg.network);
  if (const json* v = r.find("solver")) read_solver(*v, "/solver", cfg.solver);
  if (const json* v = r.find("gsbf")) {
    ObjectReader g(*v, "/gsbf");
    g.read("sinr_db", cfg.gsbf.sinr_db);
    g.read("weight_exponent", cfg.gsbf.weight_exponent);
    g.read("oracle", cfg.gsbf.oracle);
    g.finish();
  }
  if (const json* v = r.find("maxmin")) {
    ObjectReader m(*v, "/maxmin");
    m.read("snr_db", cfg.maxmin.snr_db);
    m.read("bisection_tol", cfg.maxmin.bisection_tol);
    m.read("gamma_ceiling", cfg.maxmin.gamma_ceiling);
    m.finish();
  }
  if (const json* v = r.find("chanest")) {
    ObjectReader c(*v, "/chanest");
    c.read("dim", cfg.chanest.dim);
    c.read("pilot_ratio", cfg.chanest.pilot_ratio);
    c.read("eta", cfg.chanest.eta);
    c.read("blocks", cfg.chanest.blocks);
    c.read("snr_db", cfg.chanest.snr_db);
    c.read("strong_fraction", cfg.chanest.strong_fraction);
    c.read("weak_level", cfg.chanest.weak_level);
    c.read("lambda1_grid", cfg.chanest.lambda1_grid);
    c.read("lambda2_scale_grid", cfg.chanest.lambda2_scale_grid);
    c.read("tuning_seeds", cfg.chanest.tuning_seeds);
    c.finish();
  }
  if (const json* v = r.find("scenario")) {
    ObjectReader s(*v, "/scenario");
    s.read("epsilon", cfg.scenario.epsilon);
    s.read("beta", cfg.scenario.beta);
    s.read("scenario_counts", cfg.scenario.scenario_counts);
    s.read("link_budget_fraction", cfg.scenario.link_budget_fraction);
    s.read("error_fraction", cfg.scenario.error_fraction);
    s.read("evaluation_samples", cfg.scenario.evaluation_samples);
    s.finish();
  }
  if (const json* v = r.find("bench")) {
    ObjectReader b(*v, "/bench");
    b.read("sizes", cfg.bench.sizes);
    b.read("stuffs", cfg.bench.stuffs);
    b.read("warmup", cfg.bench.warmup);
    b.read("repetitions", cfg.bench.repetitions);
    b.read("solve", cfg.bench.solve);
    b.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the key a JSON pointer names, found by locating each quoted path
/// token after the previous one. Falls back to line 1.
int line_of_pointer(const std::string& text, const std::string& pointer) {
  std::size_t pos = 0;
  std::size_t found = std::string::npos;
  std::size_t start = 1;
  while (start <= pointer.size()) {
    const std::size_t end = std::min(pointer.find('/', start), pointer.size());
    const std::string token = pointer.substr(start, end - start);
    start = end + 1;
    if (token.empty() || std::all_of(token.begin(), token.end(), ::isdigit)) continue;
    const std::size_t at = text.find("\"" + token + "\"", pos);
    if (at == std::string::npos) break;
    found = at;
    pos = at + token.size() + 2;
  }
  return found == std::string::npos ? 1 : line_of_offset(text, found);
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    const std::string pointer = msg.substr(0, msg.find(": "));
    throw ConfigError(path + ":" + std::to_string(line_of_pointer(text, pointer)) + ": " + msg);
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  const NetworkConfig& n = cfg.network;
  json j;
  j["experiment"] = to_string(cfg.experiment);
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["network"] = {
      {"num_rrhs", n.num_rrhs},
      {"antennas_per_rrh", n.antennas_per_rrh},
      {"num_users", n.num_users},
      {"half_width_m", n.half_width_m},
      {"fronthaul_w", n.fronthaul_w},
      {"max_tx_w", n.max_tx_w},
      {"drain_efficiency", n.drain_efficiency},
      {"target_sinr_db", n.target_sinr_db},
      {"noise_power", n.noise_power},
      {"channel",
       {{"pathloss_intercept_db", n.channel.pathloss_intercept_db},
        {"pathloss_slope_db", n.channel.pathloss_slope_db},
        {"shadowing_std_db", n.channel.shadowing_std_db},
        {"min_distance_m", n.channel.min_distance_m},
        {"noise_reference_dbm", n.channel.noise_reference_dbm}}},
  };
  j["solver"] = {
      {"max_iters", cfg.solver.max_iters},
      {"eps_primal", cfg.solver.eps_primal},
      {"eps_dual", cfg.solver.eps_dual},
      {"eps_gap", cfg.solver.eps_gap},
      {"alpha", cfg.solver.alpha},
      {"equilibrate", cfg.solver.equilibrate},
      {"equilibration_sweeps", cfg.solver.equilibration_sweeps},
  };
  j["gsbf"] = {{"sinr_db", cfg.gsbf.sinr_db},
               {"weight_exponent", cfg.gsbf.weight_exponent},
               {"oracle", cfg.gsbf.oracle}};
  j["maxmin"] = {{"snr_db", cfg.maxmin.snr_db},
                 {"bisection_tol", cfg.maxmin.bisection_tol},
                 {"gamma_ceiling", cfg.maxmin.gamma_ceiling}};
  j["chanest"] = {{"dim", cfg.chanest.dim},
                  {"pilot_ratio", cfg.chanest.pilot_ratio},
                  {"eta", cfg.chanest.eta},
                  {"blocks", cfg.chanest.blocks},
                  {"snr_db", cfg.chanest.snr_db},
                  {"strong_fraction", cfg.chanest.strong_fraction},
                  {"weak_level", cfg.chanest.weak_level},
                  {"lambda1_grid", cfg.chanest.lambda1_grid},
                  {"lambda2_scale_grid", cfg.chanest.lambda2_scale_grid},
                  {"tuning_seeds", cfg.chanest.tuning_seeds}};
  j["scenario"] = {{"epsilon", cfg.scenario.epsilon},
                   {"beta", cfg.scenario.beta},
                   {"scenario_counts", cfg.scenario.scenario_counts},
                   {"link_budget_fraction", cfg.scenario.link_budget_fraction},
                   {"error_fraction", cfg.scenario.error_fraction},
                   {"evaluation_samples", cfg.scenario.evaluation_samples}};
  j["bench"] = {{"sizes", cfg.bench.sizes},
                {"stuffs", cfg.bench.stuffs},
                {"warmup", cfg.bench.warmup},
                {"repetitions", cfg.bench.repetitions},
                {"solve", cfg.bench.solve}};
  j["program"] = cfg.program;
  return j;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

using Row = std::vector<Cell>;
using clk = std::chrono::steady_clock;

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

Cell maybe(bool ok, double v) { return ok ? Cell{v} : Cell{}; }

/// Runs `f(seed)` for every seed on `threads` workers and concatenates the
/// returned rows in seed order.
template <typename F>
std::vector<Row> per_seed(const std::vector<std::uint64_t>& seeds, int threads, F&& f) {
  std::vector<std::vector<Row>> out(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = f(seeds[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(seeds.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  std::vector<Row> rows;
  for (auto& chunk : out)
    for (auto& r : chunk) rows.push_back(std::move(r));
  return rows;
}

BeamformingOptions designer_options(const ExperimentConfig& cfg) {
  BeamformingOptions opt;
  opt.solver = cfg.solver;
  opt.weight_exponent = cfg.gsbf.weight_exponent;
  opt.gamma_ceiling = cfg.maxmin.gamma_ceiling;
  return opt;
}

std::vector<int> all_rrhs(int L) {
  std::vector<int> s(L);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

struct ExperimentOutput {
  Table raw;
  std::vector<std::string> keys;
  std::vector<std::string> values;
  json extras = json::object();
};

ExperimentOutput run_gsbf(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds, int threads) {
  ExperimentOutput out;
  out.raw.columns = {"seed", "sinr_db", "gsbf_power_w", "all_active_power_w", "active_count", "probes",
                     "oracle_power_w", "gsbf_status", "all_active_status", "indeterminate_probes"};
  out.raw.rows = per_seed(seeds, threads, [&](std::uint64_t seed) {
    BeamformingDesigner designer(designer_options(cfg));
    std::vector<Row> rows;
    for (double sinr : cfg.gsbf.sinr_db) {
      NetworkConfig nc = cfg.network;
      nc.target_sinr_db = sinr;
      const NetworkInstance inst = make_instance(nc, seed);
      const GsbfResult g = designer.gsbf(inst);
      const PowerMinResult all = designer.powermin(inst, all_rrhs(inst.num_rrhs()));
      const bool g_ok = g.status == DesignStatus::Solved;
      const bool a_ok = all.status == DesignStatus::Solved;
      Cell oracle;
      if (cfg.gsbf.oracle) {
        const OracleResult o = designer.exhaustive_oracle(inst);
        if (o.status == DesignStatus::Solved) oracle = o.network_power_w;
      }
      rows.push_back({static_cast<std::int64_t>(seed), sinr, maybe(g_ok, g.network_power_w),
                      maybe(a_ok, all.network_power_w),
                      g_ok ? Cell{static_cast<std::int64_t>(g.active_set.size())} : Cell{},
                      static_cast<std::int64_t>(g.feasibility_probe_count), oracle, to_string(g.status),
                      to_string(all.status), static_cast<std::int64_t>(g.indeterminate_probes)});
    }
    return rows;
  });
  out.keys = {"sinr_db"};
  out.values = {"gsbf_power_w", "all_active_power_w", "active_count", "probes"};
  if (cfg.gsbf.oracle) out.values.push_back("oracle_power_w");
  return out;
}

ExperimentOutput run_maxmin(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds, int threads) {
  ExperimentOutput out;
  out.raw.columns = {"seed", "snr_db", "optimal_rate", "mrt_rate", "zf_rate", "optimal_gamma",
                     "mrt_gamma", "zf_gamma", "max_tx_w", "probes", "indeterminate_probes"};
  out.raw.rows = per_seed(seeds, threads, [&](std::uint64_t seed) {
    BeamformingDesigner designer(designer_options(cfg));
    const NetworkInstance base = make_instance(cfg.network, seed);
    const double mean_gain = base.large_scale.size() ? base.large_scale.mean() : 1.0;
    const bool zf_ok = base.num_antennas() >= base.num_users();
    std::vector<Row> rows;
    for (double snr : cfg.maxmin.snr_db) {
      NetworkInstance inst = base;
      const double cap = db_to_linear(snr) * cfg.network.noise_power / mean_gain;
      inst.power.max_tx_w.setConstant(cap);
      const double tol = cfg.maxmin.bisection_tol;
      const MaxMinResult opt = designer.maxmin_rate(inst, tol);
      const MaxMinResult mrt = designer.fixed_direction_maxmin(inst, FixedDirection::MRT, tol);
      std::optional<MaxMinResult> zf;
      if (zf_ok) zf = designer.fixed_direction_maxmin(inst, FixedDirection::ZF, tol);
      rows.push_back({static_cast<std::int64_t>(seed), snr, opt.rate(), mrt.rate(),
                      zf ? Cell{zf->rate()} : Cell{}, opt.gamma, mrt.gamma, zf ? Cell{zf->gamma} : Cell{}, cap,
                      static_cast<std::int64_t>(opt.probes),
                      static_cast<std::int64_t>(opt.indeterminate_probes)});
    }
    return rows;
  });
  out.keys = {"snr_db"};
  out.values = {"optimal_rate", "mrt_rate", "zf_rate"};
  return out;
}

ExperimentOutput run_chanest(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  ExperimentOutput out;
  out.raw.columns = {"seed", "pilot_ratio", "regime", "lambda1", "lambda2", "mse", "unconverged_blocks"};
  const EstimationExperimentResult res = run_estimation_experiment(cfg.chanest, seeds);
  for (const auto& t : res.trials)
    out.raw.add_row({static_cast<std::int64_t>(t.seed), cfg.chanest.pilot_ratio, to_string(t.regime),
                     t.lambda1, t.lambda2, t.mse, static_cast<std::int64_t>(t.unconverged_blocks)});
  out.keys = {"pilot_ratio", "regime"};
  out.values = {"mse"};
  out.extras = {{"lambda1_spatial", res.lambda1_spatial},
                {"lambda1_spatial_temporal", res.lambda1_spatial_temporal},
                {"lambda2_scale", res.lambda2_scale}};
  return out;
}

ExperimentOutput run_scenario(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds, int threads) {
  ExperimentOutput out;
  out.raw.columns = {"seed", "scenarios", "status", "transmit_power_w", "worst_sampled_slack",
                     "empirical_outage", "iterations"};
  const int links = cfg.network.num_users * cfg.network.num_rrhs * cfg.network.antennas_per_rrh;
  const int variables = 1 + 2 * links;
  const int bound = scenario_count(variables, cfg.scenario.epsilon, cfg.scenario.beta);
  out.raw.rows = per_seed(seeds, threads, [&](std::uint64_t seed) {
    const NetworkInstance inst = make_instance(cfg.network, seed);
    const Rng master = Rng::stream(seed, "scenario");
    Rng estimation = master.substream("csi");
    const int budget = static_cast<int>(std::lround(cfg.scenario.link_budget_fraction * links));
    const MixedCsi csi = make_mixed_csi(inst, budget, cfg.scenario.error_fraction, estimation);
    ScenarioOptions opt;
    opt.solver = cfg.solver;
    opt.evaluation_samples = cfg.scenario.evaluation_samples;
    std::vector<Row> rows;
    for (int requested : cfg.scenario.scenario_counts) {
      const int M = requested == 0 ? bound : requested;
      const ScenarioResult r = scenario_scb(csi, M, inst, master.substream("draws"), opt);
      const bool ok = r.status == DesignStatus::Solved;
      rows.push_back({static_cast<std::int64_t>(seed), static_cast<std::int64_t>(M), to_string(r.status),
                      maybe(ok, r.transmit_power), maybe(ok, r.worst_sampled_slack),
                      maybe(ok, r.empirical_outage), static_cast<std::int64_t>(r.solve.iterations)});
    }
    return rows;
  });
  out.keys = {"scenarios"};
  out.values = {"transmit_power_w", "empirical_outage", "worst_sampled_slack"};
  out.extras = {{"scenario_bound", bound}, {"decision_variables", variables}};
  return out;
}

ExperimentOutput run_bench(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  ExperimentOutput out;
  out.raw.columns = {"seed", "dims", "nnz", "modeling_time_template_s", "modeling_time_scratch_s",
                     "template_build_s", "stuff_s", "speedup", "identical", "solving_time_s",
                     "objective_w", "status", "iterations"};
  for (std::uint64_t seed : seeds) {
    for (int size : cfg.bench.sizes) {
      NetworkConfig nc = cfg.network;
      nc.num_rrhs = nc.num_users = size;
      nc.antennas_per_rrh = 1;
      nc.fronthaul_w.clear();
      const NetworkInstance inst = make_instance(nc, seed);
      const std::vector<int> all = all_rrhs(size);
      const FamilyDims dims = active_dims(inst, all);
      const FamilyData data = active_data(inst, all);
      const ProblemFamily f = ProblemFamily::PowerMin;

      for (int w = 0; w < cfg.bench.warmup; ++w) {
        (void)canonicalize_reference(f, dims, data);
        (void)StuffingTemplate::build(f, dims).stuff(data);
      }
      ConeProgram ref;
      double scratch = 0.0;
      for (int r = 0; r < cfg.bench.repetitions; ++r) {
        const auto t0 = clk::now();
        ref = canonicalize_reference(f, dims, data);
        scratch += seconds_since(t0);
      }
      scratch /= cfg.bench.repetitions;

      ConeProgram stuffed;
      double build = 0.0;
      double stuff = 0.0;
      for (int r = 0; r < cfg.bench.repetitions; ++r) {
        auto t0 = clk::now();
        const StuffingTemplate tpl = StuffingTemplate::build(f, dims);
        build += seconds_since(t0);
        t0 = clk::now();
        for (int s = 0; s < cfg.bench.stuffs; ++s) stuffed = tpl.stuff(data);
        stuff += seconds_since(t0) / cfg.bench.stuffs;
      }
      build /= cfg.bench.repetitions;
      stuff /= cfg.bench.repetitions;
      const double amortized = build / cfg.bench.stuffs + stuff;

      Row row = {static_cast<std::int64_t>(seed), static_cast<std::int64_t>(size),
                 static_cast<std::int64_t>(ref.A.nnz()), amortized, scratch, build, stuff, scratch / amortized,
                 static_cast<std::int64_t>(stuffed == ref ? 1 : 0)};
      if (cfg.bench.solve) {
        const auto t0 = clk::now();
        const SolveOutcome o = solve(stuffed, cfg.solver);
        const double t = seconds_since(t0);
        const bool ok = o.status == SolveStatus::Optimal;
        row.insert(row.end(), {t, maybe(ok, o.objective * o.objective), to_string(o.status),
                               static_cast<std::int64_t>(o.iterations)});
      } else {
        row.insert(row.end(), {Cell{}, Cell{}, Cell{}, Cell{}});
      }
      out.raw.add_row(std::move(row));
    }
  }
  out.keys = {"dims"};
  out.values = {"modeling_time_template_s", "modeling_time_scratch_s", "speedup", "solving_time_s", "objective_w"};
  return out;
}

ExperimentOutput run_solve_file(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  out.raw.columns = {"program", "status", "objective", "iterations", "primal_residual", "dual_residual",
                     "gap_residual"};
  const ConeProgram prog = read_program_file(cfg.program);
  const SolveOutcome o = solve(prog, cfg.solver);
  out.raw.add_row({cfg.program, to_string(o.status), o.objective, static_cast<std::int64_t>(o.iterations),
                   o.residuals.primal, o.residuals.dual, o.residuals.gap});
  out.keys = {"status"};
  out.values = {"objective", "iterations"};
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg_in, const RunOptions& options) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  for (auto& s : cfg.seeds) s += options.seed_offset;
  if (options.out_dir) cfg.output_dir = *options.out_dir;
  const int threads = options.threads.value_or(cfg.threads);
  if (threads < 1) throw InvalidArgument("thread count must be at least 1");

  const std::string started = utc_now();
  const auto t0 = clk::now();
  ExperimentOutput out;
  switch (cfg.experiment) {
    case Experiment::GsbfPowerVsSinr: out = run_gsbf(cfg, cfg.seeds, threads); break;
    case Experiment::MaxminVsSnr: out = run_maxmin(cfg, cfg.seeds, threads); break;
    case Experiment::ChanestMse: out = run_chanest(cfg, cfg.seeds); break;
    case Experiment::ScenarioScb: out = run_scenario(cfg, cfg.seeds, threads); break;
    case Experiment::BenchStuffing: out = run_bench(cfg, cfg.seeds); break;
    case Experiment::SolveFile: out = run_solve_file(cfg); break;
  }
  const double elapsed = seconds_since(t0);

  RunResult res;
  res.raw = std::move(out.raw);
  res.aggregate = aggregate(res.raw, out.keys, out.values);

  const std::string name = to_string(cfg.experiment);
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  res.raw_path = (dir / (name + "_raw.csv")).string();
  res.aggregate_path = (dir / (name + "_aggregate.csv")).string();
  res.manifest_path = (dir / (name + "_manifest.json")).string();

  // The embedded config carries the seeds actually used, so a manifest
  // re-runs without a seed offset.
  res.manifest = {
      {"manifest_version", 1},
      {"tool", "cran"},
      {"tool_version", kToolVersion},
      {"compiler", __VERSION__},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"experiment", name},
      {"seed_offset", options.seed_offset},
      {"threads", threads},
      {"config", config_to_json(cfg)},
      {"started_utc", started},
      {"finished_utc", utc_now()},
      {"wall_clock_s", elapsed},
      {"outputs", {{"raw", fs::path(res.raw_path).filename().string()},
                   {"aggregate", fs::path(res.aggregate_path).filename().string()}}},
      {"results", out.extras},
  };
  res.manifest["config"]["seeds"] = cfg.seeds;

  if (options.write_files) {
    fs::create_directories(dir);
    write_csv(res.raw_path, res.raw);
    write_csv(res.aggregate_path, res.aggregate);
    std::ofstream f(res.manifest_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + res.manifest_path + "' for writing");
    f << res.manifest.dump(2) << "\n";
  }
  return res;
}

// ---------------------------------------------------------------------------
// Plot data

Table emit_plot_data(const Table& agg) {
  struct Series {
    std::string label;
    std::string column;  // value column prefix in the aggregate
  };
  std::string x_column;
  std::string series_column;  // non-empty: the series label comes from this key column
  std::vector<Series> series;
  if (agg.has_column("gsbf_power_w_mean")) {
    x_column = "sinr_db";
    series = {{"GSBF", "gsbf_power_w"}, {"all-active", "all_active_power_w"}};
    if (agg.has_column("oracle_power_w_mean")) series.push_back({"exhaustive", "oracle_power_w"});
  } else if (agg.has_column("optimal_rate_mean")) {
    x_column = "snr_db";
    series = {{"optimal", "optimal_rate"}, {"MRT", "mrt_rate"}, {"ZF", "zf_rate"}};
  } else if (agg.has_column("mse_mean")) {
    x_column = "pilot_ratio";
    series_column = "regime";
    series = {{"", "mse"}};
  } else if (agg.has_column("transmit_power_w_mean")) {
    x_column = "scenarios";
    series = {{"transmit_power_w", "transmit_power_w"}, {"empirical_outage", "empirical_outage"}};
  } else if (agg.has_column("modeling_time_template_s_mean")) {
    x_column = "dims";
    series = {{"template", "modeling_time_template_s"},
              {"scratch", "modeling_time_scratch_s"},
              {"solve", "solving_time_s"}};
  } else {
    throw InvalidArgument("aggregate table has no known plot layout");
  }
  if (!agg.has_column(x_column)) throw InvalidArgument("aggregate table lacks column '" + x_column + "'");
  if (!series_column.empty() && !agg.has_column(series_column))
    throw InvalidArgument("aggregate table lacks column '" + series_column + "'");
  for (const auto& s : series)
    if (!agg.has_column(s.column + "_mean") || !agg.has_column(s.column + "_std"))
      throw InvalidArgument("aggregate table lacks columns for '" + s.column + "'");

  Table out;
  out.columns = {"series", "x", "y", "y_std"};
  for (const auto& s : series)
    for (std::size_t r = 0; r < agg.rows.size(); ++r) {
      const std::string label = series_column.empty() ? s.label : agg.text(r, series_column);
      const double x = agg.number(r, x_column);
      const double y = agg.number(r, s.column + "_mean");
      const double sd = agg.number(r, s.column + "_std");
      out.add_row({label, x, std::isnan(y) ? Cell{} : Cell{y}, std::isnan(sd) ? Cell{} : Cell{sd}});
    }
  return out;
}

}  // namespace cran
