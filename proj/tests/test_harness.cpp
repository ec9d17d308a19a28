#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "cran/csv.hpp"
#include "cran/harness.hpp"

using namespace cran;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(CRAN_SOURCE_DIR) + "/tests/fixtures/" + name; }

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cran-unit-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_gsbf() {
  ExperimentConfig c;
  c.experiment = Experiment::GsbfPowerVsSinr;
  c.seeds = {0, 1, 2};
  c.network.num_rrhs = 3;
  c.network.antennas_per_rrh = 2;
  c.network.num_users = 2;
  c.gsbf.sinr_db = {0.0, 4.0};
  return c;
}

std::string config_error(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("csv round trip with quoting") {
    Table t;
    t.columns = {"name", "value", "note"};
    t.add_row({std::string("a,b"), 0.1, std::string("say \"hi\"")});
    t.add_row({std::string("plain"), std::int64_t{42}, Cell{}});
    const std::string text = to_csv(t);
    CHECK(text.find("\r\n") != std::string::npos);
    CHECK(text.find("\"a,b\"") != std::string::npos);
    const Table back = parse_csv(text);
    CHECK(back.columns == t.columns);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.text(0, "name") == "a,b");
    CHECK(back.number(0, "value") == 0.1);
    CHECK(back.text(0, "note") == "say \"hi\"");
    CHECK(std::isnan(back.number(1, "note")));
  }

  TEST_CASE("floats are written at round trip precision") {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(format_double(v)) == v);
  }

  TEST_CASE("malformed csv names the line") {
    CHECK_THROWS_WITH_AS(parse_csv("a,b\r\n1,2\r\n3\r\n"), doctest::Contains("line 3"), InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_csv("a,b\r\n\"x,2\r\n"), doctest::Contains("unterminated"), InvalidArgument);
    CHECK_THROWS_AS(parse_csv(""), InvalidArgument);
  }

  TEST_CASE("aggregate reports mean and sample deviation") {
    Table t;
    t.columns = {"k", "v"};
    t.add_row({std::int64_t{1}, 1.0});
    t.add_row({std::int64_t{2}, 5.0});
    t.add_row({std::int64_t{1}, 3.0});
    t.add_row({std::int64_t{1}, Cell{}});
    const Table a = aggregate(t, {"k"}, {"v"});
    REQUIRE(a.rows.size() == 2);
    CHECK(a.number(0, "k") == 1.0);
    CHECK(a.number(0, "n") == 3.0);
    CHECK(a.number(0, "v_mean") == 2.0);
    CHECK(a.number(0, "v_std") == doctest::Approx(std::sqrt(2.0)));
    CHECK(a.number(1, "v_std") == 0.0);
  }

  TEST_CASE("config rejects unknown keys and bad types") {
    CHECK(config_error({{"experiment", "gsbf_power_vs_sinr"}, {"bogus", 1}}).rfind("/bogus:", 0) == 0);
    CHECK(config_error({{"experiment", "gsbf_power_vs_sinr"}, {"network", {{"num_rrhs", "ten"}}}})
              .rfind("/network/num_rrhs:", 0) == 0);
    CHECK(config_error({{"experiment", "gsbf_power_vs_sinr"}, {"network", {{"channel", {{"x", 1}}}}}})
              .rfind("/network/channel/x:", 0) == 0);
    CHECK(config_error({{"experiment", "nope"}}).rfind("/experiment:", 0) == 0);
    CHECK(config_error({{"seeds", {1}}}).rfind("/experiment:", 0) == 0);
    CHECK(config_error({{"experiment", "maxmin_vs_snr"}, {"threads", 0}}).rfind("/threads:", 0) == 0);
  }

  TEST_CASE("config file errors carry a line number") {
    const auto dir = scratch_dir("config");
    const std::string path = (dir / "bad.json").string();
    std::ofstream(path) << "{\n  \"experiment\": \"gsbf_power_vs_sinr\",\n  \"gsbf\": {\n    \"oracel\": true\n  }\n}\n";
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("bad.json:4: /gsbf/oracel: unknown key"), ConfigError);
    std::ofstream(path) << "{\n  \"experiment\": ,\n}\n";
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("bad.json:2:"), ConfigError);
  }

  TEST_CASE("config json round trip") {
    ExperimentConfig c = tiny_gsbf();
    c.seeds = {4, 9};
    c.solver.eps_primal = 3e-6;
    const json j = config_to_json(c);
    CHECK(config_to_json(config_from_json(j)) == j);
    CHECK(config_from_json({{"experiment", "chanest_mse"}, {"seeds", {{"start", 3}, {"count", 2}}}}).seeds ==
          std::vector<std::uint64_t>{3, 4});
  }

  TEST_CASE("shipped configs load") {
    const std::string root = std::string(CRAN_SOURCE_DIR) + "/configs";
    int loaded = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
      if (entry.path().extension() != ".json" || entry.path().filename() == "experiment.schema.json") continue;
      CHECK_NOTHROW(load_config(entry.path().string()));
      ++loaded;
    }
    CHECK(loaded >= 6);
  }

  TEST_CASE("solve_file on the fixture") {
    ExperimentConfig c;
    c.experiment = Experiment::SolveFile;
    c.program = fixture("one_var_lp.json");
    RunOptions o;
    o.write_files = false;
    const RunResult r = run_experiment(c, o);
    REQUIRE(r.raw.rows.size() == 1);
    CHECK(r.raw.text(0, "status") == "Optimal");
    CHECK(r.raw.number(0, "objective") == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("gsbf run has the documented columns and is deterministic") {
    RunOptions o;
    o.write_files = false;
    const RunResult a = run_experiment(tiny_gsbf(), o);
    const std::vector<std::string> head = {"seed", "sinr_db", "gsbf_power_w", "all_active_power_w", "active_count",
                                           "probes"};
    CHECK(std::vector<std::string>(a.raw.columns.begin(), a.raw.columns.begin() + 6) == head);
    CHECK(a.raw.rows.size() == 6);
    const RunResult b = run_experiment(tiny_gsbf(), o);
    CHECK(to_csv(a.raw) == to_csv(b.raw));
    o.threads = 3;
    CHECK(to_csv(run_experiment(tiny_gsbf(), o).raw) == to_csv(a.raw));
  }

  TEST_CASE("seed offset shifts every seed") {
    RunOptions o;
    o.write_files = false;
    o.seed_offset = 10;
    const RunResult r = run_experiment(tiny_gsbf(), o);
    CHECK(r.raw.number(0, "seed") == 10.0);
    CHECK(r.manifest["config"]["seeds"] == json::array({10, 11, 12}));
  }

  TEST_CASE("rerunning from a manifest reproduces the aggregate") {
    const auto dir = scratch_dir("manifest");
    RunOptions o;
    o.out_dir = (dir / "first").string();
    o.seed_offset = 3;
    const RunResult first = run_experiment(tiny_gsbf(), o);
    CHECK(std::filesystem::exists(first.raw_path));
    CHECK(std::filesystem::exists(first.aggregate_path));
    const ExperimentConfig again = load_config(first.manifest_path);
    RunOptions o2;
    o2.out_dir = (dir / "second").string();
    const RunResult second = run_experiment(again, o2);
    std::ifstream fa(first.aggregate_path, std::ios::binary);
    std::ifstream fb(second.aggregate_path, std::ios::binary);
    const std::string a((std::istreambuf_iterator<char>(fa)), {});
    const std::string b((std::istreambuf_iterator<char>(fb)), {});
    CHECK(a == b);
    CHECK(!a.empty());
  }

  TEST_CASE("bench run reports identical programs") {
    ExperimentConfig c;
    c.experiment = Experiment::BenchStuffing;
    c.bench.sizes = {4};
    c.bench.stuffs = 5;
    c.bench.warmup = 1;
    c.bench.repetitions = 1;
    RunOptions o;
    o.write_files = false;
    const RunResult r = run_experiment(c, o);
    for (const char* col : {"dims", "modeling_time_template_s", "modeling_time_scratch_s", "solving_time_s",
                            "objective_w"})
      CHECK(r.raw.has_column(col));
    CHECK(r.raw.number(0, "identical") == 1.0);
    CHECK(r.raw.text(0, "status") == "Optimal");
  }

  TEST_CASE("plot pivots") {
    Table g;
    g.columns = {"sinr_db", "n", "gsbf_power_w_mean", "gsbf_power_w_std", "all_active_power_w_mean",
                 "all_active_power_w_std"};
    g.add_row({0.0, std::int64_t{2}, 10.0, 1.0, 20.0, 2.0});
    g.add_row({2.0, std::int64_t{2}, 12.0, 1.0, 21.0, 2.0});
    const Table p = emit_plot_data(g);
    CHECK(p.columns == std::vector<std::string>{"series", "x", "y", "y_std"});
    REQUIRE(p.rows.size() == 4);
    CHECK(p.text(0, "series") == "GSBF");
    CHECK(p.text(2, "series") == "all-active");
    CHECK(p.number(3, "x") == 2.0);
    CHECK(p.number(3, "y") == 21.0);

    Table m;
    m.columns = {"snr_db", "n", "optimal_rate_mean", "optimal_rate_std", "mrt_rate_mean", "mrt_rate_std",
                 "zf_rate_mean", "zf_rate_std"};
    m.add_row({10.0, std::int64_t{1}, 3.0, 0.0, 1.0, 0.0, 2.0, 0.0});
    const Table q = emit_plot_data(m);
    REQUIRE(q.rows.size() == 3);
    CHECK(q.text(0, "series") == "optimal");
    CHECK(q.text(1, "series") == "MRT");
    CHECK(q.text(2, "series") == "ZF");

    g.rows.clear();
    const Table empty = emit_plot_data(g);
    CHECK(empty.rows.empty());
    CHECK(to_csv(empty) == "series,x,y,y_std\r\n");

    Table junk;
    junk.columns = {"a", "b"};
    CHECK_THROWS_AS(emit_plot_data(junk), InvalidArgument);
  }

  TEST_CASE("experiment names round trip") {
    for (const std::string& n : experiment_names()) CHECK(to_string(experiment_from_string(n)) == n);
  }
}
