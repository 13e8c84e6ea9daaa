#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <sdde/io.hpp>

using namespace sdde;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("sdde_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

struct CliResult {
  int exit_code;
  std::string err;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const fs::path err = work_dir() / "stderr.txt";
  const fs::path out = work_dir() / "stdout.txt";
  const std::string cmd = std::string("\"") + SDDE_CLI_BIN + "\" " + args +
                          " > \"" + out.string() + "\" 2> \"" + err.string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(err);
  r.out = read_file(out);
  return r;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = work_dir() / name;
  std::ofstream f(p);
  f << j.dump(2);
  return p;
}

json simulate_config(double epsilon, int seed) {
  return json{
      {"schema", 1},
      {"trend", {{"kind", "constant"}, {"params", {2.0}}}},
      {"spec", {{"tau", 1.0}, {"x0", 0.0}, {"T", 3.0}}},
      {"H", 0.5},
      {"epsilon", epsilon},
      {"dt", 1e-3},
      {"seed", seed}};
}

}  // namespace

TEST_CASE("simulate writes consistent path files", "[cli]") {
  const fs::path cfg = write_config("sim.json", simulate_config(0.3, 5));
  const fs::path out = work_dir() / "sim_out";
  auto r = run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                   out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  for (const char* f : {"X.csv", "W.csv", "x_noiseless.csv", "metadata.json",
                        "X.meta.json", "W.meta.json"})
    CHECK(fs::exists(out / f));

  SamplePath X = read_sample_path(out / "X.csv");
  SamplePath W = read_sample_path(out / "W.csv");
  SamplePath x = read_sample_path(out / "x_noiseless.csv");
  REQUIRE(X.values.size() == W.values.size());
  for (std::size_t i = 0; i < X.values.size(); i += 101) {
    const double expected = 2.0 * X.grid.time(i) + 0.3 * W.values[i];
    CHECK(X.values[i] == Approx(expected).margin(1e-10));
    CHECK(x.values[i] == Approx(2.0 * X.grid.time(i)).margin(1e-10));
  }
  const json meta = json::parse(read_file(out / "metadata.json"));
  CHECK(meta["generator"] == "davies-harte");
  CHECK(meta["embedding_fallback"] == false);

  SECTION("bit-identical on rerun") {
    const fs::path out2 = work_dir() / "sim_out2";
    auto r2 = run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                      out2.string() + "\"");
    REQUIRE(r2.exit_code == 0);
    for (const char* f : {"X.csv", "W.csv", "x_noiseless.csv"})
      CHECK(read_file(out / f) == read_file(out2 / f));
  }
  SECTION("seed override changes the noise") {
    const fs::path out3 = work_dir() / "sim_out3";
    auto r3 = run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                      out3.string() + "\" --seed 6");
    REQUIRE(r3.exit_code == 0);
    CHECK(read_file(out / "X.csv") != read_file(out3 / "X.csv"));
  }
}

TEST_CASE("simulate with zero noise matches the ODE path", "[cli]") {
  const fs::path cfg = write_config("sim0.json", simulate_config(0.0, 5));
  const fs::path out = work_dir() / "sim0_out";
  REQUIRE(run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                  out.string() + "\"")
              .exit_code == 0);
  SamplePath X = read_sample_path(out / "X.csv");
  SamplePath x = read_sample_path(out / "x_noiseless.csv");
  double sup = 0.0;
  for (std::size_t i = 0; i < X.values.size(); ++i)
    sup = std::max(sup, std::abs(X.values[i] - x.values[i]));
  CHECK(sup <= 10.0 * 1e-3 * 2.0);
}

TEST_CASE("simulate rejects bad configs field by field", "[cli]") {
  json bad = simulate_config(0.3, 5);
  bad.erase("epsilon");
  bad["dt"] = -1.0;
  const fs::path cfg = write_config("bad.json", bad);
  const fs::path out = work_dir() / "bad_out";
  auto r = run_cli("simulate --config \"" + cfg.string() + "\" --out \"" +
                   out.string() + "\"");
  CHECK(r.exit_code != 0);
  CHECK(r.err.rfind("error:", 0) == 0);
  CHECK(r.err.find("epsilon") != std::string::npos);
  CHECK(r.err.find("dt") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);  // single line
  // no partial outputs
  CHECK((!fs::exists(out) || fs::is_empty(out)));
}

TEST_CASE("estimate on an inline simulation", "[cli]") {
  json cfg = {{"schema", 1},
              {"mode", "at-level"},
              {"levels", {1.0, 2.0}},
              {"epsilon", 1e-6},
              {"H", 0.5},
              {"tau", 1.0},
              {"bandwidth", {{"value", 0.25}}},
              {"kernel", {{"name", "epanechnikov"}}},
              {"source",
               {{"simulate",
                 {{"trend", {{"kind", "constant"}, {"params", {2.0}}}},
                  {"spec", {{"tau", 1.0}, {"x0", 0.0}, {"T", 4.0}}},
                  {"dt", 1e-3},
                  {"seed", 3}}}}}};
  const fs::path cfgp = write_config("est.json", cfg);
  const fs::path out = work_dir() / "est_out";
  auto r = run_cli("estimate --config \"" + cfgp.string() + "\" --out \"" +
                   out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  const json estimates = json::parse(read_file(out / "estimates.json"));
  REQUIRE(estimates.size() == 2);
  CHECK(estimates[0]["value"].get<double>() == Approx(2.0).margin(0.05));
  CHECK(estimates[1]["value"].get<double>() == Approx(2.0).margin(0.05));
  CHECK(estimates[0]["fallback_used"] == false);
  const std::string csv = read_file(out / "summary.csv");
  CHECK(csv.rfind("level,value,hitting_time,edge_clipped,fallback_used\n",
                  0) == 0);

  SECTION("at-time at the same center equals the at-level value") {
    const double center = estimates[0]["hitting_time"].get<double>();
    json cfg_t = cfg;
    cfg_t["mode"] = "at-time";
    cfg_t.erase("levels");
    cfg_t["times"] = {center};
    const fs::path cfgp2 = write_config("est_t.json", cfg_t);
    const fs::path out2 = work_dir() / "est_t_out";
    REQUIRE(run_cli("estimate --config \"" + cfgp2.string() + "\" --out \"" +
                    out2.string() + "\"")
                .exit_code == 0);
    const json est_t = json::parse(read_file(out2 / "estimates.json"));
    CHECK(est_t[0]["value"].get<double>() ==
          estimates[0]["value"].get<double>());
    CHECK(est_t[0]["level"].is_null());
  }
}

TEST_CASE("estimate from a path csv", "[cli]") {
  // simulate first, then estimate on the written path
  const fs::path sim_cfg = write_config("sim_for_est.json",
                                        simulate_config(0.05, 8));
  const fs::path sim_out = work_dir() / "sim_for_est";
  REQUIRE(run_cli("simulate --config \"" + sim_cfg.string() + "\" --out \"" +
                  sim_out.string() + "\"")
              .exit_code == 0);
  json cfg = {{"schema", 1},
              {"mode", "at-level"},
              {"levels", {2.0, 5.9}},
              {"epsilon", 0.05},
              {"H", 0.5},
              {"tau", 1.0},
              {"bandwidth", {{"rule", "theorem31"}}},
              {"kernel", {{"name", "epanechnikov"}}},
              {"source", {{"path_csv", (sim_out / "X.csv").string()}}}};
  const fs::path cfgp = write_config("est_path.json", cfg);
  const fs::path out = work_dir() / "est_path_out";
  auto r = run_cli("estimate --config \"" + cfgp.string() + "\" --out \"" +
                   out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  const json estimates = json::parse(read_file(out / "estimates.json"));
  CHECK(estimates[0]["value"].get<double>() == Approx(2.0).margin(0.3));
  CHECK(estimates[0]["bandwidth"].get<double>() ==
        Approx(bandwidth_theorem31(0.05, HurstIndex(0.5))));
  // the path tops out near 2(T - tau) = 4, so level 5.9 is never reached
  CHECK(estimates[1]["fallback_used"] == true);
}

TEST_CASE("rate experiment command", "[cli]") {
  json cfg = {
      {"schema", 1},
      {"trend", {{"kind", "tanh_sine"}, {"params", {2.0, 0.5, 0.3, 1.0}}}},
      {"spec", {{"tau", 0.5}, {"x0", 0.0}, {"T", 3.0}}},
      {"H", 0.5},
      {"epsilons", {0.1, 0.08, 0.06, 0.04}},
      {"replications", 100},
      {"levels", {1.8}},
      {"kernel", {{"name", "epanechnikov"}}},
      {"bandwidth_rule", "theorem31"},
      {"base_seed", 4}};
  const fs::path cfgp = write_config("rate.json", cfg);
  const fs::path out = work_dir() / "rate_out";
  auto r = run_cli("rate-experiment --config \"" + cfgp.string() +
                   "\" --out \"" + out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("fitted slope") != std::string::npos);
  CHECK(r.out.find("theoretical slope = 1.6") != std::string::npos);
  const json rep = json::parse(read_file(out / "report.json"));
  CHECK(rep["theoretical_slope"] == 1.6);
  CHECK(rep["fit"].contains("slope"));
  CHECK(read_file(out / "report.csv")
            .rfind("epsilon,level,mse,bias2,variance,n_clipped,n_fallback\n",
                   0) == 0);

  SECTION("identical report files on rerun") {
    const fs::path out2 = work_dir() / "rate_out2";
    REQUIRE(run_cli("rate-experiment --config \"" + cfgp.string() +
                    "\" --out \"" + out2.string() + "\"")
                .exit_code == 0);
    CHECK(read_file(out / "report.json") == read_file(out2 / "report.json"));
    CHECK(read_file(out / "report.csv") == read_file(out2 / "report.csv"));
  }
}

TEST_CASE("kernel check command", "[cli]") {
  SECTION("epanechnikov passes") {
    const fs::path cfgp = write_config(
        "kc.json", json{{"schema", 1}, {"kernel", {{"name", "epanechnikov"}}}});
    const fs::path out = work_dir() / "kc_out";
    auto r = run_cli("kernel-check --config \"" + cfgp.string() +
                     "\" --out \"" + out.string() + "\"");
    REQUIRE(r.exit_code == 0);
    const json checks = json::parse(read_file(out / "checks.json"));
    CHECK(checks["pass"] == true);
    CHECK(checks["unit_mass"]["pass"] == true);
    const std::string csv = read_file(out / "moments.csv");
    CHECK(csv.rfind("j,moment\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);  // header + j=0..6
  }
  SECTION("higher-order kernel passes") {
    const fs::path cfgp = write_config(
        "kc3.json",
        json{{"schema", 1}, {"kernel", {{"name", "higher_order"}, {"k", 3}}}});
    const fs::path out = work_dir() / "kc3_out";
    auto r = run_cli("kernel-check --config \"" + cfgp.string() +
                     "\" --out \"" + out.string() + "\"");
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(read_file(out / "checks.json"))["pass"] == true);
  }
  SECTION("unnormalized coefficients fail condition (i)") {
    const fs::path cfgp = write_config(
        "kcbad.json",
        json{{"schema", 1},
             {"kernel", {{"coefficients", {2.0}}, {"order", 1}}}});
    const fs::path out = work_dir() / "kcbad_out";
    auto r = run_cli("kernel-check --config \"" + cfgp.string() +
                     "\" --out \"" + out.string() + "\"");
    REQUIRE(r.exit_code == 0);
    const json checks = json::parse(read_file(out / "checks.json"));
    CHECK(checks["unit_mass"]["pass"] == false);
    CHECK(checks["pass"] == false);
  }
  SECTION("unknown kernel errors") {
    const fs::path cfgp = write_config(
        "kcunk.json", json{{"schema", 1}, {"kernel", {{"name", "gauss"}}}});
    auto r = run_cli("kernel-check --config \"" + cfgp.string() +
                     "\" --out \"" + (work_dir() / "kcunk_out").string() +
                     "\"");
    CHECK(r.exit_code != 0);
    CHECK(r.err.rfind("error:", 0) == 0);
  }
}

TEST_CASE("fundamental solution command", "[cli]") {
  const fs::path cfgp = write_config(
      "fund.json",
      json{{"schema", 1}, {"a", 0.0}, {"b", 0.0}, {"T", 2.0}, {"dt", 1e-3}});
  const fs::path out = work_dir() / "fund_out";
  auto r = run_cli("fundamental-solution --config \"" + cfgp.string() +
                   "\" --out \"" + out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  SamplePath x0 = read_sample_path(out / "x0.csv");
  for (double v : x0.values) CHECK(v == Approx(1.0).margin(1e-13));

  SECTION("alignment violation") {
    const fs::path bad = write_config(
        "fund_bad.json",
        json{{"schema", 1}, {"a", 1.0}, {"b", 0.5}, {"T", 2.0}, {"dt", 0.3}});
    auto rb = run_cli("fundamental-solution --config \"" + bad.string() +
                      "\" --out \"" + (work_dir() / "fund_bad_out").string() +
                      "\"");
    CHECK(rb.exit_code != 0);
    CHECK(rb.err.rfind("error:", 0) == 0);
  }
}

TEST_CASE("H below one half prints a warning", "[cli]") {
  json cfg = simulate_config(0.1, 2);
  cfg["H"] = 0.3;
  const fs::path cfgp = write_config("sim_lowh.json", cfg);
  const fs::path out = work_dir() / "sim_lowh_out";
  auto r = run_cli("simulate --config \"" + cfgp.string() + "\" --out \"" +
                   out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(r.err.find("0.5") != std::string::npos);
}
