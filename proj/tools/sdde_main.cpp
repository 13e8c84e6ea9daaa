// Batch command-line front end: simulation, estimation, rate experiments,
// kernel checks, and the linear fundamental solution. Every subcommand reads
// a JSON config and writes files into an output directory; outputs are staged
// to temp names and renamed only after every write succeeded, so a failed run
// leaves no partial files.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <sdde/sdde.hpp>

namespace fs = std::filesystem;
using sdde::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::int64_t> seed;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "cap worker threads");
}

// All-or-nothing output publication: stage to <name>.tmp, rename at the end.
class OutputStager {
 public:
  explicit OutputStager(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }
  void add(const std::string& name, std::string content) {
    staged_.emplace_back(name, std::move(content));
  }
  void commit() {
    std::vector<fs::path> tmps;
    try {
      for (const auto& [name, content] : staged_) {
        fs::path tmp = dir_ / (name + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        out.close();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
        tmps.push_back(tmp);
      }
    } catch (...) {
      for (const fs::path& t : tmps) {
        std::error_code ec;
        fs::remove(t, ec);
      }
      throw;
    }
    for (const auto& [name, content] : staged_)
      fs::rename(dir_ / (name + ".tmp"), dir_ / name);
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> staged_;
};

json load_config(const std::string& path) {
  json j = json::parse(sdde::read_file(path));
  if (j.value("schema", 0) != 1)
    throw sdde::config_error("config: expected \"schema\": 1");
  return j;
}

void warn_h_regime(sdde::HurstIndex H) {
  if (!H.wiener_integral_regime())
    std::cerr << "warning: H = " << H.value
              << " < 0.5 is outside the proven regime of the rate theory\n";
}

// Collects schema violations so they can be reported in one line,
// field by field.
class FieldChecker {
 public:
  explicit FieldChecker(const json& j) : j_(j) {}

  template <typename T>
  T get(const std::string& key, const char* expect) {
    if (!j_.contains(key)) {
      errors_.push_back("missing field '" + key + "' (" + expect + ")");
      return T{};
    }
    try {
      return j_.at(key).get<T>();
    } catch (const std::exception&) {
      errors_.push_back("field '" + key + "' must be " + expect);
      return T{};
    }
  }

  json get_object(const std::string& key) {
    if (!j_.contains(key) || !j_[key].is_object()) {
      errors_.push_back("missing object field '" + key + "'");
      return json::object();
    }
    return j_[key];
  }

  void require(bool ok, const std::string& msg) {
    if (!ok) errors_.push_back(msg);
  }

  void throw_if_errors() const {
    if (errors_.empty()) return;
    std::string msg = "config error: ";
    for (std::size_t i = 0; i < errors_.size(); ++i) {
      if (i) msg += "; ";
      msg += errors_[i];
    }
    throw sdde::config_error(msg);
  }

 private:
  const json& j_;
  std::vector<std::string> errors_;
};

struct SimulateConfig {
  sdde::TrendField trend;
  sdde::DelaySpec spec;
  sdde::HurstIndex H;
  double epsilon;
  double dt;
  std::uint64_t seed;
};

SimulateConfig parse_simulate_config(const json& j) {
  FieldChecker check(j);
  const json jt = check.get_object("trend");
  const json js = check.get_object("spec");
  const double h = check.get<double>("H", "a number in (0,1)");
  const double epsilon = check.get<double>("epsilon", "a number >= 0");
  const double dt = check.get<double>("dt", "a number > 0");
  const auto seed = check.get<std::uint64_t>("seed", "an integer");
  check.require(!j.contains("epsilon") || epsilon >= 0.0,
                "field 'epsilon' must be >= 0");
  check.require(!j.contains("dt") || dt > 0.0, "field 'dt' must be > 0");
  check.require(!j.contains("H") || (h > 0.0 && h < 1.0),
                "field 'H' must be in (0,1)");
  check.throw_if_errors();

  FieldChecker check_t(jt);
  const auto kind = check_t.get<std::string>("kind", "a trend catalog name");
  const auto params =
      check_t.get<std::vector<double>>("params", "an array of numbers");
  check_t.throw_if_errors();

  FieldChecker check_s(js);
  const double tau = check_s.get<double>("tau", "a number >= 0");
  const double x0 = check_s.get<double>("x0", "a number");
  const double T = check_s.get<double>("T", "a number > tau");
  check_s.throw_if_errors();

  return SimulateConfig{sdde::TrendField::make(kind, params),
                        sdde::DelaySpec(tau, x0, T), sdde::HurstIndex(h),
                        epsilon, dt, seed};
}

int cmd_simulate(const CommonArgs& args) {
  json j = load_config(args.config_path);
  if (args.seed) j["seed"] = *args.seed;
  const SimulateConfig cfg = parse_simulate_config(j);
  warn_h_regime(cfg.H);

  const sdde::SdeSample sim = sdde::simulate_delay_sde(
      cfg.trend, cfg.spec, cfg.epsilon, cfg.H, cfg.dt, cfg.seed);
  const sdde::SamplePath x = sdde::solve_delay_ode(cfg.trend, cfg.spec, cfg.dt);

  auto meta = [&](const std::string& label, bool stochastic) {
    sdde::PathMeta m;
    m.label = label;
    m.t0 = 0.0;
    m.dt = cfg.dt;
    m.n_steps = sim.X.grid.n_steps;
    if (stochastic) {
      m.H = cfg.H.value;
      m.seed = cfg.seed;
      m.generator = sim.generator;
    }
    return m;
  };

  OutputStager out(args.out_dir);
  out.add("X.csv", sdde::sample_path_csv(sim.X));
  out.add("X.meta.json", sdde::path_meta_json(meta("X", true)).dump(2) + "\n");
  out.add("W.csv", sdde::sample_path_csv(sim.W));
  out.add("W.meta.json",
          sdde::path_meta_json(meta("fbm", true)).dump(2) + "\n");
  out.add("x_noiseless.csv", sdde::sample_path_csv(x));
  out.add("x_noiseless.meta.json",
          sdde::path_meta_json(meta("x", false)).dump(2) + "\n");

  json run;
  run["schema"] = 1;
  run["trend"] = sdde::trend_to_json(cfg.trend);
  run["spec"] = {{"tau", cfg.spec.tau}, {"x0", cfg.spec.x0}, {"T", cfg.spec.T}};
  run["H"] = cfg.H.value;
  run["epsilon"] = cfg.epsilon;
  run["dt"] = cfg.dt;
  run["seed"] = cfg.seed;
  run["generator"] = sim.generator;
  run["embedding_fallback"] = sim.embedding_fallback;
  run["files"] = {{"X", "X.csv"}, {"W", "W.csv"}, {"x", "x_noiseless.csv"}};
  out.add("metadata.json", run.dump(2) + "\n");
  out.commit();
  return 0;
}

int cmd_estimate(const CommonArgs& args) {
  json j = load_config(args.config_path);
  const auto mode = j.at("mode").get<std::string>();
  if (mode != "at-level" && mode != "at-time")
    throw sdde::config_error("mode must be 'at-level' or 'at-time'");

  const double epsilon = j.at("epsilon").get<double>();
  const sdde::HurstIndex H(j.at("H").get<double>());
  const double tau = j.at("tau").get<double>();
  warn_h_regime(H);

  sdde::EstimatorConfig est_cfg = [&] {
    const json& jb = j.at("bandwidth");
    if (jb.contains("value"))
      return sdde::EstimatorConfig::manual(epsilon, H, tau,
                                           jb["value"].get<double>());
    const auto rule = jb.at("rule").get<std::string>();
    if (rule == "theorem31")
      return sdde::EstimatorConfig::theorem31(epsilon, H, tau);
    if (rule == "smooth")
      return sdde::EstimatorConfig::smooth(epsilon, H, tau,
                                           jb.at("k").get<int>(),
                                           jb.value("beta", 1.0));
    throw sdde::config_error("unknown bandwidth rule '" + rule + "'");
  }();
  if (epsilon >= 1.0)
    std::cerr << "warning: epsilon >= 1 is outside the small-noise regime the "
                 "bandwidth rules are built for\n";

  const sdde::KernelSpec kernel = sdde::kernel_from_json(j.at("kernel"));

  sdde::SamplePath X;
  std::optional<sdde::LevelWindow> window;
  const json& src = j.at("source");
  if (src.contains("path_csv")) {
    fs::path p = src["path_csv"].get<std::string>();
    if (p.is_relative()) p = fs::path(args.config_path).parent_path() / p;
    X = sdde::read_sample_path(p);
  } else if (src.contains("simulate")) {
    json sj = src["simulate"];
    sj["H"] = H.value;
    sj["epsilon"] = epsilon;
    if (!sj.contains("spec"))
      sj["spec"] = {{"tau", tau}, {"x0", sj.value("x0", 0.0)},
                    {"T", sj.at("T").get<double>()}};
    if (args.seed) sj["seed"] = *args.seed;
    const SimulateConfig sim_cfg = parse_simulate_config(sj);
    X = sdde::simulate_delay_sde(sim_cfg.trend, sim_cfg.spec, epsilon, H,
                                 sim_cfg.dt, sim_cfg.seed)
            .X;
    window = sdde::admissible_level_window(sim_cfg.spec.x0, sim_cfg.spec.T,
                                           tau, sim_cfg.trend.alpha());
  } else {
    throw sdde::config_error("source: need 'path_csv' or 'simulate'");
  }

  const auto centers = j.at(mode == "at-level" ? "levels" : "times")
                           .get<std::vector<double>>();
  if (centers.empty()) throw sdde::config_error("no levels/times given");

  json estimates = json::array();
  std::ostringstream csv;
  csv << (mode == "at-level" ? "level" : "time")
      << ",value,hitting_time,edge_clipped,fallback_used\n";
  for (double c : centers) {
    sdde::TrendEstimate est;
    try {
      est = (mode == "at-level")
                ? sdde::estimate_trend_at_level(X, c, est_cfg, kernel, window)
                : sdde::estimate_trend_at_time(X, c, est_cfg, kernel);
    } catch (const std::exception& ex) {
      throw sdde::config_error("at " + std::string(mode == "at-level"
                                                       ? "level "
                                                       : "time ") +
                               std::to_string(c) + ": " + ex.what());
    }
    estimates.push_back(sdde::estimate_to_json(est, est_cfg));
    csv << sdde::format_sig17(c) << ',' << sdde::format_sig17(est.value) << ','
        << sdde::format_sig17(est.hitting_time) << ','
        << (est.edge_clipped ? 1 : 0) << ',' << (est.fallback_used ? 1 : 0)
        << '\n';
  }

  OutputStager out(args.out_dir);
  out.add("estimates.json", estimates.dump(2) + "\n");
  out.add("summary.csv", csv.str());
  out.commit();
  return 0;
}

int cmd_rate_experiment(const CommonArgs& args) {
  sdde::ExperimentConfig cfg =
      sdde::experiment_config_from_json(load_config(args.config_path));
  if (args.seed) cfg.base_seed = static_cast<std::uint64_t>(*args.seed);
  if (args.threads) cfg.threads = args.threads;
  warn_h_regime(cfg.H);

  const sdde::ExperimentReport rep = sdde::run_mse_experiment(cfg);

  OutputStager out(args.out_dir);
  out.add("report.json", sdde::report_to_json(rep).dump(2) + "\n");
  out.add("report.csv", sdde::report_csv(rep));
  out.commit();
  std::cout << "fitted slope = " << rep.fit.slope
            << "  theoretical slope = " << rep.theoretical_slope << "\n";
  return 0;
}

int cmd_kernel_check(const CommonArgs& args) {
  const json j = load_config(args.config_path);
  const sdde::KernelSpec kernel = sdde::kernel_from_json(j.at("kernel"));
  const int j_max = std::max(kernel.order(), 6);

  std::ostringstream csv;
  csv << "j,moment\n";
  for (int m = 0; m <= j_max; ++m)
    csv << m << ',' << sdde::format_sig17(kernel.moment(m)) << '\n';

  constexpr double tol = 1e-10;
  const double m0 = kernel.moment(0);
  double max_vanishing = 0.0;
  for (int m = 1; m <= kernel.order(); ++m)
    max_vanishing = std::max(max_vanishing, std::abs(kernel.moment(m)));
  double sup = 0.0;
  for (int i = -1000; i <= 1000; ++i)
    sup = std::max(sup, std::abs(kernel(i / 1000.0)));
  const bool support_ok = kernel(1.0) == 0.0 && kernel(-1.0) == 0.0 &&
                          kernel(1.5) == 0.0 && kernel(-2.0) == 0.0;

  json checks;
  checks["schema"] = 1;
  checks["kernel"] = sdde::kernel_to_json(kernel);
  checks["unit_mass"] = {{"value", m0}, {"pass", std::abs(m0 - 1.0) <= tol}};
  checks["vanishing_moments"] = {{"order", kernel.order()},
                                 {"max_abs", max_vanishing},
                                 {"pass", max_vanishing <= tol}};
  checks["compact_support"] = {{"pass", support_ok}};
  checks["bounded"] = {{"sup", sup}, {"pass", std::isfinite(sup)}};
  const bool pass = std::abs(m0 - 1.0) <= tol && max_vanishing <= tol &&
                    support_ok && std::isfinite(sup);
  checks["pass"] = pass;

  OutputStager out(args.out_dir);
  out.add("moments.csv", csv.str());
  out.add("checks.json", checks.dump(2) + "\n");
  out.commit();
  std::cout << "kernel check: " << (pass ? "pass" : "fail") << "\n";
  return 0;
}

int cmd_fundamental_solution(const CommonArgs& args) {
  const json j = load_config(args.config_path);
  const double a = j.at("a").get<double>();
  const double b = j.at("b").get<double>();
  const double T = j.at("T").get<double>();
  const double dt = j.at("dt").get<double>();
  const sdde::SamplePath x0 = sdde::fundamental_solution_linear(a, b, T, dt);

  sdde::PathMeta meta;
  meta.label = "x0";
  meta.t0 = 0.0;
  meta.dt = dt;
  meta.n_steps = x0.grid.n_steps;

  OutputStager out(args.out_dir);
  out.add("x0.csv", sdde::sample_path_csv(x0));
  out.add("x0.meta.json", sdde::path_meta_json(meta).dump(2) + "\n");
  out.commit();
  return 0;
}

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "simulation and kernel trend estimation for delay SDEs driven by "
      "fractional Brownian motion"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* simulate = app.add_subcommand("simulate", "simulate one path set");
  CLI::App* estimate =
      app.add_subcommand("estimate", "kernel trend estimates on a path");
  CLI::App* rate = app.add_subcommand("rate-experiment",
                                      "Monte-Carlo MSE rate experiment");
  CLI::App* kcheck =
      app.add_subcommand("kernel-check", "kernel moment conditions");
  CLI::App* fund = app.add_subcommand("fundamental-solution",
                                      "linear delay fundamental solution");
  for (CLI::App* cmd : {simulate, estimate, rate, kcheck, fund})
    add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (estimate->parsed()) return cmd_estimate(args);
    if (rate->parsed()) return cmd_rate_experiment(args);
    if (kcheck->parsed()) return cmd_kernel_check(args);
    if (fund->parsed()) return cmd_fundamental_solution(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 1;
}
