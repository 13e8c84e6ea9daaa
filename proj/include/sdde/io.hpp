#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdde/errors.hpp"
#include "sdde/estimator.hpp"
#include "sdde/grid.hpp"
#include "sdde/harness.hpp"
#include "sdde/kernels.hpp"
#include "sdde/trend.hpp"

namespace sdde {

using json = nlohmann::json;

// 17 significant decimal digits: enough for double round trips.
inline std::string format_sig17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

// Write to <path>.tmp and rename, so failures leave no partial output.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- sample paths: CSV `t,value` plus a JSON metadata sidecar ---

struct PathMeta {
  std::string label;
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::optional<double> H;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> generator;
};

inline std::string sample_path_csv(const SamplePath& path) {
  std::ostringstream out;
  out << "t,value\n";
  for (std::size_t i = 0; i < path.values.size(); ++i)
    out << format_sig17(path.grid.time(i)) << ','
        << format_sig17(path.values[i]) << '\n';
  return out.str();
}

inline json path_meta_json(const PathMeta& m) {
  json j;
  j["label"] = m.label;
  j["t0"] = m.t0;
  j["dt"] = m.dt;
  j["n_steps"] = m.n_steps;
  j["H"] = m.H ? json(*m.H) : json(nullptr);
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  j["generator"] = m.generator ? json(*m.generator) : json(nullptr);
  return j;
}

inline PathMeta path_meta_from_json(const json& j) {
  PathMeta m;
  m.label = j.at("label").get<std::string>();
  m.t0 = j.at("t0").get<double>();
  m.dt = j.at("dt").get<double>();
  m.n_steps = j.at("n_steps").get<std::size_t>();
  if (j.contains("H") && !j["H"].is_null()) m.H = j["H"].get<double>();
  if (j.contains("seed") && !j["seed"].is_null())
    m.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("generator") && !j["generator"].is_null())
    m.generator = j["generator"].get<std::string>();
  return m;
}

inline void write_sample_path(const std::filesystem::path& csv_path,
                              const SamplePath& path, const PathMeta& meta) {
  write_file_atomic(csv_path, sample_path_csv(path));
  std::filesystem::path meta_path = csv_path;
  meta_path.replace_extension(".meta.json");
  write_file_atomic(meta_path, path_meta_json(meta).dump(2) + "\n");
}

inline std::vector<double> parse_csv_values(const std::string& text,
                                            std::vector<double>* times) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t,value")
    throw config_error("sample path CSV: expected header 't,value'");
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw config_error("sample path CSV: malformed row '" + line + "'");
    if (times) times->push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return values;
}

// Reads CSV + sidecar; the sidecar carries the exact (t0, dt, n_steps).
inline SamplePath read_sample_path(const std::filesystem::path& csv_path) {
  std::filesystem::path meta_path = csv_path;
  meta_path.replace_extension(".meta.json");
  const PathMeta meta =
      path_meta_from_json(json::parse(read_file(meta_path)));
  std::vector<double> values = parse_csv_values(read_file(csv_path), nullptr);
  if (values.size() != meta.n_steps + 1)
    throw config_error("sample path CSV/metadata length mismatch");
  return SamplePath(TimeGrid(meta.t0, meta.dt, meta.n_steps),
                    std::move(values), meta.label);
}

// --- trend and kernel specs ---

inline json trend_to_json(const TrendField& trend) {
  return json{{"kind", to_string(trend.kind())}, {"params", trend.params()}};
}

inline TrendField trend_from_json(const json& j) {
  return TrendField::make(j.at("kind").get<std::string>(),
                          j.at("params").get<std::vector<double>>());
}

inline json kernel_to_json(const KernelSpec& k) {
  json j;
  if (!k.name().empty()) j["name"] = k.name();
  else j["coefficients"] = k.coefficients();
  j["order"] = k.order();
  return j;
}

inline KernelSpec kernel_from_json(const json& j) {
  if (j.contains("name")) {
    const auto name = j["name"].get<std::string>();
    if (name == "higher_order")
      return make_higher_order_kernel(j.at("k").get<int>());
    return make_standard_kernel(name);
  }
  if (j.contains("coefficients"))
    return KernelSpec::from_polynomial(
        j["coefficients"].get<std::vector<double>>(),
        j.value("order", 1));
  throw config_error("kernel: need either 'name' or 'coefficients'");
}

// --- trend estimates ---

inline json estimate_to_json(const TrendEstimate& est,
                             const EstimatorConfig& cfg) {
  json j;
  j["value"] = est.value;
  j["hitting_time"] = est.hitting_time;
  j["level"] = std::isnan(est.level) ? json(nullptr) : json(est.level);
  j["edge_clipped"] = est.edge_clipped;
  j["fallback_used"] = est.fallback_used;
  j["bandwidth"] = cfg.bandwidth;
  j["epsilon"] = cfg.epsilon;
  j["H"] = cfg.H.value;
  return j;
}

// --- experiment reports ---

inline json report_to_json(const ExperimentReport& r) {
  json j;
  j["schema"] = 1;
  j["trend"] = {{"kind", r.trend_kind}, {"params", r.trend_params}};
  j["spec"] = {{"tau", r.tau}, {"x0", r.x0}, {"T", r.T}};
  j["H"] = r.h;
  j["epsilons"] = r.epsilons;
  j["levels"] = r.levels;
  j["replications"] = r.replications;
  j["base_seed"] = r.base_seed;
  j["bandwidth_rule"] = r.bandwidth_rule;
  j["smoothness"] = r.smoothness
                        ? json{{"k", r.smoothness->k}, {"beta", r.smoothness->beta}}
                        : json(nullptr);
  json jk;
  if (!r.kernel_name.empty()) jk["name"] = r.kernel_name;
  jk["coefficients"] = r.kernel_coefficients;
  jk["order"] = r.kernel_order;
  j["kernel"] = jk;
  j["dt"] = r.dt_used;
  j["bandwidths"] = r.bandwidths;
  json cells = json::array();
  for (const CellStats& c : r.cells)
    cells.push_back(json{{"epsilon", c.epsilon},
                         {"level", c.level},
                         {"mse", c.mse},
                         {"bias2", c.bias2},
                         {"variance", c.variance},
                         {"n_clipped", c.n_clipped},
                         {"n_fallback", c.n_fallback},
                         {"n_used", c.n_used}});
  j["cells"] = cells;
  j["fit"] = {{"slope", r.fit.slope},
              {"intercept", r.fit.intercept},
              {"max_residual", r.fit.max_residual},
              {"residuals", r.fit.residuals}};
  j["theoretical_slope"] = r.theoretical_slope;
  j["warnings"] = r.warnings;
  return j;
}

inline ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  r.trend_kind = j.at("trend").at("kind").get<std::string>();
  r.trend_params = j.at("trend").at("params").get<std::vector<double>>();
  r.tau = j.at("spec").at("tau").get<double>();
  r.x0 = j.at("spec").at("x0").get<double>();
  r.T = j.at("spec").at("T").get<double>();
  r.h = j.at("H").get<double>();
  r.epsilons = j.at("epsilons").get<std::vector<double>>();
  r.levels = j.at("levels").get<std::vector<double>>();
  r.replications = j.at("replications").get<int>();
  r.base_seed = j.at("base_seed").get<std::uint64_t>();
  r.bandwidth_rule = j.at("bandwidth_rule").get<std::string>();
  if (!j.at("smoothness").is_null())
    r.smoothness = Smoothness{j["smoothness"].at("k").get<int>(),
                              j["smoothness"].at("beta").get<double>()};
  const json& jk = j.at("kernel");
  if (jk.contains("name")) r.kernel_name = jk["name"].get<std::string>();
  r.kernel_coefficients = jk.at("coefficients").get<std::vector<double>>();
  r.kernel_order = jk.at("order").get<int>();
  r.dt_used = j.at("dt").get<double>();
  r.bandwidths = j.at("bandwidths").get<std::vector<double>>();
  for (const json& jc : j.at("cells")) {
    CellStats c;
    c.epsilon = jc.at("epsilon").get<double>();
    c.level = jc.at("level").get<double>();
    c.mse = jc.at("mse").get<double>();
    c.bias2 = jc.at("bias2").get<double>();
    c.variance = jc.at("variance").get<double>();
    c.n_clipped = jc.at("n_clipped").get<long>();
    c.n_fallback = jc.at("n_fallback").get<long>();
    c.n_used = jc.at("n_used").get<long>();
    r.cells.push_back(c);
  }
  r.fit.slope = j.at("fit").at("slope").get<double>();
  r.fit.intercept = j.at("fit").at("intercept").get<double>();
  r.fit.max_residual = j.at("fit").at("max_residual").get<double>();
  r.fit.residuals = j.at("fit").at("residuals").get<std::vector<double>>();
  r.theoretical_slope = j.at("theoretical_slope").get<double>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

inline std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "epsilon,level,mse,bias2,variance,n_clipped,n_fallback\n";
  for (const CellStats& c : r.cells)
    out << format_sig17(c.epsilon) << ',' << format_sig17(c.level) << ','
        << format_sig17(c.mse) << ',' << format_sig17(c.bias2) << ','
        << format_sig17(c.variance) << ',' << c.n_clipped << ','
        << c.n_fallback << '\n';
  return out.str();
}

enum class ReportFormat { csv, json };

inline void export_report(const ExperimentReport& r,
                          const std::filesystem::path& path,
                          ReportFormat format) {
  if (format == ReportFormat::csv)
    write_file_atomic(path, report_csv(r));
  else
    write_file_atomic(path, report_to_json(r).dump(2) + "\n");
}

inline ExperimentReport import_report(const std::filesystem::path& path) {
  return report_from_json(json::parse(read_file(path)));
}

// --- experiment configuration (rate-experiment input) ---

inline BandwidthRule bandwidth_rule_from_string(const std::string& s) {
  if (s == "theorem31") return BandwidthRule::theorem31;
  if (s == "smooth") return BandwidthRule::smooth;
  if (s == "manual") return BandwidthRule::manual;
  throw config_error("unknown bandwidth rule '" + s + "'");
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  if (j.value("schema", 0) != 1)
    throw config_error("config: expected \"schema\": 1");
  BandwidthRule rule = BandwidthRule::theorem31;
  std::optional<Smoothness> smoothness;
  if (j.contains("bandwidth_rule")) {
    const json& jr = j["bandwidth_rule"];
    if (jr.is_string()) {
      rule = bandwidth_rule_from_string(jr.get<std::string>());
    } else {
      rule = bandwidth_rule_from_string(jr.at("rule").get<std::string>());
      if (jr.contains("k"))
        smoothness = Smoothness{jr.at("k").get<int>(),
                                jr.value("beta", 1.0)};
    }
  }
  std::optional<double> dt;
  if (j.contains("dt") && j["dt"].is_number()) dt = j["dt"].get<double>();
  const json& js = j.at("spec");
  return ExperimentConfig{
      trend_from_json(j.at("trend")),
      DelaySpec(js.at("tau").get<double>(), js.at("x0").get<double>(),
                js.at("T").get<double>()),
      HurstIndex(j.at("H").get<double>()),
      j.at("epsilons").get<std::vector<double>>(),
      j.at("replications").get<int>(),
      j.at("levels").get<std::vector<double>>(),
      kernel_from_json(j.at("kernel")),
      rule,
      smoothness,
      dt,
      j.value("base_seed", std::uint64_t{0}),
      j.value("threads", 0u)};
}

}  // namespace sdde
