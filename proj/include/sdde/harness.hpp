#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdde/delay.hpp"
#include "sdde/detail/parallel.hpp"
#include "sdde/detail/sums.hpp"
#include "sdde/errors.hpp"
#include "sdde/estimator.hpp"
#include "sdde/kernels.hpp"
#include "sdde/trend.hpp"

namespace sdde {

// Monte-Carlo experiment: for a grid of noise levels, estimate the trend at
// fixed levels over many replicates and regress log MSE on log epsilon.
struct ExperimentConfig {
  TrendField trend;
  DelaySpec spec;
  HurstIndex H;
  std::vector<double> epsilons;  // strictly decreasing, in (0,1), >= 4 values
  int replications;              // >= 100
  std::vector<double> levels;
  KernelSpec kernel;
  BandwidthRule rule = BandwidthRule::theorem31;
  std::optional<Smoothness> smoothness;
  std::optional<double> dt;  // default: bandwidth(min eps)/50, tau-aligned
  std::uint64_t base_seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct CellStats {
  double epsilon = 0.0;
  double level = 0.0;
  double mse = 0.0;
  double bias2 = 0.0;
  double variance = 0.0;
  long n_clipped = 0;
  long n_fallback = 0;
  long n_used = 0;

  friend bool operator==(const CellStats&, const CellStats&) = default;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::vector<double> residuals;

  friend bool operator==(const RateFit&, const RateFit&) = default;
};

inline bool operator==(const Smoothness& a, const Smoothness& b) {
  return a.k == b.k && a.beta == b.beta;
}

struct ExperimentReport {
  // configuration echo, so the report is self-describing
  std::string trend_kind;
  std::vector<double> trend_params;
  double tau = 0.0, x0 = 0.0, T = 0.0, h = 0.5;
  std::vector<double> epsilons;
  std::vector<double> levels;
  int replications = 0;
  std::uint64_t base_seed = 0;
  std::string bandwidth_rule;
  std::optional<Smoothness> smoothness;
  std::string kernel_name;
  std::vector<double> kernel_coefficients;
  int kernel_order = 1;
  // results
  double dt_used = 0.0;
  std::vector<double> bandwidths;  // one per epsilon
  std::vector<CellStats> cells;    // epsilon-major, level-minor
  RateFit fit;                     // log mean-over-levels MSE vs log epsilon
  double theoretical_slope = 0.0;  // from the bandwidth rule, never fitted
  std::vector<std::string> warnings;

  friend bool operator==(const ExperimentReport&,
                         const ExperimentReport&) = default;
};

// Ordinary least squares of log(mse) on log(epsilon).
inline RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 points");
  std::vector<double> lx, ly;
  for (const auto& [eps, mse] : points) {
    if (!(eps > 0.0) || !(mse > 0.0))
      throw std::domain_error("fit_rate: points must be positive");
    lx.push_back(std::log(eps));
    ly.push_back(std::log(mse));
  }
  const double mx = detail::pairwise_mean(lx);
  const double my = detail::pairwise_mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    fit.residuals.push_back(r);
    fit.max_residual = std::max(fit.max_residual, std::abs(r));
  }
  return fit;
}

inline double theoretical_rate_slope(HurstIndex H, BandwidthRule rule,
                                     const std::optional<Smoothness>& s) {
  if (rule == BandwidthRule::smooth) {
    if (!s) throw config_error("smooth bandwidth rule needs (k, beta)");
    const double k = s->k, b = s->beta;
    return 2.0 * (k + b) / (k - H.value + b + 1.0);
  }
  return 4.0 / (3.0 - H.value);
}

inline std::string to_string(BandwidthRule r) {
  switch (r) {
    case BandwidthRule::theorem31: return "theorem31";
    case BandwidthRule::smooth: return "smooth";
    case BandwidthRule::manual: return "manual";
  }
  return "?";
}

namespace detail {

inline double experiment_bandwidth(const ExperimentConfig& cfg, double eps) {
  switch (cfg.rule) {
    case BandwidthRule::theorem31:
      return bandwidth_theorem31(eps, cfg.H);
    case BandwidthRule::smooth:
      if (!cfg.smoothness)
        throw config_error("smooth bandwidth rule needs (k, beta)");
      return bandwidth_smooth(eps, cfg.H, cfg.smoothness->k,
                              cfg.smoothness->beta);
    case BandwidthRule::manual:
      throw config_error("rate experiments need a bandwidth rule, not manual");
  }
  throw config_error("unknown bandwidth rule");
}

// dt = bandwidth(min eps)/50, snapped down so that both tau and T are exact
// multiples.
inline double experiment_dt(const ExperimentConfig& cfg) {
  if (cfg.dt) return *cfg.dt;
  const double eps_min = cfg.epsilons.back();
  const double raw = experiment_bandwidth(cfg, eps_min) / 50.0;
  if (cfg.spec.tau <= 0.0) {
    const auto n = static_cast<std::size_t>(std::ceil(cfg.spec.T / raw - 1e-9));
    return cfg.spec.T / static_cast<double>(n);
  }
  auto k0 = static_cast<std::size_t>(std::ceil(cfg.spec.tau / raw - 1e-9));
  const double f = cfg.spec.T / cfg.spec.tau;
  for (std::size_t k = k0; k < k0 + 100000; ++k) {
    const double steps = f * static_cast<double>(k);
    if (std::abs(steps - std::round(steps)) < 1e-9)
      return cfg.spec.tau / static_cast<double>(k);
  }
  throw config_error(
      "could not align dt with both tau and T; give dt explicitly");
}

inline void validate_experiment(const ExperimentConfig& cfg) {
  if (cfg.epsilons.size() < 4)
    throw config_error("need at least 4 epsilon values for the rate fit");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    const double e = cfg.epsilons[i];
    if (!(e > 0.0 && e < 1.0))
      throw config_error("epsilon values must lie in (0,1)");
    if (i > 0 && !(e < cfg.epsilons[i - 1]))
      throw config_error("epsilon values must be strictly decreasing");
  }
  if (cfg.replications < 100)
    throw config_error("need at least 100 replications");
  if (cfg.levels.empty()) throw config_error("need at least one level");
  const LevelWindow win = admissible_level_window(
      cfg.spec.x0, cfg.spec.T, cfg.spec.tau, cfg.trend.alpha());
  for (double l : cfg.levels)
    if (!(l > win.lo && l < win.hi))
      throw config_error("level " + std::to_string(l) +
                         " outside the admissible window (" +
                         std::to_string(win.lo) + ", " + std::to_string(win.hi) +
                         ")");
}

}  // namespace detail

inline ExperimentReport run_mse_experiment(const ExperimentConfig& cfg) {
  detail::validate_experiment(cfg);
  const double dt = detail::experiment_dt(cfg);
  const double T = cfg.spec.T;
  const auto R = static_cast<std::size_t>(cfg.replications);
  const std::size_t nL = cfg.levels.size();

  // ground truth from the noiseless solve at 10x resolution
  const SamplePath x_fine = solve_delay_ode(cfg.trend, cfg.spec, dt / 10.0);
  std::vector<double> truth(nL);
  for (std::size_t li = 0; li < nL; ++li) {
    const double t_x = crossing_time(x_fine, cfg.levels[li], cfg.spec.tau);
    truth[li] = cfg.trend(t_x, cfg.levels[li]);
  }

  const LevelWindow window = admissible_level_window(
      cfg.spec.x0, T, cfg.spec.tau, cfg.trend.alpha());

  ExperimentReport rep;
  rep.trend_kind = to_string(cfg.trend.kind());
  rep.trend_params = cfg.trend.params();
  rep.tau = cfg.spec.tau;
  rep.x0 = cfg.spec.x0;
  rep.T = T;
  rep.h = cfg.H.value;
  rep.epsilons = cfg.epsilons;
  rep.levels = cfg.levels;
  rep.replications = cfg.replications;
  rep.base_seed = cfg.base_seed;
  rep.bandwidth_rule = to_string(cfg.rule);
  rep.smoothness = cfg.smoothness;
  rep.kernel_name = cfg.kernel.name();
  rep.kernel_coefficients = cfg.kernel.coefficients();
  rep.kernel_order = cfg.kernel.order();
  rep.dt_used = dt;
  rep.theoretical_slope = theoretical_rate_slope(cfg.H, cfg.rule,
                                                 cfg.smoothness);
  if (!cfg.H.wiener_integral_regime())
    rep.warnings.push_back(
        "H < 0.5: outside the regime of the Wiener-integral moment bound "
        "behind the rate theory");

  std::vector<double> mean_mse_per_eps;
  for (double eps : cfg.epsilons) {
    const double phi = detail::experiment_bandwidth(cfg, eps);
    rep.bandwidths.push_back(phi);
    EstimatorConfig est_cfg{eps, cfg.H, cfg.spec.tau, phi, cfg.rule,
                            cfg.smoothness};
    est_cfg.validate_for_horizon(T);

    // one simulation per replicate, shared across levels
    std::vector<double> value(R * nL);
    std::vector<unsigned char> clipped(R * nL), fallback(R * nL);
    detail::parallel_for(R, cfg.threads, [&](std::size_t r) {
      const SdeSample sim = simulate_delay_sde(
          cfg.trend, cfg.spec, eps, cfg.H, dt, cfg.base_seed + r);
      for (std::size_t li = 0; li < nL; ++li) {
        TrendEstimate e;
        try {
          e = estimate_trend_at_level(sim.X, cfg.levels[li], est_cfg,
                                      cfg.kernel, window);
        } catch (const std::exception& ex) {
          throw config_error("at (epsilon = " + std::to_string(eps) +
                             ", level = " + std::to_string(cfg.levels[li]) +
                             "): " + ex.what());
        }
        value[r * nL + li] = e.value;
        clipped[r * nL + li] = e.edge_clipped ? 1 : 0;
        fallback[r * nL + li] = e.fallback_used ? 1 : 0;
      }
    });

    double mse_sum_over_levels = 0.0;
    for (std::size_t li = 0; li < nL; ++li) {
      CellStats cell;
      cell.epsilon = eps;
      cell.level = cfg.levels[li];
      std::vector<double> used;
      used.reserve(R);
      for (std::size_t r = 0; r < R; ++r) {
        if (fallback[r * nL + li]) {
          ++cell.n_fallback;
        } else if (clipped[r * nL + li]) {
          ++cell.n_clipped;
        } else {
          used.push_back(value[r * nL + li]);
        }
      }
      cell.n_used = static_cast<long>(used.size());
      if (used.empty())
        throw generation_error("all replicates excluded at (epsilon = " +
                               std::to_string(eps) + ", level = " +
                               std::to_string(cfg.levels[li]) + ")");
      std::vector<double> sq(used.size()), dev(used.size());
      const double mean_est = detail::pairwise_mean(used);
      for (std::size_t i = 0; i < used.size(); ++i) {
        sq[i] = (used[i] - truth[li]) * (used[i] - truth[li]);
        dev[i] = (used[i] - mean_est) * (used[i] - mean_est);
      }
      cell.mse = detail::pairwise_mean(sq);
      cell.bias2 = (mean_est - truth[li]) * (mean_est - truth[li]);
      cell.variance = detail::pairwise_mean(dev);
      rep.cells.push_back(cell);
      mse_sum_over_levels += cell.mse;
    }
    mean_mse_per_eps.push_back(mse_sum_over_levels /
                               static_cast<double>(nL));
  }

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
    pts.emplace_back(cfg.epsilons[i], mean_mse_per_eps[i]);
  rep.fit = fit_rate(pts);
  return rep;
}

// Pathwise Gronwall check: sup |X - x| <= e^{L T} eps sup |W| for every
// replicate, up to the scheme slack 10 dt sup|S|. Violations are data, not
// errors.
struct Lemma31Report {
  int replications = 0;
  int violations = 0;
  double max_excess = 0.0;  // max over replicates of sup|X-x| minus the bound
  double mean_sup_sq = 0.0;          // mean of sup|X - x|^2
  double mean_sup_sq_over_eps2 = 0.0;  // NaN when eps = 0
  double mean_sup_w_sq = 0.0;        // mean of sup|W|^2
  double gronwall_constant = 0.0;    // e^{L T}
  double slack = 0.0;                // 10 dt sup|S|
};

inline Lemma31Report check_lemma31(const TrendField& trend,
                                   const DelaySpec& spec, HurstIndex H,
                                   double epsilon, int replications,
                                   std::uint64_t seed, double dt,
                                   unsigned threads = 0) {
  if (replications < 1)
    throw config_error("check_lemma31: replications >= 1");
  const SamplePath x = solve_delay_ode(trend, spec, dt);
  const auto R = static_cast<std::size_t>(replications);

  Lemma31Report rep;
  rep.replications = replications;
  rep.gronwall_constant = std::exp(trend.lip_x() * spec.T);
  rep.slack = 10.0 * dt * trend.sup_bound();

  std::vector<double> sup_diff(R), sup_w(R);
  detail::parallel_for(R, threads, [&](std::size_t r) {
    const SdeSample sim =
        simulate_delay_sde(trend, spec, epsilon, H, dt, seed + r);
    double d = 0.0;
    for (std::size_t i = 0; i < sim.X.values.size(); ++i)
      d = std::max(d, std::abs(sim.X.values[i] - x.values[i]));
    sup_diff[r] = d;
    sup_w[r] = path_supremum(sim.W);
  });

  std::vector<double> d2(R), w2(R);
  for (std::size_t r = 0; r < R; ++r) {
    const double bound = rep.gronwall_constant * epsilon * sup_w[r] + rep.slack;
    const double excess = sup_diff[r] - bound;
    if (r == 0 || excess > rep.max_excess) rep.max_excess = excess;
    if (excess > 0.0) ++rep.violations;
    d2[r] = sup_diff[r] * sup_diff[r];
    w2[r] = sup_w[r] * sup_w[r];
  }
  rep.mean_sup_sq = detail::pairwise_mean(d2);
  rep.mean_sup_w_sq = detail::pairwise_mean(w2);
  rep.mean_sup_sq_over_eps2 =
      (epsilon > 0.0) ? rep.mean_sup_sq / (epsilon * epsilon)
                      : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace sdde
