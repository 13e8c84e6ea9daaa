#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "sdde/errors.hpp"
#include "sdde/fbm.hpp"
#include "sdde/grid.hpp"
#include "sdde/kernels.hpp"

namespace sdde {

// Bandwidth phi as a power of the noise level. `theorem31` balances the
// kernel bias against the fBm noise variance for twice-differentiable
// trends; `smooth` is the generalization for k times differentiable trends
// with beta-Hoelder k-th derivative.
enum class BandwidthRule { theorem31, smooth, manual };

struct Smoothness {
  int k = 1;
  double beta = 1.0;
};

// phi = eps^{1/(3-H)}. Meaningful for eps in (0,1); values >= 1 are outside
// the small-noise regime (the CLI warns, the formula still applies).
inline double bandwidth_theorem31(double epsilon, HurstIndex H) {
  if (!(epsilon > 0.0))
    throw std::domain_error("bandwidth: epsilon must be > 0");
  return std::pow(epsilon, 1.0 / (3.0 - H.value));
}

// phi = eps^{1/(k - H + beta + 1)}; k = 1, beta = 1 reproduces the 3-H rule.
inline double bandwidth_smooth(double epsilon, HurstIndex H, int k,
                               double beta) {
  if (!(epsilon > 0.0))
    throw std::domain_error("bandwidth: epsilon must be > 0");
  if (k < 1) throw std::domain_error("bandwidth: k >= 1");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::domain_error("bandwidth: beta in [0,1]");
  const double denom = (static_cast<double>(k) + beta + 1.0) - H.value;
  return std::pow(epsilon, 1.0 / denom);
}

struct EstimatorConfig {
  double epsilon;
  HurstIndex H;
  double tau;
  double bandwidth;
  BandwidthRule rule;
  std::optional<Smoothness> smoothness;

  static EstimatorConfig theorem31(double epsilon, HurstIndex H, double tau) {
    return {epsilon, H, tau, bandwidth_theorem31(epsilon, H),
            BandwidthRule::theorem31, std::nullopt};
  }
  static EstimatorConfig smooth(double epsilon, HurstIndex H, double tau,
                                int k, double beta) {
    return {epsilon, H, tau, bandwidth_smooth(epsilon, H, k, beta),
            BandwidthRule::smooth, Smoothness{k, beta}};
  }
  static EstimatorConfig manual(double epsilon, HurstIndex H, double tau,
                                double bandwidth) {
    return {epsilon, H, tau, bandwidth, BandwidthRule::manual, std::nullopt};
  }

  // The kernel window must fit well inside [0, T]: phi < (T - tau)/4.
  void validate_for_horizon(double T) const {
    if (!(bandwidth > 0.0 && bandwidth < (T - tau) / 4.0))
      throw config_error("bandwidth " + std::to_string(bandwidth) +
                         " outside (0, (T - tau)/4) for T = " +
                         std::to_string(T));
  }
};

struct TrendEstimate {
  double value = 0.0;
  double hitting_time = 0.0;   // center the kernel was placed at
  double level = std::numeric_limits<double>::quiet_NaN();
  bool edge_clipped = false;   // center within 2*phi of either end of [0, T]
  bool fallback_used = false;  // path never reached the level
};

// Levels for which the deterministic path is guaranteed to cross before
// T - tau: (x0, x0 + (T - tau) * alpha).
struct LevelWindow {
  double lo;
  double hi;
};

inline LevelWindow admissible_level_window(double x0, double T, double tau,
                                           double alpha) {
  return {x0, x0 + (T - tau) * alpha};
}

// First time t > tau with X_{t-tau} >= level, located at the first grid
// crossing and refined by linear interpolation. If the path never reaches the
// level on (0, T - tau], returns (T - tau, fallback = true).
inline std::pair<double, bool> hitting_time(const SamplePath& X, double level,
                                            double tau, double T) {
  const TimeGrid& g = X.grid;
  if (tau < 0.0 || !(tau < T))
    throw std::invalid_argument("hitting_time: need 0 <= tau < T");
  if (T > g.t_end() * (1.0 + 1e-12))
    throw std::invalid_argument("hitting_time: T beyond the observed grid");
  const auto n_s = static_cast<std::size_t>(
      std::floor((T - tau) / g.dt + 1e-9));
  const std::vector<double>& v = X.values;
  for (std::size_t i = 1; i <= n_s && i < v.size(); ++i) {
    if (v[i] >= level) {
      double s = g.time(i);
      if (v[i - 1] < level)  // interpolate within the bracketing cell
        s = g.time(i - 1) + g.dt * (level - v[i - 1]) / (v[i] - v[i - 1]);
      return {tau + s, false};
    }
  }
  return {T - tau, true};
}

inline std::pair<double, bool> hitting_time(const SamplePath& X, double level,
                                            double tau) {
  return hitting_time(X, level, tau, X.grid.t_end());
}

// Left-point Riemann-Stieltjes sum for (1/phi) * integral of
// G((s - center)/phi) dX_s. Terms with |s_i - center| >= phi vanish exactly
// (compact support), so the loop is restricted to the window. Requires
// phi >= 50 dt so the discretization error stays an order below the kernel
// bias.
inline double stieltjes_convolution(const SamplePath& X, double center,
                                    const KernelSpec& K, double bandwidth) {
  const TimeGrid& g = X.grid;
  if (!(bandwidth >= 50.0 * g.dt))
    throw config_error(
        "bandwidth " + std::to_string(bandwidth) +
        " below the resolution guard; need dt <= bandwidth/50 = " +
        std::to_string(bandwidth / 50.0) + " (dt = " + std::to_string(g.dt) +
        ")");
  if (center < g.t0 || center > g.t_end())
    throw std::invalid_argument("stieltjes_convolution: center outside grid");

  double lo = (center - bandwidth - g.t0) / g.dt;
  std::size_t i_lo = (lo <= 0.0) ? 0 : static_cast<std::size_t>(lo);
  double hi = (center + bandwidth - g.t0) / g.dt;
  std::size_t i_hi = (hi < 0.0) ? 0 : static_cast<std::size_t>(hi) + 1;
  if (i_hi > g.n_steps) i_hi = g.n_steps;

  double sum = 0.0;
  for (std::size_t i = i_lo; i < i_hi; ++i) {
    const double u = (g.time(i) - center) / bandwidth;
    sum += K(u) * (X.values[i + 1] - X.values[i]);
  }
  return sum / bandwidth;
}

// Kernel estimate of S at the level crossing: center the kernel at the
// hitting time of `level` and integrate against the path increments. The
// value estimates S(t_x, level); the hitting time is exposed for
// diagnostics. If `window` is supplied (callers that know the trend bounds),
// the level is validated against it.
inline TrendEstimate estimate_trend_at_level(
    const SamplePath& X, double level, const EstimatorConfig& config,
    const KernelSpec& K,
    const std::optional<LevelWindow>& window = std::nullopt) {
  const double T = X.grid.t_end();
  config.validate_for_horizon(T);
  if (window && !(level > window->lo && level < window->hi))
    throw std::out_of_range(
        "level " + std::to_string(level) + " outside the admissible window (" +
        std::to_string(window->lo) + ", " + std::to_string(window->hi) + ")");
  if (!(level > X.values.front()))
    throw std::out_of_range("level must exceed the initial value");

  const auto [t_center, fallback] = hitting_time(X, level, config.tau, T);
  TrendEstimate est;
  est.value = stieltjes_convolution(X, t_center, K, config.bandwidth);
  est.hitting_time = t_center;
  est.level = level;
  est.fallback_used = fallback;
  est.edge_clipped = (t_center <= 2.0 * config.bandwidth) ||
                     (T - t_center <= 2.0 * config.bandwidth);
  return est;
}

// Time-indexed variant: estimates f(t) = S(t, x_{t-tau}) without knowing the
// delay, by centering the kernel at t itself. Only interior centers are
// allowed, so edge_clipped is false by construction.
inline TrendEstimate estimate_trend_at_time(const SamplePath& X, double t,
                                            const EstimatorConfig& config,
                                            const KernelSpec& K) {
  const double T = X.grid.t_end();
  config.validate_for_horizon(T);
  const double phi = config.bandwidth;
  if (!(t > 2.0 * phi && t < T - 2.0 * phi))
    throw std::out_of_range("time " + std::to_string(t) +
                            " outside the interior window (2*phi, T - 2*phi)");
  TrendEstimate est;
  est.value = stieltjes_convolution(X, t, K, phi);
  est.hitting_time = t;
  return est;
}

}  // namespace sdde
