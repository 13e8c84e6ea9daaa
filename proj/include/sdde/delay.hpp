#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdde/errors.hpp"
#include "sdde/fbm.hpp"
#include "sdde/grid.hpp"
#include "sdde/trend.hpp"

namespace sdde {

// Delay equation setup: constant pre-history x0 on (-inf, 0], horizon T.
struct DelaySpec {
  double tau = 0.0;
  double x0 = 0.0;
  double T = 0.0;

  DelaySpec() = default;
  DelaySpec(double tau_, double x0_, double T_) : tau(tau_), x0(x0_), T(T_) {
    if (tau < 0.0) throw config_error("DelaySpec: tau must be >= 0");
    if (!(T > tau)) throw config_error("DelaySpec: need T > tau");
  }
};

namespace detail {

constexpr double kAlignRelTol = 1e-12;

// Number of steps spanning `span`, requiring span to be an (almost) exact
// multiple of dt. Delayed lookups then become exact index shifts.
inline std::size_t aligned_steps(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const auto n = static_cast<long long>(std::llround(ratio));
  if (n < 1 || std::abs(static_cast<double>(n) * dt - span) >
                   kAlignRelTol * std::max(span, 1.0))
    throw config_error(std::string("grid misaligned: ") + what + " = " +
                       std::to_string(span) + " is not a multiple of dt = " +
                       std::to_string(dt));
  return static_cast<std::size_t>(n);
}

inline TimeGrid aligned_grid(const DelaySpec& spec, double dt) {
  if (!(dt > 0.0)) throw config_error("dt must be > 0");
  if (spec.tau > 0.0) aligned_steps(spec.tau, dt, "tau");
  return TimeGrid(0.0, dt, aligned_steps(spec.T, dt, "T"));
}

// Cubic Hermite value at the midpoint of [t_j, t_{j+1}].
inline double hermite_midpoint(double x0, double x1, double g0, double g1,
                               double dt) {
  return 0.5 * (x0 + x1) + dt * (g0 - g1) / 8.0;
}

inline void check_finite(double v, double t) {
  if (!std::isfinite(v))
    throw divergence_error("integration diverged: non-finite value at t = " +
                           std::to_string(t));
}

}  // namespace detail

// Solves dx/dt = S(t, x(t - tau)) with x = x0 on (-inf, 0], by the method of
// steps. For tau > 0 the right side is a known function of t on each step, so
// the classical 4th-order step is Simpson quadrature with the delayed segment
// interpolated by cubic Hermite at stage midpoints. tau = 0 is a plain RK4
// solve. Requires dt to divide tau; the output is strictly increasing since
// S >= alpha > 0.
inline SamplePath solve_delay_ode(const TrendField& S, const DelaySpec& spec,
                                  double dt) {
  const TimeGrid grid = detail::aligned_grid(spec, dt);
  const std::size_t n = grid.n_steps;
  std::vector<double> xs(n + 1);
  xs[0] = spec.x0;

  if (spec.tau == 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = grid.time(i);
      const double x = xs[i];
      const double k1 = S(t, x);
      const double k2 = S(t + 0.5 * dt, x + 0.5 * dt * k1);
      const double k3 = S(t + 0.5 * dt, x + 0.5 * dt * k2);
      const double k4 = S(t + dt, x + dt * k3);
      xs[i + 1] = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      detail::check_finite(xs[i + 1], grid.time(i + 1));
    }
    return SamplePath(grid, std::move(xs), "x");
  }

  const std::size_t d = detail::aligned_steps(spec.tau, dt, "tau");
  std::vector<double> slope(n + 1);  // slope[i] = S(t_i, x(t_i - tau))
  slope[0] = S(0.0, spec.x0);
  auto delayed_at = [&](std::size_t i) {
    return (i <= d) ? spec.x0 : xs[i - d];
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double g0 = slope[i];
    double xm;
    if (i < d) {
      xm = spec.x0;  // midpoint argument still in the pre-history
    } else {
      const std::size_t j = i - d;
      xm = detail::hermite_midpoint(xs[j], xs[j + 1], slope[j], slope[j + 1],
                                    dt);
    }
    const double gm = S(grid.time(i) + 0.5 * dt, xm);
    const double ge = S(grid.time(i + 1), delayed_at(i + 1));
    xs[i + 1] = xs[i] + dt / 6.0 * (g0 + 4.0 * gm + ge);
    detail::check_finite(xs[i + 1], grid.time(i + 1));
    slope[i + 1] = ge;
  }
  return SamplePath(grid, std::move(xs), "x");
}

struct SdeSample {
  SamplePath X;
  SamplePath W;  // the driving fBm path, same grid and seed
  std::string generator;
  bool embedding_fallback = false;
};

// Euler scheme for dX = S(t, X_{t-tau}) dt + eps dW^H with exact fBm
// increments. Additive noise makes the drift the only scheme error.
inline SdeSample simulate_delay_sde(const TrendField& S, const DelaySpec& spec,
                                    double epsilon, HurstIndex H, double dt,
                                    std::uint64_t seed) {
  if (epsilon < 0.0) throw config_error("simulate_delay_sde: epsilon >= 0");
  const TimeGrid grid = detail::aligned_grid(spec, dt);
  const std::size_t n = grid.n_steps;
  const std::size_t d =
      (spec.tau > 0.0) ? detail::aligned_steps(spec.tau, dt, "tau") : 0;

  FbmSample noise = DaviesHarteSampler(grid, H).sample(seed);
  const std::vector<double>& w = noise.path.values;

  std::vector<double> xs(n + 1);
  xs[0] = spec.x0;
  for (std::size_t i = 0; i < n; ++i) {
    const double delayed = (i <= d) ? spec.x0 : xs[i - d];
    xs[i + 1] = xs[i] + S(grid.time(i), delayed) * dt +
                epsilon * (w[i + 1] - w[i]);
    detail::check_finite(xs[i + 1], grid.time(i + 1));
  }
  return {SamplePath(grid, std::move(xs), "X"), std::move(noise.path),
          noise.generator, noise.embedding_fallback};
}

// Fundamental solution of dx/dt = a x(t) + b x(t-1) with x(0) = 1 and zero
// pre-history on [-1, 0). RK4 by the method of steps; the delayed channel
// jumps at t = 1 (x(0-) = 0 vs x(0) = 1), so the segment ending there gets
// its Hermite end slope from the left limit.
inline SamplePath fundamental_solution_linear(double a, double b, double T,
                                              double dt) {
  if (!(T > 0.0)) throw config_error("fundamental_solution_linear: T > 0");
  if (!(dt > 0.0)) throw config_error("fundamental_solution_linear: dt > 0");
  const std::size_t K = detail::aligned_steps(1.0, dt, "unit delay");
  const std::size_t n = detail::aligned_steps(T, dt, "T");

  std::vector<double> xs(n + 1), slope(n + 1);
  xs[0] = 1.0;
  slope[0] = a;  // right-derivative at 0: a*1 + b*0

  // Delayed value at the START of step i (t_i - 1); grid index i - K.
  auto delayed_start = [&](std::size_t i) -> double {
    return (i < K) ? 0.0 : xs[i - K];
  };
  // Delayed value at the END of step i (t_{i+1} - 1): index 0 means the step
  // lies inside [0,1], where the pre-history left limit 0 applies.
  auto delayed_end = [&](std::size_t i) -> double {
    return (i + 1 <= K) ? 0.0 : xs[i + 1 - K];
  };

  const double h = dt;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs[i];
    const double xd1 = delayed_start(i);
    const double xd2 = delayed_end(i);
    double xdm;
    if (i < K) {
      xdm = 0.0;
    } else {
      const std::size_t j = i - K;
      double g_end = slope[j + 1];
      if (j + 1 == K) g_end -= b;  // left-derivative at the t = 1 kink
      xdm = detail::hermite_midpoint(xs[j], xs[j + 1], slope[j], g_end, h);
    }
    const double k1 = a * x + b * xd1;
    const double k2 = a * (x + 0.5 * h * k1) + b * xdm;
    const double k3 = a * (x + 0.5 * h * k2) + b * xdm;
    const double k4 = a * (x + h * k3) + b * xd2;
    xs[i + 1] = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    detail::check_finite(xs[i + 1], static_cast<double>(i + 1) * dt);
    slope[i + 1] = a * xs[i + 1] + b * delayed_start(i + 1);
  }
  return SamplePath(TimeGrid(0.0, dt, n), std::move(xs), "x0");
}

// Deterministic crossing time t_x = tau + s* with x_{s*} = level, for a
// strictly increasing path. Bisection is over grid points (lower_bound),
// refined by linear interpolation so t_x carries no O(dt) grid-snap bias.
inline double crossing_time(const SamplePath& x, double level, double tau) {
  const std::vector<double>& v = x.values;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i + 1] > v[i]))
      throw std::invalid_argument("crossing_time: path must be strictly increasing");
  const double T = x.grid.t_end();
  if (tau < 0.0 || tau >= T)
    throw std::invalid_argument("crossing_time: need 0 <= tau < T");
  const double upper = interpolate(x, T - tau);
  if (!(level > v.front() && level < upper))
    throw std::out_of_range("crossing_time: level outside (x_0, x_{T-tau})");
  const auto it = std::lower_bound(v.begin(), v.end(), level);
  const std::size_t i = static_cast<std::size_t>(it - v.begin());
  const double s =
      x.grid.time(i - 1) + x.grid.dt * (level - v[i - 1]) / (v[i] - v[i - 1]);
  return tau + s;
}

}  // namespace sdde
