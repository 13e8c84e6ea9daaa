#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdde/errors.hpp"

namespace sdde {

// Uniform time grid t_i = t0 + i*dt, i = 0..n_steps. Points are always
// recomputed from (t0, dt, i) so there is no accumulated rounding drift.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;

  TimeGrid() = default;
  TimeGrid(double t0_, double dt_, std::size_t n_steps_)
      : t0(t0_), dt(dt_), n_steps(n_steps_) {
    if (!(dt > 0.0)) throw config_error("TimeGrid: dt must be > 0");
    if (n_steps == 0) throw config_error("TimeGrid: n_steps must be >= 1");
  }

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double t_end() const { return time(n_steps); }
  std::size_t n_points() const { return n_steps + 1; }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.t0 == b.t0 && a.dt == b.dt && a.n_steps == b.n_steps;
  }
};

// A scalar process observed on a uniform grid.
struct SamplePath {
  TimeGrid grid;
  std::vector<double> values;  // length grid.n_steps + 1
  std::string label;

  SamplePath() = default;
  SamplePath(TimeGrid g, std::vector<double> v, std::string lbl)
      : grid(g), values(std::move(v)), label(std::move(lbl)) {
    validate();
  }

  void validate() const {
    if (values.size() != grid.n_points())
      throw std::invalid_argument("SamplePath: values.size() != n_steps + 1");
    for (double v : values)
      if (!std::isfinite(v))
        throw std::invalid_argument("SamplePath: non-finite value");
  }
};

inline double path_supremum(const SamplePath& path) {
  double m = 0.0;
  for (double v : path.values) m = std::max(m, std::abs(v));
  return m;
}

// Linear interpolation at an off-grid time; clamps to the grid range.
inline double interpolate(const SamplePath& path, double t) {
  const TimeGrid& g = path.grid;
  if (t <= g.t0) return path.values.front();
  if (t >= g.t_end()) return path.values.back();
  double u = (t - g.t0) / g.dt;
  std::size_t i = static_cast<std::size_t>(u);
  if (i >= g.n_steps) i = g.n_steps - 1;
  double w = u - static_cast<double>(i);
  return (1.0 - w) * path.values[i] + w * path.values[i + 1];
}

}  // namespace sdde
