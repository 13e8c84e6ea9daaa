#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdde/errors.hpp"

namespace sdde {

enum class TrendKind { constant, tanh_sine, logistic };

inline std::string to_string(TrendKind k) {
  switch (k) {
    case TrendKind::constant: return "constant";
    case TrendKind::tanh_sine: return "tanh_sine";
    case TrendKind::logistic: return "logistic";
  }
  return "?";
}

// A drift field S(t,x) from a small catalog, carrying its analytic bounds:
//   alpha     = inf S            (must be > 0, so the state is increasing)
//   lip_x     = sup |dS/dx|
//   bound_t   = sup |dS/dt|
//   sup_bound = sup |S|
// The bounds feed the pathwise Gronwall checks and the crossing-time window.
class TrendField {
 public:
  // S = c, c > 0
  static TrendField constant(double c) {
    if (!(c > 0.0)) throw config_error("constant trend: c must be > 0");
    return TrendField(TrendKind::constant, {c}, /*alpha=*/c, /*lip_x=*/0.0,
                      /*bound_t=*/0.0, /*sup=*/c);
  }

  // S(t,x) = c0 + c1*tanh(x) + c2*sin(omega*t), with c0 > |c1| + |c2| > 0
  static TrendField tanh_sine(double c0, double c1, double c2, double omega) {
    const double wobble = std::abs(c1) + std::abs(c2);
    if (!(wobble > 0.0))
      throw config_error("tanh_sine trend: need |c1| + |c2| > 0");
    if (!(c0 > wobble))
      throw config_error("tanh_sine trend: need c0 > |c1| + |c2|");
    return TrendField(TrendKind::tanh_sine, {c0, c1, c2, omega},
                      /*alpha=*/c0 - wobble,
                      /*lip_x=*/std::abs(c1),
                      /*bound_t=*/std::abs(c2 * omega),
                      /*sup=*/c0 + wobble);
  }

  // S(t,x) = c0 + c1/(1 + x^2)
  static TrendField logistic(double c0, double c1) {
    const double alpha = c0 + std::min(0.0, c1);
    if (!(alpha > 0.0))
      throw config_error("logistic trend: need c0 + min(0,c1) > 0");
    // extreme slope of c1/(1+x^2) is at x = 1/sqrt(3)
    const double lip = std::abs(c1) * 3.0 * std::sqrt(3.0) / 8.0;
    return TrendField(TrendKind::logistic, {c0, c1}, alpha, lip,
                      /*bound_t=*/0.0, /*sup=*/c0 + std::max(0.0, c1));
  }

  static TrendField make(TrendKind kind, const std::vector<double>& params) {
    switch (kind) {
      case TrendKind::constant:
        require_params(params, 1, "constant");
        return constant(params[0]);
      case TrendKind::tanh_sine:
        require_params(params, 4, "tanh_sine");
        return tanh_sine(params[0], params[1], params[2], params[3]);
      case TrendKind::logistic:
        require_params(params, 2, "logistic");
        return logistic(params[0], params[1]);
    }
    throw config_error("unknown trend kind");
  }

  static TrendField make(const std::string& kind,
                         const std::vector<double>& params) {
    if (kind == "constant") return make(TrendKind::constant, params);
    if (kind == "tanh_sine") return make(TrendKind::tanh_sine, params);
    if (kind == "logistic") return make(TrendKind::logistic, params);
    throw config_error("unknown trend kind '" + kind + "'");
  }

  double operator()(double t, double x) const {
    switch (kind_) {
      case TrendKind::constant:
        return params_[0];
      case TrendKind::tanh_sine:
        return params_[0] + params_[1] * std::tanh(x) +
               params_[2] * std::sin(params_[3] * t);
      case TrendKind::logistic:
        return params_[0] + params_[1] / (1.0 + x * x);
    }
    return 0.0;
  }

  TrendKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double alpha() const { return alpha_; }
  double lip_x() const { return lip_x_; }
  double bound_t() const { return bound_t_; }
  double sup_bound() const { return sup_bound_; }

 private:
  TrendField(TrendKind kind, std::vector<double> params, double alpha,
             double lip_x, double bound_t, double sup)
      : kind_(kind),
        params_(std::move(params)),
        alpha_(alpha),
        lip_x_(lip_x),
        bound_t_(bound_t),
        sup_bound_(sup) {
    spot_check();
  }

  static void require_params(const std::vector<double>& p, std::size_t n,
                             const char* name) {
    if (p.size() != n)
      throw config_error(std::string(name) + " trend: expected " +
                         std::to_string(n) + " parameters, got " +
                         std::to_string(p.size()));
  }

  // Sanity sweep of the declared bounds over a coarse (t,x) lattice.
  void spot_check() const {
    const double slack = 1e-9;
    for (int i = 0; i <= 40; ++i) {
      const double t = 0.25 * i;  // [0, 10]
      for (int j = -40; j <= 40; ++j) {
        const double x = 0.25 * j;  // [-10, 10]
        const double s = (*this)(t, x);
        if (!(s >= alpha_ - slack))
          throw config_error("trend bound violated: S(t,x) < alpha at t=" +
                             std::to_string(t) + ", x=" + std::to_string(x));
        if (!(std::abs(s) <= sup_bound_ + slack))
          throw config_error("trend bound violated: |S(t,x)| > sup_bound");
        const double s2 = (*this)(t, x + 0.125);
        if (!(std::abs(s2 - s) <= lip_x_ * 0.125 + slack))
          throw config_error("trend bound violated: Lipschitz constant in x");
      }
    }
  }

  TrendKind kind_;
  std::vector<double> params_;
  double alpha_;
  double lip_x_;
  double bound_t_;
  double sup_bound_;
};

}  // namespace sdde
