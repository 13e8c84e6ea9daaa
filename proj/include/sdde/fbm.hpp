#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdde/detail/fft.hpp"
#include "sdde/errors.hpp"
#include "sdde/grid.hpp"
#include "sdde/rng.hpp"

namespace sdde {

// Hurst index H in (0,1). The moment inequalities behind the estimator's
// variance bound hold for H >= 1/2; sampling works on the whole range, and
// estimator runs with H < 1/2 are flagged as outside the proven regime.
struct HurstIndex {
  double value;

  explicit HurstIndex(double v) : value(v) {
    if (!(v > 0.0 && v < 1.0))
      throw std::domain_error("HurstIndex: H must be in (0,1)");
  }

  bool wiener_integral_regime() const { return value >= 0.5; }
};

// Covariance of fractional Brownian motion, (s^2H + t^2H - |t-s|^2H) / 2.
inline double fbm_covariance(double s, double t, HurstIndex H) {
  if (s < 0.0 || t < 0.0)
    throw std::domain_error("fbm_covariance: times must be nonnegative");
  const double h2 = 2.0 * H.value;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

struct FbmSample {
  SamplePath path;
  std::string generator;          // "davies-harte" or "cholesky"
  bool embedding_fallback = false;  // true if circulant embedding failed
};

namespace detail {

// Autocovariance of fractional Gaussian noise on a grid with spacing dt.
inline double fgn_autocov(std::size_t lag, double dt, double H) {
  const double h2 = 2.0 * H;
  const double k = static_cast<double>(lag);
  return 0.5 * std::pow(dt, h2) *
         (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) +
          std::pow(std::abs(k - 1.0), h2));
}

// Lower Cholesky factor with one shot of diagonal jitter before giving up.
inline Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    const double jitter =
        1e-12 * cov.trace() / static_cast<double>(cov.rows());
    cov.diagonal().array() += jitter;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov,
                                                        Eigen::EigenvaluesOnly);
      std::ostringstream msg;
      msg << "covariance numerically non-positive-definite after jitter; "
             "smallest eigenvalue = "
          << es.eigenvalues().minCoeff();
      throw generation_error(msg.str());
    }
  }
  return llt.matrixL();
}

}  // namespace detail

// Exact sampler via Cholesky factorization of the full grid covariance.
// O(n^2) per path after an O(n^3) setup; the reference method the fast
// sampler is checked against.
class CholeskySampler {
 public:
  CholeskySampler(const TimeGrid& grid, HurstIndex H) : grid_(grid), H_(H) {
    if (grid.t0 != 0.0)
      throw config_error("CholeskySampler: grid must start at t0 = 0");
    const std::size_t n = grid.n_steps;
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double c = fbm_covariance(grid.time(i + 1), grid.time(j + 1), H);
        cov(i, j) = c;
        cov(j, i) = c;
      }
    chol_ = detail::cholesky_with_jitter(std::move(cov));
  }

  SamplePath sample(std::uint64_t seed) const {
    const std::size_t n = grid_.n_steps;
    Philox4x32 rng(seed);
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) z(i) = rng.normal();
    Eigen::VectorXd w = chol_ * z;
    std::vector<double> values(n + 1);
    values[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) values[i + 1] = w(i);
    return SamplePath(grid_, std::move(values), "fbm");
  }

 private:
  TimeGrid grid_;
  HurstIndex H_;
  Eigen::MatrixXd chol_;
};

// Exact O(n log n) sampler via circulant embedding of the increment
// covariance (Davies-Harte / Wood-Chan). The embedding size is the first
// power of two >= 2*n_steps. Circulant eigenvalues are nonnegative for
// fractional Gaussian noise up to rounding; tiny negatives are clamped and
// anything beyond the tolerance triggers a Cholesky fallback, recorded on
// the returned sample.
class DaviesHarteSampler {
 public:
  static constexpr double kEigenvalueTolerance = 1e-9;  // relative to max

  DaviesHarteSampler(const TimeGrid& grid, HurstIndex H,
                     double eigenvalue_tolerance = kEigenvalueTolerance)
      : grid_(grid), H_(H), fft_(embedding_size(grid.n_steps)) {
    if (grid.t0 != 0.0)
      throw config_error("DaviesHarteSampler: grid must start at t0 = 0");
    const std::size_t m = fft_.size();
    std::vector<std::complex<double>> c(m);
    for (std::size_t k = 0; k <= m / 2; ++k)
      c[k] = detail::fgn_autocov(k, grid.dt, H.value);
    for (std::size_t k = 1; k < m / 2; ++k) c[m - k] = c[k];
    fft_.forward(c);

    double lam_max = 0.0;
    for (const auto& v : c) lam_max = std::max(lam_max, v.real());
    double lam_min = 0.0;
    for (const auto& v : c) lam_min = std::min(lam_min, v.real());
    if (lam_min < -eigenvalue_tolerance * lam_max) {
      fallback_.emplace(grid, H);
      return;
    }
    scale_.resize(m);
    const double dm = static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double lam = std::max(c[k].real(), 0.0);
      const bool self_conjugate = (k == 0 || k == m / 2);
      scale_[k] = std::sqrt(lam / (self_conjugate ? dm : 2.0 * dm));
    }
  }

  bool uses_cholesky_fallback() const { return fallback_.has_value(); }

  FbmSample sample(std::uint64_t seed) const {
    if (fallback_) return {fallback_->sample(seed), "cholesky", true};
    const std::size_t m = fft_.size();
    const std::size_t n = grid_.n_steps;
    Philox4x32 rng(seed);
    std::vector<std::complex<double>> w(m);
    // fixed draw order: k = 0, m/2, then (re, im) pairs for k = 1..m/2-1
    w[0] = scale_[0] * rng.normal();
    w[m / 2] = scale_[m / 2] * rng.normal();
    for (std::size_t k = 1; k < m / 2; ++k) {
      const double re = rng.normal();
      const double im = rng.normal();
      w[k] = {scale_[k] * re, scale_[k] * im};
      w[m - k] = std::conj(w[k]);
    }
    fft_.forward(w);
    std::vector<double> values(n + 1);
    values[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) values[i + 1] = values[i] + w[i].real();
    return {SamplePath(grid_, std::move(values), "fbm"), "davies-harte", false};
  }

 private:
  static std::size_t embedding_size(std::size_t n_steps) {
    if (n_steps == 0) throw config_error("DaviesHarteSampler: n_steps >= 1");
    std::size_t m = 1;
    while (m < 2 * n_steps) m <<= 1;
    return m;
  }

  TimeGrid grid_;
  HurstIndex H_;
  detail::Fft fft_;
  std::vector<double> scale_;
  std::optional<CholeskySampler> fallback_;
};

inline SamplePath sample_fbm_cholesky(const TimeGrid& grid, HurstIndex H,
                                      std::uint64_t seed) {
  return CholeskySampler(grid, H).sample(seed);
}

inline FbmSample sample_fbm_davies_harte(const TimeGrid& grid, HurstIndex H,
                                         std::uint64_t seed) {
  return DaviesHarteSampler(grid, H).sample(seed);
}

}  // namespace sdde
