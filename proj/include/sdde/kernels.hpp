#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sdde/errors.hpp"

namespace sdde {

// A weight function G on [-1,1] with unit mass and `order` vanishing moments
// (integral of u^j G(u) du = 0 for j = 1..order). Evaluation is exactly zero
// outside [-1,1], so convolution windows can be truncated with zero error.
// Moments of the catalog entries are integrated in closed form, never by
// quadrature.
class KernelSpec {
 public:
  // --- named catalog, all order 1 by symmetry ---
  static KernelSpec epanechnikov() {
    return KernelSpec(Kind::polynomial, {0.75, 0.0, -0.75}, 1, "epanechnikov");
  }
  static KernelSpec quartic() {
    const double c = 15.0 / 16.0;
    return KernelSpec(Kind::polynomial, {c, 0.0, -2.0 * c, 0.0, c}, 1,
                      "quartic");
  }
  static KernelSpec uniform() {
    return KernelSpec(Kind::polynomial, {0.5}, 1, "uniform");
  }
  static KernelSpec triangular() {
    return KernelSpec(Kind::triangular, {}, 1, "triangular");
  }

  // Custom polynomial in the monomial basis (ascending powers), truncated to
  // [-1,1]. No moment conditions are enforced here; kernel-check reports them.
  static KernelSpec from_polynomial(std::vector<double> coefficients,
                                    int order) {
    if (coefficients.empty())
      throw config_error("kernel: empty coefficient vector");
    return KernelSpec(Kind::polynomial, std::move(coefficients), order, "");
  }

  double operator()(double u) const {
    if (std::abs(u) >= 1.0) return 0.0;
    if (kind_ == Kind::triangular) return 1.0 - std::abs(u);
    double r = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) r = r * u + coeffs_[i];
    return r;
  }

  // integral over [-1,1] of u^j G(u) du, exact for both representations
  double moment(int j) const {
    if (j < 0) throw std::domain_error("kernel moment: j >= 0");
    if (kind_ == Kind::triangular) {
      if (j % 2 == 1) return 0.0;
      return 2.0 * (1.0 / (j + 1.0) - 1.0 / (j + 2.0));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const std::size_t p = i + static_cast<std::size_t>(j);
      if (p % 2 == 0) m += coeffs_[i] * 2.0 / static_cast<double>(p + 1);
    }
    return m;
  }

  int order() const { return order_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  bool is_polynomial() const { return kind_ == Kind::polynomial; }

 private:
  enum class Kind { polynomial, triangular };

  KernelSpec(Kind kind, std::vector<double> coeffs, int order,
             std::string name)
      : kind_(kind),
        coeffs_(std::move(coeffs)),
        order_(order),
        name_(std::move(name)) {}

  Kind kind_;
  std::vector<double> coeffs_;
  int order_;
  std::string name_;
};

inline KernelSpec make_standard_kernel(const std::string& name) {
  if (name == "epanechnikov") return KernelSpec::epanechnikov();
  if (name == "quartic") return KernelSpec::quartic();
  if (name == "triangular") return KernelSpec::triangular();
  if (name == "uniform") return KernelSpec::uniform();
  throw config_error("unknown kernel '" + name + "'");
}

// Minimal-degree polynomial on [-1,1] with unit mass and moments 1..k all
// vanishing. By parity an even polynomial kills the odd moments for free, so
// only the even moment conditions j = 0,2,..,k are solved, in the monomial
// basis with the exact monomial integrals 2/(i+j+1). For even k this means
// moment k+1 vanishes too and the k and k+1 kernels coincide.
inline KernelSpec make_higher_order_kernel(int k) {
  if (k < 1) throw std::invalid_argument("make_higher_order_kernel: k >= 1");
  if (k > 10)
    throw std::invalid_argument(
        "make_higher_order_kernel: k <= 10 (moment system conditioning)");
  const int m = k / 2;  // even basis u^0, u^2, .., u^{2m}
  Eigen::MatrixXd A(m + 1, m + 1);
  for (int row = 0; row <= m; ++row)
    for (int col = 0; col <= m; ++col)
      A(row, col) = 2.0 / static_cast<double>(2 * row + 2 * col + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(0) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw generation_error("kernel moment system is singular");
  const Eigen::VectorXd c = lu.solve(rhs);

  std::vector<double> coeffs(static_cast<std::size_t>(2 * m + 1), 0.0);
  for (int i = 0; i <= m; ++i) coeffs[static_cast<std::size_t>(2 * i)] = c(i);
  const int order = (k % 2 == 1) ? k : k + 1;
  return KernelSpec::from_polynomial(std::move(coeffs), order);
}

inline double eval_kernel(const KernelSpec& K, double u) { return K(u); }

inline double kernel_moment(const KernelSpec& K, int j) { return K.moment(j); }

}  // namespace sdde
