#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sdde::detail {

// Iterative radix-2 Cooley-Tukey FFT for power-of-two sizes. Twiddle factors
// are precomputed once per size so repeated transforms (Monte-Carlo sampling)
// avoid the trig calls.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0)
      throw std::invalid_argument("Fft: size must be a power of two");
    twiddle_.resize(n / 2);
    const double theta = -2.0 * 3.14159265358979323846 / static_cast<double>(n);
    for (std::size_t k = 0; k < n / 2; ++k) {
      double a = theta * static_cast<double>(k);
      twiddle_[k] = {std::cos(a), std::sin(a)};
    }
  }

  std::size_t size() const { return n_; }

  // In-place forward transform, sign convention exp(-2*pi*i*jk/n).
  void forward(std::vector<std::complex<double>>& a) const {
    if (a.size() != n_) throw std::invalid_argument("Fft: bad input length");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n_; ++i) {
      std::size_t bit = n_ >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t stride = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          std::complex<double> u = a[i + k];
          std::complex<double> v = a[i + k + len / 2] * twiddle_[k * stride];
          a[i + k] = u + v;
          a[i + k + len / 2] = u - v;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> twiddle_;
};

}  // namespace sdde::detail
