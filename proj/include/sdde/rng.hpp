#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sdde {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
// Chosen over the <random> engines because the output stream depends only on
// (seed, counter): identical across platforms, and the state is trivially
// splittable for parallel Monte-Carlo.
class Philox4x32 {
 public:
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  std::uint32_t next_u32() {
    if (idx_ == 4) generate_block();
    return block_[idx_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform in the open interval (0,1); 53 significant bits.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();

  // One keyed block, for known-answer tests.
  static std::array<std::uint32_t, 4> bijection(
      std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
      if (r) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      ctr = round_once(ctr, key);
    }
    return ctr;
  }

 private:
  void generate_block() {
    block_ = bijection(ctr_, key_);
    idx_ = 0;
    if (++ctr_[0] == 0)
      if (++ctr_[1] == 0)
        if (++ctr_[2] == 0) ++ctr_[3];
  }

  static std::array<std::uint32_t, 4> round_once(
      const std::array<std::uint32_t, 4>& c,
      const std::array<std::uint32_t, 2>& k) {
    std::uint64_t p0 = 0xD2511F53ull * c[0];
    std::uint64_t p1 = 0xCD9E8D57ull * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_{0, 0, 0, 0};
  std::array<std::uint32_t, 4> block_{};
  int idx_ = 4;
};

// Inverse normal CDF, algorithm AS241 (PPND16, Wichura 1988). Accurate to
// about 1e-16 relative; rational polynomials plus one sqrt/log in the tails,
// so results are stable across libm implementations.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1)");

  static constexpr double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e+2,
      1.9715909503065514427e+3, 1.3731693765509461125e+4,
      4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[8] = {
      1.0,                      4.2313330701600911252e+1,
      6.8718700749205790830e+2, 5.3941960214247511077e+3,
      2.1213794301586595867e+4, 3.9307895800092710610e+4,
      2.8729085735721942674e+4, 5.2264952788528545610e+3};
  static constexpr double c[8] = {
      1.42343711074968357734e0,  4.63033784615654529590e0,
      5.76949722146069140550e0,  3.64784832476320460504e0,
      1.27045825245236838258e0,  2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {
      1.0,                      2.05319162663775882187e0,
      1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double e[8] = {
      6.65790464350110377720e0,  5.46378491116411436990e0,
      1.78482653991729133580e0,  2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {
      1.0,                       5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto poly = [](const double (&cs)[8], double x) {
    double r = 0.0;
    for (int i = 7; i >= 0; --i) r = r * x + cs[i];
    return r;
  };

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    v = poly(e, r) / poly(f, r);
  }
  return (q < 0.0) ? -v : v;
}

inline double Philox4x32::normal() { return normal_quantile(uniform01()); }

}  // namespace sdde
