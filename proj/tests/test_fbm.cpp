#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <sdde/fbm.hpp>
#include <sdde/rng.hpp>

#include "testutil.hpp"

using namespace sdde;
using Catch::Approx;

TEST_CASE("philox4x32-10 known answers", "[rng]") {
  // published known-answer vectors for the 10-round 4x32 keyed bijection
  auto z = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
  CHECK(z[0] == 0x6627e8d5u);
  CHECK(z[1] == 0xe169c58du);
  CHECK(z[2] == 0xbc57ac4cu);
  CHECK(z[3] == 0x9b00dbd8u);

  auto f = Philox4x32::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu,
                                  0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
  CHECK(f[0] == 0x408f276du);
  CHECK(f[1] == 0x41c83b0eu);
  CHECK(f[2] == 0xa20bc7c6u);
  CHECK(f[3] == 0x6d5451fdu);

  auto p = Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu,
                                  0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
  CHECK(p[0] == 0xd16cfe09u);
  CHECK(p[1] == 0x94fdccebu);
  CHECK(p[2] == 0x5001e420u);
  CHECK(p[3] == 0x24126ea1u);
}

TEST_CASE("normal quantile matches high-precision references", "[rng]") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) ==
        Approx(1.959963984540054235).epsilon(1e-14));
  CHECK(normal_quantile(0.9) == Approx(1.281551565544600467).epsilon(1e-14));
  CHECK(normal_quantile(0.99) == Approx(2.326347874040841101).epsilon(1e-14));
  CHECK(normal_quantile(0.001) ==
        Approx(-3.090232306167813542).epsilon(1e-14));
  CHECK(normal_quantile(0.3) == Approx(-0.524400512708040784).epsilon(1e-14));
  CHECK(normal_quantile(1e-10) ==
        Approx(-6.361340902404056205).epsilon(1e-14));
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("uniform and normal draws look standard", "[rng]") {
  Philox4x32 rng(2024);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == Approx(1.0).margin(4.0 * std::sqrt(2.0 / n)));
}

TEST_CASE("fbm covariance closed form", "[fbm]") {
  CHECK(fbm_covariance(1.0, 1.0, HurstIndex(0.7)) == Approx(1.0));
  CHECK(fbm_covariance(2.0, 3.0, HurstIndex(0.5)) == Approx(2.0));
  // (1 + 2^1.5 - 1)/2 = sqrt(2), cross-checked against a high-precision oracle
  CHECK(fbm_covariance(1.0, 2.0, HurstIndex(0.75)) ==
        Approx(1.4142135623730950488).epsilon(1e-15));
  CHECK_THROWS_AS(fbm_covariance(-1.0, 1.0, HurstIndex(0.5)),
                  std::domain_error);
  CHECK_THROWS_AS(fbm_covariance(1.0, -0.5, HurstIndex(0.5)),
                  std::domain_error);
}

TEST_CASE("hurst index validation and regime flag", "[fbm]") {
  CHECK_THROWS_AS(HurstIndex(0.0), std::domain_error);
  CHECK_THROWS_AS(HurstIndex(1.0), std::domain_error);
  CHECK_FALSE(HurstIndex(0.49).wiener_integral_regime());
  CHECK(HurstIndex(0.5).wiener_integral_regime());
  CHECK(HurstIndex(0.9).wiener_integral_regime());
}

TEST_CASE("path supremum", "[fbm]") {
  TimeGrid g(0.0, 0.5, 2);
  CHECK(path_supremum(SamplePath(g, {0.0, 0.0, 0.0}, "z")) == 0.0);
  CHECK(path_supremum(SamplePath(g, {0.0, -3.0, 2.0}, "p")) == 3.0);
  auto fbm = sample_fbm_davies_harte(TimeGrid(0.0, 1.0 / 64, 64),
                                     HurstIndex(0.6), 5);
  CHECK(path_supremum(fbm.path) >= std::abs(fbm.path.values.back()));
}

TEST_CASE("samplers start at zero and are deterministic", "[fbm]") {
  TimeGrid g(0.0, 1.0 / 128, 128);
  for (double h : {0.3, 0.5, 0.8}) {
    auto a = sample_fbm_cholesky(g, HurstIndex(h), 99);
    auto b = sample_fbm_davies_harte(g, HurstIndex(h), 99);
    CHECK(a.values[0] == 0.0);
    CHECK(b.path.values[0] == 0.0);
    CHECK_FALSE(b.embedding_fallback);
    CHECK(b.generator == "davies-harte");
    // bit-exact reproducibility
    auto a2 = sample_fbm_cholesky(g, HurstIndex(h), 99);
    auto b2 = sample_fbm_davies_harte(g, HurstIndex(h), 99);
    CHECK(a.values == a2.values);
    CHECK(b.path.values == b2.path.values);
    // different seeds differ
    CHECK(sample_fbm_cholesky(g, HurstIndex(h), 100).values != a.values);
  }
  CHECK_THROWS_AS(sample_fbm_cholesky(TimeGrid(1.0, 0.1, 4), HurstIndex(0.5), 1),
                  config_error);
  CHECK_THROWS_AS(
      sample_fbm_davies_harte(TimeGrid(0.5, 0.1, 4), HurstIndex(0.5), 1),
      config_error);
}

TEST_CASE("cholesky sampler hits the fBm law", "[fbm][mc]") {
  SECTION("terminal variance, H = 0.5") {
    TimeGrid g(0.0, 1.0 / 256, 256);
    CholeskySampler s(g, HurstIndex(0.5));
    const int N = 10000;
    std::vector<double> terminal(N);
    for (int i = 0; i < N; ++i) terminal[i] = s.sample(i).values.back();
    const double var = testutil::sample_variance(terminal);
    const double se = std::sqrt(2.0 / (N - 1));  // known-mean Gaussian
    CHECK(std::abs(var - 1.0) < 3.0 * se);
  }
  SECTION("covariance of (W_0.5, W_1), H = 0.8") {
    TimeGrid g(0.0, 1.0 / 128, 128);
    HurstIndex H(0.8);
    CholeskySampler s(g, H);
    const int N = 10000;
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      auto p = s.sample(i);
      acc += p.values[64] * p.values[128];
    }
    const double expected = fbm_covariance(0.5, 1.0, H);
    const double c11 = fbm_covariance(0.5, 0.5, H);
    const double c22 = fbm_covariance(1.0, 1.0, H);
    const double se = std::sqrt((c11 * c22 + expected * expected) / N);
    CHECK(std::abs(acc / N - expected) < 3.0 * se);
  }
}

TEST_CASE("davies-harte increment autocorrelation", "[fbm][mc]") {
  SECTION("H = 0.6, lag-1 matches fractional Gaussian noise") {
    TimeGrid g(0.0, 1.0 / 1024, 1024);
    DaviesHarteSampler s(g, HurstIndex(0.6));
    const int N = 10000;
    std::vector<double> rho(N);
    for (int r = 0; r < N; ++r) {
      auto p = s.sample(r);
      double c0 = 0.0, c1 = 0.0;
      for (std::size_t i = 0; i + 2 < p.path.values.size(); ++i) {
        const double a = p.path.values[i + 1] - p.path.values[i];
        const double b = p.path.values[i + 2] - p.path.values[i + 1];
        c0 += a * a;
        c1 += a * b;
      }
      rho[r] = c1 / c0;
    }
    const double expected = (std::pow(2.0, 1.2) - 2.0) / 2.0;
    const double se =
        std::sqrt(testutil::sample_variance(rho) / N);
    CHECK(std::abs(testutil::mean(rho) - expected) < 3.0 * se);
  }
  SECTION("H = 0.5 increments are uncorrelated") {
    TimeGrid g(0.0, 2.0 / 512, 512);
    DaviesHarteSampler s(g, HurstIndex(0.5));
    const int N = 10000;
    std::vector<double> rho(N);
    for (int r = 0; r < N; ++r) {
      auto p = s.sample(r);
      double c0 = 0.0, c1 = 0.0;
      for (std::size_t i = 0; i + 2 < p.path.values.size(); ++i) {
        const double a = p.path.values[i + 1] - p.path.values[i];
        const double b = p.path.values[i + 2] - p.path.values[i + 1];
        c0 += a * a;
        c1 += a * b;
      }
      rho[r] = c1 / c0;
    }
    const double se = std::sqrt(testutil::sample_variance(rho) / N);
    CHECK(std::abs(testutil::mean(rho)) < 3.0 * se);
  }
}

TEST_CASE("empirical covariance matches entrywise on a small grid",
          "[fbm][mc]") {
  // both samplers, n = 32, 2e4 replications, 4 standard errors entrywise
  const std::size_t n = 32;
  TimeGrid g(0.0, 1.0 / static_cast<double>(n), n);
  HurstIndex H(0.7);
  const int N = 20000;

  auto run = [&](auto&& draw) {
    std::vector<double> acc(n * n, 0.0);
    for (int r = 0; r < N; ++r) {
      const std::vector<double> v = draw(r);
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = i; j <= n; ++j)
          acc[(i - 1) * n + (j - 1)] += v[i] * v[j];
    }
    double worst = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = i; j <= n; ++j) {
        const double chat = acc[(i - 1) * n + (j - 1)] / N;
        const double c = fbm_covariance(g.time(i), g.time(j), H);
        const double cii = fbm_covariance(g.time(i), g.time(i), H);
        const double cjj = fbm_covariance(g.time(j), g.time(j), H);
        const double se = std::sqrt((cii * cjj + c * c) / N);
        worst = std::max(worst, std::abs(chat - c) / se);
      }
    return worst;
  };

  CholeskySampler chol(g, H);
  DaviesHarteSampler dh(g, H);
  CHECK(run([&](int r) { return chol.sample(r).values; }) < 4.0);
  CHECK(run([&](int r) { return dh.sample(r).path.values; }) < 4.0);
}

TEST_CASE("self-similarity across horizons", "[fbm][mc]") {
  // c^H * W on [0,1] has the variance profile of W on [0,c], c = 4
  const std::size_t n = 64;
  const int N = 5000;
  for (double h : {0.5, 0.75}) {
    HurstIndex H(h);
    DaviesHarteSampler unit(TimeGrid(0.0, 1.0 / n, n), H);
    DaviesHarteSampler wide(TimeGrid(0.0, 4.0 / n, n), H);
    const double scale = std::pow(4.0, h);
    std::vector<std::size_t> idx{16, 32, 48, 64};
    std::vector<double> var_u(idx.size(), 0.0), var_w(idx.size(), 0.0);
    for (int r = 0; r < N; ++r) {
      auto pu = unit.sample(r);
      auto pw = wide.sample(1000000 + r);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double su = scale * pu.path.values[idx[k]];
        var_u[k] += su * su;
        var_w[k] += pw.path.values[idx[k]] * pw.path.values[idx[k]];
      }
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      var_u[k] /= N;
      var_w[k] /= N;
      const double se = var_u[k] * std::sqrt(2.0 / N);
      CHECK(std::abs(var_u[k] - var_w[k]) < 4.0 * std::sqrt(2.0) * se);
    }
  }
}

TEST_CASE("davies-harte and cholesky agree in law", "[fbm][mc]") {
  TimeGrid g(0.0, 1.0 / 128, 128);
  HurstIndex H(0.6);
  CholeskySampler chol(g, H);
  DaviesHarteSampler dh(g, H);
  const int N = 10000;
  std::vector<double> a(N), b(N);
  for (int i = 0; i < N; ++i) {
    a[i] = chol.sample(i).values.back();
    b[i] = dh.sample(500000 + i).path.values.back();
  }
  CHECK(testutil::ks_two_sample_pvalue(a, b) > 0.001);
}

TEST_CASE("embedding failure falls back to cholesky and records it",
          "[fbm]") {
  TimeGrid g(0.0, 1.0 / 64, 64);
  HurstIndex H(0.7);
  // an impossible tolerance forces the fallback branch
  DaviesHarteSampler forced(g, H, -1.0);
  CHECK(forced.uses_cholesky_fallback());
  auto s = forced.sample(3);
  CHECK(s.generator == "cholesky");
  CHECK(s.embedding_fallback);
  CHECK(s.path.values == sample_fbm_cholesky(g, H, 3).values);
  // the default tolerance accepts the fGn embedding
  CHECK_FALSE(DaviesHarteSampler(g, H).uses_cholesky_fallback());
}

TEST_CASE("cholesky jitter failure names the smallest eigenvalue",
          "[fbm]") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  try {
    sdde::detail::cholesky_with_jitter(bad);
    FAIL("expected generation_error");
  } catch (const generation_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("smallest eigenvalue") != std::string::npos);
    CHECK(msg.find("-1") != std::string::npos);
  }
}
