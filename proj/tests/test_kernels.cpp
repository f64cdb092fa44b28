#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "rdp/kernels.hpp"

using namespace rdp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

bool close_rel(double a, double b, double rel, double abs_tol = 1e-300) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) == std::isnan(b);
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= abs_tol + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("scalar backend always available") {
  CHECK(kernels::available(kernels::Backend::scalar));
  CHECK(std::string(kernels::get(kernels::Backend::scalar).name) == "scalar");
}

TEST_CASE("simd backend agrees with the scalar reference") {
  if (!kernels::available(kernels::Backend::avx2)) {
    MESSAGE("avx2 not available on this host; equivalence test skipped");
    return;
  }
  const auto& sca = kernels::get(kernels::Backend::scalar);
  const auto& simd = kernels::get(kernels::Backend::avx2);

  std::mt19937_64 rng(12345);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 16u, 33u, 100u, 257u}) {
    for (int rep = 0; rep < 20; ++rep) {
      auto x = random_vec(rng, n, -40.0, 30.0);
      auto w = random_vec(rng, n, 0.0, 3.0);
      auto t = random_vec(rng, n, 0.0, 5.0);
      const double theta = std::uniform_real_distribution<double>(0.0, 10.0)(rng);

      CHECK(sca.reduce_max(x.data(), n) == simd.reduce_max(x.data(), n));
      CHECK(close_rel(sca.reduce_sum(x.data(), n), simd.reduce_sum(x.data(), n), 1e-13));
      CHECK(close_rel(sca.dot(x.data(), w.data(), n), simd.dot(x.data(), w.data(), n), 1e-13));

      const double m = sca.reduce_max(x.data(), n);
      CHECK(close_rel(sca.sum_exp(x.data(), m, n), simd.sum_exp(x.data(), m, n), 5e-14));
      CHECK(close_rel(sca.dot_exp(w.data(), x.data(), m, n),
                      simd.dot_exp(w.data(), x.data(), m, n), 5e-14));

      const double md_s = sca.max_decay(x.data(), t.data(), theta, n);
      const double md_v = simd.max_decay(x.data(), t.data(), theta, n);
      CHECK(md_s == md_v);
      double s0a, s1a, s0b, s1b;
      sca.decay_exp_pair(x.data(), t.data(), theta, md_s, n, &s0a, &s1a);
      simd.decay_exp_pair(x.data(), t.data(), theta, md_s, n, &s0b, &s1b);
      CHECK(close_rel(s0a, s0b, 5e-14));
      CHECK(close_rel(s1a, s1b, 5e-14));

      // probability-like inputs for kl/l1
      auto p = random_vec(rng, n, 0.0, 1.0);
      auto q = random_vec(rng, n, 1e-12, 1.0);
      if (n > 2) p[0] = 0.0;  // exercise the 0 log 0 lane
      CHECK(close_rel(sca.kl_sum(p.data(), q.data(), n), simd.kl_sum(p.data(), q.data(), n),
                      5e-14, 1e-13));
      CHECK(close_rel(sca.l1_dist(p.data(), q.data(), n), simd.l1_dist(p.data(), q.data(), n),
                      1e-13));

      std::vector<double> outa(n), outb(n);
      sca.vexp(x.data(), m, outa.data(), n);
      simd.vexp(x.data(), m, outb.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(close_rel(outa[i], outb[i], 5e-15));
    }
  }
}

TEST_CASE("simd exp matches libm across the full range") {
  if (!kernels::available(kernels::Backend::avx2)) return;
  const auto& simd = kernels::get(kernels::Backend::avx2);
  std::mt19937_64 rng(99);
  std::vector<double> xs;
  for (int k = 0; k < 4000; ++k)
    xs.push_back(std::uniform_real_distribution<double>(-708.0, 708.0)(rng));
  xs.insert(xs.end(), {0.0, 1.0, -1.0, 100.0, -100.0, 700.0, -700.0, 1e-12, -1e-12});
  std::vector<double> out(xs.size());
  simd.vexp(xs.data(), 0.0, out.data(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ref = std::exp(xs[i]);
    CHECK(close_rel(out[i], ref, 1e-14));
  }
}

TEST_CASE("simd exp special values") {
  if (!kernels::available(kernels::Backend::avx2)) return;
  const auto& simd = kernels::get(kernels::Backend::avx2);
  std::vector<double> xs = {-kInf, kInf, std::nan(""), 710.0, -745.0, 0.0, -0.0, 708.0};
  std::vector<double> out(xs.size());
  simd.vexp(xs.data(), 0.0, out.data(), xs.size());
  CHECK(out[0] == 0.0);
  CHECK(out[1] == kInf);
  CHECK(std::isnan(out[2]));
  CHECK(out[3] == kInf);
  CHECK(out[4] == 0.0);
  CHECK(out[5] == 1.0);
  CHECK(out[6] == 1.0);
  CHECK(close_rel(out[7], std::exp(708.0), 1e-14));
}

TEST_CASE("simd log via kl_sum matches libm") {
  if (!kernels::available(kernels::Backend::avx2)) return;
  const auto& simd = kernels::get(kernels::Backend::avx2);
  std::mt19937_64 rng(7);
  // kl_sum(p, q) with p one-hot probes log(q_i) directly
  for (int rep = 0; rep < 2000; ++rep) {
    double q = std::exp(std::uniform_real_distribution<double>(-700.0, 700.0)(rng));
    std::vector<double> p = {1.0, 0.0, 0.0, 0.0};
    std::vector<double> qs = {q, 0.5, 0.5, 0.5};
    const double got = simd.kl_sum(p.data(), qs.data(), 4);
    const double ref = -std::log(q);  // 1 * (log 1 - log q)
    CHECK(close_rel(got, ref, 1e-13, 1e-14));
  }
  // subnormal and special inputs
  std::vector<double> p = {1.0, 0.0};
  std::vector<double> q1 = {5e-320, 1.0};
  CHECK(close_rel(simd.kl_sum(p.data(), q1.data(), 2), -std::log(5e-320), 1e-13));
  std::vector<double> q0 = {0.0, 1.0};
  CHECK(simd.kl_sum(p.data(), q0.data(), 2) == kInf);
}

TEST_CASE("kl_sum conventions") {
  for (auto backend : {kernels::Backend::scalar, kernels::Backend::avx2}) {
    if (!kernels::available(backend)) continue;
    const auto& k = kernels::get(backend);
    std::vector<double> p = {0.3, 0.7, 0.0};
    std::vector<double> q = {0.3, 0.7, 0.0};
    CHECK(k.kl_sum(p.data(), q.data(), 3) == doctest::Approx(0.0).epsilon(1e-15));
    std::vector<double> q2 = {0.5, 0.5, 0.0};
    const double ref = 0.3 * std::log(0.3 / 0.5) + 0.7 * std::log(0.7 / 0.5);
    CHECK(k.kl_sum(p.data(), q2.data(), 3) == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_CASE("logsumexp handles empty and -inf inputs") {
  std::vector<double> all_ninf = {-kInf, -kInf};
  CHECK(kernels::logsumexp(all_ninf.data(), all_ninf.size()) == -kInf);
  std::vector<double> mixed = {0.0, -kInf, std::log(2.0)};
  CHECK(kernels::logsumexp(mixed.data(), mixed.size()) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(kernels::logsumexp(mixed.data(), 0) == -kInf);
}

TEST_CASE("force and reset pin the dispatched backend") {
  kernels::force(kernels::Backend::scalar);
  CHECK(std::string(kernels::active().name) == "scalar");
  kernels::reset();
  CHECK(kernels::active().name != nullptr);
}
