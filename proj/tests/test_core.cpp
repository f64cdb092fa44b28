#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rdp/baselines.hpp"
#include "rdp/functionals.hpp"
#include "rdp/types.hpp"

using namespace rdp;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

DiscreteSource bernoulli(double q) { return DiscreteSource({0.0, 1.0}, {1.0 - q, q}); }

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = expo(rng) + 1e-6;
    s += x;
  }
  for (auto& x : v) x /= s;
  // remove the rounding drift so the simplex invariant holds exactly enough
  v.back() += 1.0 - std::accumulate(v.begin(), v.end(), 0.0);
  return v;
}

// independent scalar-loop oracle for the mutual information
double mi_loop(const std::vector<double>& p, const Mat& w, const std::vector<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.rows; ++i)
    for (std::size_t j = 0; j < w.cols; ++j)
      if (w(i, j) > 0.0) s += w(i, j) * p[i] * (std::log(w(i, j)) - std::log(r[j]));
  return s;
}

}  // namespace

TEST_CASE("type invariants are validated") {
  CHECK_THROWS_AS(DiscreteSource({0.0, 1.0}, {0.6, 0.6}), DomainError);
  CHECK_THROWS_AS(DiscreteSource({1.0, 0.0}, {0.5, 0.5}), DomainError);  // not increasing
  CHECK_THROWS_AS(DiscreteSource({0.0}, {0.5, 0.5}), DimensionError);
  CHECK_THROWS_AS(ReconstructionDist({0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(ReconstructionDist({-0.1, 1.1}), DomainError);
  CHECK_THROWS_AS(ChannelMatrix(mat2(0.5, 0.6, 0.5, 0.5)), DomainError);
  CHECK_THROWS_AS(DistortionMatrix(mat2(0.0, -1.0, 1.0, 0.0)), DomainError);

  // zero-mass atoms are dropped at construction
  const DiscreteSource s({0.0, 1.0, 2.0}, {0.4, 0.0, 0.6});
  CHECK(s.size() == 2);
  CHECK(s.points == std::vector<double>{0.0, 2.0});
}

TEST_CASE("mutual information: perfect channel gives log 2") {
  const auto p = bernoulli(0.5);
  const ChannelMatrix w(mat2(1, 0, 0, 1));
  const ReconstructionDist r({0.5, 0.5});
  CHECK(mutual_information(p, w, r) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("mutual information: input-independent channel gives 0") {
  const auto p = bernoulli(0.9);
  const ChannelMatrix w(mat2(0.3, 0.7, 0.3, 0.7));
  const ReconstructionDist r({0.3, 0.7});
  CHECK(mutual_information(p, w, r) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("mutual information matches the scalar-loop oracle") {
  const auto p = bernoulli(0.9);
  const Mat wm = mat2(0.9, 0.1, 0.2, 0.8);
  const std::vector<double> r = {0.1 * 0.9 + 0.9 * 0.2, 0.1 * 0.1 + 0.9 * 0.8};
  const double got = mutual_information(p, ChannelMatrix(wm), ReconstructionDist(r));
  CHECK(got == doctest::Approx(mi_loop(p.p, wm, r)).epsilon(1e-14));

  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 7;
    auto ps = random_simplex(rng, n);
    Mat w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = random_simplex(rng, n);
      for (std::size_t j = 0; j < n; ++j) w(i, j) = row[j];
    }
    std::vector<double> marg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) marg[j] += ps[i] * w(i, j);
    const double sm = std::accumulate(marg.begin(), marg.end(), 0.0);
    for (auto& x : marg) x /= sm;
    marg.back() += 1.0 - std::accumulate(marg.begin(), marg.end(), 0.0);

    DiscreteSource src(std::vector<double>(ps.size(), 0.0), ps);
    for (std::size_t i = 0; i < n; ++i) src.points[i] = static_cast<double>(i);
    const double a = mutual_information(DiscreteSource(src.points, ps), ChannelMatrix(w),
                                        ReconstructionDist(marg));
    const double b = mi_loop(ps, w, marg);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(a >= -1e-15);  // nonnegative up to rounding
  }
}

TEST_CASE("mutual information rejects a dead letter with positive mass") {
  const auto p = bernoulli(0.5);
  const ChannelMatrix w(mat2(1, 0, 0, 1));
  CHECK_THROWS_AS(mutual_information(p, w, ReconstructionDist({1.0, 0.0})), DomainError);
}

TEST_CASE("expected distortion examples") {
  const DistortionMatrix ham(mat2(0, 1, 1, 0));
  CHECK(expected_distortion(bernoulli(0.5), ChannelMatrix(mat2(1, 0, 0, 1)), ham) == 0.0);
  CHECK(expected_distortion(bernoulli(0.5), ChannelMatrix(mat2(0.5, 0.5, 0.5, 0.5)), ham) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(expected_distortion(bernoulli(0.9), ChannelMatrix(mat2(1, 0, 0.5, 0.5)), ham) ==
        doctest::Approx(0.45).epsilon(1e-15));
  CHECK_THROWS_AS(
      expected_distortion(bernoulli(0.5), ChannelMatrix(mat2(1, 0, 0, 1)),
                          DistortionMatrix(Mat(3, 3, 1.0))),
      DimensionError);
}

TEST_CASE("perception_kl examples") {
  const auto p = bernoulli(0.5);
  CHECK(perception_kl(p, ReconstructionDist({0.5, 0.5})) == 0.0);
  const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(perception_kl(p, ReconstructionDist({0.25, 0.75})) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(perception_kl(p, ReconstructionDist({1.0, 0.0})), DomainError);

  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    auto a = random_simplex(rng, 4);
    auto b = random_simplex(rng, 4);
    std::vector<double> pts = {0, 1, 2, 3};
    double ref = 0.0;
    for (int j = 0; j < 4; ++j) ref += a[j] * (std::log(a[j]) - std::log(b[j]));
    CHECK(perception_kl(DiscreteSource(pts, a), ReconstructionDist(b)) ==
          doctest::Approx(ref).epsilon(1e-13));
    CHECK(perception_kl(DiscreteSource(pts, a), ReconstructionDist(b)) >= -1e-15);
  }
}

TEST_CASE("perception_tv examples") {
  CHECK(perception_tv(bernoulli(0.5), ReconstructionDist({0.5, 0.5})) == 0.0);
  CHECK(perception_tv(bernoulli(0.9), ReconstructionDist({0.12, 0.88})) ==
        doctest::Approx(0.02).epsilon(1e-12));
  // extreme points are 1 apart
  const DiscreteSource nearly({0.0, 1.0}, {1.0 - 1e-13, 1e-13});
  CHECK(perception_tv(nearly, ReconstructionDist({0.0, 1.0})) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("functionals are invariant under reconstruction permutations") {
  std::mt19937_64 rng(11);
  const std::size_t n = 5;
  auto ps = random_simplex(rng, n);
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i);
  const DiscreteSource p(pts, ps);

  Mat w(n, n), d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = random_simplex(rng, n);
    for (std::size_t j = 0; j < n; ++j) {
      w(i, j) = row[j];
      d(i, j) = (i == j) ? 0.0 : 1.0 + 0.1 * static_cast<double>(i + j);
    }
  }
  auto r = random_simplex(rng, n);

  std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  Mat wp(n, n), dp(n, n);
  std::vector<double> rp(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      wp(i, j) = w(i, perm[j]);
      dp(i, j) = d(i, perm[j]);
    }
  for (std::size_t j = 0; j < n; ++j) rp[j] = r[perm[j]];

  CHECK(mutual_information(p, ChannelMatrix(w), ReconstructionDist(r)) ==
        doctest::Approx(mutual_information(p, ChannelMatrix(wp), ReconstructionDist(rp)))
            .epsilon(1e-13));
  CHECK(expected_distortion(p, ChannelMatrix(w), DistortionMatrix(d)) ==
        doctest::Approx(expected_distortion(p, ChannelMatrix(wp), DistortionMatrix(dp)))
            .epsilon(1e-13));
}

TEST_CASE("TV equals the exact transport value under the 0/1 cost") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + rep % 9;
    auto a = random_simplex(rng, n);
    auto b = random_simplex(rng, n);
    const Mat c = CostMatrix::tv(n).c;
    const double w = exact_wasserstein(a, b, c, 1e-11);
    double tv = 0.0;
    for (std::size_t j = 0; j < n; ++j) tv += std::abs(a[j] - b[j]);
    tv *= 0.5;
    CHECK(w == doctest::Approx(tv).epsilon(0.0).scale(1.0));
    CHECK(std::abs(w - tv) <= 1e-10);
  }
}
