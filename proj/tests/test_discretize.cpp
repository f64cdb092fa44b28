#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rdp/discretize.hpp"

using namespace rdp;

TEST_CASE("default gaussian preset yields 33 points") {
  GaussianSpec spec{0.0, 2.0, 8.0, 0.5};
  CHECK(spec.grid_size() == 33);
  const DiscreteSource src = discretize_gaussian(spec);
  CHECK(src.size() == 33);
  CHECK(src.points.front() == doctest::Approx(-8.0));
  CHECK(src.points.back() == doctest::Approx(8.0));
  for (double pi : src.p) CHECK(pi > 0.0);
}

TEST_CASE("masses sum to one exactly after renormalization") {
  for (double delta : {0.5, 0.25, 0.3}) {
    GaussianSpec spec{0.0, 2.0, 8.0, delta};
    const DiscreteSource src = discretize_gaussian(spec);
    CHECK(std::accumulate(src.p.begin(), src.p.end(), 0.0) == 1.0);
  }
}

TEST_CASE("centered gaussians are exactly symmetric") {
  for (double sigma : {0.7, 1.0, 2.0, 3.5}) {
    GaussianSpec spec{0.0, sigma, 8.0, 0.5};
    const DiscreteSource src = discretize_gaussian(spec);
    const std::size_t n = src.size();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(src.p[i] == src.p[n - 1 - i]);
      CHECK(src.points[i] == -src.points[n - 1 - i]);
    }
  }
}

TEST_CASE("center cell mass matches a reference CDF evaluation") {
  GaussianSpec spec{0.0, 2.0, 8.0, 0.5};
  double truncated = 0.0;
  const DiscreteSource src = discretize_gaussian(spec, &truncated);
  // raw center mass before renormalization is F(0.25) - F(-0.25), sigma = 2
  const double ref_raw = 0.5 * (std::erf(0.25 / (2.0 * std::sqrt(2.0))) -
                                std::erf(-0.25 / (2.0 * std::sqrt(2.0))));
  const double renorm = 1.0 - truncated;
  CHECK(src.p[16] == doctest::Approx(ref_raw / renorm).epsilon(1e-13));
  CHECK(truncated > 0.0);
  CHECK(truncated < 1e-4);  // +-4 sigma truncation leaves only tail dust
}

TEST_CASE("cell masses agree with Simpson quadrature of the density") {
  GaussianSpec spec{0.3, 1.7, 6.0, 0.4};
  double truncated = 0.0;
  const DiscreteSource src = discretize_gaussian(spec, &truncated);
  auto pdf = [&](double x) {
    const double z = (x - spec.mu) / spec.sigma;
    return std::exp(-0.5 * z * z) / (spec.sigma * std::sqrt(2.0 * M_PI));
  };
  const double renorm = 1.0 - truncated;
  for (std::size_t i : {std::size_t{0}, src.size() / 2, src.size() - 1}) {
    const double a = src.points[i] - spec.delta / 2.0, b = src.points[i] + spec.delta / 2.0;
    const int steps = 2000;
    double integral = pdf(a) + pdf(b);
    for (int k = 1; k < steps; ++k) {
      const double x = a + (b - a) * k / steps;
      integral += (k % 2 ? 4.0 : 2.0) * pdf(x);
    }
    integral *= (b - a) / (3.0 * steps);
    CHECK(src.p[i] == doctest::Approx(integral / renorm).epsilon(1e-9));
  }
}

TEST_CASE("erf approximations track libm to high accuracy") {
  for (double x = -8.0; x <= 8.0; x += 0.0173) {
    CHECK(std::abs(erf_approx(x) - std::erf(x)) <=
          1e-14 * std::max(std::abs(std::erf(x)), 1e-30));
    CHECK(std::abs(erfc_approx(x) - std::erfc(x)) <=
          2e-14 * std::max(std::abs(std::erfc(x)), 1e-300));
  }
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(-40.0) == 0.0);
  CHECK(norm_cdf(40.0) == 1.0);
}

TEST_CASE("invalid gaussian specs are rejected") {
  CHECK_THROWS_AS(discretize_gaussian({0.0, -1.0, 8.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(discretize_gaussian({0.0, 1.0, 8.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(discretize_gaussian({0.0, 1.0, 8.0, 17.0}), ConfigError);
}

TEST_CASE("hamming distortion") {
  const DistortionMatrix d2 = hamming_distortion(2);
  CHECK(d2.d(0, 0) == 0.0);
  CHECK(d2.d(0, 1) == 1.0);
  CHECK(d2.d(1, 0) == 1.0);
  CHECK(d2.d(1, 1) == 0.0);

  const DistortionMatrix d5 = hamming_distortion(5);
  double trace = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    trace += d5.d(i, i);
    for (std::size_t j = 0; j < 5; ++j) CHECK(d5.d(i, j) == d5.d(j, i));
  }
  CHECK(trace == 0.0);
  CHECK_THROWS_AS(hamming_distortion(1), ConfigError);
}

TEST_CASE("squared error matrix") {
  const auto d = squared_error_matrix({0.0, 1.0}, {0.0, 1.0});
  CHECK(d.d(0, 0) == 0.0);
  CHECK(d.d(0, 1) == 1.0);
  CHECK(d.d(1, 0) == 1.0);
  CHECK(d.d(1, 1) == 0.0);

  GaussianSpec spec{0.0, 2.0, 8.0, 0.5};
  const DiscreteSource src = discretize_gaussian(spec);
  const auto dg = squared_error_matrix(src.points, src.points);
  double max_entry = 0.0;
  for (double v : dg.d.data) max_entry = std::max(max_entry, v);
  CHECK(max_entry == doctest::Approx(256.0).epsilon(1e-12));
  for (std::size_t i = 0; i < src.size(); ++i) CHECK(dg.d(i, i) == 0.0);
}
