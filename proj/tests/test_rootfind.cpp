#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdp/rootfind.hpp"
#include "rdp/types.hpp"

using namespace rdp;

namespace {

// bisection-only oracle on a known sign-change bracket
double bisect(const std::function<double(double)>& f, double lo, double hi, int iters) {
  for (int k = 0; k < iters; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("simple exponential root") {
  MonotoneRootProblem prob{[](double x) { return std::exp(-x) - 0.5; },
                           [](double x) { return -std::exp(-x); }};
  const double x = solve_monotone_root(prob, 1.0, 1e-14);
  CHECK(x == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("slack constraint returns exactly zero") {
  MonotoneRootProblem prob{[](double x) { return -0.3 - x; }, nullptr};
  CHECK(solve_monotone_root(prob, 5.0, 1e-12) == 0.0);
}

TEST_CASE("weighted exponential sum root matches bisection oracle") {
  // f(x) = sum_i p_i d_i e^{-x d_i} - D with p = (1/2, 1/2), d = (0, 1), D = 1/4
  auto f = [](double x) { return 0.5 * std::exp(-x) - 0.25; };
  MonotoneRootProblem prob{f, [](double x) { return -0.5 * std::exp(-x); }};
  const double newton = solve_monotone_root(prob, 0.0, 1e-14);
  const double oracle = bisect(f, 0.0, 10.0, 80);
  CHECK(newton == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(newton == doctest::Approx(oracle).epsilon(1e-11));
}

TEST_CASE("result independent of the starting point") {
  auto f = [](double x) { return 3.0 * std::exp(-0.7 * x) - 1.1; };
  MonotoneRootProblem prob{f, nullptr};
  const double a = solve_monotone_root(prob, 0.0, 1e-13);
  const double b = solve_monotone_root(prob, 1.0, 1e-13);
  const double c = solve_monotone_root(prob, 100.0, 1e-13);
  CHECK(std::abs(a - b) < 1e-10);
  CHECK(std::abs(a - c) < 1e-10);
}

TEST_CASE("divergence and NaN are reported") {
  MonotoneRootProblem positive{[](double) { return 1.0; }, nullptr};
  CHECK_THROWS_AS(solve_monotone_root(positive, 1.0, 1e-12), NumericError);
  MonotoneRootProblem nan_f{[](double x) { return x < 0.5 ? 1.0 : std::nan(""); }, nullptr};
  CHECK_THROWS_AS(solve_monotone_root(nan_f, 1.0, 1e-12), NumericError);
  MonotoneRootProblem ok{[](double x) { return 1.0 - x; }, nullptr};
  CHECK_THROWS_AS(solve_monotone_root(ok, 1.0, -1.0), ConfigError);
}

TEST_CASE("lambert-like: ratio e gives a* = 1") {
  CHECK(solve_lambert_like(std::exp(1.0), 1.0, 1e-14) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("lambert-like: tiny ratio limit") {
  const double a = solve_lambert_like(1e-300, 1.0, 1e-14);
  CHECK(a == doctest::Approx(1e-300).epsilon(1e-12));
  CHECK(a > 0.0);
}

TEST_CASE("lambert-like: ratio 5 matches a bisection oracle") {
  auto g = [](double a) { return 5.0 - a * std::exp(a); };  // decreasing form in a
  const double oracle = bisect(g, 0.0, 5.0, 60);
  const double got = solve_lambert_like(5.0, 1.0, 1e-14);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(got * std::exp(got) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("lambert-like rejects non-positive coefficients") {
  CHECK_THROWS_AS(solve_lambert_like(0.0, 1.0, 1e-12), DomainError);
  CHECK_THROWS_AS(solve_lambert_like(1.0, 0.0, 1e-12), DomainError);
  CHECK_THROWS_AS(solve_lambert_like(-1.0, 2.0, 1e-12), DomainError);
}

TEST_CASE("lambert log form covers extreme exponents") {
  for (double L : {-700.0, -100.0, -5.0, 0.0, 1.0, 10.0, 100.0, 700.0}) {
    const double a = lambert_w_exp(L, 1e-13);
    CHECK(a > 0.0);
    // residual in the stable form log a + a = L
    CHECK(std::abs(std::log(a) + a - L) < 1e-10);
  }
}
