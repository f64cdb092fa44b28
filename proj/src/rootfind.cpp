#include "rdp/rootfind.hpp"

#include <cmath>
#include <limits>

#include "rdp/types.hpp"

namespace rdp {

namespace {

constexpr double kBracketLimit = 1e16;

double checked_eval(const std::function<double(double)>& f, double x) {
  const double v = f(x);
  if (std::isnan(v)) throw NumericError("root function evaluated to NaN");
  return v;
}

}  // namespace

double solve_monotone_root(const MonotoneRootProblem& problem, double x0, double tol,
                           int max_iter) {
  if (!(tol > 0.0)) throw ConfigError("root tolerance must be positive");
  if (!(x0 >= 0.0)) x0 = 0.0;

  double f0 = checked_eval(problem.f, 0.0);
  if (f0 <= 0.0) return 0.0;  // constraint slack at multiplier 0

  // Expand until the decreasing f changes sign.
  double lo = 0.0, flo = f0;
  double hi = x0 > 0.0 ? x0 : 1.0;
  double fhi = checked_eval(problem.f, hi);
  while (fhi > 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 8.0;
    if (hi > kBracketLimit)
      throw NumericError("monotone root: no sign change up to x = 1e16");
    fhi = checked_eval(problem.f, hi);
  }
  if (std::abs(fhi) <= tol) return hi;
  if (std::abs(flo) <= tol) return lo;

  double x = 0.5 * (lo + hi);
  if (x0 > lo && x0 < hi) x = x0;
  for (int it = 0; it < max_iter; ++it) {
    const double fx = checked_eval(problem.f, x);
    if (std::abs(fx) <= tol) return x;
    if (fx > 0.0) {
      lo = x;
    } else {
      hi = x;
    }

    double next = std::numeric_limits<double>::quiet_NaN();
    if (problem.f_prime) {
      const double dfx = problem.f_prime(x);
      if (std::isfinite(dfx) && dfx < 0.0) next = x - fx / dfx;
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= std::numeric_limits<double>::epsilon() * hi) {
      // Bracket exhausted at machine precision; f is flat here to within tol.
      return next;
    }
    x = next;
  }
  return x;
}

double lambert_w_exp(double log_ratio, double tol) {
  const double L = log_ratio;
  if (std::isnan(L)) throw NumericError("lambert: NaN argument");
  // a e^a = e^L with L very negative: a = e^L to machine accuracy.
  if (L < -36.0) return std::exp(L);

  // phi(a) = log a + a - L is increasing with the same positive root.
  double a = L > 3.0 ? L - std::log(L) : std::exp(std::min(L, 1.0) - 1.0);
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const double phi = std::log(a) + a - L;
    if (phi > 0.0) {
      hi = a;
    } else {
      lo = a;
    }
    const double step = -phi * a / (1.0 + a);
    if (std::abs(phi) <= tol && std::abs(step) <= tol * std::max(1.0, a)) return a;
    double next = a + step;
    if (!(next > lo && next < hi))
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * a;
    if (next == a) return a;
    a = next;
  }
  return a;
}

double solve_lambert_like(double coef_a, double coef_b, double tol) {
  if (!(coef_a > 0.0) || !(coef_b > 0.0))
    throw DomainError("lambert-like solve requires positive coefficients");
  return lambert_w_exp(std::log(coef_a) - std::log(coef_b), tol);
}

}  // namespace rdp
