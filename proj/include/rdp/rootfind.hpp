#pragma once

#include <functional>

namespace rdp {

/// A continuous, strictly decreasing scalar function on [0, inf) whose root
/// (or KKT-inactive multiplier 0) is wanted. `f_prime` may be empty, in which
/// case secant steps replace Newton steps.
struct MonotoneRootProblem {
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
};

/// Root of a strictly decreasing f on [0, inf).
///
/// Returns 0 immediately when f(0) <= 0 (complementary slackness). Otherwise
/// maintains a sign-change bracket; Newton steps are accepted only inside it
/// and a bisection step is taken when they leave. Returns x* >= 0 with
/// |f(x*)| <= tol. Throws NumericError if no sign change is found up to
/// x = 1e16 or an evaluation turns non-finite (NaN).
double solve_monotone_root(const MonotoneRootProblem& problem, double x0, double tol,
                           int max_iter = 200);

/// Unique a > 0 with a * exp(a) = exp(log_ratio), i.e. the principal
/// Lambert W of exp(log_ratio), computed as a safeguarded Newton iteration on
/// log a + a - log_ratio. Stable for the whole double range of log_ratio.
double lambert_w_exp(double log_ratio, double tol = 1e-12);

/// Unique a > 0 with a * exp(a) = coef_a / coef_b. Both coefficients must be
/// positive (DomainError otherwise); callers with a vanishing coefficient
/// must branch to the multiplier-0 path first.
double solve_lambert_like(double coef_a, double coef_b, double tol = 1e-12);

}  // namespace rdp
