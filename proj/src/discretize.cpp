#include "rdp/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdp {

namespace {

constexpr double kTwoOverSqrtPi = 1.1283791670955125739;  // 2/sqrt(pi)
constexpr double kOneOverSqrtPi = 0.5641895835477562869;
constexpr double kOneOverSqrt2 = 0.70710678118654752440;

// erf on |x| < 1 by the all-positive-terms series
// erf(x) = 2/sqrt(pi) e^{-x^2} sum_n (2x^2)^n x / (2n+1)!!
double erf_small(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  double denom = 1.0;
  for (int n = 1; n < 80; ++n) {
    denom += 2.0;
    term *= 2.0 * x2 / denom;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-18) break;
  }
  return kTwoOverSqrtPi * std::exp(-x2) * sum;
}

// erfc on x >= 1 by the Legendre continued fraction
// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz scheme.
double erfc_large(double x) {
  const double tiny = 1e-300;
  double f = x, c = x, d = 0.0;
  for (int n = 1; n < 200; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return kOneOverSqrtPi * std::exp(-x * x) / f;
}

}  // namespace

double erfc_approx(double x) {
  if (std::isnan(x)) return x;
  if (x >= 1.0) return x > 27.3 ? 0.0 : erfc_large(x);
  if (x <= -1.0) return 2.0 - (x < -27.3 ? 0.0 : erfc_large(-x));
  return 1.0 - erf_small(x);
}

double erf_approx(double x) {
  if (std::isnan(x)) return x;
  if (x >= 1.0) return 1.0 - erfc_approx(x);
  if (x <= -1.0) return erfc_approx(-x) - 1.0;
  return erf_small(x);
}

double norm_cdf(double x) { return 0.5 * erfc_approx(-x * kOneOverSqrt2); }

std::size_t GaussianSpec::grid_size() const {
  return static_cast<std::size_t>(std::llround(2.0 * S / delta)) + 1;
}

void GaussianSpec::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("gaussian spec: sigma must be > 0");
  if (!(delta > 0.0)) throw ConfigError("gaussian spec: delta must be > 0");
  if (!(S > 0.0)) throw ConfigError("gaussian spec: S must be > 0");
  if (!(delta <= 2.0 * S)) throw ConfigError("gaussian spec: delta must be <= 2S");
  if (!std::isfinite(mu)) throw ConfigError("gaussian spec: mu must be finite");
}

DiscreteSource discretize_gaussian(const GaussianSpec& spec, double* truncated_mass) {
  spec.validate();
  const std::size_t n = spec.grid_size();
  const double center = 0.5 * static_cast<double>(n - 1);
  const double step = spec.delta / spec.sigma;  // standardized spacing

  std::vector<double> points(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i) - center;
    points[i] = spec.mu + k * spec.delta;
    // standardized cell [lo, hi]; mirrored cells get exactly negated bounds
    const double lo = (k - 0.5) * step;
    const double hi = (k + 0.5) * step;
    const double sq2 = kOneOverSqrt2;
    double mass;
    if (lo >= 0.0) {
      mass = 0.5 * (erfc_approx(lo * sq2) - erfc_approx(hi * sq2));
    } else if (hi <= 0.0) {
      mass = 0.5 * (erfc_approx(-hi * sq2) - erfc_approx(-lo * sq2));
    } else {
      mass = 0.5 * (erf_approx(hi * sq2) + erf_approx(-lo * sq2));
    }
    p[i] = std::max(mass, 0.0);
  }

  double raw_sum = 0.0;
  for (double v : p) raw_sum += v;
  if (!(raw_sum > 0.0)) throw NumericError("gaussian discretization captured no mass");
  if (truncated_mass) *truncated_mass = 1.0 - raw_sum;

  for (double& v : p) v /= raw_sum;

  // Force an exact unit sum: fold the rounding residual into the largest
  // cell (split over the mirrored pair when it ties, keeping symmetry).
  for (int round = 0; round < 5; ++round) {
    double sum = 0.0;
    for (double v : p) sum += v;
    const double residual = 1.0 - sum;
    if (residual == 0.0) break;
    const std::size_t imax =
        static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    const std::size_t imirror = n - 1 - imax;
    if (imirror != imax && p[imirror] == p[imax]) {
      p[imax] += 0.5 * residual;
      p[imirror] += 0.5 * residual;
    } else {
      p[imax] += residual;
    }
  }

  return DiscreteSource(std::move(points), std::move(p));
}

DistortionMatrix hamming_distortion(std::size_t n) {
  if (n < 2) throw ConfigError("hamming distortion needs an alphabet of size >= 2");
  Mat d(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = 0.0;
  return DistortionMatrix(std::move(d));
}

DistortionMatrix squared_error_matrix(const std::vector<double>& points_src,
                                      const std::vector<double>& points_rec) {
  Mat d(points_src.size(), points_rec.size());
  for (std::size_t i = 0; i < points_src.size(); ++i)
    for (std::size_t j = 0; j < points_rec.size(); ++j) {
      const double diff = points_src[i] - points_rec[j];
      d(i, j) = diff * diff;
    }
  return DistortionMatrix(std::move(d));
}

}  // namespace rdp
