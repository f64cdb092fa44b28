#pragma once

#include "rdp/types.hpp"

namespace rdp {

/// Truncate-and-grid recipe for a Gaussian source: N = round(2S/delta) + 1
/// points uniformly spaced on [mu - S, mu + S], cell mass taken from CDF
/// differences and renormalized.
struct GaussianSpec {
  double mu = 0.0;
  double sigma = 1.0;
  double S = 8.0;
  double delta = 0.5;

  std::size_t grid_size() const;
  void validate() const;  // throws ConfigError
};

/// Discretized Gaussian with p_i = F(x_i + delta/2) - F(x_i - delta/2),
/// renormalized so the masses sum to 1 exactly. The mass lost to truncation
/// (before renormalization) is reported through `truncated_mass` when given.
DiscreteSource discretize_gaussian(const GaussianSpec& spec,
                                   double* truncated_mass = nullptr);

/// d_ij = 1 if i != j else 0, n >= 2.
DistortionMatrix hamming_distortion(std::size_t n);

/// d_ij = (x_i - xhat_j)^2
DistortionMatrix squared_error_matrix(const std::vector<double>& points_src,
                                      const std::vector<double>& points_rec);

// Error-function evaluations used by the discretizer. Self-contained
// (series + continued fraction) so grids do not depend on the platform libm;
// relative error is a few 1e-16 against high-accuracy references.
double erf_approx(double x);
double erfc_approx(double x);
double norm_cdf(double x);  // standard Gaussian CDF

}  // namespace rdp
