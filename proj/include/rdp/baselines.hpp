#pragma once

#include <cstdint>

#include "rdp/types.hpp"

namespace rdp {

/// Knobs of the brute-force oracle. The defaults certify ~1e-6 agreement on
/// 2x2 instances and ~1e-4 on 3x3 instances within seconds.
struct OracleConfig {
  double grid_resolution = 1e-3;  // 2x2 grid step, in (0, 0.5]
  int refine_rounds = 3;          // x10 zoom per round
  int restarts = 20;              // coordinate-descent restarts beyond 2x2
  double tol = 1e-9;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Rate-distortion value R(D) in nats by the distortion-targeted
/// Blahut-Arimoto iteration (r-update alternating with a per-iteration
/// multiplier solve). Self-contained reference code, independent of the
/// production solvers.
double blahut_arimoto_rd(const DiscreteSource& p, const DistortionMatrix& d, double D,
                         const SolverConfig& cfg = {});

/// Exact optimal transport value between p and r under `cost`, by the
/// transportation simplex with Bland's rule. Regularization-free; intended
/// for desk-scale instances (M, N <= 128 or so).
double exact_wasserstein(const std::vector<double>& p, const std::vector<double>& r,
                         const Mat& cost, double tol = 1e-9);

/// Reference R(D, P): dense grid search with local refinement on 2x2
/// channels, penalized multi-restart coordinate descent when M (N-1) <= 8.
/// The perception of a candidate channel is always evaluated exactly.
double brute_force_rdp(const DiscreteSource& p, const DistortionMatrix& d,
                       const PerceptionMeasure& perception, double D, double P,
                       const OracleConfig& cfg = {});

}  // namespace rdp
