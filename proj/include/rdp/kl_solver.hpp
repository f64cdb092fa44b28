#pragma once

#include "rdp/types.hpp"

namespace rdp {

/// KL-perception instance: minimize I(X;X-hat) subject to
/// E[distortion] <= D and KL(p || p w) <= P. Requires M == N.
struct KlProblem {
  DiscreteSource source;
  DistortionMatrix d;
  double D = 0.0;
  double P = 0.0;

  KlProblem() = default;
  KlProblem(DiscreteSource source_in, DistortionMatrix d_in, double D_in, double P_in);

  /// T = sum_i p_i log p_i - P, the lower bound on sum_j p_j log(p w)_j.
  double target_log_marginal() const;
};

/// Dual iterate of the inner loop: perception potentials a (> 0 while
/// gamma > 0), row-normalization potentials b, and the two multipliers.
struct KlDualState {
  std::vector<double> a;
  std::vector<double> b;
  double gamma = 1.0;
  double lambda = 1.0;

  static KlDualState initial(std::size_t m, std::size_t n);
};

/// r_j = sum_i p_i w_ij, the closed-form optimal reconstruction marginal.
ReconstructionDist update_r(const DiscreteSource& p, const ChannelMatrix& w);

/// Cycles the a / b / gamma / lambda updates until the largest dual change
/// drops below cfg.tol_inner or cfg.max_inner sweeps are spent. Sweeps taken
/// are reported through `iterations` when given.
KlDualState kl_inner_loop(const KlProblem& problem, const ReconstructionDist& r,
                          KlDualState state, const SolverConfig& cfg,
                          int* iterations = nullptr);

/// w_ij = r_j exp(a_j - lambda d_ij - b_i/p_i - 1) for a converged state.
/// Throws ConvergenceError if some row sum deviates from 1 by more than 1e-6.
ChannelMatrix reconstruct_w(const ReconstructionDist& r, const KlDualState& state,
                            const KlProblem& problem);

/// Alternates the r-update with the dual inner loop from the standard
/// initialization (r uniform, a = b = 1, gamma = lambda = 1).
RdpSolution solve_kl(const KlProblem& problem, const SolverConfig& cfg = {});

}  // namespace rdp
