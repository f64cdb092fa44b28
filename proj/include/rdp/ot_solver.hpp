#pragma once

#include "rdp/types.hpp"

namespace rdp {

/// Wasserstein/TV-perception instance, solved through the entropy-regularized
/// relaxed-barycenter reformulation: the coupling pi shares one marginal with
/// diag(p) w, carries row marginals p, and pays sum pi c <= P.
struct OtProblem {
  DiscreteSource source;
  DistortionMatrix d;
  CostMatrix c;
  double D = 0.0;
  double P = 0.0;
  double epsilon = 0.01;

  OtProblem() = default;
  OtProblem(DiscreteSource source_in, DistortionMatrix d_in, CostMatrix c_in, double D_in,
            double P_in, double epsilon_in);
};

/// Scaling iterate of the inner loop. phi_i = e^{-alpha_i/p_i - 1} renormalizes
/// the rows of w; phi_hat_i = e^{-alpha_hat_i/eps - 1}/p_i scales the rows of
/// pi; beta is the shared-marginal potential; gamma and lambda are the
/// distortion and perception multipliers (the paper swaps these letters
/// between its two algorithms, so they are named by role everywhere).
struct OtDualState {
  std::vector<double> phi;
  std::vector<double> phi_hat;
  std::vector<double> beta;
  double gamma = 0.0;
  double lambda = 0.0;

  static OtDualState initial(std::size_t m, std::size_t n);
};

/// phi_i = 1 / sum_j r_j e^{beta_j - gamma d_ij}; makes rows of w sum to 1.
std::vector<double> update_phi(const ReconstructionDist& r, const std::vector<double>& beta,
                               double gamma, const OtProblem& problem);

/// phi_hat_i = 1 / sum_j e^{-(beta_j + lambda c_ij)/eps}; makes the rows of
/// p_i phi_hat_i e^{-(beta_j + lambda c_ij)/eps} sum to p_i.
std::vector<double> update_phi_hat(const std::vector<double>& beta, double lambda,
                                   const OtProblem& problem);

/// Exact block solve of the shared-marginal potential:
/// beta_j = eps/(eps+1) log( sum_i p_i phi_hat_i e^{-lambda c_ij/eps}
///                          / sum_i p_i r_j phi_i e^{-gamma d_ij} ).
/// After it, the marginals of pi and diag(p) w agree for the current scalings.
std::vector<double> update_beta(const ReconstructionDist& r, const std::vector<double>& phi,
                                const std::vector<double>& phi_hat, double gamma,
                                double lambda, const OtProblem& problem);

/// Root of G(gamma) = sum_ij p_i r_j phi_i e^{beta_j - gamma d_ij} d_ij - D on
/// [0, inf), or 0 when G(0) <= 0.
double update_gamma(const ReconstructionDist& r, const std::vector<double>& phi,
                    const std::vector<double>& beta, const OtProblem& problem,
                    const SolverConfig& cfg = {});

/// Root of F(lambda) = sum_ij p_i phi_hat_i e^{-(beta_j + lambda c_ij)/eps} c_ij - P
/// on [0, inf), or 0 when F(0) <= 0.
double update_lambda(const std::vector<double>& phi_hat, const std::vector<double>& beta,
                     const OtProblem& problem, const SolverConfig& cfg = {});

/// w_ij = r_j phi_i e^{beta_j - gamma d_ij} for a converged state.
ChannelMatrix reconstruct_w(const ReconstructionDist& r, const OtDualState& state,
                            const OtProblem& problem);

/// pi_ij = p_i phi_hat_i e^{-(beta_j + lambda c_ij)/eps}; throws
/// ConvergenceError if some row marginal deviates from p_i by more than 1e-5.
Coupling reconstruct_pi(const OtDualState& state, const OtProblem& problem);

/// Alternates the r-update with the phi/phi_hat/beta/gamma/lambda sweep from
/// the standard initialization (r uniform, phi = phi_hat = 1, beta = 0,
/// gamma = lambda = 0). Reports the unregularized mutual information as the
/// rate and the regularized objective separately.
RdpSolution solve_ot(const OtProblem& problem, const SolverConfig& cfg = {});

/// Solves at each epsilon of the descending ladder, warm-starting r and the
/// dual state (alpha-hat is rescaled to the new epsilon). Returns one
/// solution per stage; the last one is the production answer.
std::vector<RdpSolution> solve_ot_continuation(const OtProblem& problem,
                                               const SolverConfig& cfg,
                                               const std::vector<double>& eps_stages);

}  // namespace rdp
