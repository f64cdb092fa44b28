#include "rdp/ot_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "rdp/kernels.hpp"
#include "rdp/rootfind.hpp"

namespace rdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double neumaier_add(double& sum, double& comp, double term) {
  const double t = sum + term;
  comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term : (term - t) + sum;
  sum = t;
  return t;
}

// Log-domain iterate and scratch for one problem at one epsilon. The dual
// changes are measured in multiplier units (alpha_i = -p_i (lphi_i + 1),
// alpha_hat_i = -eps (lphihat_i + 1)) so tiny-epsilon runs do not amplify
// round-off into the stopping test.
struct OtWork {
  const OtProblem& prob;
  double eps;
  std::size_t m, n;

  std::vector<double> lp;        // log p_i
  std::vector<double> ldflat;    // log d_ij
  std::vector<double> lcflat;    // log c_ij
  std::vector<double> cdiveps;   // c_ij / eps
  Mat dT, cT, c_over_eps_T;

  std::vector<double> lr;  // log r_j
  std::vector<double> lphi, lphihat, beta;
  double gamma = 0.0, lambda = 0.0;

  // scratch
  std::vector<double> u_m, u_n, base_w, base_pi, num, den, z;

  OtWork(const OtProblem& p, double eps_in)
      : prob(p),
        eps(eps_in),
        m(p.source.size()),
        n(p.d.d.cols),
        lp(m),
        ldflat(m * n),
        lcflat(m * n),
        cdiveps(m * n),
        dT(p.d.d.transposed()),
        cT(p.c.c.transposed()),
        lr(n),
        lphi(m, 0.0),
        lphihat(m, 0.0),
        beta(n, 0.0),
        u_m(m),
        u_n(n),
        base_w(m * n),
        base_pi(m * n),
        num(n),
        den(n),
        z(n) {
    for (std::size_t i = 0; i < m; ++i) lp[i] = std::log(p.source.p[i]);
    for (std::size_t k = 0; k < m * n; ++k) {
      ldflat[k] = std::log(p.d.d.data[k]);
      lcflat[k] = std::log(p.c.c.data[k]);
      cdiveps[k] = p.c.c.data[k] / eps;
    }
    Mat ce(m, n);
    ce.data = cdiveps;
    c_over_eps_T = ce.transposed();
  }

  void set_r(const std::vector<double>& r) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(r[j] > 0.0)) throw DomainError("ot inner loop: r_j = 0 reconstruction letter");
      lr[j] = std::log(r[j]);
    }
  }

  void update_lphi() {
    const auto& k = kernels::active();
    for (std::size_t j = 0; j < n; ++j) u_n[j] = lr[j] + beta[j];
    for (std::size_t i = 0; i < m; ++i) {
      const double* drow = prob.d.d.row(i);
      const double mx = k.max_decay(u_n.data(), drow, gamma, n);
      double s0, s1;
      k.decay_exp_pair(u_n.data(), drow, gamma, mx, n, &s0, &s1);
      lphi[i] = -(mx + std::log(s0));
    }
  }

  void update_lphihat() {
    const auto& k = kernels::active();
    for (std::size_t j = 0; j < n; ++j) u_n[j] = -beta[j] / eps;
    for (std::size_t i = 0; i < m; ++i) {
      const double* crow = &cdiveps[i * n];
      const double mx = k.max_decay(u_n.data(), crow, lambda, n);
      double s0, s1;
      k.decay_exp_pair(u_n.data(), crow, lambda, mx, n, &s0, &s1);
      lphihat[i] = -(mx + std::log(s0));
    }
  }

  void update_beta_block() {
    const auto& k = kernels::active();
    // numerator: log sum_i p_i phi_hat_i e^{-lambda c_ij / eps}
    for (std::size_t i = 0; i < m; ++i) u_m[i] = lp[i] + lphihat[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double* ccol = c_over_eps_T.row(j);
      const double mx = k.max_decay(u_m.data(), ccol, lambda, m);
      double s0, s1;
      k.decay_exp_pair(u_m.data(), ccol, lambda, mx, m, &s0, &s1);
      num[j] = mx + std::log(s0);
    }
    // denominator: lr_j + log sum_i p_i phi_i e^{-gamma d_ij}
    for (std::size_t i = 0; i < m; ++i) u_m[i] = lp[i] + lphi[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double* dcol = dT.row(j);
      const double mx = k.max_decay(u_m.data(), dcol, gamma, m);
      double s0, s1;
      k.decay_exp_pair(u_m.data(), dcol, gamma, mx, m, &s0, &s1);
      den[j] = lr[j] + mx + std::log(s0);
    }
    const double pref = eps / (eps + 1.0);
    for (std::size_t j = 0; j < n; ++j) beta[j] = pref * (num[j] - den[j]);
  }

  void update_gamma_block(const SolverConfig& cfg) {
    double worst = kNegInf;
    for (std::size_t i = 0; i < m; ++i) {
      const double ci = lp[i] + lphi[i];
      for (std::size_t j = 0; j < n; ++j) {
        const double v = ci + lr[j] + beta[j] + ldflat[i * n + j];
        base_w[i * n + j] = v;
        if (v > worst) worst = v;
      }
    }
    if (worst == kNegInf) {
      gamma = 0.0;
      return;
    }
    if (!(prob.D > 0.0))
      throw NumericError("ot inner loop: D = 0 has no finite multiplier");
    const auto& k = kernels::active();
    const double logD = std::log(prob.D);
    const double* ub = base_w.data();
    const double* dv = prob.d.d.data.data();
    const std::size_t sz = m * n;
    auto h = [&](double g) {
      const double mx = k.max_decay(ub, dv, g, sz);
      if (mx == kNegInf) return kNegInf;
      double s0, s1;
      k.decay_exp_pair(ub, dv, g, mx, sz, &s0, &s1);
      return mx + std::log(s0) - logD;
    };
    auto hp = [&](double g) {
      const double mx = k.max_decay(ub, dv, g, sz);
      double s0, s1;
      k.decay_exp_pair(ub, dv, g, mx, sz, &s0, &s1);
      return -s1 / s0;
    };
    gamma = solve_monotone_root({h, hp}, gamma, cfg.tol_root, cfg.max_root_iter);
  }

  void update_lambda_block(const SolverConfig& cfg) {
    double worst = kNegInf;
    for (std::size_t i = 0; i < m; ++i) {
      const double ci = lp[i] + lphihat[i];
      for (std::size_t j = 0; j < n; ++j) {
        const double v = ci - beta[j] / eps + lcflat[i * n + j];
        base_pi[i * n + j] = v;
        if (v > worst) worst = v;
      }
    }
    if (worst == kNegInf) {
      lambda = 0.0;
      return;
    }
    if (!(prob.P > 0.0))
      throw NumericError("ot inner loop: P = 0 has no finite multiplier");
    const auto& k = kernels::active();
    const double logP = std::log(prob.P);
    const double* ub = base_pi.data();
    const double* cv = cdiveps.data();
    const std::size_t sz = m * n;
    auto h = [&](double l) {
      const double mx = k.max_decay(ub, cv, l, sz);
      if (mx == kNegInf) return kNegInf;
      double s0, s1;
      k.decay_exp_pair(ub, cv, l, mx, sz, &s0, &s1);
      return mx + std::log(s0) - logP;
    };
    auto hp = [&](double l) {
      const double mx = k.max_decay(ub, cv, l, sz);
      double s0, s1;
      k.decay_exp_pair(ub, cv, l, mx, sz, &s0, &s1);
      return -s1 / s0;
    };
    lambda = solve_monotone_root({h, hp}, lambda, cfg.tol_root, cfg.max_root_iter);
  }

  double sweep(const SolverConfig& cfg) {
    const std::vector<double> lphi_old = lphi;
    const std::vector<double> lphihat_old = lphihat;
    const std::vector<double> beta_old = beta;
    const double g_old = gamma, l_old = lambda;

    update_lphi();
    update_lphihat();
    update_beta_block();
    update_gamma_block(cfg);
    update_lambda_block(cfg);

    double delta = std::max(std::abs(gamma - g_old), std::abs(lambda - l_old));
    for (std::size_t i = 0; i < m; ++i) {
      delta = std::max(delta, prob.source.p[i] * std::abs(lphi[i] - lphi_old[i]));
      delta = std::max(delta, eps * std::abs(lphihat[i] - lphihat_old[i]));
    }
    for (std::size_t j = 0; j < n; ++j)
      delta = std::max(delta, std::abs(beta[j] - beta_old[j]));
    if (!std::isfinite(delta)) throw NumericError("ot inner loop: non-finite dual change");
    return delta;
  }

  int run_inner(const SolverConfig& cfg) {
    int it = 0;
    for (; it < cfg.max_inner; ++it) {
      if (sweep(cfg) < cfg.tol_inner) {
        ++it;
        break;
      }
    }
    update_lphi();     // exact row normalization of w
    update_lphihat();  // exact row marginals of pi
    return it;
  }

  Mat extract_w() const {
    const auto& k = kernels::active();
    Mat w(m, n);
    std::vector<double> zz(n);
    for (std::size_t i = 0; i < m; ++i) {
      const double* drow = prob.d.d.row(i);
      for (std::size_t j = 0; j < n; ++j)
        zz[j] = lr[j] + beta[j] - gamma * drow[j] + lphi[i];
      k.vexp(zz.data(), 0.0, w.row(i), n);
    }
    return w;
  }

  // log pi_ij; pi is materialized only on demand.
  double log_pi(std::size_t i, std::size_t j) const {
    return lp[i] + lphihat[i] - (beta[j] + lambda * prob.c.c(i, j)) / eps;
  }

  Mat extract_pi() const {
    Mat piM(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) piM(i, j) = std::exp(log_pi(i, j));
    return piM;
  }

  // sum_ij pi log pi without materializing pi.
  double entropy_term() const {
    double s = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double q = log_pi(i, j);
        const double e = std::exp(q);
        if (e > 0.0) neumaier_add(s, comp, e * q);
      }
    return s + comp;
  }

  double coupling_cost() const {
    const auto& k = kernels::active();
    double s = 0.0;
    std::vector<double> qrow(n);
    for (std::size_t i = 0; i < m; ++i) {
      const double ci = lp[i] + lphihat[i];
      for (std::size_t j = 0; j < n; ++j) qrow[j] = ci - (beta[j] + lambda * prob.c.c(i, j)) / eps;
      s += k.dot_exp(prob.c.c.row(i), qrow.data(), 0.0, n);
    }
    return s;
  }
};

double objective_mi(const std::vector<double>& p, const Mat& w, const std::vector<double>& r) {
  const auto& k = kernels::active();
  double f = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < w.rows; ++i)
    neumaier_add(f, comp, p[i] * k.kl_sum(w.row(i), r.data(), w.cols));
  return f + comp;
}

}  // namespace

OtProblem::OtProblem(DiscreteSource source_in, DistortionMatrix d_in, CostMatrix c_in,
                     double D_in, double P_in, double epsilon_in)
    : source(std::move(source_in)),
      d(std::move(d_in)),
      c(std::move(c_in)),
      D(D_in),
      P(P_in),
      epsilon(epsilon_in) {
  if (d.d.rows != source.size())
    throw DimensionError("distortion rows must match source alphabet");
  if (c.c.rows != d.d.rows || c.c.cols != d.d.cols)
    throw DimensionError("cost matrix shape must match distortion shape");
  if (!(D >= 0.0)) throw ConfigError("distortion budget D must be >= 0");
  if (!(P >= 0.0)) throw ConfigError("perception budget P must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("entropy coefficient epsilon must be > 0");
}

OtDualState OtDualState::initial(std::size_t m, std::size_t n) {
  OtDualState s;
  s.phi.assign(m, 1.0);
  s.phi_hat.assign(m, 1.0);
  s.beta.assign(n, 0.0);
  s.gamma = 0.0;
  s.lambda = 0.0;
  return s;
}

std::vector<double> update_phi(const ReconstructionDist& r, const std::vector<double>& beta,
                               double gamma, const OtProblem& problem) {
  OtWork w(problem, problem.epsilon);
  w.set_r(r.r);
  w.beta = beta;
  w.gamma = gamma;
  w.update_lphi();
  std::vector<double> phi(w.m);
  for (std::size_t i = 0; i < w.m; ++i) {
    phi[i] = std::exp(w.lphi[i]);
    if (!(phi[i] > 0.0) || !std::isfinite(phi[i]))
      throw NumericError("update_phi: scaling under/overflowed");
  }
  return phi;
}

std::vector<double> update_phi_hat(const std::vector<double>& beta, double lambda,
                                   const OtProblem& problem) {
  OtWork w(problem, problem.epsilon);
  w.beta = beta;
  w.lambda = lambda;
  w.update_lphihat();
  std::vector<double> phi_hat(w.m);
  for (std::size_t i = 0; i < w.m; ++i) {
    phi_hat[i] = std::exp(w.lphihat[i]);
    if (!(phi_hat[i] > 0.0) || !std::isfinite(phi_hat[i]))
      throw NumericError("update_phi_hat: scaling under/overflowed");
  }
  return phi_hat;
}

std::vector<double> update_beta(const ReconstructionDist& r, const std::vector<double>& phi,
                                const std::vector<double>& phi_hat, double gamma,
                                double lambda, const OtProblem& problem) {
  OtWork w(problem, problem.epsilon);
  w.set_r(r.r);
  w.gamma = gamma;
  w.lambda = lambda;
  for (std::size_t i = 0; i < w.m; ++i) {
    w.lphi[i] = std::log(phi[i]);
    w.lphihat[i] = std::log(phi_hat[i]);
  }
  w.update_beta_block();
  return w.beta;
}

double update_gamma(const ReconstructionDist& r, const std::vector<double>& phi,
                    const std::vector<double>& beta, const OtProblem& problem,
                    const SolverConfig& cfg) {
  OtWork w(problem, problem.epsilon);
  w.set_r(r.r);
  w.beta = beta;
  for (std::size_t i = 0; i < w.m; ++i) w.lphi[i] = std::log(phi[i]);
  w.gamma = 1.0;  // warm start only
  w.update_gamma_block(cfg);
  return w.gamma;
}

double update_lambda(const std::vector<double>& phi_hat, const std::vector<double>& beta,
                     const OtProblem& problem, const SolverConfig& cfg) {
  OtWork w(problem, problem.epsilon);
  w.beta = beta;
  for (std::size_t i = 0; i < w.m; ++i) w.lphihat[i] = std::log(phi_hat[i]);
  w.lambda = 1.0;  // warm start only
  w.update_lambda_block(cfg);
  return w.lambda;
}

ChannelMatrix reconstruct_w(const ReconstructionDist& r, const OtDualState& state,
                            const OtProblem& problem) {
  const std::size_t m = problem.d.d.rows, n = problem.d.d.cols;
  if (r.size() != n || state.phi.size() != m || state.beta.size() != n)
    throw DimensionError("state/reconstruction sizes must match the problem");
  Mat w(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      w(i, j) = r.r[j] * state.phi[i] * std::exp(state.beta[j] - state.gamma * problem.d.d(i, j));
      sum += w(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ConvergenceError("reconstruct_w: inner loop not converged (row sum off by > 1e-6)");
    for (std::size_t j = 0; j < n; ++j) w(i, j) /= sum;
  }
  return ChannelMatrix(std::move(w));
}

Coupling reconstruct_pi(const OtDualState& state, const OtProblem& problem) {
  const std::size_t m = problem.d.d.rows, n = problem.d.d.cols;
  if (state.phi_hat.size() != m || state.beta.size() != n)
    throw DimensionError("state sizes must match the problem");
  Mat piM(m, n);
  const double eps = problem.epsilon;
  for (std::size_t i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      piM(i, j) = problem.source.p[i] * state.phi_hat[i] *
                  std::exp(-(state.beta[j] + state.lambda * problem.c.c(i, j)) / eps);
      row_sum += piM(i, j);
    }
    if (std::abs(row_sum - problem.source.p[i]) > 1e-5)
      throw ConvergenceError("reconstruct_pi: inner loop not converged (row marginal off)");
  }
  return Coupling{std::move(piM)};
}

namespace {

// Outer loop shared by the cold and warm entry points; `work` carries the
// (possibly warm-started) dual iterate and `r` the starting reconstruction.
RdpSolution run_outer(OtWork& work, std::vector<double> r, const SolverConfig& cfg) {
  const OtProblem& problem = work.prob;
  const std::size_t m = work.m, n = work.n;
  const std::vector<double>& p = problem.source.p;

  double min_achievable = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = problem.d.d.row(i);
    min_achievable += p[i] * *std::min_element(row, row + n);
  }
  if (problem.D < min_achievable - 1e-15)
    throw InfeasibleError("distortion budget below the minimum achievable distortion");

  RdpSolution sol;
  Mat w;
  std::vector<double> marginal(n);
  double g_prev = std::numeric_limits<double>::infinity();
  double g = 0.0, mi = 0.0, dist = 0.0, perc = 0.0;

  int outer = 0;
  for (outer = 1; outer <= cfg.max_outer; ++outer) {
    work.set_r(r);
    const int inner_iters = work.run_inner(cfg);
    w = work.extract_w();

    mi = objective_mi(p, w, r);
    g = mi + problem.epsilon * work.entropy_term();
    const auto& k = kernels::active();
    dist = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      dist += p[i] * k.dot(w.row(i), problem.d.d.row(i), n);
    perc = work.coupling_cost();

    if (!std::isfinite(g)) throw NumericError("ot solver: non-finite objective");
    if (cfg.record_trace) sol.trace.rows.push_back({g, dist, perc, inner_iters});
    if (work.gamma > cfg.multiplier_cap || work.lambda > cfg.multiplier_cap)
      throw InfeasibleError("ot solver: multiplier blow-up, budgets look infeasible");

    if (outer >= 2 && std::abs(g - g_prev) < cfg.tol_outer) {
      sol.converged = true;
      break;
    }
    g_prev = g;
    if (outer < cfg.max_outer) {
      std::fill(marginal.begin(), marginal.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) marginal[j] += p[i] * w(i, j);
      r = marginal;
    }
  }

  sol.outer_iters = std::min(outer, cfg.max_outer);
  sol.rate_nats = std::max(mi, 0.0);
  sol.regularized_objective = g;
  sol.achieved_distortion = dist;
  sol.achieved_perception = perc;
  sol.duals["distortion_multiplier"] = work.gamma;
  sol.duals["perception_multiplier"] = work.lambda;

  // Marginal consistency: column sums of pi vs column sums of diag(p) w.
  Mat piM = work.extract_pi();
  double marg_resid = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double cw = 0.0, cpi = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      cw += p[i] * w(i, j);
      cpi += piM(i, j);
    }
    marg_resid = std::max(marg_resid, std::abs(cw - cpi));
  }
  if (sol.converged && marg_resid > cfg.tol_marginal) sol.converged = false;

  sol.w = ChannelMatrix(std::move(w));
  sol.r = ReconstructionDist(std::move(r));
  sol.pi = Coupling{std::move(piM)};
  if (sol.converged &&
      (dist > problem.D + cfg.feasibility_tol || perc > problem.P + cfg.feasibility_tol))
    sol.converged = false;
  return sol;
}

}  // namespace

RdpSolution solve_ot(const OtProblem& problem, const SolverConfig& cfg) {
  OtWork work(problem, problem.epsilon);
  std::vector<double> r(work.n, 1.0 / static_cast<double>(work.n));
  return run_outer(work, std::move(r), cfg);
}

std::vector<RdpSolution> solve_ot_continuation(const OtProblem& problem,
                                               const SolverConfig& cfg,
                                               const std::vector<double>& eps_stages) {
  if (eps_stages.empty()) throw ConfigError("epsilon continuation needs at least one stage");
  for (std::size_t k = 0; k < eps_stages.size(); ++k) {
    if (!(eps_stages[k] > 0.0)) throw ConfigError("epsilon stages must be positive");
    if (k > 0 && !(eps_stages[k] < eps_stages[k - 1]))
      throw ConfigError("epsilon stages must be strictly decreasing");
  }

  std::vector<RdpSolution> out;
  out.reserve(eps_stages.size());
  std::vector<OtProblem> stages;
  for (double e : eps_stages) {
    stages.push_back(problem);
    stages.back().epsilon = e;
  }

  std::unique_ptr<OtWork> work = std::make_unique<OtWork>(stages[0], eps_stages[0]);
  std::vector<double> r(work->n, 1.0 / static_cast<double>(work->n));
  out.push_back(run_outer(*work, r, cfg));

  for (std::size_t k = 1; k < eps_stages.size(); ++k) {
    const double eps_old = eps_stages[k - 1], eps_new = eps_stages[k];
    std::unique_ptr<OtWork> next = std::make_unique<OtWork>(stages[k], eps_new);
    // alpha and beta carry over directly; alpha_hat lives at a fixed scale
    // alpha_hat_i = -eps (lphihat_i + 1), so lphihat is rescaled to eps_new.
    next->lphi = work->lphi;
    next->beta = work->beta;
    next->gamma = work->gamma;
    next->lambda = work->lambda;
    for (std::size_t i = 0; i < next->m; ++i) {
      const double alpha_hat = -eps_old * (work->lphihat[i] + 1.0);
      next->lphihat[i] = -alpha_hat / eps_new - 1.0;
    }
    work = std::move(next);
    out.push_back(run_outer(*work, out[k - 1].r.r, cfg));
  }
  return out;
}

}  // namespace rdp
