#include "rdp/kl_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rdp/kernels.hpp"
#include "rdp/rootfind.hpp"

namespace rdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTiny = -708.0;  // below this, exp underflows to 0

double neumaier_add(double& sum, double& comp, double term) {
  const double t = sum + term;
  comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term : (term - t) + sum;
  sum = t;
  return t;
}

// Shared scratch for the dual sweeps on one problem. Works in t_i = b_i / p_i
// and keeps everything in the log domain.
struct KlWork {
  const KlProblem& prob;
  std::size_t n;  // M == N
  std::vector<double> lp;      // log p_i
  std::vector<double> ldflat;  // log d_ij, row-major
  Mat dT;                      // transposed distortions for column access

  std::vector<double> lr;  // log r_j, -inf allowed
  std::vector<double> a;
  std::vector<double> t;  // b_i / p_i
  double gamma = 1.0;
  double lambda = 1.0;

  // per-sweep scratch
  std::vector<double> u, u2, ubase;

  explicit KlWork(const KlProblem& p)
      : prob(p),
        n(p.source.size()),
        lp(n),
        ldflat(n * n),
        dT(p.d.d.transposed()),
        lr(n),
        a(n),
        t(n),
        u(n),
        u2(n),
        ubase(n * n) {
    for (std::size_t i = 0; i < n; ++i) lp[i] = std::log(p.source.p[i]);
    for (std::size_t k = 0; k < n * n; ++k) ldflat[k] = std::log(p.d.d.data[k]);
  }

  void set_r(const std::vector<double>& r) {
    for (std::size_t j = 0; j < n; ++j) lr[j] = r[j] > 0.0 ? std::log(r[j]) : kNegInf;
  }

  void load_state(const KlDualState& s) {
    a = s.a;
    for (std::size_t i = 0; i < n; ++i) t[i] = s.b[i] / prob.source.p[i];
    gamma = s.gamma;
    lambda = s.lambda;
  }

  KlDualState dump_state() const {
    KlDualState s;
    s.a = a;
    s.b.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.b[i] = prob.source.p[i] * t[i];
    s.gamma = gamma;
    s.lambda = lambda;
    return s;
  }

  // a_j solves a e^a = gamma p_j / S_j, S_j = sum_i p_i r_j e^{-lambda d_ij - t_i - 1}.
  void update_a(double tol_root) {
    const auto& k = kernels::active();
    if (gamma <= 0.0) {
      std::fill(a.begin(), a.end(), 0.0);
      return;
    }
    const double lgamma_v = std::log(gamma);
    for (std::size_t i = 0; i < n; ++i) u[i] = lp[i] - t[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (lr[j] == kNegInf) {
        a[j] = 0.0;
        continue;
      }
      const double* dcol = dT.row(j);
      const double m = k.max_decay(u.data(), dcol, lambda, n);
      double s0, s1;
      k.decay_exp_pair(u.data(), dcol, lambda, m, n, &s0, &s1);
      const double log_s = lr[j] - 1.0 + m + std::log(s0);
      a[j] = lambert_w_exp(lgamma_v + lp[j] - log_s, tol_root);
    }
  }

  // t_i = log sum_j r_j e^{a_j - lambda d_ij} - 1; renormalizes every row of w.
  void update_t() {
    const auto& k = kernels::active();
    for (std::size_t j = 0; j < n; ++j) u2[j] = lr[j] + a[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double* drow = prob.d.d.row(i);
      const double m = k.max_decay(u2.data(), drow, lambda, n);
      if (m == kNegInf) throw NumericError("kl inner loop: empty row normalization");
      double s0, s1;
      k.decay_exp_pair(u2.data(), drow, lambda, m, n, &s0, &s1);
      t[i] = m + std::log(s0) - 1.0;
    }
  }

  void update_gamma() {
    double lg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(a[j] > 0.0)) {
        gamma = 0.0;
        return;
      }
      lg += prob.source.p[j] * std::log(a[j]);
    }
    lg -= prob.P;
    gamma = lg > kLogTiny ? std::exp(lg) : 0.0;
  }

  // lambda solves sum_ij p_i r_j d_ij e^{a_j - lambda d_ij - t_i - 1} = D,
  // evaluated through h = log(sum) - log D for overflow safety.
  void update_lambda(const SolverConfig& cfg) {
    double worst = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      const double ci = lp[i] - t[i] - 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = ci + lr[j] + a[j] + ldflat[i * n + j];
        ubase[i * n + j] = v;
        if (v > worst) worst = v;
      }
    }
    if (worst == kNegInf) {  // no positive-distortion mass; constraint slack
      lambda = 0.0;
      return;
    }
    if (!(prob.D > 0.0)) throw NumericError("kl inner loop: D = 0 has no finite multiplier");
    const auto& k = kernels::active();
    const double log_d_budget = std::log(prob.D);
    const double* ub = ubase.data();
    const double* dv = prob.d.d.data.data();
    const std::size_t sz = n * n;
    auto h = [&](double lam) {
      const double m = k.max_decay(ub, dv, lam, sz);
      if (m == kNegInf) return kNegInf;
      double s0, s1;
      k.decay_exp_pair(ub, dv, lam, m, sz, &s0, &s1);
      return m + std::log(s0) - log_d_budget;
    };
    auto hp = [&](double lam) {
      const double m = k.max_decay(ub, dv, lam, sz);
      double s0, s1;
      k.decay_exp_pair(ub, dv, lam, m, sz, &s0, &s1);
      return -s1 / s0;
    };
    lambda = solve_monotone_root({h, hp}, lambda, cfg.tol_root, cfg.max_root_iter);
  }

  // One full sweep; returns the largest dual change.
  double sweep(const SolverConfig& cfg) {
    const std::vector<double> a_old = a;
    const std::vector<double> t_old = t;
    const double g_old = gamma, l_old = lambda;

    update_a(cfg.tol_root);
    update_t();
    update_gamma();
    update_lambda(cfg);

    double delta = std::max(std::abs(gamma - g_old), std::abs(lambda - l_old));
    for (std::size_t j = 0; j < n; ++j) delta = std::max(delta, std::abs(a[j] - a_old[j]));
    for (std::size_t i = 0; i < n; ++i)
      delta = std::max(delta, prob.source.p[i] * std::abs(t[i] - t_old[i]));
    if (!std::isfinite(delta)) throw NumericError("kl inner loop: non-finite dual change");
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
    update_t();  // final row renormalization before any w extraction
    return it;
  }

  // w_ij = e^{lr_j + a_j - lambda d_ij - t_i - 1}
  Mat extract_w() const {
    Mat w(n, n);
    std::vector<double> z(n);
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < n; ++i) {
      const double* drow = prob.d.d.row(i);
      for (std::size_t j = 0; j < n; ++j)
        z[j] = lr[j] + a[j] - lambda * drow[j] - t[i] - 1.0;
      k.vexp(z.data(), 0.0, w.row(i), n);
    }
    return w;
  }
};

double objective_value(const std::vector<double>& p, const Mat& w,
                       const std::vector<double>& r) {
  const auto& k = kernels::active();
  double f = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < w.rows; ++i)
    neumaier_add(f, comp, p[i] * k.kl_sum(w.row(i), r.data(), w.cols));
  return f + comp;
}

}  // namespace

KlProblem::KlProblem(DiscreteSource source_in, DistortionMatrix d_in, double D_in,
                     double P_in)
    : source(std::move(source_in)), d(std::move(d_in)), D(D_in), P(P_in) {
  if (d.d.rows != source.size())
    throw DimensionError("distortion rows must match source alphabet");
  if (d.d.rows != d.d.cols)
    throw DimensionError("the KL-perception case requires M == N");
  if (!(D >= 0.0)) throw ConfigError("distortion budget D must be >= 0");
  if (!(P >= 0.0)) throw ConfigError("perception budget P must be >= 0");
}

double KlProblem::target_log_marginal() const {
  double s = 0.0;
  for (double pi : source.p) s += pi * std::log(pi);
  return s - P;
}

KlDualState KlDualState::initial(std::size_t m, std::size_t n) {
  KlDualState s;
  s.a.assign(n, 1.0);
  s.b.assign(m, 1.0);
  s.gamma = 1.0;
  s.lambda = 1.0;
  return s;
}

ReconstructionDist update_r(const DiscreteSource& p, const ChannelMatrix& w) {
  if (w.w.rows != p.size())
    throw DimensionError("channel row count must equal source alphabet size");
  std::vector<double> r(w.w.cols, 0.0);
  for (std::size_t i = 0; i < w.w.rows; ++i) {
    const double pi = p.p[i];
    const double* row = w.w.row(i);
    for (std::size_t j = 0; j < w.w.cols; ++j) r[j] += pi * row[j];
  }
  return ReconstructionDist(std::move(r));
}

KlDualState kl_inner_loop(const KlProblem& problem, const ReconstructionDist& r,
                          KlDualState state, const SolverConfig& cfg, int* iterations) {
  if (r.size() != problem.source.size())
    throw DimensionError("reconstruction size must match problem alphabet");
  KlWork work(problem);
  work.set_r(r.r);
  work.load_state(state);
  const int it = work.run_inner(cfg);
  if (iterations) *iterations = it;
  return work.dump_state();
}

ChannelMatrix reconstruct_w(const ReconstructionDist& r, const KlDualState& state,
                            const KlProblem& problem) {
  const std::size_t n = problem.source.size();
  if (r.size() != n || state.a.size() != n || state.b.size() != n)
    throw DimensionError("state/reconstruction sizes must match the problem");
  Mat w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = state.b[i] / problem.source.p[i];
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double z = (r.r[j] > 0.0 ? std::log(r.r[j]) : kNegInf) + state.a[j] -
                       state.lambda * problem.d.d(i, j) - ti - 1.0;
      w(i, j) = std::exp(z);
      sum += w(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ConvergenceError("reconstruct_w: inner loop not converged (row sum off by > 1e-6)");
    for (std::size_t j = 0; j < n; ++j) w(i, j) /= sum;
  }
  return ChannelMatrix(std::move(w));
}

RdpSolution solve_kl(const KlProblem& problem, const SolverConfig& cfg) {
  const std::size_t n = problem.source.size();
  const std::vector<double>& p = problem.source.p;

  double min_achievable = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = problem.d.d.row(i);
    min_achievable += p[i] * *std::min_element(row, row + n);
  }
  if (problem.D < min_achievable - 1e-15)
    throw InfeasibleError("distortion budget below the minimum achievable distortion");

  KlWork work(problem);
  work.load_state(KlDualState::initial(n, n));
  std::vector<double> r(n, 1.0 / static_cast<double>(n));

  RdpSolution sol;
  Mat w;
  std::vector<double> marginal(n);
  double f_prev = std::numeric_limits<double>::infinity();
  double f = 0.0, dist = 0.0, perc = 0.0;

  int outer = 0;
  for (outer = 1; outer <= cfg.max_outer; ++outer) {
    work.set_r(r);
    const int inner_iters = work.run_inner(cfg);
    w = work.extract_w();

    f = objective_value(p, w, r);
    const auto& k = kernels::active();
    dist = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      dist += p[i] * k.dot(w.row(i), problem.d.d.row(i), n);
    std::fill(marginal.begin(), marginal.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) marginal[j] += p[i] * w(i, j);
    perc = k.kl_sum(p.data(), marginal.data(), n);

    if (!std::isfinite(f)) throw NumericError("kl solver: non-finite objective");
    if (cfg.record_trace) sol.trace.rows.push_back({f, dist, perc, inner_iters});
    if (work.gamma > cfg.multiplier_cap || work.lambda > cfg.multiplier_cap)
      throw InfeasibleError("kl solver: multiplier blow-up, budgets look infeasible");

    if (outer >= 2 && std::abs(f - f_prev) < cfg.tol_outer) {
      sol.converged = true;
      break;
    }
    f_prev = f;
    if (outer < cfg.max_outer) r = marginal;  // update_r for the next pass
  }

  sol.outer_iters = std::min(outer, cfg.max_outer);
  sol.rate_nats = std::max(f, 0.0);
  sol.w = ChannelMatrix(std::move(w));
  sol.r = ReconstructionDist(std::move(r));
  sol.achieved_distortion = dist;
  sol.achieved_perception = perc;
  sol.duals["distortion_multiplier"] = work.lambda;
  sol.duals["perception_multiplier"] = work.gamma;
  if (sol.converged &&
      (dist > problem.D + cfg.feasibility_tol || perc > problem.P + cfg.feasibility_tol))
    sol.converged = false;
  return sol;
}

}  // namespace rdp
