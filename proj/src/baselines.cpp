#include "rdp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace rdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Blahut-Arimoto with a distortion target
// ---------------------------------------------------------------------------

struct BaRow {
  double log_z;   // log sum_j r_j e^{-lambda d_ij}
  double mean_d;  // E[d] under the tilted row
};

BaRow ba_row(const std::vector<double>& log_r, const double* d, std::size_t n,
             double lambda) {
  double m = -kInf;
  for (std::size_t j = 0; j < n; ++j) m = std::max(m, log_r[j] - lambda * d[j]);
  double z = 0.0, zd = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = std::exp(log_r[j] - lambda * d[j] - m);
    z += e;
    zd += d[j] * e;
  }
  return {m + std::log(z), zd / z};
}

double ba_distortion(const std::vector<double>& p, const std::vector<double>& log_r,
                     const Mat& d, double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.rows; ++i)
    s += p[i] * ba_row(log_r, d.row(i), d.cols, lambda).mean_d;
  return s;
}

}  // namespace

void OracleConfig::validate() const {
  if (!(grid_resolution > 0.0 && grid_resolution <= 0.5))
    throw ConfigError("oracle grid resolution must lie in (0, 0.5]");
  if (restarts < 1) throw ConfigError("oracle needs at least one restart");
  if (refine_rounds < 0) throw ConfigError("refine_rounds must be >= 0");
  if (!(tol > 0.0)) throw ConfigError("oracle tolerance must be positive");
}

double blahut_arimoto_rd(const DiscreteSource& p, const DistortionMatrix& dm, double D,
                         const SolverConfig& cfg) {
  const Mat& d = dm.d;
  const std::size_t m = d.rows, n = d.cols;
  if (m != p.size()) throw DimensionError("distortion rows must match source alphabet");
  if (!(D >= 0.0)) throw ConfigError("distortion budget must be >= 0");

  double min_achievable = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = d.row(i);
    min_achievable += p.p[i] * *std::min_element(row, row + n);
  }
  if (D < min_achievable - 1e-15)
    throw InfeasibleError("distortion budget below the minimum achievable distortion");

  std::vector<double> r(n, 1.0 / static_cast<double>(n)), log_r(n);
  double f_prev = kInf, f = 0.0, lambda = 1.0;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    for (std::size_t j = 0; j < n; ++j)
      log_r[j] = r[j] > 0.0 ? std::log(r[j]) : -kInf;

    if (ba_distortion(p.p, log_r, d, 0.0) <= D) {
      lambda = 0.0;
    } else {
      // dist(lambda) decreases; bracket then bisect/Newton-free polish
      double lo = 0.0, hi = std::max(lambda, 1.0);
      while (ba_distortion(p.p, log_r, d, hi) > D) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e14) throw NumericError("blahut-arimoto: multiplier diverged");
      }
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dist = ba_distortion(p.p, log_r, d, mid);
        if (std::abs(dist - D) <= 1e-14 * std::max(1.0, D)) {
          lo = hi = mid;
          break;
        }
        (dist > D ? lo : hi) = mid;
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
      }
      lambda = 0.5 * (lo + hi);
    }

    // w_ij = r_j e^{-lambda d_ij} / Z_i; f = sum_i p_i (-lambda E_i[d] - log Z_i)
    f = 0.0;
    std::vector<double> r_next(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const BaRow row = ba_row(log_r, d.row(i), n, lambda);
      f += p.p[i] * (-lambda * row.mean_d - row.log_z);
      for (std::size_t j = 0; j < n; ++j)
        r_next[j] += p.p[i] * std::exp(log_r[j] - lambda * d(i, j) - row.log_z);
    }
    if (outer >= 1 && std::abs(f - f_prev) < cfg.tol_outer) break;
    f_prev = f;
    r = r_next;
  }
  return std::max(f, 0.0);
}

// ---------------------------------------------------------------------------
// Transportation simplex
// ---------------------------------------------------------------------------

namespace {

struct TransportTableau {
  std::size_t m, n;
  const Mat& cost;
  Mat flow;
  std::vector<char> basic;               // m*n flags
  std::vector<std::vector<int>> row_adj  // basic columns per row
      ,
      col_adj;  // basic rows per column

  TransportTableau(std::size_t m_in, std::size_t n_in, const Mat& c)
      : m(m_in), n(n_in), cost(c), flow(m_in, n_in), basic(m_in * n_in, 0),
        row_adj(m_in), col_adj(n_in) {}

  void add_basic(std::size_t i, std::size_t j) {
    basic[i * n + j] = 1;
    row_adj[i].push_back(static_cast<int>(j));
    col_adj[j].push_back(static_cast<int>(i));
  }

  void remove_basic(std::size_t i, std::size_t j) {
    basic[i * n + j] = 0;
    auto& rj = row_adj[i];
    rj.erase(std::find(rj.begin(), rj.end(), static_cast<int>(j)));
    auto& ci = col_adj[j];
    ci.erase(std::find(ci.begin(), ci.end(), static_cast<int>(i)));
  }
};

}  // namespace

double exact_wasserstein(const std::vector<double>& p, const std::vector<double>& r,
                         const Mat& cost, double tol) {
  const std::size_t m = p.size(), n = r.size();
  if (cost.rows != m || cost.cols != n)
    throw DimensionError("cost matrix shape must match the two distributions");
  if (m == 0 || n == 0) throw DimensionError("transport needs nonempty marginals");
  if (m > 512 || n > 512) throw ConfigError("exact transport is desk-scale only");

  double sp = 0.0, sr = 0.0;
  for (double v : p) {
    if (v < 0.0) throw DomainError("transport marginals must be >= 0");
    sp += v;
  }
  for (double v : r) {
    if (v < 0.0) throw DomainError("transport marginals must be >= 0");
    sr += v;
  }
  if (std::abs(sp - sr) > 1e-9)
    throw DomainError("transport marginals must carry equal total mass");

  TransportTableau t(m, n, cost);

  // Northwest-corner start: exactly m + n - 1 basic cells.
  {
    std::vector<double> a = p, b = r;
    std::size_t i = 0, j = 0;
    while (true) {
      const double f = std::min(a[i], b[j]);
      t.flow(i, j) = f;
      t.add_basic(i, j);
      a[i] -= f;
      b[j] -= f;
      if (i == m - 1 && j == n - 1) break;
      if (j == n - 1) {
        ++i;
      } else if (i == m - 1) {
        ++j;
      } else if (a[i] <= b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double pivot_tol =
      std::max(1e-13, 1e-14 * *std::max_element(cost.data.begin(), cost.data.end()));
  std::vector<double> u(m), v(n);
  std::vector<char> u_set(m), v_set(n);
  std::vector<int> stack;
  std::vector<int> parent(m + n);

  const std::size_t max_pivots = 200 * (m + n) * (m + n) + 10000;
  for (std::size_t pivot = 0; pivot < max_pivots; ++pivot) {
    // Duals from the spanning tree, u_0 = 0.
    std::fill(u_set.begin(), u_set.end(), 0);
    std::fill(v_set.begin(), v_set.end(), 0);
    stack.assign(1, 0);
    u[0] = 0.0;
    u_set[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node < static_cast<int>(m)) {
        for (int j : t.row_adj[node])
          if (!v_set[j]) {
            v[j] = cost(node, j) - u[node];
            v_set[j] = 1;
            stack.push_back(static_cast<int>(m) + j);
          }
      } else {
        const int j = node - static_cast<int>(m);
        for (int i : t.col_adj[j])
          if (!u_set[i]) {
            u[i] = cost(i, j) - v[j];
            u_set[i] = 1;
            stack.push_back(i);
          }
      }
    }

    // Bland: first cell in row-major order with negative reduced cost.
    std::size_t ei = m, ej = n;
    for (std::size_t i = 0; i < m && ei == m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (t.basic[i * n + j]) continue;
        if (cost(i, j) - u[i] - v[j] < -pivot_tol) {
          ei = i;
          ej = j;
          break;
        }
      }
    if (ei == m) break;  // optimal

    // Tree path from row node ei to column node m + ej.
    std::fill(parent.begin(), parent.end(), -1);
    stack.assign(1, static_cast<int>(ei));
    parent[ei] = static_cast<int>(ei);
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == static_cast<int>(m + ej)) break;
      if (node < static_cast<int>(m)) {
        for (int j : t.row_adj[node]) {
          const int nj = static_cast<int>(m) + j;
          if (parent[nj] < 0) {
            parent[nj] = node;
            stack.push_back(nj);
          }
        }
      } else {
        const int j = node - static_cast<int>(m);
        for (int i : t.col_adj[j])
          if (parent[i] < 0) {
            parent[i] = node;
            stack.push_back(i);
          }
      }
    }
    if (parent[m + ej] < 0) throw NumericError("transport basis lost connectivity");

    // Walk back col -> row collecting the alternating cycle cells.
    std::vector<std::pair<std::size_t, std::size_t>> path;
    int node = static_cast<int>(m + ej);
    while (node != static_cast<int>(ei)) {
      const int par = parent[node];
      if (node < static_cast<int>(m))
        path.emplace_back(static_cast<std::size_t>(node),
                          static_cast<std::size_t>(par - static_cast<int>(m)));
      else
        path.emplace_back(static_cast<std::size_t>(par),
                          static_cast<std::size_t>(node - static_cast<int>(m)));
      node = par;
    }

    // Entering gets +theta; path cells alternate starting with -theta.
    double theta = kInf;
    std::size_t li = m, lj = n;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double f = t.flow(path[k].first, path[k].second);
      const std::size_t id = path[k].first * n + path[k].second;
      if (f < theta - 1e-18 || (f <= theta + 1e-18 && (li == m || id < li * n + lj))) {
        theta = f;
        li = path[k].first;
        lj = path[k].second;
      }
    }
    if (li == m) throw NumericError("transport pivot found no leaving cell");

    t.flow(ei, ej) += theta;
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (k % 2 == 0)
        t.flow(path[k].first, path[k].second) -= theta;
      else
        t.flow(path[k].first, path[k].second) += theta;
    }
    t.flow(li, lj) = 0.0;
    t.remove_basic(li, lj);
    t.add_basic(ei, ej);
  }

  double value = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double term = t.flow(i, j) * cost(i, j);
      const double s = value + term;
      comp += (std::abs(value) >= std::abs(term)) ? (value - s) + term : (term - s) + value;
      value = s;
    }
  (void)tol;
  return std::max(value + comp, 0.0);
}

// ---------------------------------------------------------------------------
// Brute-force RDP oracle
// ---------------------------------------------------------------------------

namespace {

struct OracleEval {
  const std::vector<double>& p;
  const Mat& d;
  const PerceptionMeasure& measure;

  // marginal of the candidate channel; r* = marginal is the optimal free r
  void marginal(const Mat& w, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < w.rows; ++i)
      for (std::size_t j = 0; j < w.cols; ++j) out[j] += p[i] * w(i, j);
  }

  double mi(const Mat& w, const std::vector<double>& marg) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i)
      for (std::size_t j = 0; j < w.cols; ++j) {
        const double wij = w(i, j);
        if (wij > 0.0) s += p[i] * wij * (std::log(wij) - std::log(marg[j]));
      }
    return s;
  }

  double distortion(const Mat& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i)
      for (std::size_t j = 0; j < w.cols; ++j) s += p[i] * w(i, j) * d(i, j);
    return s;
  }

  double perception(const std::vector<double>& marg) const {
    switch (measure.kind) {
      case PerceptionMeasure::Kind::kl: {
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
          if (p[j] <= 0.0) continue;
          if (marg[j] <= 0.0) return kInf;
          s += p[j] * (std::log(p[j]) - std::log(marg[j]));
        }
        return s;
      }
      case PerceptionMeasure::Kind::tv: {
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(p[j] - marg[j]);
        return 0.5 * s;
      }
      case PerceptionMeasure::Kind::wasserstein:
        return exact_wasserstein(p, marg, measure.cost->c, 1e-11);
    }
    return kInf;
  }
};

double oracle_2x2_grid(const OracleEval& ev, double D, double P, const OracleConfig& cfg) {
  // channel rows (1-u, u) and (v, 1-v)
  std::vector<double> marg(2);
  Mat w(2, 2);
  auto value_at = [&](double uu, double vv) {
    w(0, 0) = 1.0 - uu;
    w(0, 1) = uu;
    w(1, 0) = vv;
    w(1, 1) = 1.0 - vv;
    ev.marginal(w, marg);
    if (ev.distortion(w) > D) return kInf;
    if (ev.perception(marg) > P) return kInf;
    return ev.mi(w, marg);
  };

  double best = kInf, bu = 0.0, bv = 0.0;
  double res = cfg.grid_resolution;
  double u_lo = 0.0, u_hi = 1.0, v_lo = 0.0, v_hi = 1.0;
  for (int round = 0; round <= cfg.refine_rounds; ++round) {
    const auto nu = static_cast<std::size_t>(std::floor((u_hi - u_lo) / res + 0.5)) + 1;
    const auto nv = static_cast<std::size_t>(std::floor((v_hi - v_lo) / res + 0.5)) + 1;
    double round_best = kInf, rbu = bu, rbv = bv;
    for (std::size_t ku = 0; ku < nu; ++ku) {
      const double uu = std::min(u_lo + static_cast<double>(ku) * res, 1.0);
      for (std::size_t kv = 0; kv < nv; ++kv) {
        const double vv = std::min(v_lo + static_cast<double>(kv) * res, 1.0);
        const double val = value_at(uu, vv);
        if (val < round_best) {
          round_best = val;
          rbu = uu;
          rbv = vv;
        }
      }
    }
    if (round_best < best) {
      best = round_best;
      bu = rbu;
      bv = rbv;
    }
    if (best == kInf) throw InfeasibleError("oracle: no feasible point on the grid");
    u_lo = std::max(0.0, bu - 2.0 * res);
    u_hi = std::min(1.0, bu + 2.0 * res);
    v_lo = std::max(0.0, bv - 2.0 * res);
    v_hi = std::min(1.0, bv + 2.0 * res);
    res /= 10.0;
  }
  return best;
}

double oracle_coordinate_descent(const OracleEval& ev, std::size_t m, std::size_t n,
                                 double D, double P, const OracleConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> marg(n);
  const double feas_slack = 1e-7;

  auto penalized = [&](const Mat& w, double mu) {
    ev.marginal(w, marg);
    const double dist = ev.distortion(w);
    const double perc = ev.perception(marg);
    if (perc == kInf) return kInf;
    const double vd = std::max(0.0, dist - D);
    const double vp = std::max(0.0, perc - P);
    return ev.mi(w, marg) + mu * (vd * vd + vp * vp);
  };

  double best = kInf;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Mat w(m, n, 1.0 / static_cast<double>(n));
    if (restart > 0) {
      for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          w(i, j) = expo(rng) + 1e-9;
          sum += w(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) w(i, j) /= sum;
      }
    }

    for (double mu : {1e3, 1e5, 1e7, 1e9}) {
      for (int sweep = 0; sweep < 400; ++sweep) {
        double max_move = 0.0;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j + 1 < n; ++j) {
            // headroom of this coordinate inside the row simplex
            const double others = 1.0 - w(i, j) - w(i, n - 1);
            const double hi = 1.0 - others;
            double lo_x = 0.0, hi_x = hi;
            auto coord_val = [&](double x) {
              w(i, j) = x;
              w(i, n - 1) = hi - x;
              return penalized(w, mu);
            };
            // golden-section on the convex section
            const double gr = 0.6180339887498949;
            double a = lo_x, b = hi_x;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = coord_val(x1), f2 = coord_val(x2);
            for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
              if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = coord_val(x1);
              } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = coord_val(x2);
              }
            }
            const double xstar = f1 <= f2 ? x1 : x2;
            max_move = std::max(max_move, std::abs(w(i, j) - xstar));
            coord_val(xstar);
          }
        if (max_move < 1e-12) break;
      }
    }

    ev.marginal(w, marg);
    if (ev.distortion(w) <= D + feas_slack && ev.perception(marg) <= P + feas_slack)
      best = std::min(best, ev.mi(w, marg));
  }
  if (best == kInf) throw InfeasibleError("oracle: no feasible point found");
  return std::max(best, 0.0);
}

}  // namespace

double brute_force_rdp(const DiscreteSource& p, const DistortionMatrix& d,
                       const PerceptionMeasure& perception, double D, double P,
                       const OracleConfig& cfg) {
  cfg.validate();
  const std::size_t m = d.d.rows, n = d.d.cols;
  if (m != p.size()) throw DimensionError("distortion rows must match source alphabet");
  if (m * (n - 1) > 8)
    throw ConfigError("brute-force oracle supports at most 8 free channel parameters");
  if ((perception.kind == PerceptionMeasure::Kind::kl ||
       perception.kind == PerceptionMeasure::Kind::tv) &&
      m != n)
    throw DimensionError("KL/TV perception requires M == N");
  if (perception.kind == PerceptionMeasure::Kind::wasserstein) {
    if (!perception.cost) throw ConfigError("wasserstein perception needs a cost matrix");
    if (perception.cost->c.rows != m || perception.cost->c.cols != n)
      throw DimensionError("perception cost shape must match the channel shape");
  }

  const OracleEval ev{p.p, d.d, perception};
  if (m == 2 && n == 2) return oracle_2x2_grid(ev, D, P, cfg);
  return oracle_coordinate_descent(ev, m, n, D, P, cfg);
}

}  // namespace rdp
