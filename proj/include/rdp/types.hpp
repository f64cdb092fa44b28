#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdp {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes of two operands do not agree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Input violates a mathematical precondition (support, simplex, sign).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid user-supplied configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Overflow, divergence, or a non-finite intermediate.
class NumericError : public Error {
public:
  using Error::Error;
};

/// An iteration did not reach its required tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// The requested budgets admit no feasible channel.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

/// Dense row-major matrix of doubles.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  Mat transposed() const;
};

/// Probability vector over a finite, strictly increasing grid of support
/// points. Zero-mass atoms are dropped at construction; the remaining masses
/// must sum to 1 within 1e-12.
struct DiscreteSource {
  std::vector<double> points;
  std::vector<double> p;

  DiscreteSource() = default;
  DiscreteSource(std::vector<double> points_in, std::vector<double> p_in);

  std::size_t size() const { return p.size(); }
};

/// Distribution over the reconstruction alphabet.
struct ReconstructionDist {
  std::vector<double> r;

  ReconstructionDist() = default;
  explicit ReconstructionDist(std::vector<double> r_in);

  std::size_t size() const { return r.size(); }
};

/// Row-stochastic conditional distribution of reconstruction given source.
struct ChannelMatrix {
  Mat w;

  ChannelMatrix() = default;
  explicit ChannelMatrix(Mat w_in);
};

/// Nonnegative finite per-letter distortions.
struct DistortionMatrix {
  Mat d;

  DistortionMatrix() = default;
  explicit DistortionMatrix(Mat d_in);
};

/// Nonnegative finite transport costs.
struct CostMatrix {
  Mat c;

  CostMatrix() = default;
  explicit CostMatrix(Mat c_in);

  /// 0/1 cost, c_ij = 1 iff i != j. Makes the transport value equal the
  /// total-variation distance.
  static CostMatrix tv(std::size_t n);
};

/// Transport plan between the source and reconstruction distributions.
struct Coupling {
  Mat pi;
};

struct PerceptionMeasure {
  enum class Kind { kl, tv, wasserstein };

  Kind kind = Kind::kl;
  std::optional<CostMatrix> cost;  // wasserstein only

  static PerceptionMeasure make_kl() { return {Kind::kl, std::nullopt}; }
  static PerceptionMeasure make_tv() { return {Kind::tv, std::nullopt}; }
  static PerceptionMeasure make_wasserstein(CostMatrix c) {
    return {Kind::wasserstein, std::move(c)};
  }
};

struct SolverConfig {
  double tol_inner = 1e-10;   // max dual change that ends an inner loop
  double tol_outer = 1e-9;    // objective change that ends the outer loop
  int max_inner = 500;
  int max_outer = 2000;
  double tol_root = 1e-12;    // residual tolerance of 1-d root solves
  int max_root_iter = 200;
  double multiplier_cap = 1e12;  // blow-up beyond this means infeasible budgets
  double tol_marginal = 1e-8;
  double feasibility_tol = 1e-7;
  bool record_trace = true;
};

struct TraceRow {
  double objective = 0.0;
  double distortion = 0.0;
  double perception = 0.0;
  int inner_iters = 0;
};

/// Per-outer-iteration record; the objective column is non-increasing for
/// both solvers (up to 1e-12 slack).
struct ConvergenceTrace {
  std::vector<TraceRow> rows;
};

struct RdpSolution {
  double rate_nats = 0.0;
  ChannelMatrix w;
  ReconstructionDist r;
  std::optional<Coupling> pi;
  std::map<std::string, double> duals;  // keyed by constraint role
  double achieved_distortion = 0.0;
  double achieved_perception = 0.0;
  ConvergenceTrace trace;
  bool converged = false;
  int outer_iters = 0;
  /// Wasserstein case only: rate + epsilon * sum pi log pi.
  std::optional<double> regularized_objective;
};

}  // namespace rdp
