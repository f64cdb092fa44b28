#pragma once

#include <cstddef>

namespace rdp::kernels {

// Reduction kernels for the exp/log inner loops of the solvers. A scalar
// reference implementation always exists; SIMD variants are selected at
// runtime and agree with the reference within a few ulp per element
// (equivalence-tested in tests/test_kernels.cpp).
//
// Conventions: `shift` is subtracted inside every exponential so callers can
// pass the running maximum and keep all exponents <= 0. Entries of -inf are
// legal wherever an exponent is expected and contribute exp(-inf) = 0.
struct Ops {
  const char* name;

  double (*reduce_max)(const double* x, std::size_t n);
  double (*reduce_sum)(const double* x, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// sum_i exp(x_i - shift)
  double (*sum_exp)(const double* x, double shift, std::size_t n);
  /// sum_i w_i exp(x_i - shift)
  double (*dot_exp)(const double* w, const double* x, double shift, std::size_t n);
  /// out_i = exp(x_i - shift)
  void (*vexp)(const double* x, double shift, double* out, std::size_t n);

  /// max_i (u_i - theta * t_i); the exponent family of the dual root solves.
  double (*max_decay)(const double* u, const double* t, double theta, std::size_t n);
  /// s0 = sum_i exp(u_i - theta t_i - shift), s1 = sum_i t_i exp(u_i - theta t_i - shift)
  void (*decay_exp_pair)(const double* u, const double* t, double theta, double shift,
                         std::size_t n, double* s0, double* s1);

  /// sum_i p_i (log p_i - log q_i), with 0 log 0 := 0.
  double (*kl_sum)(const double* p, const double* q, std::size_t n);
  /// sum_i |a_i - b_i|
  double (*l1_dist)(const double* a, const double* b, std::size_t n);
};

enum class Backend { scalar, avx2 };

bool available(Backend b);
const Ops& get(Backend b);  // throws rdp::ConfigError if unavailable

/// Best available backend, honouring a prior force() and the
/// RDPSOLVE_KERNELS environment variable ("scalar" or "avx2").
const Ops& active();

/// Pin the dispatched backend (tests); reset() restores auto-selection.
void force(Backend b);
void reset();

/// log sum_i exp(x_i); returns -inf for an all-(-inf) input.
double logsumexp(const double* x, std::size_t n);

}  // namespace rdp::kernels
