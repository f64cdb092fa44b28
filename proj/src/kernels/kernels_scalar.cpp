#include <cmath>
#include <cstddef>
#include <limits>

#include "rdp/kernels.hpp"

// Reference kernels. Plain loops over std::exp / std::log; every SIMD
// variant is tested against these.

namespace rdp::kernels {
namespace {

double reduce_max_(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double reduce_sum_(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot_(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_exp_(const double* x, double shift, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - shift);
  return s;
}

double dot_exp_(const double* w, const double* x, double shift, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::exp(x[i] - shift);
  return s;
}

void vexp_(const double* x, double shift, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i] - shift);
}

double max_decay_(const double* u, const double* t, double theta, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double z = u[i] - theta * t[i];
    if (z > m) m = z;
  }
  return m;
}

void decay_exp_pair_(const double* u, const double* t, double theta, double shift,
                     std::size_t n, double* s0, double* s1) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(u[i] - theta * t[i] - shift);
    a += e;
    b += t[i] * e;
  }
  *s0 = a;
  *s1 = b;
}

double kl_sum_(const double* p, const double* q, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) s += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return s;
}

double l1_dist_(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{
      "scalar",   reduce_max_, reduce_sum_,     dot_,     sum_exp_, dot_exp_,
      vexp_,      max_decay_,  decay_exp_pair_, kl_sum_,  l1_dist_,
  };
  return ops;
}

}  // namespace rdp::kernels
