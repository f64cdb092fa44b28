#include "rdp/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

#include "rdp/types.hpp"

namespace rdp::kernels {

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const Ops*> g_forced{nullptr};

const Ops* auto_select() {
  if (const char* env = std::getenv("RDPSOLVE_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return &avx2_ops();
#endif
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return &avx2_ops();
#endif
  return &scalar_ops();
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const Ops& get(Backend b) {
  switch (b) {
    case Backend::scalar:
      return scalar_ops();
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (cpu_has_avx2()) return avx2_ops();
#endif
      throw ConfigError("avx2 kernel backend not available on this cpu");
  }
  throw ConfigError("unknown kernel backend");
}

const Ops& active() {
  if (const Ops* f = g_forced.load(std::memory_order_acquire)) return *f;
  static const Ops* selected = auto_select();
  return *selected;
}

void force(Backend b) { g_forced.store(&get(b), std::memory_order_release); }

void reset() { g_forced.store(nullptr, std::memory_order_release); }

double logsumexp(const double* x, std::size_t n) {
  const Ops& k = active();
  const double m = k.reduce_max(x, n);
  if (!(m > -std::numeric_limits<double>::infinity())) return m;  // empty or all -inf
  return m + std::log(k.sum_exp(x, m, n));
}

}  // namespace rdp::kernels
