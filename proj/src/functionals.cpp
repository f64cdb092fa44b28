#include "rdp/functionals.hpp"

#include <cmath>

#include "rdp/kernels.hpp"

namespace rdp {

namespace {

void check_channel_dims(const DiscreteSource& p, const ChannelMatrix& w) {
  if (w.w.rows != p.size())
    throw DimensionError("channel row count must equal source alphabet size");
}

}  // namespace

double mutual_information(const DiscreteSource& p, const ChannelMatrix& w,
                          const ReconstructionDist& r) {
  check_channel_dims(p, w);
  if (w.w.cols != r.size())
    throw DimensionError("channel column count must equal reconstruction alphabet size");

  const std::size_t M = w.w.rows, N = w.w.cols;
  for (std::size_t j = 0; j < N; ++j) {
    if (r.r[j] > 0.0) continue;
    double col_mass = 0.0;
    for (std::size_t i = 0; i < M; ++i) col_mass += p.p[i] * w.w(i, j);
    if (col_mass > 0.0)
      throw DomainError("r_j = 0 on a reconstruction letter with positive mass");
  }

  const auto& k = kernels::active();
  double mi = 0.0, comp = 0.0;  // Neumaier compensation
  for (std::size_t i = 0; i < M; ++i) {
    const double term = p.p[i] * k.kl_sum(w.w.row(i), r.r.data(), N);
    const double t = mi + term;
    comp += (std::abs(mi) >= std::abs(term)) ? (mi - t) + term : (term - t) + mi;
    mi = t;
  }
  return mi + comp;
}

double expected_distortion(const DiscreteSource& p, const ChannelMatrix& w,
                           const DistortionMatrix& d) {
  check_channel_dims(p, w);
  if (d.d.rows != w.w.rows || d.d.cols != w.w.cols)
    throw DimensionError("distortion matrix shape must match channel shape");

  const auto& k = kernels::active();
  double s = 0.0;
  for (std::size_t i = 0; i < w.w.rows; ++i)
    s += p.p[i] * k.dot(w.w.row(i), d.d.row(i), w.w.cols);
  return s;
}

double perception_kl(const DiscreteSource& p, const ReconstructionDist& r) {
  if (p.size() != r.size())
    throw DimensionError("KL perception requires identical alphabet sizes");
  for (std::size_t j = 0; j < r.size(); ++j)
    if (r.r[j] <= 0.0)
      throw DomainError("KL perception requires r > 0 on the source support");
  return kernels::active().kl_sum(p.p.data(), r.r.data(), p.size());
}

double perception_tv(const DiscreteSource& p, const ReconstructionDist& r) {
  if (p.size() != r.size())
    throw DimensionError("TV perception requires identical alphabet sizes");
  return 0.5 * kernels::active().l1_dist(p.p.data(), r.r.data(), p.size());
}

}  // namespace rdp
