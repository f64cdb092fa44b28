#include "rdp/types.hpp"

#include <cmath>
#include <cstdio>

namespace rdp {

namespace {

std::string shape_msg(const char* what, std::size_t a, std::size_t b) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s: %zu vs %zu", what, a, b);
  return buf;
}

}  // namespace

Mat Mat::transposed() const {
  Mat t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DiscreteSource::DiscreteSource(std::vector<double> points_in, std::vector<double> p_in) {
  if (points_in.size() != p_in.size())
    throw DimensionError(shape_msg("source points/p length mismatch", points_in.size(), p_in.size()));
  if (p_in.empty()) throw DomainError("source must have at least one atom");

  double sum = 0.0;
  for (std::size_t i = 0; i < p_in.size(); ++i) {
    const double pi = p_in[i];
    if (!std::isfinite(pi) || pi < 0.0) throw DomainError("source masses must be finite and >= 0");
    sum += pi;
    if (pi > 0.0) {
      points.push_back(points_in[i]);
      p.push_back(pi);
    }
  }
  if (p.empty()) throw DomainError("source has no positive mass");
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("source masses must sum to 1 within 1e-12");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i] > points[i - 1]))
      throw DomainError("source support points must be strictly increasing");
}

ReconstructionDist::ReconstructionDist(std::vector<double> r_in) : r(std::move(r_in)) {
  if (r.empty()) throw DomainError("reconstruction distribution must be nonempty");
  double sum = 0.0;
  for (double rj : r) {
    if (!std::isfinite(rj) || rj < 0.0)
      throw DomainError("reconstruction masses must be finite and >= 0");
    sum += rj;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw DomainError("reconstruction masses must sum to 1 within 1e-12");
}

ChannelMatrix::ChannelMatrix(Mat w_in) : w(std::move(w_in)) {
  if (w.rows == 0 || w.cols == 0) throw DimensionError("channel matrix must be nonempty");
  for (std::size_t i = 0; i < w.rows; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < w.cols; ++j) {
      const double v = w(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw DomainError("channel entries must be finite and >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw DomainError("channel rows must sum to 1 within 1e-10");
  }
}

DistortionMatrix::DistortionMatrix(Mat d_in) : d(std::move(d_in)) {
  if (d.rows == 0 || d.cols == 0) throw DimensionError("distortion matrix must be nonempty");
  for (double v : d.data)
    if (!std::isfinite(v) || v < 0.0)
      throw DomainError("distortions must be finite and >= 0");
}

CostMatrix::CostMatrix(Mat c_in) : c(std::move(c_in)) {
  if (c.rows == 0 || c.cols == 0) throw DimensionError("cost matrix must be nonempty");
  for (double v : c.data)
    if (!std::isfinite(v) || v < 0.0) throw DomainError("costs must be finite and >= 0");
}

CostMatrix CostMatrix::tv(std::size_t n) {
  Mat c(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) c(i, i) = 0.0;
  return CostMatrix(std::move(c));
}

}  // namespace rdp
