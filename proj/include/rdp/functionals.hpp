#pragma once

#include "rdp/types.hpp"

namespace rdp {

/// I(X; X-hat) in nats: sum_ij w_ij p_i (log w_ij - log r_j), with
/// 0 log 0 := 0. Throws DomainError if some r_j = 0 carries positive
/// column mass.
double mutual_information(const DiscreteSource& p, const ChannelMatrix& w,
                          const ReconstructionDist& r);

/// sum_ij w_ij p_i d_ij
double expected_distortion(const DiscreteSource& p, const ChannelMatrix& w,
                           const DistortionMatrix& d);

/// KL(p || r) = sum_j p_j (log p_j - log r_j); requires equal alphabet sizes
/// and r positive on the support of p.
double perception_kl(const DiscreteSource& p, const ReconstructionDist& r);

/// Total variation 0.5 * sum_j |p_j - r_j|; requires equal alphabet sizes.
double perception_tv(const DiscreteSource& p, const ReconstructionDist& r);

}  // namespace rdp
