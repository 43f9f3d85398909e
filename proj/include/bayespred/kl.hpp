#pragma once

#include <vector>

#include "bayespred/family.hpp"
#include "bayespred/predictive.hpp"

namespace bayespred {

struct KlValue {
    double value = 0.0;      // nats; +inf when f_hat vanishes where f_theta does not
    double truncation = 0.0; // bound on the neglected tail contribution (discrete)
};

/// D(f_theta || f_hat). Discrete support is summed until the remaining
/// truth mass is below 1e-12; continuous support uses a closed form when
/// the predictive has one, else adaptive quadrature (1-D) or product
/// Gauss-Hermite with node doubling (multivariate).
KlValue kl_divergence(const Family& family, const Vector& theta, const PredictiveDensity& f_hat);

/// Discrete case against precomputed truth support points, for callers
/// that evaluate many predictives at one theta.
KlValue kl_discrete(const std::vector<Node>& truth, const PredictiveDensity& f_hat);

/// Tail threshold used for discrete sums.
inline constexpr double kl_tail = 1e-12;

}  // namespace bayespred
