#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "bayespred/tensor.hpp"

namespace bayespred {

/// Nodes and weights for a one-dimensional rule. Weights sum to 1, so the
/// rule approximates an expectation under the reference distribution.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for E[f(Z)], Z ~ N(0, 1). Exact for polynomials of
/// degree <= 2n - 1.
Rule gauss_hermite(std::size_t n);

/// Generalized Gauss-Laguerre rule for E[f(U)], U ~ Gamma(a + 1, 1), a > -1.
Rule gauss_laguerre(std::size_t n, double a);

/// Product Gauss-Hermite rule for E[f(Z)], Z ~ N(0, I_dim).
struct ProductRule {
    std::size_t dim = 0;
    std::vector<double> points;  // row-major, dim entries per node
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
};
ProductRule product_hermite(std::size_t dim, std::size_t n);

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod over the whole real line. The integrand should be
/// roughly centred at 0 with unit scale; callers standardize first.
Integral integrate_real_line(const std::function<double(double)>& f, double rel_tol,
                             unsigned max_depth = 15);

/// Adaptive Gauss-Kronrod over a finite interval.
Integral integrate_interval(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, unsigned max_depth = 15);

}  // namespace bayespred
