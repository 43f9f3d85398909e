#include "bayespred/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bayespred/error.hpp"

namespace bayespred {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights the
// squared first components of its eigenvectors (times the total mass, 1 here).
Rule golub_welsch(const Vector& diag, const Vector& offdiag) {
    const auto n = diag.size();
    Matrix jacobi = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) jacobi(k, k) = diag(k);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        jacobi(k, k + 1) = offdiag(k);
        jacobi(k + 1, k) = offdiag(k);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double total = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        rule.nodes[k] = eig.eigenvalues()(k);
        const double v = eig.eigenvectors()(0, k);
        rule.weights[k] = v * v;
        total += rule.weights[k];
    }
    for (double& w : rule.weights) w /= total;
    return rule;
}

}  // namespace

Rule gauss_hermite(std::size_t n) {
    if (n == 0) throw InvalidArgument("gauss_hermite: need at least one node");
    // Probabilists' Hermite recurrence: x He_k = He_{k+1} + k He_{k-1}.
    Vector diag = Vector::Zero(n);
    Vector off(n > 1 ? n - 1 : 0);
    for (std::size_t k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
    Rule rule = golub_welsch(diag, off);
    // Symmetrize to remove eigen-solver noise.
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double x = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
        const double w = 0.5 * (rule.weights[k] + rule.weights[n - 1 - k]);
        rule.nodes[k] = -x;
        rule.nodes[n - 1 - k] = x;
        rule.weights[k] = rule.weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

Rule gauss_laguerre(std::size_t n, double a) {
    if (n == 0) throw InvalidArgument("gauss_laguerre: need at least one node");
    if (!(a > -1.0)) throw InvalidArgument("gauss_laguerre: parameter must exceed -1");
    Vector diag(n);
    Vector off(n > 1 ? n - 1 : 0);
    for (std::size_t k = 0; k < n; ++k) diag(k) = 2.0 * k + a + 1.0;
    for (std::size_t k = 1; k < n; ++k) off(k - 1) = std::sqrt(k * (k + a));
    return golub_welsch(diag, off);
}

ProductRule product_hermite(std::size_t dim, std::size_t n) {
    const Rule base = gauss_hermite(n);
    ProductRule out;
    out.dim = dim;
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) total *= n;
    out.points.resize(total * dim);
    out.weights.resize(total);
    std::vector<std::size_t> digit(dim, 0);
    for (std::size_t m = 0; m < total; ++m) {
        double w = 1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            out.points[m * dim + d] = base.nodes[digit[d]];
            w *= base.weights[digit[d]];
        }
        out.weights[m] = w;
        for (std::size_t d = dim; d-- > 0;) {
            if (++digit[d] < n) break;
            digit[d] = 0;
        }
    }
    return out;
}

Integral integrate_real_line(const std::function<double(double)>& f, double rel_tol,
                             unsigned max_depth) {
    using boost::math::quadrature::gauss_kronrod;
    Integral out;
    out.value = gauss_kronrod<double, 31>::integrate(
        f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        max_depth, rel_tol, &out.error);
    return out;
}

Integral integrate_interval(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, unsigned max_depth) {
    using boost::math::quadrature::gauss_kronrod;
    Integral out;
    out.value = gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &out.error);
    return out;
}

}  // namespace bayespred
