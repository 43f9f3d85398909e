#include <random>

#include "families.hpp"

namespace bayespred::detail {

double Poisson::log_density(ConstRef x, ConstRef theta) const {
    const double k = x(0), t = theta(0);
    return k * std::log(t) - t - std::lgamma(k + 1.0);
}

void Poisson::log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const {
    const double k = x(0), t = theta(0);
    const double t2 = t * t;
    out.d1(0) = k / t - 1.0;
    out.d2(0) = -k / t2;
    out.d3(0) = 2.0 * k / (t2 * t);
    out.d4(0) = -6.0 * k / (t2 * t2);
}

void Poisson::sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const {
    std::poisson_distribution<long> dist(theta(0));
    out.dim = 1;
    out.values.resize(count);
    for (auto& v : out.values) v = static_cast<double>(dist(rng));
}

double Poisson::log_likelihood(const SufficientStat& stat, ConstRef theta) const {
    const double t = theta(0);
    return stat.sum(0) * std::log(t) - static_cast<double>(stat.n) * t;
}

std::optional<Vector> Poisson::mle(const SufficientStat& stat) const {
    if (stat.n == 0 || stat.sum(0) <= 0.0) return std::nullopt;
    return Vector::Constant(1, stat.sum(0) / static_cast<double>(stat.n));
}

Matrix Poisson::fisher(ConstRef theta) const { return Matrix::Constant(1, 1, 1.0 / theta(0)); }

std::pair<Vector, Matrix> Poisson::moments(ConstRef theta) const {
    return {Vector::Constant(1, theta(0)), Matrix::Constant(1, 1, theta(0))};
}

std::vector<Node> Poisson::expectation_nodes(ConstRef theta) const {
    return enumerate_support(theta, 1e-17);
}

std::vector<Node> Poisson::enumerate_support(ConstRef theta, double tail) const {
    return enumerate_discrete(boost::math::poisson_distribution<>(theta(0)), tail);
}

std::vector<Node> Poisson::sum_distribution(ConstRef theta, std::size_t n, double tail) const {
    return enumerate_discrete(boost::math::poisson_distribution<>(theta(0) * n), tail);
}

std::vector<Vector> Poisson::reference_points() const {
    return {Vector::Constant(1, 0.3), Vector::Constant(1, 1.0), Vector::Constant(1, 4.0)};
}

double Poisson::jeffreys_log_density(ConstRef theta) const { return -0.5 * std::log(theta(0)); }
Vector Poisson::jeffreys_log_grad(ConstRef theta) const {
    return Vector::Constant(1, -0.5 / theta(0));
}
Matrix Poisson::jeffreys_log_hess(ConstRef theta) const {
    return Matrix::Constant(1, 1, 0.5 / (theta(0) * theta(0)));
}

double Poisson::alpha_log_density(ConstRef theta, double alpha) const {
    return (alpha - 1.0) * std::log(theta(0));
}
Vector Poisson::alpha_log_grad(ConstRef theta, double alpha) const {
    return Vector::Constant(1, (alpha - 1.0) / theta(0));
}
Matrix Poisson::alpha_log_hess(ConstRef theta, double alpha) const {
    return Matrix::Constant(1, 1, -(alpha - 1.0) / (theta(0) * theta(0)));
}

}  // namespace bayespred::detail
