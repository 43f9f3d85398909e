#include <random>

#include "families.hpp"

namespace bayespred::detail {

namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

double Bernoulli::log_density(ConstRef x, ConstRef theta) const {
    return x(0) * theta(0) - softplus(theta(0));
}

void Bernoulli::log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const {
    const double p = logistic(theta(0));
    const double v = p * (1.0 - p);
    out.d1(0) = x(0) - p;
    out.d2(0) = -v;
    out.d3(0) = -v * (1.0 - 2.0 * p);
    out.d4(0) = -v * (1.0 - 6.0 * v);
}

void Bernoulli::sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const {
    std::bernoulli_distribution dist(logistic(theta(0)));
    out.dim = 1;
    out.values.resize(count);
    for (auto& v : out.values) v = dist(rng) ? 1.0 : 0.0;
}

double Bernoulli::log_likelihood(const SufficientStat& stat, ConstRef theta) const {
    return stat.sum(0) * theta(0) - static_cast<double>(stat.n) * softplus(theta(0));
}

std::optional<Vector> Bernoulli::mle(const SufficientStat& stat) const {
    const double s = stat.sum(0), n = static_cast<double>(stat.n);
    if (stat.n == 0 || s <= 0.0 || s >= n) return std::nullopt;
    return Vector::Constant(1, std::log(s / (n - s)));
}

Matrix Bernoulli::fisher(ConstRef theta) const {
    const double p = logistic(theta(0));
    return Matrix::Constant(1, 1, p * (1.0 - p));
}

std::pair<Vector, Matrix> Bernoulli::moments(ConstRef theta) const {
    const double p = logistic(theta(0));
    return {Vector::Constant(1, p), Matrix::Constant(1, 1, p * (1.0 - p))};
}

std::vector<Node> Bernoulli::expectation_nodes(ConstRef theta) const {
    return enumerate_support(theta, 0.0);
}

std::vector<Node> Bernoulli::enumerate_support(ConstRef theta, double) const {
    const double p = logistic(theta(0));
    return {Node{Vector::Constant(1, 0.0), 1.0 - p}, Node{Vector::Constant(1, 1.0), p}};
}

std::vector<Node> Bernoulli::sum_distribution(ConstRef theta, std::size_t n, double) const {
    const boost::math::binomial_distribution<> dist(static_cast<double>(n), logistic(theta(0)));
    std::vector<Node> out;
    out.reserve(n + 1);
    for (std::size_t s = 0; s <= n; ++s)
        out.push_back(Node{Vector::Constant(1, static_cast<double>(s)),
                           boost::math::pdf(dist, static_cast<double>(s))});
    return out;
}

std::vector<Vector> Bernoulli::reference_points() const {
    return {Vector::Constant(1, -1.0), Vector::Constant(1, 0.0), Vector::Constant(1, 0.7)};
}

double Bernoulli::jeffreys_log_density(ConstRef theta) const {
    return 0.5 * (theta(0) - 2.0 * softplus(theta(0)));
}
Vector Bernoulli::jeffreys_log_grad(ConstRef theta) const {
    return Vector::Constant(1, 0.5 * (1.0 - 2.0 * logistic(theta(0))));
}
Matrix Bernoulli::jeffreys_log_hess(ConstRef theta) const {
    const double p = logistic(theta(0));
    return Matrix::Constant(1, 1, -p * (1.0 - p));
}

// h = (p (1 - p))^alpha, the alpha-th power of the Fisher information.
double Bernoulli::alpha_log_density(ConstRef theta, double alpha) const {
    return alpha * (theta(0) - 2.0 * softplus(theta(0)));
}
Vector Bernoulli::alpha_log_grad(ConstRef theta, double alpha) const {
    return Vector::Constant(1, alpha * (1.0 - 2.0 * logistic(theta(0))));
}
Matrix Bernoulli::alpha_log_hess(ConstRef theta, double alpha) const {
    const double p = logistic(theta(0));
    return Matrix::Constant(1, 1, -2.0 * alpha * p * (1.0 - p));
}

}  // namespace bayespred::detail
