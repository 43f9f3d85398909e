#include <random>

#include "families.hpp"

namespace bayespred::detail {

std::array<double, 5> NegBinomial::cumulant_derivs(double theta) const {
    const double q = std::exp(theta);
    const double m = -std::expm1(theta);  // 1 - q without cancellation
    const double r = r_;
    return {-r * std::log(m), r * q / m, r * q / (m * m), r * q * (1.0 + q) / (m * m * m),
            r * q * (1.0 + 4.0 * q + q * q) / (m * m * m * m)};
}

double NegBinomial::log_density(ConstRef x, ConstRef theta) const {
    const double k = x(0);
    const auto a = cumulant_derivs(theta(0));
    return std::lgamma(k + r_) - std::lgamma(static_cast<double>(r_)) - std::lgamma(k + 1.0) +
           k * theta(0) - a[0];
}

void NegBinomial::log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const {
    const auto a = cumulant_derivs(theta(0));
    out.d1(0) = x(0) - a[1];
    out.d2(0) = -a[2];
    out.d3(0) = -a[3];
    out.d4(0) = -a[4];
}

void NegBinomial::sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const {
    std::negative_binomial_distribution<long> dist(r_, -std::expm1(theta(0)));
    out.dim = 1;
    out.values.resize(count);
    for (auto& v : out.values) v = static_cast<double>(dist(rng));
}

double NegBinomial::log_likelihood(const SufficientStat& stat, ConstRef theta) const {
    return stat.sum(0) * theta(0) - static_cast<double>(stat.n) * cumulant_derivs(theta(0))[0];
}

std::optional<Vector> NegBinomial::mle(const SufficientStat& stat) const {
    if (stat.n == 0 || stat.sum(0) <= 0.0) return std::nullopt;
    const double mean = stat.sum(0) / static_cast<double>(stat.n);
    return Vector::Constant(1, std::log(mean / (r_ + mean)));
}

Matrix NegBinomial::fisher(ConstRef theta) const {
    return Matrix::Constant(1, 1, cumulant_derivs(theta(0))[2]);
}

std::pair<Vector, Matrix> NegBinomial::moments(ConstRef theta) const {
    const auto a = cumulant_derivs(theta(0));
    return {Vector::Constant(1, a[1]), Matrix::Constant(1, 1, a[2])};
}

std::vector<Node> NegBinomial::expectation_nodes(ConstRef theta) const {
    return enumerate_support(theta, 1e-17);
}

std::vector<Node> NegBinomial::enumerate_support(ConstRef theta, double tail) const {
    return enumerate_discrete(
        boost::math::negative_binomial_distribution<>(r_, -std::expm1(theta(0))), tail);
}

std::vector<Node> NegBinomial::sum_distribution(ConstRef theta, std::size_t n, double tail) const {
    return enumerate_discrete(boost::math::negative_binomial_distribution<>(
                                  static_cast<double>(r_) * n, -std::expm1(theta(0))),
                              tail);
}

std::vector<Vector> NegBinomial::reference_points() const {
    return {Vector::Constant(1, -2.0), Vector::Constant(1, -0.7), Vector::Constant(1, -0.2)};
}

// Both priors are powers of the Fisher information A''(theta).
double NegBinomial::jeffreys_log_density(ConstRef theta) const {
    return alpha_log_density(theta, 0.5);
}
Vector NegBinomial::jeffreys_log_grad(ConstRef theta) const {
    const double q = std::exp(theta(0));
    return Vector::Constant(1, 0.5 * (1.0 + q) / -std::expm1(theta(0)));
}
Matrix NegBinomial::jeffreys_log_hess(ConstRef theta) const {
    const double q = std::exp(theta(0));
    const double m = -std::expm1(theta(0));
    return Matrix::Constant(1, 1, q / (m * m));
}

double NegBinomial::alpha_log_density(ConstRef theta, double alpha) const {
    // log of r e^theta / (1 - e^theta)^2, kept finite as theta -> 0-.
    return alpha * (std::log(double(r_)) + theta(0) - 2.0 * std::log(-std::expm1(theta(0))));
}
Vector NegBinomial::alpha_log_grad(ConstRef theta, double alpha) const {
    const auto a = cumulant_derivs(theta(0));
    return Vector::Constant(1, alpha * a[3] / a[2]);
}
Matrix NegBinomial::alpha_log_hess(ConstRef theta, double alpha) const {
    const auto a = cumulant_derivs(theta(0));
    return Matrix::Constant(1, 1, alpha * (a[4] / a[2] - a[3] * a[3] / (a[2] * a[2])));
}

}  // namespace bayespred::detail
