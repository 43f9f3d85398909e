#include <random>

#include "bayespred/quadrature.hpp"
#include "families.hpp"

namespace bayespred::detail {

namespace {

constexpr double log_2pi = 1.8378770664093454836;

std::vector<Node> hermite_nodes(double mean, double sd, std::size_t count) {
    const Rule rule = gauss_hermite(count);
    std::vector<Node> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k].x = Vector::Constant(1, mean + sd * rule.nodes[k]);
        out[k].weight = rule.weights[k];
    }
    return out;
}

}  // namespace

// ---- normal-location ------------------------------------------------------

double NormalLocation::log_density(ConstRef x, ConstRef theta) const {
    const double z = (x(0) - theta(0)) / sigma_;
    return -0.5 * log_2pi - std::log(sigma_) - 0.5 * z * z;
}

void NormalLocation::log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const {
    const double s2 = sigma_ * sigma_;
    out.d1(0) = (x(0) - theta(0)) / s2;
    out.d2(0) = -1.0 / s2;
    out.d3(0) = 0.0;
    out.d4(0) = 0.0;
}

void NormalLocation::sample(ConstRef theta, Engine& rng, std::size_t count,
                            SampleBatch& out) const {
    std::normal_distribution<double> dist(theta(0), sigma_);
    out.dim = 1;
    out.values.resize(count);
    for (auto& v : out.values) v = dist(rng);
}

double NormalLocation::log_likelihood(const SufficientStat& stat, ConstRef theta) const {
    const double mu = theta(0);
    return (mu * stat.sum(0) - 0.5 * static_cast<double>(stat.n) * mu * mu) / (sigma_ * sigma_);
}

std::optional<Vector> NormalLocation::mle(const SufficientStat& stat) const {
    if (stat.n == 0) return std::nullopt;
    return Vector::Constant(1, stat.sum(0) / static_cast<double>(stat.n));
}

Matrix NormalLocation::fisher(ConstRef) const {
    return Matrix::Constant(1, 1, 1.0 / (sigma_ * sigma_));
}

std::pair<Vector, Matrix> NormalLocation::moments(ConstRef theta) const {
    return {Vector::Constant(1, theta(0)), Matrix::Constant(1, 1, sigma_ * sigma_)};
}

std::vector<Node> NormalLocation::expectation_nodes(ConstRef theta) const {
    return hermite_nodes(theta(0), sigma_, 10);
}

std::vector<Vector> NormalLocation::reference_points() const {
    return {Vector::Constant(1, -1.0), Vector::Constant(1, 0.0), Vector::Constant(1, 2.5)};
}

// ---- normal-location-scale -------------------------------------------------

double NormalLocationScale::log_density(ConstRef x, ConstRef theta) const {
    const double z = x(0) - theta(0), v = theta(1);
    return -0.5 * log_2pi - 0.5 * std::log(v) - 0.5 * z * z / v;
}

void NormalLocationScale::log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const {
    const double z = x(0) - theta(0), v = theta(1);
    // l = -z^2/(2v) - log(v)/2. A derivative with a mu-derivatives and b
    // v-derivatives factors into P_a(z) d^b(1/v), plus the log term when a = 0.
    const double poly[3] = {-0.5 * z * z, z, -1.0};
    auto entry = [&](int a, int b) {
        double val = 0.0;
        if (a <= 2) {
            double fact = 1.0;
            for (int k = 2; k <= b; ++k) fact *= k;
            val = poly[a] * ((b % 2 == 0) ? 1.0 : -1.0) * fact / std::pow(v, b + 1);
        }
        if (a == 0 && b >= 1) {
            double fact = 1.0;
            for (int k = 2; k <= b - 1; ++k) fact *= k;
            val += -0.5 * (((b - 1) % 2 == 0) ? 1.0 : -1.0) * fact / std::pow(v, b);
        }
        return val;
    };
    auto count_v = [](std::initializer_list<std::size_t> idx) {
        int b = 0;
        for (auto i : idx) b += static_cast<int>(i);
        return b;
    };
    for (std::size_t i = 0; i < 2; ++i) {
        out.d1(i) = entry(1 - static_cast<int>(i), static_cast<int>(i));
        for (std::size_t j = 0; j < 2; ++j) {
            int b = count_v({i, j});
            out.d2(i, j) = entry(2 - b, b);
            for (std::size_t k = 0; k < 2; ++k) {
                b = count_v({i, j, k});
                out.d3(i, j, k) = entry(3 - b, b);
                for (std::size_t l = 0; l < 2; ++l) {
                    b = count_v({i, j, k, l});
                    out.d4(i, j, k, l) = entry(4 - b, b);
                }
            }
        }
    }
}

void NormalLocationScale::sample(ConstRef theta, Engine& rng, std::size_t count,
                                 SampleBatch& out) const {
    std::normal_distribution<double> dist(theta(0), std::sqrt(theta(1)));
    out.dim = 1;
    out.values.resize(count);
    for (auto& v : out.values) v = dist(rng);
}

double NormalLocationScale::log_likelihood(const SufficientStat& stat, ConstRef theta) const {
    const double mu = theta(0), v = theta(1), n = static_cast<double>(stat.n);
    const double ss = stat.scatter(0, 0) - 2.0 * mu * stat.sum(0) + n * mu * mu;
    return -0.5 * n * std::log(v) - 0.5 * ss / v;
}

std::optional<Vector> NormalLocationScale::mle(const SufficientStat& stat) const {
    if (stat.n < 2) return std::nullopt;
    const double n = static_cast<double>(stat.n);
    const double mean = stat.sum(0) / n;
    const double var = stat.scatter(0, 0) / n - mean * mean;
    if (!(var > 1e-12 * std::max(1.0, stat.scatter(0, 0) / n))) return std::nullopt;
    Vector out(2);
    out << mean, var;
    return out;
}

Matrix NormalLocationScale::fisher(ConstRef theta) const {
    const double v = theta(1);
    Matrix f = Matrix::Zero(2, 2);
    f(0, 0) = 1.0 / v;
    f(1, 1) = 0.5 / (v * v);
    return f;
}

std::pair<Vector, Matrix> NormalLocationScale::moments(ConstRef theta) const {
    return {Vector::Constant(1, theta(0)), Matrix::Constant(1, 1, theta(1))};
}

std::vector<Node> NormalLocationScale::expectation_nodes(ConstRef theta) const {
    return hermite_nodes(theta(0), std::sqrt(theta(1)), 12);
}

std::vector<Vector> NormalLocationScale::reference_points() const {
    std::vector<Vector> out(3, Vector(2));
    out[0] << 0.0, 1.0;
    out[1] << 1.0, 0.5;
    out[2] << -2.0, 3.0;
    return out;
}

double NormalLocationScale::jeffreys_log_density(ConstRef theta) const {
    return -1.5 * std::log(theta(1));
}
Vector NormalLocationScale::jeffreys_log_grad(ConstRef theta) const {
    Vector g = Vector::Zero(2);
    g(1) = -1.5 / theta(1);
    return g;
}
Matrix NormalLocationScale::jeffreys_log_hess(ConstRef theta) const {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.5 / (theta(1) * theta(1));
    return h;
}

double NormalLocationScale::alpha_log_density(ConstRef theta, double alpha) const {
    return power_of_v(alpha) * std::log(theta(1));
}
Vector NormalLocationScale::alpha_log_grad(ConstRef theta, double alpha) const {
    Vector g = Vector::Zero(2);
    g(1) = power_of_v(alpha) / theta(1);
    return g;
}
Matrix NormalLocationScale::alpha_log_hess(ConstRef theta, double alpha) const {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = -power_of_v(alpha) / (theta(1) * theta(1));
    return h;
}

}  // namespace bayespred::detail
