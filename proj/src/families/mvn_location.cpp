#include <random>

#include "bayespred/quadrature.hpp"
#include "families.hpp"

namespace bayespred::detail {

MvnLocation::MvnLocation(Matrix covariance)
    : dim_(static_cast<std::size_t>(covariance.rows())), cov_(std::move(covariance)) {
    if (!cov_.isApprox(cov_.transpose(), 1e-12))
        throw InvalidArgument("mvn-location: covariance must be symmetric");
    Eigen::LLT<Matrix> llt(cov_);
    if (llt.info() != Eigen::Success)
        throw InvalidArgument("mvn-location: covariance must be positive definite");
    chol_ = llt.matrixL();
    prec_ = llt.solve(Matrix::Identity(dim_, dim_));
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

bool MvnLocation::identity_covariance() const {
    return (cov_ - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() == 0.0;
}

FamilyHyper MvnLocation::hyper() const {
    FamilyHyper h;
    h.dim = static_cast<int>(dim_);
    if (!identity_covariance()) h.covariance = cov_;
    return h;
}

double MvnLocation::log_density(ConstRef x, ConstRef theta) const {
    const Vector z = x - theta;
    return -0.5 * dim_ * 1.8378770664093454836 - 0.5 * log_det_ - 0.5 * z.dot(prec_ * z);
}

void MvnLocation::log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const {
    const Vector g = prec_ * (x - theta);
    for (std::size_t i = 0; i < dim_; ++i) {
        out.d1(i) = g(i);
        for (std::size_t j = 0; j < dim_; ++j) out.d2(i, j) = -prec_(i, j);
    }
    out.d3.fill(0.0);
    out.d4.fill(0.0);
}

void MvnLocation::sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const {
    std::normal_distribution<double> normal;
    out.dim = dim_;
    out.values.resize(count * dim_);
    Vector z(dim_);
    for (std::size_t m = 0; m < count; ++m) {
        for (std::size_t k = 0; k < dim_; ++k) z(k) = normal(rng);
        const Vector x = theta + chol_ * z;
        for (std::size_t k = 0; k < dim_; ++k) out.values[m * dim_ + k] = x(k);
    }
}

double MvnLocation::log_likelihood(const SufficientStat& stat, ConstRef theta) const {
    return theta.dot(prec_ * stat.sum) -
           0.5 * static_cast<double>(stat.n) * theta.dot(prec_ * theta);
}

std::optional<Vector> MvnLocation::mle(const SufficientStat& stat) const {
    if (stat.n == 0) return std::nullopt;
    return Vector(stat.sum / static_cast<double>(stat.n));
}

Matrix MvnLocation::fisher(ConstRef) const { return prec_; }

std::pair<Vector, Matrix> MvnLocation::moments(ConstRef theta) const {
    return {Vector(theta), cov_};
}

std::vector<Node> MvnLocation::expectation_nodes(ConstRef theta) const {
    // Derivatives are at most linear in x, so products of four need degree 4.
    const ProductRule rule = product_hermite(dim_, 3);
    std::vector<Node> out(rule.size());
    Vector z(dim_);
    for (std::size_t m = 0; m < rule.size(); ++m) {
        for (std::size_t k = 0; k < dim_; ++k) z(k) = rule.points[m * dim_ + k];
        out[m].x = theta + chol_ * z;
        out[m].weight = rule.weights[m];
    }
    return out;
}

std::vector<Vector> MvnLocation::reference_points() const {
    std::vector<Vector> out{Vector::Zero(dim_), Vector::Constant(dim_, 1.0), Vector(dim_)};
    for (std::size_t k = 0; k < dim_; ++k) out[2](k) = (k % 2 == 0) ? -0.5 : 2.0;
    return out;
}

}  // namespace bayespred::detail
