#include "families.hpp"

namespace bayespred::detail {

LogReparametrized::LogReparametrized(FamilyPtr base) : base_(std::move(base)) {
    const auto coords = base_->coordinates();
    if (base_->param_dim() != 1 || coords.size() != 1 || coords[0] != Coordinate::positive)
        throw InvalidArgument("log reparametrization needs a one-parameter family on (0, inf)");
}

Vector LogReparametrized::to_theta(ConstRef eta) const {
    return Vector::Constant(1, std::exp(eta(0)));
}

double LogReparametrized::log_density(ConstRef x, ConstRef eta) const {
    return base_->log_density(x, to_theta(eta));
}

void LogReparametrized::log_derivatives(ConstRef x, ConstRef eta, LogDerivatives& out) const {
    // Chain rule for theta = e^eta: every derivative of theta in eta equals
    // theta, so the coefficients are Stirling numbers of the second kind.
    LogDerivatives b(1);
    const double t = std::exp(eta(0));
    base_->log_derivatives(x, to_theta(eta), b);
    const double l1 = b.d1(0), l2 = b.d2(0), l3 = b.d3(0), l4 = b.d4(0);
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    out.d1(0) = t * l1;
    out.d2(0) = t2 * l2 + t * l1;
    out.d3(0) = t3 * l3 + 3.0 * t2 * l2 + t * l1;
    out.d4(0) = t4 * l4 + 6.0 * t3 * l3 + 7.0 * t2 * l2 + t * l1;
}

void LogReparametrized::sample(ConstRef eta, Engine& rng, std::size_t count,
                               SampleBatch& out) const {
    base_->sample(to_theta(eta), rng, count, out);
}

double LogReparametrized::log_likelihood(const SufficientStat& stat, ConstRef eta) const {
    return base_->log_likelihood(stat, to_theta(eta));
}

std::optional<Vector> LogReparametrized::mle(const SufficientStat& stat) const {
    auto m = base_->mle(stat);
    if (!m) return std::nullopt;
    return Vector::Constant(1, std::log((*m)(0)));
}

Matrix LogReparametrized::fisher(ConstRef eta) const {
    const double t = std::exp(eta(0));
    return t * t * base_->fisher(to_theta(eta));
}

std::pair<Vector, Matrix> LogReparametrized::moments(ConstRef eta) const {
    return base_->moments(to_theta(eta));
}

std::vector<Node> LogReparametrized::expectation_nodes(ConstRef eta) const {
    return base_->expectation_nodes(to_theta(eta));
}

std::vector<Node> LogReparametrized::enumerate_support(ConstRef eta, double tail) const {
    return base_->enumerate_support(to_theta(eta), tail);
}

std::vector<Node> LogReparametrized::sum_distribution(ConstRef eta, std::size_t n,
                                                      double tail) const {
    return base_->sum_distribution(to_theta(eta), n, tail);
}

std::vector<Vector> LogReparametrized::reference_points() const {
    auto pts = base_->reference_points();
    for (auto& p : pts) p(0) = std::log(p(0));
    return pts;
}

double LogReparametrized::jeffreys_log_density(ConstRef eta) const {
    return density_to_eta(base_->jeffreys_log_density(to_theta(eta)), eta(0));
}
Vector LogReparametrized::jeffreys_log_grad(ConstRef eta) const {
    const Vector t = to_theta(eta);
    return Vector::Constant(1, grad_to_eta(base_->jeffreys_log_grad(t)(0), t(0)));
}
Matrix LogReparametrized::jeffreys_log_hess(ConstRef eta) const {
    const Vector t = to_theta(eta);
    return Matrix::Constant(
        1, 1, hess_to_eta(base_->jeffreys_log_grad(t)(0), base_->jeffreys_log_hess(t)(0, 0), t(0)));
}

double LogReparametrized::alpha_log_density(ConstRef eta, double alpha) const {
    return density_to_eta(base_->alpha_log_density(to_theta(eta), alpha), eta(0));
}
Vector LogReparametrized::alpha_log_grad(ConstRef eta, double alpha) const {
    const Vector t = to_theta(eta);
    return Vector::Constant(1, grad_to_eta(base_->alpha_log_grad(t, alpha)(0), t(0)));
}
Matrix LogReparametrized::alpha_log_hess(ConstRef eta, double alpha) const {
    const Vector t = to_theta(eta);
    return Matrix::Constant(1, 1,
                            hess_to_eta(base_->alpha_log_grad(t, alpha)(0),
                                        base_->alpha_log_hess(t, alpha)(0, 0), t(0)));
}

}  // namespace bayespred::detail
