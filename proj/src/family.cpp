#include "bayespred/family.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bayespred/error.hpp"
#include "bayespred/quadrature.hpp"
#include "families/families.hpp"

namespace bayespred {

std::string to_string(Properness p) {
    switch (p) {
        case Properness::proper: return "proper";
        case Properness::improper: return "improper";
        case Properness::unknown: return "unknown";
    }
    return "unknown";
}

bool Family::in_domain(ConstRef theta) const {
    return theta.size() == static_cast<Eigen::Index>(param_dim()) && theta.allFinite() &&
           boundary_distance(theta) > 0.0;
}

void Family::require_interior(ConstRef theta) const {
    if (theta.size() != static_cast<Eigen::Index>(param_dim())) {
        std::ostringstream msg;
        msg << name() << ": parameter has " << theta.size() << " entries, expected "
            << param_dim();
        throw DomainError(msg.str());
    }
    if (!theta.allFinite() || !(boundary_distance(theta) >= boundary_margin)) {
        std::ostringstream msg;
        msg << name() << ": parameter (" << theta.transpose()
            << ") is outside the domain or within " << boundary_margin << " of its boundary";
        throw DomainError(msg.str());
    }
}

DerivativeKernel Family::derivative_kernel(const Vector& theta) const {
    auto self = shared_from_this();
    return [self, theta](ConstRef x, LogDerivatives& out) {
        self->log_derivatives(x, theta, out);
    };
}

double Family::log_density_deriv(ConstRef x, ConstRef theta,
                                 std::span<const std::size_t> index) const {
    if (index.empty()) return log_density(x, theta);
    if (index.size() > 4) throw InvalidArgument("log_density_deriv: order above 4 is not available");
    LogDerivatives d(param_dim());
    log_derivatives(x, theta, d);
    switch (index.size()) {
        case 1: return d.d1.at(index);
        case 2: return d.d2.at(index);
        case 3: return d.d3.at(index);
        default: return d.d4.at(index);
    }
}

double Family::fifth_order_bound(const Vector& theta) const {
    require_interior(theta);
    const std::size_t p = param_dim();
    LogDerivatives plus(p), minus(p);
    double bound = 0.0;
    for (const Node& node : expectation_nodes(theta)) {
        if (node.weight < 1e-8) continue;
        for (std::size_t i = 0; i < p; ++i) {
            const double h = 1e-4 * (1.0 + std::abs(theta(i)));
            Vector tp = theta, tm = theta;
            tp(i) += h;
            tm(i) -= h;
            if (!in_domain(tm) || !in_domain(tp)) continue;
            log_derivatives(node.x, tp, plus);
            log_derivatives(node.x, tm, minus);
            bound = std::max(bound, max_abs_diff(plus.d4, minus.d4) / (2.0 * h));
        }
    }
    return bound;
}

SampleBatch Family::sample(ConstRef theta, Engine& rng, std::size_t count) const {
    SampleBatch out;
    sample(theta, rng, count, out);
    return out;
}

SufficientStat Family::sufficient_stat(const SampleBatch& batch) const {
    const auto d = static_cast<Eigen::Index>(obs_dim());
    if (batch.dim != obs_dim())
        throw InvalidArgument(name() + ": sample dimension does not match the family");
    SufficientStat stat;
    stat.n = batch.size();
    stat.sum = Vector::Zero(d);
    stat.scatter = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < stat.n; ++i) {
        const auto x = batch.point(i);
        stat.sum += x;
        stat.scatter.noalias() += x * x.transpose();
    }
    return stat;
}

std::vector<Node> Family::enumerate_support(ConstRef, double) const {
    throw InvalidArgument(name() + ": support enumeration needs a discrete family");
}

std::vector<Node> Family::sum_distribution(ConstRef, std::size_t, double) const {
    throw InvalidArgument(name() + ": sum distribution needs a discrete family");
}

FamilyPtr make_family(const std::string& name, const FamilyHyper& hyper) {
    using namespace detail;
    if (name == "poisson") return std::make_shared<Poisson>();
    if (name == "bernoulli-canonical" || name == "bernoulli")
        return std::make_shared<Bernoulli>();
    if (name == "negbinomial-canonical" || name == "negbinomial") {
        if (hyper.r < 1)
            throw InvalidArgument("negbinomial-canonical: r must be an integer >= 1, got " +
                                  std::to_string(hyper.r));
        return std::make_shared<NegBinomial>(hyper.r);
    }
    if (name == "normal-location") {
        if (!(hyper.sigma > 0.0) || !std::isfinite(hyper.sigma))
            throw InvalidArgument("normal-location: sigma must be positive");
        return std::make_shared<NormalLocation>(hyper.sigma);
    }
    if (name == "normal-location-scale") return std::make_shared<NormalLocationScale>();
    if (name == "mvn-location") {
        if (hyper.dim < 1) throw InvalidArgument("mvn-location: dim must be >= 1");
        Matrix cov = hyper.covariance.value_or(Matrix::Identity(hyper.dim, hyper.dim));
        if (cov.rows() != hyper.dim || cov.cols() != hyper.dim)
            throw InvalidArgument("mvn-location: covariance must be dim x dim");
        return std::make_shared<MvnLocation>(std::move(cov));
    }
    if (name == "mvn-scale") {
        if (hyper.dim < 1) throw InvalidArgument("mvn-scale: dim must be >= 1");
        if (hyper.dim > 4) throw InvalidArgument("mvn-scale: dim above 4 is not supported");
        return std::make_shared<MvnScale>(hyper.dim);
    }
    throw InvalidArgument(
        "unknown family '" + name +
        "' (expected poisson, bernoulli-canonical, negbinomial-canonical, normal-location, "
        "normal-location-scale, mvn-location or mvn-scale)");
}

FamilyPtr log_reparametrize(FamilyPtr base) {
    return std::make_shared<detail::LogReparametrized>(std::move(base));
}

double total_mass(const Family& family, const Vector& theta) {
    family.require_interior(theta);
    if (family.support() == Support::discrete) {
        double sum = 0.0;
        for (const Node& node : family.enumerate_support(theta, 1e-15))
            sum += std::exp(family.log_density(node.x, theta));
        return sum;
    }
    // Importance quadrature against a Gaussian 1.5 times wider than the
    // observation distribution.
    const auto [mean, cov] = family.moments(theta);
    const auto d = static_cast<std::size_t>(mean.size());
    const Matrix chol = (2.25 * cov).llt().matrixL();
    const double log_det = 2.0 * chol.diagonal().array().log().sum();
    const std::size_t per_dim = d == 1 ? 60 : (d == 2 ? 30 : 16);
    const ProductRule rule = product_hermite(d, per_dim);
    double sum = 0.0;
    Vector z(d);
    for (std::size_t m = 0; m < rule.size(); ++m) {
        for (std::size_t k = 0; k < d; ++k) z(k) = rule.points[m * d + k];
        const Vector x = mean + chol * z;
        const double log_q =
            -0.5 * d * std::log(2.0 * M_PI) - 0.5 * log_det - 0.5 * z.squaredNorm();
        sum += rule.weights[m] * std::exp(family.log_density(x, theta) - log_q);
    }
    return sum;
}

}  // namespace bayespred
