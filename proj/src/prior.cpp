#include "bayespred/prior.hpp"

#include <cmath>
#include <sstream>

#include "bayespred/cumulants.hpp"
#include "bayespred/error.hpp"

namespace bayespred {

double Prior::density(ConstRef theta) const {
    if (!log_density) throw InvalidArgument("prior '" + label + "' has no density evaluator");
    return std::exp(log_density(theta));
}

Prior jeffreys(const Family& family) {
    auto fam = family.shared_from_this();
    Prior p;
    p.label = "jeffreys";
    p.shape = PriorShape::jeffreys;
    p.properness = family.jeffreys_properness();
    p.dim = family.param_dim();
    p.alpha = 0.5;
    p.log_density = [fam](ConstRef t) { return fam->jeffreys_log_density(t); };
    p.log_grad = [fam](ConstRef t) { return fam->jeffreys_log_grad(t); };
    p.log_hess = [fam](ConstRef t) { return fam->jeffreys_log_hess(t); };
    return p;
}

Vector alpha_condition_residual(const Family& family, const Prior& prior, const Vector& theta) {
    const CumulantTensors c = cumulants(family, theta);
    const std::size_t p = c.dim;
    const double alpha = prior.alpha.value_or(0.0);
    const Tensor& s3 = c[Partition::i_j_k];
    const Tensor& a = c[Partition::ij_k];
    Vector target = Vector::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t s = 0; s < p; ++s)
                target(i) += c.fisher_inv(j, s) * (alpha * s3(i, j, s) + a(i, j, s));
    return prior.log_grad(theta) - target;
}

Prior alpha_prior(const Family& family, double alpha) {
    if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
    auto fam = family.shared_from_this();
    Prior p;
    std::ostringstream label;
    label << "alpha:" << alpha;
    p.label = label.str();
    p.shape = PriorShape::alpha_class;
    p.properness = family.alpha_properness(alpha);
    p.dim = family.param_dim();
    p.alpha = alpha;
    p.log_density = [fam, alpha](ConstRef t) { return fam->alpha_log_density(t, alpha); };
    p.log_grad = [fam, alpha](ConstRef t) { return fam->alpha_log_grad(t, alpha); };
    p.log_hess = [fam, alpha](ConstRef t) { return fam->alpha_log_hess(t, alpha); };

    for (const Vector& theta : family.reference_points()) {
        const Vector r = alpha_condition_residual(family, p, theta);
        const double scale = 1.0 + p.log_grad(theta).cwiseAbs().maxCoeff();
        if (r.cwiseAbs().maxCoeff() > 1e-8 * scale) {
            std::ostringstream msg;
            msg << family.name() << ": closed-form alpha prior fails the gradient condition ("
                << r.cwiseAbs().maxCoeff() << ")";
            throw Error(msg.str());
        }
    }
    return p;
}

Prior shrinkage_prior(std::size_t p, double alpha) {
    if (p == 0) throw InvalidArgument("shrinkage prior needs dimension >= 1");
    Prior out;
    std::ostringstream label;
    label << "shrink:" << alpha;
    out.label = label.str();
    out.shape = PriorShape::shrinkage;
    // g^2 = (1 + r^2)^{2 alpha} is integrable iff 4 alpha < -p.
    out.properness = 4.0 * alpha < -static_cast<double>(p) ? Properness::proper
                                                            : Properness::improper;
    out.dim = p;
    out.alpha = alpha;
    out.log_density = [alpha](ConstRef mu) { return 2.0 * alpha * std::log1p(mu.squaredNorm()); };
    out.log_grad = [alpha](ConstRef mu) -> Vector {
        return (4.0 * alpha / (1.0 + mu.squaredNorm())) * mu;
    };
    out.log_hess = [alpha, p](ConstRef mu) -> Matrix {
        const double q = 1.0 + mu.squaredNorm();
        const auto d = static_cast<Eigen::Index>(p);
        return 4.0 * alpha * (Matrix::Identity(d, d) / q - 2.0 * mu * mu.transpose() / (q * q));
    };
    out.g = [alpha](ConstRef mu) { return std::pow(1.0 + mu.squaredNorm(), alpha); };
    out.laplacian_g = [alpha, p](ConstRef mu) {
        const double r2 = mu.squaredNorm();
        const double pd = static_cast<double>(p);
        return 2.0 * alpha * std::pow(1.0 + r2, alpha - 2.0) * (pd + (pd + 2.0 * alpha - 2.0) * r2);
    };
    return out;
}

Prior uniform_prior(std::size_t p) {
    Prior out;
    out.label = "uniform";
    out.shape = PriorShape::flat;
    out.properness = Properness::improper;
    out.dim = p;
    const auto d = static_cast<Eigen::Index>(p);
    out.log_density = [](ConstRef) { return 0.0; };
    out.log_grad = [d](ConstRef) -> Vector { return Vector::Zero(d); };
    out.log_hess = [d](ConstRef) -> Matrix { return Matrix::Zero(d, d); };
    return out;
}

namespace {

double parse_real(const std::string& text, const std::string& spec) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        throw InvalidArgument("malformed prior spec '" + spec + "'; " + prior_grammar);
    return v;
}

}  // namespace

Prior parse_prior(const std::string& spec, const Family& family) {
    if (spec == "jeffreys") return jeffreys(family);
    if (spec == "uniform") return uniform_prior(family.param_dim());
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const std::string head = spec.substr(0, colon);
        const std::string tail = spec.substr(colon + 1);
        if (head == "alpha") return alpha_prior(family, parse_real(tail, spec));
        if (head == "shrink") {
            const double a = parse_real(tail, spec);
            if (!family.is_location())
                throw InvalidArgument("shrink:<real> needs a location family, not " +
                                      family.name());
            Prior p = shrinkage_prior(family.param_dim(), a);
            return p;
        }
    }
    throw InvalidArgument("malformed prior spec '" + spec + "'; " + prior_grammar);
}

std::optional<double> effective_alpha(const Family& family, const Prior& prior) {
    switch (prior.shape) {
        case PriorShape::jeffreys:
            return 0.5;
        case PriorShape::alpha_class:
            return prior.alpha;
        case PriorShape::flat:
            if (family.is_location()) return 0.5;
            return family.flat_alpha();
        default:
            return std::nullopt;
    }
}

}  // namespace bayespred
