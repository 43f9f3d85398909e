#pragma once

// Concrete families. Internal to the library; callers go through make_family.

#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "bayespred/error.hpp"
#include "bayespred/family.hpp"

namespace bayespred::detail {

/// Support points 0..upper of a boost discrete distribution, where the mass
/// above `upper` is below `tail`.
template <class Dist>
std::vector<Node> enumerate_discrete(const Dist& dist, double tail) {
    namespace bm = boost::math;
    const double q = bm::quantile(bm::complement(dist, tail));
    const auto upper = static_cast<long>(std::ceil(q)) + 2;
    std::vector<Node> out;
    out.reserve(static_cast<std::size_t>(upper) + 1);
    for (long x = 0; x <= upper; ++x) {
        Node node;
        node.x = Vector::Constant(1, static_cast<double>(x));
        node.weight = bm::pdf(dist, static_cast<double>(x));
        out.push_back(std::move(node));
    }
    return out;
}

class Poisson final : public Family {
public:
    FamilyKind kind() const override { return FamilyKind::poisson; }
    std::string name() const override { return "poisson"; }
    std::size_t param_dim() const override { return 1; }
    std::size_t obs_dim() const override { return 1; }
    Support support() const override { return Support::discrete; }
    double boundary_distance(ConstRef theta) const override { return theta(0); }
    double log_density(ConstRef x, ConstRef theta) const override;
    void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const override;
    void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef theta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef theta) const override;
    std::pair<Vector, Matrix> moments(ConstRef theta) const override;
    std::vector<Node> expectation_nodes(ConstRef theta) const override;
    std::vector<Node> enumerate_support(ConstRef theta, double tail) const override;
    std::vector<Node> sum_distribution(ConstRef theta, std::size_t n, double tail) const override;
    std::vector<Coordinate> coordinates() const override { return {Coordinate::positive}; }
    std::vector<Vector> reference_points() const override;
    double jeffreys_log_density(ConstRef theta) const override;
    Vector jeffreys_log_grad(ConstRef theta) const override;
    Matrix jeffreys_log_hess(ConstRef theta) const override;
    Properness jeffreys_properness() const override { return Properness::improper; }
    double alpha_log_density(ConstRef theta, double alpha) const override;
    Vector alpha_log_grad(ConstRef theta, double alpha) const override;
    Matrix alpha_log_hess(ConstRef theta, double alpha) const override;
    Properness alpha_properness(double) const override { return Properness::improper; }
    std::optional<double> flat_alpha() const override { return 1.0; }
};

class Bernoulli final : public Family {
public:
    FamilyKind kind() const override { return FamilyKind::bernoulli; }
    std::string name() const override { return "bernoulli-canonical"; }
    std::size_t param_dim() const override { return 1; }
    std::size_t obs_dim() const override { return 1; }
    Support support() const override { return Support::discrete; }
    double boundary_distance(ConstRef) const override {
        return std::numeric_limits<double>::infinity();
    }
    double log_density(ConstRef x, ConstRef theta) const override;
    void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const override;
    void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef theta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef theta) const override;
    std::pair<Vector, Matrix> moments(ConstRef theta) const override;
    std::vector<Node> expectation_nodes(ConstRef theta) const override;
    std::vector<Node> enumerate_support(ConstRef theta, double tail) const override;
    std::vector<Node> sum_distribution(ConstRef theta, std::size_t n, double tail) const override;
    std::vector<Coordinate> coordinates() const override { return {Coordinate::real}; }
    std::vector<Vector> reference_points() const override;
    double jeffreys_log_density(ConstRef theta) const override;
    Vector jeffreys_log_grad(ConstRef theta) const override;
    Matrix jeffreys_log_hess(ConstRef theta) const override;
    Properness jeffreys_properness() const override { return Properness::proper; }
    double alpha_log_density(ConstRef theta, double alpha) const override;
    Vector alpha_log_grad(ConstRef theta, double alpha) const override;
    Matrix alpha_log_hess(ConstRef theta, double alpha) const override;
    Properness alpha_properness(double alpha) const override {
        return alpha > 0 ? Properness::proper : Properness::improper;
    }
    std::optional<double> flat_alpha() const override { return 0.0; }
};

/// NBin(r, 1 - e^theta) in the canonical parameter theta < 0.
class NegBinomial final : public Family {
public:
    explicit NegBinomial(int r) : r_(r) {}
    int r() const { return r_; }
    FamilyKind kind() const override { return FamilyKind::negbinomial; }
    std::string name() const override { return "negbinomial-canonical"; }
    std::size_t param_dim() const override { return 1; }
    std::size_t obs_dim() const override { return 1; }
    Support support() const override { return Support::discrete; }
    double boundary_distance(ConstRef theta) const override { return -theta(0); }
    double log_density(ConstRef x, ConstRef theta) const override;
    void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const override;
    void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef theta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef theta) const override;
    std::pair<Vector, Matrix> moments(ConstRef theta) const override;
    std::vector<Node> expectation_nodes(ConstRef theta) const override;
    std::vector<Node> enumerate_support(ConstRef theta, double tail) const override;
    std::vector<Node> sum_distribution(ConstRef theta, std::size_t n, double tail) const override;
    std::vector<Coordinate> coordinates() const override { return {Coordinate::negative}; }
    std::vector<Vector> reference_points() const override;
    double jeffreys_log_density(ConstRef theta) const override;
    Vector jeffreys_log_grad(ConstRef theta) const override;
    Matrix jeffreys_log_hess(ConstRef theta) const override;
    Properness jeffreys_properness() const override { return Properness::improper; }
    double alpha_log_density(ConstRef theta, double alpha) const override;
    Vector alpha_log_grad(ConstRef theta, double alpha) const override;
    Matrix alpha_log_hess(ConstRef theta, double alpha) const override;
    Properness alpha_properness(double alpha) const override {
        return alpha > 0 && alpha < 0.5 ? Properness::proper : Properness::improper;
    }
    std::optional<double> flat_alpha() const override { return 0.0; }
    FamilyHyper hyper() const override {
        FamilyHyper h;
        h.r = r_;
        return h;
    }

    /// Derivatives of the cumulant function A(theta) = -r log(1 - e^theta).
    std::array<double, 5> cumulant_derivs(double theta) const;

private:
    int r_;
};

class NormalLocation final : public Family {
public:
    explicit NormalLocation(double sigma) : sigma_(sigma) {}
    double sigma() const { return sigma_; }
    FamilyKind kind() const override { return FamilyKind::normal_location; }
    std::string name() const override { return "normal-location"; }
    std::size_t param_dim() const override { return 1; }
    std::size_t obs_dim() const override { return 1; }
    Support support() const override { return Support::continuous; }
    double boundary_distance(ConstRef) const override {
        return std::numeric_limits<double>::infinity();
    }
    double log_density(ConstRef x, ConstRef theta) const override;
    void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const override;
    void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef theta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef theta) const override;
    std::pair<Vector, Matrix> moments(ConstRef theta) const override;
    std::vector<Node> expectation_nodes(ConstRef theta) const override;
    std::vector<Coordinate> coordinates() const override { return {Coordinate::real}; }
    std::vector<Vector> reference_points() const override;
    bool is_location() const override { return true; }
    double jeffreys_log_density(ConstRef) const override { return 0.0; }
    Vector jeffreys_log_grad(ConstRef) const override { return Vector::Zero(1); }
    Matrix jeffreys_log_hess(ConstRef) const override { return Matrix::Zero(1, 1); }
    Properness jeffreys_properness() const override { return Properness::improper; }
    double alpha_log_density(ConstRef, double) const override { return 0.0; }
    Vector alpha_log_grad(ConstRef, double) const override { return Vector::Zero(1); }
    Matrix alpha_log_hess(ConstRef, double) const override { return Matrix::Zero(1, 1); }
    Properness alpha_properness(double) const override { return Properness::improper; }
    std::optional<double> flat_alpha() const override { return std::nullopt; }
    FamilyHyper hyper() const override {
        FamilyHyper h;
        h.sigma = sigma_;
        return h;
    }

private:
    double sigma_;
};

/// N(mu, v) with theta = (mu, v), v = sigma^2.
class NormalLocationScale final : public Family {
public:
    FamilyKind kind() const override { return FamilyKind::normal_location_scale; }
    std::string name() const override { return "normal-location-scale"; }
    std::size_t param_dim() const override { return 2; }
    std::size_t obs_dim() const override { return 1; }
    Support support() const override { return Support::continuous; }
    double boundary_distance(ConstRef theta) const override { return theta(1); }
    double log_density(ConstRef x, ConstRef theta) const override;
    void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const override;
    void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef theta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef theta) const override;
    std::pair<Vector, Matrix> moments(ConstRef theta) const override;
    std::vector<Node> expectation_nodes(ConstRef theta) const override;
    std::vector<Coordinate> coordinates() const override {
        return {Coordinate::real, Coordinate::positive};
    }
    std::vector<Vector> reference_points() const override;
    double jeffreys_log_density(ConstRef theta) const override;
    Vector jeffreys_log_grad(ConstRef theta) const override;
    Matrix jeffreys_log_hess(ConstRef theta) const override;
    Properness jeffreys_properness() const override { return Properness::improper; }
    double alpha_log_density(ConstRef theta, double alpha) const override;
    Vector alpha_log_grad(ConstRef theta, double alpha) const override;
    Matrix alpha_log_hess(ConstRef theta, double alpha) const override;
    Properness alpha_properness(double) const override { return Properness::improper; }
    std::optional<double> flat_alpha() const override { return 1.0; }

    /// Exponent k of the alpha-class prior v^k.
    static double power_of_v(double alpha) { return 3.0 * (alpha - 1.0); }
};

class MvnLocation final : public Family {
public:
    explicit MvnLocation(Matrix covariance);
    const Matrix& covariance() const { return cov_; }
    const Matrix& precision() const { return prec_; }
    bool identity_covariance() const;
    FamilyKind kind() const override { return FamilyKind::mvn_location; }
    std::string name() const override { return "mvn-location"; }
    std::size_t param_dim() const override { return dim_; }
    std::size_t obs_dim() const override { return dim_; }
    Support support() const override { return Support::continuous; }
    double boundary_distance(ConstRef) const override {
        return std::numeric_limits<double>::infinity();
    }
    double log_density(ConstRef x, ConstRef theta) const override;
    void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const override;
    void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef theta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef theta) const override;
    std::pair<Vector, Matrix> moments(ConstRef theta) const override;
    std::vector<Node> expectation_nodes(ConstRef theta) const override;
    std::vector<Coordinate> coordinates() const override {
        return std::vector<Coordinate>(dim_, Coordinate::real);
    }
    std::vector<Vector> reference_points() const override;
    bool is_location() const override { return true; }
    double jeffreys_log_density(ConstRef) const override { return 0.0; }
    Vector jeffreys_log_grad(ConstRef) const override { return Vector::Zero(dim_); }
    Matrix jeffreys_log_hess(ConstRef) const override { return Matrix::Zero(dim_, dim_); }
    Properness jeffreys_properness() const override { return Properness::improper; }
    double alpha_log_density(ConstRef, double) const override { return 0.0; }
    Vector alpha_log_grad(ConstRef, double) const override { return Vector::Zero(dim_); }
    Matrix alpha_log_hess(ConstRef, double) const override { return Matrix::Zero(dim_, dim_); }
    Properness alpha_properness(double) const override { return Properness::improper; }
    std::optional<double> flat_alpha() const override { return std::nullopt; }
    FamilyHyper hyper() const override;

private:
    std::size_t dim_;
    Matrix cov_, prec_, chol_;
    double log_det_ = 0.0;
};

/// Zero-mean N(0, V); theta holds V_{ii'} for i <= i' in row-major order.
class MvnScale final : public Family {
public:
    explicit MvnScale(int dim);
    int dim() const { return dim_; }
    FamilyKind kind() const override { return FamilyKind::mvn_scale; }
    std::string name() const override { return "mvn-scale"; }
    std::size_t param_dim() const override { return pairs_.size(); }
    std::size_t obs_dim() const override { return static_cast<std::size_t>(dim_); }
    Support support() const override { return Support::continuous; }
    double boundary_distance(ConstRef theta) const override;
    double log_density(ConstRef x, ConstRef theta) const override;
    void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const override;
    DerivativeKernel derivative_kernel(const Vector& theta) const override;
    void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef theta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef theta) const override;
    std::pair<Vector, Matrix> moments(ConstRef theta) const override;
    std::vector<Node> expectation_nodes(ConstRef theta) const override;
    std::vector<Coordinate> coordinates() const override { return {}; }
    std::vector<Vector> reference_points() const override;
    double jeffreys_log_density(ConstRef theta) const override;
    Vector jeffreys_log_grad(ConstRef theta) const override;
    Matrix jeffreys_log_hess(ConstRef theta) const override;
    Properness jeffreys_properness() const override { return Properness::improper; }
    double alpha_log_density(ConstRef theta, double alpha) const override;
    Vector alpha_log_grad(ConstRef theta, double alpha) const override;
    Matrix alpha_log_hess(ConstRef theta, double alpha) const override;
    Properness alpha_properness(double) const override { return Properness::improper; }
    std::optional<double> flat_alpha() const override { return 1.0; }
    FamilyHyper hyper() const override {
        FamilyHyper h;
        h.dim = dim_;
        return h;
    }

    Matrix to_matrix(ConstRef theta) const;
    Vector to_theta(const Matrix& v) const;
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    /// Direction matrix D_a = dV / dtheta_a.
    Matrix direction(std::size_t a) const;

private:
    int dim_;
    std::vector<std::pair<int, int>> pairs_;
};

/// theta = exp(eta) applied to a one-parameter family on (0, inf).
class LogReparametrized final : public Family {
public:
    explicit LogReparametrized(FamilyPtr base);
    const Family& base() const { return *base_; }
    FamilyKind kind() const override { return FamilyKind::reparametrized; }
    std::string name() const override { return "log-" + base_->name(); }
    std::size_t param_dim() const override { return 1; }
    std::size_t obs_dim() const override { return base_->obs_dim(); }
    Support support() const override { return base_->support(); }
    double boundary_distance(ConstRef) const override {
        return std::numeric_limits<double>::infinity();
    }
    double log_density(ConstRef x, ConstRef eta) const override;
    void log_derivatives(ConstRef x, ConstRef eta, LogDerivatives& out) const override;
    void sample(ConstRef eta, Engine& rng, std::size_t count, SampleBatch& out) const override;
    using Family::sample;
    double log_likelihood(const SufficientStat& stat, ConstRef eta) const override;
    std::optional<Vector> mle(const SufficientStat& stat) const override;
    Matrix fisher(ConstRef eta) const override;
    std::pair<Vector, Matrix> moments(ConstRef eta) const override;
    std::vector<Node> expectation_nodes(ConstRef eta) const override;
    std::vector<Node> enumerate_support(ConstRef eta, double tail) const override;
    std::vector<Node> sum_distribution(ConstRef eta, std::size_t n, double tail) const override;
    std::vector<Coordinate> coordinates() const override { return {Coordinate::real}; }
    std::vector<Vector> reference_points() const override;
    double jeffreys_log_density(ConstRef eta) const override;
    Vector jeffreys_log_grad(ConstRef eta) const override;
    Matrix jeffreys_log_hess(ConstRef eta) const override;
    Properness jeffreys_properness() const override { return base_->jeffreys_properness(); }
    double alpha_log_density(ConstRef eta, double alpha) const override;
    Vector alpha_log_grad(ConstRef eta, double alpha) const override;
    Matrix alpha_log_hess(ConstRef eta, double alpha) const override;
    Properness alpha_properness(double alpha) const override {
        return base_->alpha_properness(alpha);
    }
    std::optional<double> flat_alpha() const override { return std::nullopt; }
    FamilyHyper hyper() const override { return base_->hyper(); }

    /// log h_eta from log h_theta and its derivatives: adds the Jacobian.
    static double density_to_eta(double log_h, double eta) { return log_h + eta; }
    static double grad_to_eta(double g, double theta) { return theta * g + 1.0; }
    static double hess_to_eta(double g, double h, double theta) {
        return theta * theta * h + theta * g;
    }

private:
    Vector to_theta(ConstRef eta) const;
    FamilyPtr base_;
};

}  // namespace bayespred::detail
