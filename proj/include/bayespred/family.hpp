#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bayespred/rng.hpp"
#include "bayespred/tensor.hpp"

namespace bayespred {

enum class FamilyKind {
    poisson,
    bernoulli,
    negbinomial,
    normal_location,
    normal_location_scale,
    mvn_location,
    mvn_scale,
    reparametrized,
};

enum class Support { discrete, continuous };

enum class Properness { proper, improper, unknown };

std::string to_string(Properness p);

/// How a parameter coordinate is mapped to the real line for quadrature.
enum class Coordinate { real, positive, negative };

using ConstRef = Eigen::Ref<const Vector>;

/// Observations stored flat, `dim` doubles per point. Counts are stored as
/// doubles too.
struct SampleBatch {
    std::size_t dim = 1;
    std::vector<double> values;

    std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
    bool empty() const { return values.empty(); }
    Eigen::Map<const Vector> point(std::size_t i) const {
        return {values.data() + i * dim, static_cast<Eigen::Index>(dim)};
    }
};

/// Sum and scatter of the observations; every built-in family's posterior
/// depends on the data only through (n, sum, scatter).
struct SufficientStat {
    std::size_t n = 0;
    Vector sum;      // sum of x
    Matrix scatter;  // sum of x x^T
};

/// Log-density derivatives with respect to theta, orders 1..4.
struct LogDerivatives {
    Tensor d1, d2, d3, d4;
    explicit LogDerivatives(std::size_t p = 0) { resize(p); }
    void resize(std::size_t p) {
        d1 = Tensor(p, 1);
        d2 = Tensor(p, 2);
        d3 = Tensor(p, 3);
        d4 = Tensor(p, 4);
    }
};

/// Evaluator for the derivatives at one fixed theta.
using DerivativeKernel = std::function<void(ConstRef x, LogDerivatives& out)>;

/// A support point (discrete) or quadrature node (continuous) with weight.
struct Node {
    Vector x;
    double weight = 0.0;
};

/// Constants that select a member of a built-in family.
struct FamilyHyper {
    int r = 1;                        // negative binomial
    double sigma = 1.0;               // normal-location
    int dim = 1;                      // mvn-location, mvn-scale
    std::optional<Matrix> covariance; // mvn-location; identity if absent
};

/// Theta within this distance of the domain boundary is rejected.
inline constexpr double boundary_margin = 1e-6;

class Family : public std::enable_shared_from_this<Family> {
public:
    virtual ~Family() = default;

    virtual FamilyKind kind() const = 0;
    virtual std::string name() const = 0;
    virtual std::size_t param_dim() const = 0;
    virtual std::size_t obs_dim() const = 0;
    virtual Support support() const = 0;

    /// Distance from theta to the complement of the domain; <= 0 outside.
    virtual double boundary_distance(ConstRef theta) const = 0;
    bool in_domain(ConstRef theta) const;
    /// Throws DomainError unless theta is at least boundary_margin inside.
    void require_interior(ConstRef theta) const;

    virtual double log_density(ConstRef x, ConstRef theta) const = 0;
    virtual void log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const = 0;
    /// Precomputes whatever depends on theta only. The default wraps
    /// log_derivatives.
    virtual DerivativeKernel derivative_kernel(const Vector& theta) const;
    /// One mixed partial; an empty index returns log_density.
    double log_density_deriv(ConstRef x, ConstRef theta, std::span<const std::size_t> index) const;
    /// Rough size of fifth derivatives near the bulk of the data, from
    /// central differences of the analytic fourth derivatives.
    double fifth_order_bound(const Vector& theta) const;

    virtual void sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const = 0;
    SampleBatch sample(ConstRef theta, Engine& rng, std::size_t count) const;
    SufficientStat sufficient_stat(const SampleBatch& batch) const;
    /// Log-likelihood of n observations up to a theta-free constant.
    virtual double log_likelihood(const SufficientStat& stat, ConstRef theta) const = 0;
    /// Maximum likelihood estimate; nullopt when it falls on the boundary
    /// or does not exist.
    virtual std::optional<Vector> mle(const SufficientStat& stat) const = 0;

    virtual Matrix fisher(ConstRef theta) const = 0;
    /// Mean and covariance of one observation.
    virtual std::pair<Vector, Matrix> moments(ConstRef theta) const = 0;
    /// Weighted points with sum_k w_k f(x_k) = E_theta f(X) exactly for every
    /// f built from products of up to four log-density derivatives.
    virtual std::vector<Node> expectation_nodes(ConstRef theta) const = 0;
    /// Discrete families: support points with pmf, stopping once the
    /// remaining upper-tail mass is below `tail`.
    virtual std::vector<Node> enumerate_support(ConstRef theta, double tail) const;
    /// Discrete families: distribution of the sum of n observations.
    virtual std::vector<Node> sum_distribution(ConstRef theta, std::size_t n, double tail) const;

    /// Transform used by quadrature; empty when the family has none.
    virtual std::vector<Coordinate> coordinates() const = 0;
    /// Interior points used for construction-time checks.
    virtual std::vector<Vector> reference_points() const = 0;
    virtual bool is_location() const { return false; }

    // Jeffreys prior, analytic.
    virtual double jeffreys_log_density(ConstRef theta) const = 0;
    virtual Vector jeffreys_log_grad(ConstRef theta) const = 0;
    virtual Matrix jeffreys_log_hess(ConstRef theta) const = 0;
    virtual Properness jeffreys_properness() const = 0;

    // Relatively invariant (alpha-class) priors in closed form.
    virtual double alpha_log_density(ConstRef theta, double alpha) const = 0;
    virtual Vector alpha_log_grad(ConstRef theta, double alpha) const = 0;
    virtual Matrix alpha_log_hess(ConstRef theta, double alpha) const = 0;
    virtual Properness alpha_properness(double alpha) const = 0;
    /// The alpha whose prior is flat in this parametrization. nullopt for
    /// location families (every alpha is flat) and when no member is flat.
    virtual std::optional<double> flat_alpha() const = 0;

    /// Hyperparameters this family was built with.
    virtual FamilyHyper hyper() const { return {}; }
};

using FamilyPtr = std::shared_ptr<const Family>;

/// Built-in names: poisson, bernoulli-canonical, negbinomial-canonical,
/// normal-location, normal-location-scale, mvn-location, mvn-scale.
FamilyPtr make_family(const std::string& name, const FamilyHyper& hyper = {});

/// The same model in coordinates eta = log(theta); one-dimensional families
/// with a positive parameter only.
FamilyPtr log_reparametrize(FamilyPtr base);

/// Sum (discrete) or integral (continuous) of the density over the support.
double total_mass(const Family& family, const Vector& theta);

}  // namespace bayespred
