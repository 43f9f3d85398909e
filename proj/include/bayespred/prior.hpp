#pragma once

#include <functional>
#include <optional>
#include <string>

#include "bayespred/family.hpp"

namespace bayespred {

enum class PriorShape { flat, jeffreys, alpha_class, shrinkage, custom };

/// A prior in two forms: an unnormalized log density (absent for
/// differential-only priors) and the log-gradient h_i and log-Hessian h_ij
/// consumed by the asymptotic formulas. Improper priors carry no normalizer.
struct Prior {
    std::string label;
    PriorShape shape = PriorShape::custom;
    Properness properness = Properness::unknown;
    std::size_t dim = 0;
    std::optional<double> alpha;  // alpha-class member, or shrinkage exponent

    std::function<double(ConstRef)> log_density;
    std::function<Vector(ConstRef)> log_grad;
    std::function<Matrix(ConstRef)> log_hess;

    // Shrinkage priors only: the density is g^2 and these give g and its
    // Laplacian.
    std::function<double(ConstRef)> g;
    std::function<double(ConstRef)> laplacian_g;

    bool has_density() const { return static_cast<bool>(log_density); }
    double density(ConstRef theta) const;
    Vector grad(ConstRef theta) const { return log_grad(theta); }
    Matrix hess(ConstRef theta) const { return log_hess(theta); }
};

/// det^{1/2} of the Fisher information, in the family's parametrization.
Prior jeffreys(const Family& family);

/// The relatively invariant prior with exponent alpha; the closed form is
/// checked against the defining gradient condition at the family's
/// reference points before it is returned.
Prior alpha_prior(const Family& family, double alpha);

/// Residual h_i - L^{-1}_{j,s}(alpha L_{i,j,s} + L_{ij,s}) of the defining
/// gradient condition at theta, as a vector.
Vector alpha_condition_residual(const Family& family, const Prior& prior, const Vector& theta);

/// Density g^2 with g(mu) = (1 + |mu|^2)^alpha on R^p.
Prior shrinkage_prior(std::size_t p, double alpha);

/// Density 1 on R^p (or on the family's domain when used with one).
Prior uniform_prior(std::size_t p);

/// Grammar: "jeffreys" | "uniform" | "alpha:<real>" | "shrink:<real>".
/// shrink requires a location family.
Prior parse_prior(const std::string& spec, const Family& family);

inline constexpr const char* prior_grammar =
    "prior spec must be one of: jeffreys | uniform | alpha:<real> | shrink:<real>";

/// The alpha for which the conjugate closed forms apply, when the prior is
/// one of flat / Jeffreys / alpha-class for this family. For location
/// families any of these is flat and the result is 0.5.
std::optional<double> effective_alpha(const Family& family, const Prior& prior);

}  // namespace bayespred
