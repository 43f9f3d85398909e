#pragma once

#include <memory>
#include <optional>
#include <string>

#include "bayespred/family.hpp"
#include "bayespred/prior.hpp"

namespace bayespred {

enum class PredictiveMethod { closed_form, quadrature, plug_in };

std::string to_string(PredictiveMethod m);

/// A density for the next observation.
class PredictiveDensity {
public:
    virtual ~PredictiveDensity() = default;

    virtual double log_eval(ConstRef y) const = 0;
    double eval(ConstRef y) const;
    double log_eval(double y) const;
    double eval(double y) const;

    /// KL(f_theta || this) when a closed form (or an exact reduction) exists
    /// for this pair; nullopt sends the caller to numerical integration.
    virtual std::optional<double> exact_kl(const Family& family, const Vector& theta) const;

    PredictiveMethod method = PredictiveMethod::closed_form;
    std::string family_name;
    std::string prior_label;
    std::size_t n = 0;
    Vector sum;  // sufficient statistic summary
};

using PredictivePtr = std::shared_ptr<const PredictiveDensity>;

/// Bayes predictive f_h(y | x_1..x_n). Closed forms are used for the
/// conjugate pairs (flat / Jeffreys / alpha-class priors on the built-in
/// families, the shrinkage prior on identity-covariance normal location);
/// everything else goes through adaptive quadrature over theta (p <= 3).
PredictivePtr bayes_predictive(const Family& family, const Prior& prior, const SampleBatch& data);
PredictivePtr bayes_predictive(const Family& family, const Prior& prior,
                               const SufficientStat& stat);

/// Always the quadrature path; used to cross-check the closed forms.
PredictivePtr quadrature_predictive(const Family& family, const Prior& prior,
                                    const SufficientStat& stat);

/// Plug-in density at the maximum likelihood estimate.
class EstimativeDensity final : public PredictiveDensity {
public:
    EstimativeDensity(std::shared_ptr<const Family> family, std::optional<Vector> mle);
    double log_eval(ConstRef y) const override;
    std::optional<double> exact_kl(const Family& family, const Vector& theta) const override;

    /// True when the MLE is on the boundary or does not exist; eval then
    /// throws and the risk engine excludes the sample.
    bool boundary() const { return !mle_; }
    const std::optional<Vector>& mle() const { return mle_; }

private:
    std::shared_ptr<const Family> family_;
    std::optional<Vector> mle_;
};

std::shared_ptr<const EstimativeDensity> estimative(const Family& family, const SampleBatch& data);
std::shared_ptr<const EstimativeDensity> estimative(const Family& family,
                                                    const SufficientStat& stat);

/// log m(rho; v), where m(rho; v) = E[g^2(rho e_1 + sqrt(v) Z)], Z ~ N(0, I_p)
/// and g(mu) = (1 + |mu|^2)^alpha. This is the normalizer of the posterior
/// under the shrinkage prior when the flat-prior posterior is N(x, v I) with
/// |x| = rho. Tabulated as a cubic spline on [0, rho_max]; evaluated
/// directly outside.
class ShrinkageMarginal {
public:
    ShrinkageMarginal(std::size_t p, double alpha, double v, double rho_max);
    double operator()(double rho) const;
    /// Direct quadrature, no spline.
    double direct(double rho) const;
    std::size_t dim() const { return p_; }
    double alpha() const { return alpha_; }
    double variance() const { return v_; }
    double rho_max() const { return rho_max_; }

    /// Shared instance for (p, alpha, v) covering at least [0, rho_needed].
    static std::shared_ptr<const ShrinkageMarginal> get(std::size_t p, double alpha, double v,
                                                        double rho_needed);

private:
    struct Impl;
    std::size_t p_;
    double alpha_, v_, rho_max_;
    std::shared_ptr<const Impl> impl_;
};

/// Predictive under the shrinkage prior g^2 for N(mu, I_p) data.
class ShrinkagePredictive final : public PredictiveDensity {
public:
    ShrinkagePredictive(std::size_t p, double alpha, std::size_t n, const Vector& mean);
    double log_eval(ConstRef y) const override;
    /// D_uniform + log m(x; 1/n) - E[log m(W; 1/(n+1))], W = (n x + Y)/(n + 1).
    std::optional<double> exact_kl(const Family& family, const Vector& theta) const override;
    const Vector& mean() const { return mean_; }

private:
    std::size_t p_;
    double alpha_;
    Vector mean_;
    std::shared_ptr<const ShrinkageMarginal> m_x_, m_w_;
};

/// E_{X ~ N(c, s^2 I)} log m(|X|; v) through the radial decomposition
/// |X|^2 = (|c| + s u)^2 + s^2 R^2.
double expected_log_marginal(const ShrinkageMarginal& m, double c_norm, double s);

}  // namespace bayespred
