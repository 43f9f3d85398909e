#include "bayespred/predictive.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "bayespred/error.hpp"
#include "bayespred/quadrature.hpp"
#include "families/families.hpp"

namespace bayespred {

std::string to_string(PredictiveMethod m) {
    switch (m) {
        case PredictiveMethod::closed_form: return "closed-form";
        case PredictiveMethod::quadrature: return "quadrature";
        case PredictiveMethod::plug_in: return "plug-in";
    }
    return "?";
}

double PredictiveDensity::eval(ConstRef y) const { return std::exp(log_eval(y)); }
double PredictiveDensity::log_eval(double y) const { return log_eval(Vector::Constant(1, y)); }
double PredictiveDensity::eval(double y) const { return std::exp(log_eval(y)); }

std::optional<double> PredictiveDensity::exact_kl(const Family&, const Vector&) const {
    return std::nullopt;
}

namespace {

constexpr double log_two_pi = 1.8378770664093454836;

bool gaussian_observations(const Family& f) {
    switch (f.kind()) {
        case FamilyKind::normal_location:
        case FamilyKind::normal_location_scale:
        case FamilyKind::mvn_location:
        case FamilyKind::mvn_scale:
            return true;
        default:
            return false;
    }
}

/// KL(N(m0, S0) || N(m1, S1)).
double gaussian_kl(const Vector& m0, const Matrix& s0, const Vector& m1, const Matrix& s1) {
    Eigen::LLT<Matrix> l0(s0), l1(s1);
    const Vector diff = m1 - m0;
    const double tr = l1.solve(s0).trace();
    const double quad = diff.dot(l1.solve(diff));
    auto logdet = [](const Eigen::LLT<Matrix>& l) {
        return 2.0 * l.matrixL().toDenseMatrix().diagonal().array().log().sum();
    };
    return 0.5 * (tr + quad - static_cast<double>(m0.size()) + logdet(l1) - logdet(l0));
}

Matrix centered_scatter(const SufficientStat& s) {
    return s.scatter - s.sum * s.sum.transpose() / static_cast<double>(s.n);
}

void set_provenance(PredictiveDensity& p, const Family& f, const Prior& prior,
                    const SufficientStat& s) {
    p.family_name = f.name();
    p.prior_label = prior.label;
    p.n = s.n;
    p.sum = s.sum;
}

[[noreturn]] void divergent(const Family& f, const Prior& prior, const SufficientStat& s,
                            const std::string& why) {
    std::ostringstream msg;
    msg << f.name() << " with prior " << prior.label << " and n = " << s.n
        << ": posterior normalizer is infinite (" << why << ")";
    throw DivergentPosteriorError(msg.str());
}

// ---- closed forms -----------------------------------------------------------

/// Gamma(a, rate b) mixture of Poisson: negative binomial.
class PoissonGammaPredictive final : public PredictiveDensity {
public:
    PoissonGammaPredictive(double a, double b) : a_(a), b_(b) {}
    double log_eval(ConstRef y) const override {
        const double k = y(0);
        if (k < 0 || k != std::floor(k)) return -INFINITY;
        return std::lgamma(a_ + k) - std::lgamma(a_) - std::lgamma(k + 1.0) +
               a_ * std::log(b_ / (b_ + 1.0)) - k * std::log1p(b_);
    }

private:
    double a_, b_;
};

/// Beta(a, b) mixture of Bernoulli.
class BetaBernoulliPredictive final : public PredictiveDensity {
public:
    BetaBernoulliPredictive(double a, double b) : a_(a), b_(b) {}
    double log_eval(ConstRef y) const override {
        if (y(0) == 1.0) return std::log(a_ / (a_ + b_));
        if (y(0) == 0.0) return std::log(b_ / (a_ + b_));
        return -INFINITY;
    }

private:
    double a_, b_;
};

/// Beta(a, b) mixture over q of NBin(r, q) with pmf C(y+r-1, y) q^y (1-q)^r.
class BetaNegBinomialPredictive final : public PredictiveDensity {
public:
    BetaNegBinomialPredictive(int r, double a, double b) : r_(r), a_(a), b_(b) {}
    double log_eval(ConstRef y) const override {
        const double k = y(0);
        if (k < 0 || k != std::floor(k)) return -INFINITY;
        const double r = r_;
        auto lbeta = [](double x, double z) {
            return std::lgamma(x) + std::lgamma(z) - std::lgamma(x + z);
        };
        return std::lgamma(k + r) - std::lgamma(k + 1.0) - std::lgamma(r) +
               lbeta(a_ + k, b_ + r) - lbeta(a_, b_);
    }

private:
    int r_;
    double a_, b_;
};

class GaussianPredictive final : public PredictiveDensity {
public:
    GaussianPredictive(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
        llt_.compute(cov_);
        log_det_ = 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    double log_eval(ConstRef y) const override {
        const Vector d = y - mean_;
        const Vector z = llt_.matrixL().solve(d);
        return -0.5 * (z.squaredNorm() + log_det_ + static_cast<double>(d.size()) * log_two_pi);
    }
    std::optional<double> exact_kl(const Family& f, const Vector& theta) const override {
        if (!gaussian_observations(f)) return std::nullopt;
        const auto [m, s] = f.moments(theta);
        return gaussian_kl(m, s, mean_, cov_);
    }

private:
    Vector mean_;
    Matrix cov_;
    Eigen::LLT<Matrix> llt_;
    double log_det_ = 0.0;
};

/// Multivariate Student t with `dof` degrees of freedom and scale matrix.
class StudentPredictive final : public PredictiveDensity {
public:
    StudentPredictive(double dof, Vector loc, Matrix scale)
        : dof_(dof), loc_(std::move(loc)), scale_(std::move(scale)) {
        llt_.compute(scale_);
        const double d = static_cast<double>(loc_.size());
        const double log_det = 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const_ = std::lgamma(0.5 * (dof_ + d)) - std::lgamma(0.5 * dof_) -
                 0.5 * d * std::log(dof_ * std::numbers::pi) - 0.5 * log_det;
    }
    double log_eval(ConstRef y) const override {
        const Vector z = llt_.matrixL().solve(Vector(y - loc_));
        const double d = static_cast<double>(loc_.size());
        return const_ - 0.5 * (dof_ + d) * std::log1p(z.squaredNorm() / dof_);
    }

private:
    double dof_;
    Vector loc_;
    Matrix scale_;
    Eigen::LLT<Matrix> llt_;
    double const_ = 0.0;
};

// ---- quadrature ---------------------------------------------------------------

class QuadraturePredictive final : public PredictiveDensity {
public:
    QuadraturePredictive(const Family& f, const Prior& prior, const SufficientStat& stat)
        : fam_(f.shared_from_this()), prior_(prior), stat_(stat), coords_(f.coordinates()) {
        p_ = f.param_dim();
        if (coords_.empty() || p_ > 3)
            throw InvalidArgument(f.name() + ": no quadrature predictive (closed forms only)");
        if (!prior.has_density())
            throw InvalidArgument("prior " + prior.label + " has no density; cannot integrate");
        if (stat.n == 0 && prior.properness != Properness::proper)
            divergent(f, prior, stat, "improper prior and no data");
        find_mode();
        check_tails();
        log_norm_ = std::log(integrate([](const Vector&) { return 1.0; }));
        if (!std::isfinite(log_norm_)) divergent(f, prior, stat, "normalizer not finite");
    }

    double log_eval(ConstRef y) const override {
        const Vector yy = y;
        const double v = integrate([&](const Vector& theta) {
            return std::exp(fam_->log_density(yy, theta));
        });
        return std::log(v) - log_norm_;
    }

private:
    Vector to_theta(const Vector& u) const {
        Vector t(u.size());
        for (Eigen::Index a = 0; a < u.size(); ++a) {
            switch (coords_[a]) {
                case Coordinate::real: t(a) = u(a); break;
                case Coordinate::positive: t(a) = std::exp(u(a)); break;
                case Coordinate::negative: t(a) = -std::exp(u(a)); break;
            }
        }
        return t;
    }
    double log_jacobian(const Vector& u) const {
        double s = 0.0;
        for (Eigen::Index a = 0; a < u.size(); ++a)
            if (coords_[a] != Coordinate::real) s += u(a);
        return s;
    }
    // Log posterior density of u, unnormalized.
    double phi(const Vector& u) const {
        const Vector t = to_theta(u);
        if (!fam_->in_domain(t)) return -INFINITY;
        return fam_->log_likelihood(stat_, t) + prior_.log_density(t) + log_jacobian(u);
    }

    void find_mode() {
        const auto d = static_cast<Eigen::Index>(p_);
        Vector u = Vector::Zero(d);
        const double h = 1e-4;
        Matrix hess(d, d);
        for (int iter = 0; iter < 200; ++iter) {
            const double f0 = phi(u);
            Vector grad(d);
            for (Eigen::Index a = 0; a < d; ++a) {
                Vector e = Vector::Zero(d);
                e(a) = h;
                grad(a) = (phi(u + e) - phi(u - e)) / (2 * h);
                for (Eigen::Index b = 0; b <= a; ++b) {
                    Vector e2 = Vector::Zero(d);
                    e2(b) = h;
                    const double v = (phi(u + e + e2) - phi(u + e - e2) - phi(u - e + e2) +
                                      phi(u - e - e2)) / (4 * h * h);
                    hess(a, b) = hess(b, a) = v;
                }
            }
            Eigen::LLT<Matrix> llt(-hess);
            Vector step = llt.info() == Eigen::Success ? Vector(llt.solve(grad)) : Vector(grad);
            double t = 1.0;
            while (t > 1e-10 && !(phi(u + t * step) >= f0)) t *= 0.5;
            u += t * step;
            if (u.cwiseAbs().maxCoeff() > 60.0)
                divergent(*fam_, prior_, stat_, "posterior mass escapes to the boundary");
            if ((t * step).norm() < 1e-10) break;
        }
        Eigen::LLT<Matrix> llt(-hess);
        if (llt.info() != Eigen::Success)
            throw QuadratureError(fam_->name() + ": posterior is not locally log-concave at its mode");
        mode_ = u;
        phi_mode_ = phi(u);
        // u = mode + C z with C C^T = (-H)^{-1}.
        chol_ = Matrix(llt.matrixU().solve(Matrix::Identity(d, d)));
    }

    void check_tails() const {
        for (std::size_t a = 0; a < p_; ++a)
            for (double sgn : {-1.0, 1.0}) {
                Vector z = Vector::Zero(static_cast<Eigen::Index>(p_));
                z(static_cast<Eigen::Index>(a)) = sgn * 40.0;
                const double v = phi(mode_ + chol_ * z) - phi_mode_;
                if (v > -40.0) divergent(*fam_, prior_, stat_, "posterior tail does not decay");
            }
    }

    template <class F>
    double integrate(const F& weight) const {
        const double tol = 1e-10;
        const auto d = static_cast<Eigen::Index>(p_);
        Vector z = Vector::Zero(d);
        std::function<double(Eigen::Index)> nest = [&](Eigen::Index level) -> double {
            const auto r = integrate_real_line(
                [&](double zz) {
                    z(level) = zz;
                    if (level + 1 < d) return nest(level + 1);
                    const Vector u = mode_ + chol_ * z;
                    const double e = phi(u) - phi_mode_;
                    if (!(e > -700.0)) return 0.0;
                    return std::exp(e) * weight(to_theta(u));
                },
                tol);
            return r.value;
        };
        return nest(0);
    }

    FamilyPtr fam_;
    Prior prior_;
    SufficientStat stat_;
    std::vector<Coordinate> coords_;
    std::size_t p_ = 1;
    Vector mode_;
    Matrix chol_;
    double phi_mode_ = 0.0, log_norm_ = 0.0;
};

bool unit_normal_location(const Family& f) {
    if (f.kind() == FamilyKind::normal_location)
        return dynamic_cast<const detail::NormalLocation&>(f).sigma() == 1.0;
    if (f.kind() == FamilyKind::mvn_location)
        return dynamic_cast<const detail::MvnLocation&>(f).identity_covariance();
    return false;
}

PredictivePtr closed_form(const Family& f, const Prior& prior, const SufficientStat& s) {
    const double n = static_cast<double>(s.n);
    if (prior.shape == PriorShape::shrinkage) {
        if (!unit_normal_location(f) || prior.dim != f.param_dim()) return nullptr;
        if (s.n == 0)
            throw InvalidArgument("shrinkage predictive needs at least one observation");
        return std::make_shared<ShrinkagePredictive>(f.param_dim(), *prior.alpha, s.n,
                                                     Vector(s.sum / n));
    }
    const auto alpha = effective_alpha(f, prior);
    if (!alpha) return nullptr;
    const double al = *alpha;
    switch (f.kind()) {
        case FamilyKind::poisson: {
            const double a = s.sum(0) + al, b = n;
            if (s.n == 0 || a <= 0) divergent(f, prior, s, "need sum + alpha > 0 and n >= 1");
            return std::make_shared<PoissonGammaPredictive>(a, b);
        }
        case FamilyKind::bernoulli: {
            const double a = s.sum(0) + al, b = n - s.sum(0) + al;
            if (a <= 0 || b <= 0)
                divergent(f, prior, s, "Beta posterior needs both shape parameters > 0");
            return std::make_shared<BetaBernoulliPredictive>(a, b);
        }
        case FamilyKind::negbinomial: {
            const int r = dynamic_cast<const detail::NegBinomial&>(f).r();
            const double a = s.sum(0) + al, b = n * r - 2.0 * al + 1.0;
            if (a <= 0 || b <= 0)
                divergent(f, prior, s, "Beta posterior needs both shape parameters > 0");
            return std::make_shared<BetaNegBinomialPredictive>(r, a, b);
        }
        case FamilyKind::normal_location: {
            if (s.n == 0) divergent(f, prior, s, "flat prior and no data");
            const double sig = dynamic_cast<const detail::NormalLocation&>(f).sigma();
            return std::make_shared<GaussianPredictive>(
                s.sum / n, Matrix::Constant(1, 1, sig * sig * (1.0 + 1.0 / n)));
        }
        case FamilyKind::mvn_location: {
            if (s.n == 0) divergent(f, prior, s, "flat prior and no data");
            const auto& m = dynamic_cast<const detail::MvnLocation&>(f);
            return std::make_shared<GaussianPredictive>(s.sum / n,
                                                        (1.0 + 1.0 / n) * m.covariance());
        }
        case FamilyKind::normal_location_scale: {
            if (s.n == 0) divergent(f, prior, s, "improper prior and no data");
            const double k = detail::NormalLocationScale::power_of_v(al);
            const double a = (n - 3.0) / 2.0 - k;
            const double ss = centered_scatter(s)(0, 0);
            if (a <= 0 || !(ss > 0))
                divergent(f, prior, s, "inverse-gamma posterior needs shape > 0 and spread > 0");
            const double scale2 = 0.5 * ss * (1.0 + 1.0 / n) / a;
            return std::make_shared<StudentPredictive>(2.0 * a, s.sum / n,
                                                       Matrix::Constant(1, 1, scale2));
        }
        case FamilyKind::mvn_scale: {
            const auto& m = dynamic_cast<const detail::MvnScale&>(f);
            const double d = m.dim();
            const double k = (al - 1.0) * (d + 1.0);
            const double nu = n - 2.0 * k - d - 1.0;
            Eigen::LLT<Matrix> llt(s.scatter);
            if (s.n == 0 || !(nu > d - 1.0) || llt.info() != Eigen::Success)
                divergent(f, prior, s, "inverse-Wishart posterior needs dof > d - 1 and S > 0");
            const double dof = nu - d + 1.0;
            return std::make_shared<StudentPredictive>(dof, Vector::Zero(m.dim()),
                                                       s.scatter / dof);
        }
        default:
            return nullptr;
    }
}

}  // namespace

PredictivePtr bayes_predictive(const Family& family, const Prior& prior,
                               const SufficientStat& stat) {
    if (prior.dim != family.param_dim())
        throw InvalidArgument("prior dimension does not match " + family.name());
    PredictivePtr cf = closed_form(family, prior, stat);
    if (cf) {
        auto& mut = const_cast<PredictiveDensity&>(*cf);
        set_provenance(mut, family, prior, stat);
        mut.method = PredictiveMethod::closed_form;
        return cf;
    }
    return quadrature_predictive(family, prior, stat);
}

PredictivePtr bayes_predictive(const Family& family, const Prior& prior, const SampleBatch& data) {
    return bayes_predictive(family, prior, family.sufficient_stat(data));
}

PredictivePtr quadrature_predictive(const Family& family, const Prior& prior,
                                    const SufficientStat& stat) {
    auto q = std::make_shared<QuadraturePredictive>(family, prior, stat);
    set_provenance(*q, family, prior, stat);
    q->method = PredictiveMethod::quadrature;
    return q;
}

// ---- estimative ---------------------------------------------------------------

EstimativeDensity::EstimativeDensity(std::shared_ptr<const Family> family,
                                     std::optional<Vector> mle)
    : family_(std::move(family)), mle_(std::move(mle)) {
    method = PredictiveMethod::plug_in;
    family_name = family_->name();
    prior_label = "estimative";
}

double EstimativeDensity::log_eval(ConstRef y) const {
    if (!mle_) throw DomainError(family_name + ": maximum likelihood estimate is on the boundary");
    return family_->log_density(y, *mle_);
}

std::optional<double> EstimativeDensity::exact_kl(const Family& f, const Vector& theta) const {
    if (!mle_) return INFINITY;
    if (!gaussian_observations(f)) return std::nullopt;
    const auto [m0, s0] = f.moments(theta);
    const auto [m1, s1] = family_->moments(*mle_);
    return gaussian_kl(m0, s0, m1, s1);
}

std::shared_ptr<const EstimativeDensity> estimative(const Family& family,
                                                    const SufficientStat& stat) {
    auto e = std::make_shared<EstimativeDensity>(family.shared_from_this(), family.mle(stat));
    e->n = stat.n;
    e->sum = stat.sum;
    return e;
}

std::shared_ptr<const EstimativeDensity> estimative(const Family& family, const SampleBatch& data) {
    return estimative(family, family.sufficient_stat(data));
}

// ---- shrinkage ----------------------------------------------------------------

namespace {

const Rule& hermite_rule(std::size_t n) {
    static const Rule r20 = gauss_hermite(20), r60 = gauss_hermite(60);
    return n == 20 ? r20 : r60;
}

const Rule& laguerre_rule(std::size_t p, std::size_t n) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Rule>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{p, n}];
    if (!slot) slot = std::make_unique<Rule>(gauss_laguerre(n, 0.5 * (double(p) - 3.0)));
    return *slot;
}

}  // namespace

struct ShrinkageMarginal::Impl {
    std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline;
};

double ShrinkageMarginal::direct(double rho) const {
    const Rule& gh = hermite_rule(60);
    const double sv = std::sqrt(v_);
    const double e = 2.0 * alpha_;
    double total = 0.0;
    if (p_ == 1) {
        for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
            const double t = rho + sv * gh.nodes[j];
            total += gh.weights[j] * std::pow(1.0 + t * t, e);
        }
        return std::log(total);
    }
    const Rule& lg = laguerre_rule(p_, 40);
    for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
        const double t = rho + sv * gh.nodes[j];
        double inner = 0.0;
        for (std::size_t k = 0; k < lg.nodes.size(); ++k)
            inner += lg.weights[k] * std::pow(1.0 + t * t + 2.0 * v_ * lg.nodes[k], e);
        total += gh.weights[j] * inner;
    }
    return std::log(total);
}

ShrinkageMarginal::ShrinkageMarginal(std::size_t p, double alpha, double v, double rho_max)
    : p_(p), alpha_(alpha), v_(v), rho_max_(rho_max) {
    if (p == 0 || !(v > 0) || !(rho_max > 0))
        throw InvalidArgument("shrinkage marginal needs p >= 1, v > 0, rho_max > 0");
    const auto steps = static_cast<std::size_t>(std::ceil(rho_max / 0.01));
    const double h = rho_max / double(steps);
    std::vector<double> values(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) values[k] = direct(h * double(k));
    auto impl = std::make_shared<Impl>();
    // log m is even in rho, so its slope at 0 vanishes.
    impl->spline = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        values.begin(), values.end(), 0.0, h, 0.0);
    impl_ = std::move(impl);
}

double ShrinkageMarginal::operator()(double rho) const {
    rho = std::abs(rho);
    if (rho > rho_max_) return direct(rho);
    return (*impl_->spline)(rho);
}

std::shared_ptr<const ShrinkageMarginal> ShrinkageMarginal::get(std::size_t p, double alpha,
                                                                double v, double rho_needed) {
    static std::mutex mu;
    static std::map<std::tuple<std::size_t, double, double>,
                    std::shared_ptr<const ShrinkageMarginal>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{p, alpha, v}];
    if (!slot || slot->rho_max() < rho_needed) {
        double r = 16.0;
        while (r < rho_needed) r *= 2.0;
        slot = std::make_shared<ShrinkageMarginal>(p, alpha, v, r);
    }
    return slot;
}

double expected_log_marginal(const ShrinkageMarginal& m, double c_norm, double s) {
    const Rule& gh = hermite_rule(20);
    double total = 0.0;
    if (m.dim() == 1) {
        for (std::size_t j = 0; j < gh.nodes.size(); ++j)
            total += gh.weights[j] * m(c_norm + s * gh.nodes[j]);
        return total;
    }
    const Rule& lg = laguerre_rule(m.dim(), 20);
    for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
        const double t = c_norm + s * gh.nodes[j];
        double inner = 0.0;
        for (std::size_t k = 0; k < lg.nodes.size(); ++k)
            inner += lg.weights[k] * m(std::sqrt(t * t + 2.0 * s * s * lg.nodes[k]));
        total += gh.weights[j] * inner;
    }
    return total;
}

ShrinkagePredictive::ShrinkagePredictive(std::size_t p, double alpha, std::size_t n,
                                         const Vector& mean)
    : p_(p), alpha_(alpha), mean_(mean) {
    if (n == 0) throw InvalidArgument("shrinkage predictive needs n >= 1");
    const double nn = static_cast<double>(n);
    const double reach = mean.norm() + 10.0 / std::sqrt(nn) + 2.0;
    m_x_ = ShrinkageMarginal::get(p, alpha, 1.0 / nn, reach);
    m_w_ = ShrinkageMarginal::get(p, alpha, 1.0 / (nn + 1.0), reach);
    this->n = n;
    sum = mean * nn;
}

double ShrinkagePredictive::log_eval(ConstRef y) const {
    const double nn = static_cast<double>(n);
    const double var = 1.0 + 1.0 / nn;
    const Vector w = (nn * mean_ + y) / (nn + 1.0);
    const double pd = static_cast<double>(p_);
    const double log_normal =
        -0.5 * ((y - mean_).squaredNorm() / var + pd * (log_two_pi + std::log(var)));
    return log_normal + (*m_w_)(w.norm()) - (*m_x_)(mean_.norm());
}

std::optional<double> ShrinkagePredictive::exact_kl(const Family& f, const Vector& theta) const {
    if (!unit_normal_location(f) || f.param_dim() != p_) return std::nullopt;
    const double nn = static_cast<double>(n);
    const double var = 1.0 + 1.0 / nn;
    const double pd = static_cast<double>(p_);
    const double d_uniform =
        0.5 * (pd / var + (theta - mean_).squaredNorm() / var - pd + pd * std::log(var));
    const Vector c = (nn * mean_ + theta) / (nn + 1.0);
    return d_uniform + (*m_x_)(mean_.norm()) -
           expected_log_marginal(*m_w_, c.norm(), 1.0 / (nn + 1.0));
}

}  // namespace bayespred
