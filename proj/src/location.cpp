#include "bayespred/location.hpp"

#include <cmath>
#include <sstream>

#include "bayespred/error.hpp"
#include "bayespred/predictive.hpp"

namespace bayespred {

Vector Whitening::grad(const Vector& g_mu) const {
    return lower.triangularView<Eigen::Lower>().solve(g_mu);
}

Matrix Whitening::hess(const Matrix& h_mu) const {
    const Matrix left = lower.triangularView<Eigen::Lower>().solve(h_mu);
    return lower.triangularView<Eigen::Lower>().solve(Matrix(left.transpose())).transpose();
}

Whitening whitening(const Family& family) {
    if (!family.is_location())
        throw InvalidArgument(family.name() + " is not a location family");
    const Vector origin = Vector::Zero(static_cast<Eigen::Index>(family.param_dim()));
    Eigen::LLT<Matrix> llt(family.fisher(origin));
    if (llt.info() != Eigen::Success)
        throw SingularFisherError(family.name() + ": Fisher information is not positive definite");
    return {llt.matrixL()};
}

double prior_term_location(const Family& family, const Prior& prior, const Vector& mu) {
    if (prior.log_density) {
        const double lh = prior.log_density(mu);
        if (!std::isfinite(lh)) throw DomainError("g must be positive at mu");
    }
    if (prior.g && !(prior.g(mu) > 0.0)) throw DomainError("g must be positive at mu");
    const Whitening w = whitening(family);
    const Vector g = w.grad(prior.log_grad(mu));
    const Matrix h = w.hess(prior.log_hess(mu));
    // g = exp(h / 2): g_ii / g = h_ii / 2 + h_i^2 / 4.
    return 0.5 * h.trace() + 0.25 * g.squaredNorm();
}

bool shrinkage_range_nonempty(std::size_t p) { return 1.0 - double(p) / 2.0 < 0.0; }

bool shrinkage_alpha_in_range(std::size_t p, double alpha) {
    return 1.0 - double(p) / 2.0 < alpha && alpha < 0.0;
}

double shrinkage_g(double alpha, double r) { return std::pow(1.0 + r * r, alpha); }

double shrinkage_laplacian(std::size_t p, double alpha, double r) {
    const double pd = double(p), r2 = r * r;
    return 2.0 * alpha * std::pow(1.0 + r2, alpha - 2.0) * (pd + (pd + 2.0 * alpha - 2.0) * r2);
}

std::string to_string(SignSummary s) {
    switch (s) {
        case SignSummary::all_negative: return "all-negative";
        case SignSummary::all_nonpositive: return "all-nonpositive";
        case SignSummary::mixed: return "mixed";
        case SignSummary::all_nonnegative: return "all-nonnegative";
        case SignSummary::all_positive: return "all-positive";
    }
    return "?";
}

double fd_laplacian(const std::function<double(ConstRef)>& g, const Vector& mu) {
    const double h = std::max(1e-4, 1e-4 * (1.0 + mu.norm()));
    const double g0 = g(mu);
    double total = 0.0;
    for (Eigen::Index a = 0; a < mu.size(); ++a) {
        Vector up = mu, down = mu;
        up(a) += h;
        down(a) -= h;
        total += (g(up) - 2.0 * g0 + g(down)) / (h * h);
    }
    return total;
}

LaplacianReport superharmonic_scan(std::size_t p, double alpha, double radius_max,
                                   std::size_t grid_size) {
    if (p == 0) throw InvalidArgument("dimension must be >= 1");
    if (grid_size < 2 || !(radius_max > 0))
        throw InvalidArgument("scan needs grid_size >= 2 and radius_max > 0");
    LaplacianReport rep;
    rep.p = p;
    rep.alpha = alpha;
    rep.in_range = shrinkage_alpha_in_range(p, alpha);
    const Prior prior = shrinkage_prior(p, alpha);
    std::size_t neg = 0, pos = 0, zero = 0;
    rep.sup_delta_over_g = -INFINITY;
    for (std::size_t k = 0; k < grid_size; ++k) {
        const double r = radius_max * double(k) / double(grid_size - 1);
        Vector mu = Vector::Zero(static_cast<Eigen::Index>(p));
        mu(0) = r;
        const double lap = prior.laplacian_g(mu);
        const double g = prior.g(mu);
        const double fd = fd_laplacian(prior.g, mu);
        rep.radii.push_back(r);
        rep.delta_g.push_back(lap);
        rep.delta_g_over_g.push_back(lap / g);
        rep.fd_delta_g.push_back(fd);
        if (lap != 0.0)
            rep.fd_max_rel_error = std::max(rep.fd_max_rel_error, std::abs(fd - lap) / std::abs(lap));
        rep.sup_delta_over_g = std::max(rep.sup_delta_over_g, lap / g);
        (lap < 0 ? neg : lap > 0 ? pos : zero)++;
    }
    if (pos == 0 && zero == 0) rep.sign_summary = SignSummary::all_negative;
    else if (pos == 0) rep.sign_summary = SignSummary::all_nonpositive;
    else if (neg == 0 && zero == 0) rep.sign_summary = SignSummary::all_positive;
    else if (neg == 0) rep.sign_summary = SignSummary::all_nonnegative;
    else rep.sign_summary = SignSummary::mixed;
    const double tail = alpha * (double(p) + 2.0 * alpha - 2.0);
    rep.tail_sign = tail < 0 ? -1 : tail > 0 ? 1 : 0;
    return rep;
}

GapProbe uniform_gap_probe(const Family& family, const Prior& prior,
                           const std::vector<double>& radii) {
    const auto p = static_cast<Eigen::Index>(family.param_dim());
    std::vector<Vector> dirs;
    for (Eigen::Index a = 0; a < p; ++a) {
        Vector e = Vector::Zero(p);
        e(a) = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
    }
    dirs.push_back(Vector::Constant(p, 1.0 / std::sqrt(double(p))));
    GapProbe out;
    out.sup = -INFINITY;
    for (double r : radii) {
        double best = -INFINITY;
        for (const Vector& d : dirs) best = std::max(best, prior_term_location(family, prior, r * d));
        out.radii.push_back(r);
        out.value.push_back(best);
        out.sup = std::max(out.sup, best);
    }
    if (!out.value.empty()) out.last = out.value.back();
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::dominates: return "dominates";
        case Verdict::dominated: return "dominated";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

double exact_shrinkage_gap(std::size_t p, double alpha, std::size_t n, const Vector& mu) {
    if (n == 0) throw InvalidArgument("n must be >= 1");
    const double nn = double(n);
    const double reach = mu.norm() + 10.0 / std::sqrt(nn) + 2.0;
    const auto mx = ShrinkageMarginal::get(p, alpha, 1.0 / nn, reach);
    const auto mw = ShrinkageMarginal::get(p, alpha, 1.0 / (nn + 1.0), reach);
    return expected_log_marginal(*mx, mu.norm(), std::sqrt(1.0 / nn)) -
           expected_log_marginal(*mw, mu.norm(), std::sqrt(1.0 / (nn + 1.0)));
}

DominanceVerdict dominance_experiment(std::size_t p, double alpha,
                                      const std::vector<Vector>& probes, std::size_t n,
                                      const MonteCarloOptions& options) {
    if (!shrinkage_range_nonempty(p)) {
        std::ostringstream msg;
        msg << "empty range for the shrinkage exponent at p = " << p << ": need 1 - p/2 = "
            << 1.0 - double(p) / 2.0 << " < alpha < 0";
        throw InvalidArgument(msg.str());
    }
    if (!shrinkage_alpha_in_range(p, alpha)) {
        std::ostringstream msg;
        msg << "shrinkage exponent " << alpha << " outside (" << 1.0 - double(p) / 2.0 << ", 0)";
        throw InvalidArgument(msg.str());
    }
    bool origin = false, far = false;
    for (const Vector& mu : probes) {
        if (static_cast<std::size_t>(mu.size()) != p)
            throw InvalidArgument("probe dimension does not match p");
        origin = origin || mu.norm() == 0.0;
        far = far || mu.norm() >= 3.0;
    }
    if (!origin || !far)
        throw InvalidArgument("probes must include the origin and a point with |mu| >= 3");

    FamilyHyper hyper;
    hyper.dim = static_cast<int>(p);
    const FamilyPtr family = make_family("mvn-location", hyper);
    const Prior shrink = shrinkage_prior(p, alpha);
    const Procedure a = Procedure::bayes(shrink);
    const Procedure b = Procedure::bayes(uniform_prior(p));

    DominanceVerdict out;
    out.p = p;
    out.alpha = alpha;
    out.n = n;
    bool all_below = true, all_above = true;
    for (const Vector& mu : probes) {
        DominanceRow row;
        row.mu = mu;
        row.diff = risk_difference(*family, mu, n, a, b, options);
        row.exact_gap = exact_shrinkage_gap(p, alpha, n, mu);
        row.prediction = 2.0 * prior_term_location(*family, shrink, mu) / (double(n) * double(n));
        all_below = all_below && row.diff.ci_high() < 0.0;
        all_above = all_above && row.diff.ci_low() > 0.0;
        out.rows.push_back(std::move(row));
    }
    out.verdict = all_below ? Verdict::dominates : all_above ? Verdict::dominated
                                                             : Verdict::inconclusive;
    const GapProbe gap = uniform_gap_probe(*family, shrink, {10.0, 100.0, 1000.0});
    out.no_uniform_gap = std::abs(gap.last) < 1e-3 && gap.sup < 0.0;
    return out;
}

}  // namespace bayespred
