#include "bayespred/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "bayespred/error.hpp"
#include "families/families.hpp"

namespace bayespred {

const std::vector<CoefficientEntry>& likelihood_coefficients() {
    using P = Partition;
    static const std::vector<CoefficientEntry> table{
        // Quartic: contracted with L^{-1}_{ir} L^{-1}_{js}.
        {0.5, {{P::ij_k_l, "ijrs"}}, "E[l_ij l_r l_s]"},
        {0.75, {{P::ij_kl, "ijrs"}}, "E[l_ij l_rs]"},
        {1.0, {{P::ijk_l, "irjs"}}, "E[l_irj l_s]"},
        {0.5, {{P::ijkl, "irjs"}}, "E[l_irjs]"},
        // Cubic: contracted with L^{-1}_{ir} L^{-1}_{js} L^{-1}_{kt}. In one
        // dimension the two halves of the first pair merge into L_{1,2}^2.
        {0.5, {{P::ij_k, "rji"}, {P::ij_k, "stk"}}, "L_{i,rj} L_{k,st}"},
        {0.5, {{P::ij_k, "jki"}, {P::ij_k, "rst"}}, "L_{i,jk} L_{t,rs}"},
        {1.0 / 6.0, {{P::ijk, "ijk"}, {P::i_j_k, "rst"}}, "L_{ijk} L_{r,s,t}"},
        {1.0, {{P::ijk, "irj"}, {P::ij_k, "stk"}}, "L_{irj} L_{k,st}"},
        {1.5, {{P::ijk, "ijk"}, {P::ij_k, "str"}}, "L_{ijk} L_{r,st}"},
        {0.5, {{P::ijk, "irj"}, {P::ijk, "skt"}}, "L_{irj} L_{skt}"},
        {7.0 / 12.0, {{P::ijk, "ijk"}, {P::ijk, "rst"}}, "L_{ijk} L_{rst}"},
    };
    return table;
}

namespace {

constexpr std::string_view letters = "irjskt";

double contract_entry(const CumulantTensors& c, const CoefficientEntry& e) {
    const std::size_t p = c.dim;
    const Matrix& fi = c.fisher_inv;
    const bool cubic = std::any_of(e.factors.begin(), e.factors.end(), [](const TensorFactor& f) {
        return f.indices.find_first_of("kt") != std::string_view::npos;
    });
    const std::size_t nl = cubic ? 6 : 4;

    // Resolve each factor to (tensor, letter positions).
    struct Resolved {
        const Tensor* t;
        std::array<std::size_t, 4> pos;
        std::size_t rank;
    };
    std::vector<Resolved> res;
    for (const TensorFactor& f : e.factors) {
        Resolved r{&c[f.partition], {}, f.indices.size()};
        for (std::size_t q = 0; q < r.rank; ++q) r.pos[q] = letters.find(f.indices[q]);
        res.push_back(r);
    }

    std::array<std::size_t, 6> idx{};
    double total = 0.0;
    const std::size_t count = static_cast<std::size_t>(std::pow(double(p), double(nl)));
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rem = flat;
        for (std::size_t q = nl; q-- > 0;) {
            idx[q] = rem % p;
            rem /= p;
        }
        double w = fi(idx[0], idx[1]) * fi(idx[2], idx[3]);
        if (cubic) w *= fi(idx[4], idx[5]);
        if (w == 0.0) continue;
        double prod = w;
        for (const Resolved& r : res) {
            std::size_t off = 0;
            for (std::size_t q = 0; q < r.rank; ++q) off = off * p + idx[r.pos[q]];
            prod *= r.t->data()[off];
        }
        total += prod;
    }
    return e.weight * total;
}

/// C_i = L^{-1}_{ir} L^{-1}_{js} (L_{rj,s} + L_{rjs}).
Vector coupling_vector(const CumulantTensors& c) {
    const std::size_t p = c.dim;
    const Matrix& fi = c.fisher_inv;
    const Tensor& a = c[Partition::ij_k];
    const Tensor& t3 = c[Partition::ijk];
    Vector out = Vector::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t s = 0; s < p; ++s)
                    out(i) += fi(i, r) * fi(j, s) * (a(r, j, s) + t3(r, j, s));
    return out;
}

double prior_part(const Matrix& fi, const Vector& coupling, const Vector& g, const Matrix& h) {
    return coupling.dot(g) + (fi.cwiseProduct(h + 0.5 * g * g.transpose())).sum();
}

}  // namespace

ExpansionResult g_term_from_tensors(const CumulantTensors& c, const Vector& h_grad,
                                    const Matrix& h_hess, const Vector& j_grad,
                                    const Matrix& j_hess) {
    const std::size_t p = c.dim;
    double base = -double(p) / 4.0;
    for (const CoefficientEntry& e : likelihood_coefficients()) base += contract_entry(c, e);
    const Vector cv = coupling_vector(c);
    const Matrix& fi = c.fisher_inv;

    ExpansionResult out;
    out.dim = p;
    out.prior_free = base;
    out.prior_dependent = prior_part(fi, cv, h_grad, h_hess);
    out.g_theta = base + out.prior_dependent;
    out.likelihood_term = base + prior_part(fi, cv, j_grad, j_hess);
    // Invariant form: with D = h - J,
    //   L^{-1}_{ir}(D_ir + D_i D_r / 2) + (C_i + L^{-1}_{ir} J_r) D_i.
    const Vector d = h_grad - j_grad;
    const Matrix dh = h_hess - j_hess;
    out.prior_term = (fi.cwiseProduct(dh + 0.5 * d * d.transpose())).sum() +
                     (cv + fi * j_grad).dot(d);
    return out;
}

ExpansionResult g_term_general(const Family& family, const Prior& prior, const Vector& theta) {
    const CumulantTensors c = cumulants(family, theta);
    return g_term_from_tensors(c, prior.log_grad(theta), prior.log_hess(theta),
                               family.jeffreys_log_grad(theta), family.jeffreys_log_hess(theta));
}

ExpansionResult g_term_1d(const Family& family, const Prior& prior, const Vector& theta,
                          CouplingVariant variant) {
    if (family.param_dim() != 1)
        throw InvalidArgument(family.name() +
                              " has more than one parameter; use the general expansion");
    const CumulantTensors c = cumulants(family, theta);
    const double l11 = c[Partition::i_j](0, 0);
    const double l12 = c[Partition::ij_k](0, 0, 0);
    const double l3 = c[Partition::ijk](0, 0, 0);
    const double l111 = c[Partition::i_j_k](0, 0, 0);
    const double l112 = c[Partition::ij_k_l](0, 0, 0, 0);
    const double l22 = c[Partition::ij_kl](0, 0, 0, 0);
    const double l13 = c[Partition::ijk_l](0, 0, 0, 0);
    const double l4 = c[Partition::ijkl](0, 0, 0, 0);
    const double inv = 1.0 / l11;
    const bool corrected = variant == CouplingVariant::corrected;

    const double quartic = inv * inv * (0.5 * l112 + 0.75 * l22 + l13 + 0.5 * l4);
    const double cubic = inv * inv * inv *
                         (l12 * l12 + l3 * l111 / 6.0 + 2.5 * l3 * l12 + 13.0 / 12.0 * l3 * l3);
    const double coupling = (corrected ? inv * inv : inv) * (l12 + l3);
    auto dependent = [&](double h1, double h2) {
        return coupling * h1 + inv * (h2 + 0.5 * h1 * h1);
    };

    const double h1 = prior.log_grad(theta)(0), h2 = prior.log_hess(theta)(0, 0);
    const double j1 = family.jeffreys_log_grad(theta)(0);
    const double j2 = family.jeffreys_log_hess(theta)(0, 0);

    ExpansionResult out;
    out.dim = 1;
    out.prior_free = quartic + cubic - (corrected ? 0.25 : 0.0);
    out.prior_dependent = dependent(h1, h2);
    out.g_theta = out.prior_free + out.prior_dependent;
    out.likelihood_term = out.prior_free + dependent(j1, j2);
    out.prior_term = out.prior_dependent - dependent(j1, j2);
    return out;
}

// ---- extrapolation ----------------------------------------------------------------

double relative_gap(double analytic, double extrapolated, std::size_t p) {
    const double floor = 0.05 * double(p) / 4.0;
    return std::abs(analytic - extrapolated) / std::max(std::abs(analytic), floor);
}

ExtrapolationResult excess_risk_extrapolate(const Family& family, const Prior& prior,
                                            const Vector& theta,
                                            const std::vector<std::size_t>& n_grid,
                                            const ExtrapolationOptions& options) {
    if (n_grid.size() < 4) throw InvalidArgument("extrapolation needs at least 4 sample sizes");
    for (std::size_t k = 1; k < n_grid.size(); ++k)
        if (n_grid[k] <= n_grid[k - 1])
            throw InvalidArgument("extrapolation sample sizes must be increasing");
    const bool exact = family.support() == Support::discrete && !options.force_monte_carlo;
    const Procedure proc = Procedure::bayes(prior);
    const double p = double(family.param_dim());

    ExtrapolationResult out;
    out.method = exact ? RiskMethod::exact : RiskMethod::monte_carlo;
    out.n = n_grid;
    for (std::size_t n : n_grid) {
        const RiskEstimate r = exact ? risk_exact(family, theta, n, proc)
                                     : risk_mc(family, theta, n, proc, options.mc);
        const double nn = double(n);
        out.risk.push_back(r.value);
        out.std_error.push_back(r.std_error);
        out.scaled.push_back(nn * nn * (r.value - p / (2.0 * nn) + p / (4.0 * nn * nn)));
    }

    // Weighted least squares for y = G + c3 x, x = 1/n. Exact risks weight
    // each size by n, favouring the sizes where higher-order terms are
    // smallest; Monte Carlo risks use inverse variances of y.
    const std::size_t m = n_grid.size();
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double nn = double(n_grid[k]);
        const double x = 1.0 / nn;
        double w = nn;
        if (!exact) {
            const double se = nn * nn * out.std_error[k];
            w = se > 0 ? 1.0 / (se * se) : 1.0;
        }
        sw += w;
        sx += w * x;
        sy += w * out.scaled[k];
        sxx += w * x * x;
        sxy += w * x * out.scaled[k];
    }
    const double det = sw * sxx - sx * sx;
    out.c3 = (sw * sxy - sx * sy) / det;
    out.g = (sy - out.c3 * sx) / sw;
    for (std::size_t k = 0; k < m; ++k)
        out.max_residual = std::max(
            out.max_residual, std::abs(out.scaled[k] - out.g - out.c3 / double(n_grid[k])));

    std::ostringstream diag;
    diag << "n, risk, se, n^2-scaled:";
    for (std::size_t k = 0; k < m; ++k)
        diag << " (" << n_grid[k] << ", " << out.risk[k] << ", " << out.std_error[k] << ", "
             << out.scaled[k] << ")";

    if (!exact) {
        const double target = 0.1 * std::max(std::abs(out.g), p / 4.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double nn = double(n_grid[k]);
            if (nn * nn * out.std_error[k] > target)
                throw NoiseDominatedError(
                    "Monte Carlo error exceeds 10% of the n^-2 term at n = " +
                    std::to_string(n_grid[k]) + "; increase reps. " + diag.str());
        }
    }
    for (std::size_t k = 1; k < m; ++k)
        if (!(out.risk[k] < out.risk[k - 1])) {
            if (!exact) throw NoiseDominatedError("risk not decreasing in n; " + diag.str());
            throw Error("exact risk not decreasing in n; " + diag.str());
        }
    return out;
}

// ---- alpha class ----------------------------------------------------------------

double g_alpha(const Family& family, double alpha, const Vector& theta) {
    return g_term_general(family, alpha_prior(family, alpha), theta).g_theta;
}

std::vector<Vector> default_theta_grid(const Family& family, std::size_t count) {
    std::vector<Vector> grid;
    auto frac = [count](std::size_t k) { return count == 1 ? 0.5 : double(k) / double(count - 1); };
    if (family.kind() == FamilyKind::mvn_scale) {
        const auto& m = dynamic_cast<const detail::MvnScale&>(family);
        for (std::size_t k = 0; k < count; ++k) {
            const double s = 0.25 * std::pow(16.0, frac(k));
            const double rho = 0.4 * std::sin(double(k) + 1.0);
            Matrix v = Matrix::Identity(m.dim(), m.dim());
            for (int a = 0; a + 1 < m.dim(); ++a) v(a, a + 1) = v(a + 1, a) = rho;
            grid.push_back(m.to_theta(s * v));
        }
        return grid;
    }
    const auto coords = family.coordinates();
    for (std::size_t k = 0; k < count; ++k) {
        Vector t(static_cast<Eigen::Index>(coords.size()));
        for (std::size_t a = 0; a < coords.size(); ++a) {
            // Stagger coordinates so multi-parameter grids are not collinear.
            const double f = coords.size() > 1 && a % 2 == 1 ? 1.0 - frac(k) : frac(k);
            switch (coords[a]) {
                case Coordinate::real: t(a) = -2.0 + 4.0 * f; break;
                case Coordinate::positive: t(a) = 0.25 * std::pow(16.0, f); break;
                case Coordinate::negative: t(a) = -0.1 * std::pow(30.0, f); break;
            }
        }
        grid.push_back(t);
    }
    return grid;
}

namespace {

Quadratic fit_quadratic(double g0, double ghalf, double g1) {
    // Through (0, g0), (1/2, ghalf), (1, g1).
    Quadratic q;
    q.c = g0;
    q.a = 2.0 * (g1 - 2.0 * ghalf + g0);
    q.b = g1 - g0 - q.a;
    return q;
}

std::vector<double> real_roots(const Quadratic& q) {
    const double scale = std::max({std::abs(q.a), std::abs(q.b), std::abs(q.c)});
    if (scale == 0.0) return {};
    if (std::abs(q.a) <= 1e-12 * scale) {
        if (std::abs(q.b) <= 1e-12 * scale) return {};
        return {-q.c / q.b};
    }
    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    if (disc < 0) return {};
    const double sq = std::sqrt(disc);
    // Stable form.
    const double t = -0.5 * (q.b + std::copysign(sq, q.b));
    std::vector<double> r{t / q.a};
    if (t != 0.0) r.push_back(q.c / t);
    std::sort(r.begin(), r.end());
    if (r.size() == 2 && r[0] == r[1]) r.pop_back();
    return r;
}

double curvature_closed_form(const CumulantTensors& c) {
    const std::size_t p = c.dim;
    const Matrix& fi = c.fisher_inv;
    const Tensor& s3 = c[Partition::i_j_k];
    Vector u = Vector::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t s = 0; s < p; ++s) u(i) += fi(j, s) * s3(i, j, s);
    return 0.5 * u.dot(fi * u);
}

}  // namespace

AlphaSolveResult alpha_solve(const Family& family, const std::vector<Vector>& theta_grid) {
    if (theta_grid.empty()) throw InvalidArgument("alpha search needs a nonempty theta grid");
    AlphaSolveResult out;
    out.theta_grid = theta_grid;
    const Prior p0 = alpha_prior(family, 0.0), ph = alpha_prior(family, 0.5),
                p1 = alpha_prior(family, 1.0);
    for (const Vector& t : theta_grid) {
        const CumulantTensors c = cumulants(family, t);
        const Vector jg = family.jeffreys_log_grad(t);
        const Matrix jh = family.jeffreys_log_hess(t);
        auto g = [&](const Prior& pr) {
            return g_term_from_tensors(c, pr.log_grad(t), pr.log_hess(t), jg, jh).g_theta;
        };
        const Quadratic q = fit_quadratic(g(p0), g(ph), g(p1));
        out.per_theta.push_back(q);
        out.argmin_per_theta.push_back(q.a > 0 ? -q.b / (2.0 * q.a) : NAN);
        out.curvature_check += curvature_closed_form(c) / double(theta_grid.size());
    }
    for (const Quadratic& q : out.per_theta) {
        out.quadratic.a += q.a / double(theta_grid.size());
        out.quadratic.b += q.b / double(theta_grid.size());
        out.quadratic.c += q.c / double(theta_grid.size());
    }
    const Quadratic& avg = out.quadratic;
    const double scale = std::max({std::abs(avg.a), std::abs(avg.b), std::abs(avg.c), 1e-300});
    out.degenerate = std::abs(avg.a) <= 1e-12 * scale;
    if (!out.degenerate && avg.a > 0) out.argmin_alpha = -avg.b / (2.0 * avg.a);
    out.roots = real_roots(avg);

    // Constant risk: roots of G(alpha, theta_k) - G(alpha, theta_0).
    Quadratic widest;
    double widest_size = 0.0;
    for (std::size_t k = 1; k < out.per_theta.size(); ++k) {
        const Quadratic d{out.per_theta[k].a - out.per_theta[0].a,
                          out.per_theta[k].b - out.per_theta[0].b,
                          out.per_theta[k].c - out.per_theta[0].c};
        const double size = std::max({std::abs(d.a), std::abs(d.b), std::abs(d.c)});
        if (size > widest_size) {
            widest_size = size;
            widest = d;
        }
    }
    const double ref = std::max({std::abs(out.per_theta[0].a), std::abs(out.per_theta[0].b),
                                 std::abs(out.per_theta[0].c), 1.0});
    if (widest_size <= 1e-9 * ref) {
        out.all_constant = true;
        return out;
    }
    for (double alpha : real_roots(widest)) {
        const Prior pa = alpha_prior(family, alpha);
        double lo = INFINITY, hi = -INFINITY, sum = 0.0;
        for (const Vector& t : theta_grid) {
            const double g = g_term_general(family, pa, t).g_theta;
            lo = std::min(lo, g);
            hi = std::max(hi, g);
            sum += g;
        }
        const double level = sum / double(theta_grid.size());
        if (hi - lo < 1e-8 * (1.0 + std::abs(level))) {
            out.constant_risk_alphas.push_back(alpha);
            out.constant_levels.push_back(level);
            out.constant_ranges.push_back(hi - lo);
        }
    }
    return out;
}

MinimaxReport minimax_probe_1d(const Family& family, double alpha_star,
                               const std::vector<Vector>& theta_grid,
                               const std::vector<double>& comparison_alphas, double tolerance) {
    if (family.param_dim() != 1) throw InvalidArgument("minimax probe is one-dimensional");
    if (theta_grid.empty()) throw InvalidArgument("minimax probe needs a nonempty theta grid");
    MinimaxReport rep;
    rep.alpha_star = alpha_star;
    rep.tolerance = tolerance;
    const Prior star = alpha_prior(family, alpha_star);
    std::vector<double> g_star;
    for (const Vector& t : theta_grid) g_star.push_back(g_term_1d(family, star, t).g_theta);
    const auto [mn, mx] = std::minmax_element(g_star.begin(), g_star.end());
    rep.level_range = *mx - *mn;
    for (double g : g_star) rep.level += g / double(g_star.size());

    rep.star_is_minimax = true;
    for (double alpha : comparison_alphas) {
        const Prior pa = alpha_prior(family, alpha);
        MinimaxRow row;
        row.alpha = alpha;
        row.sup_g = -INFINITY;
        row.inf_g = INFINITY;
        row.below_everywhere = true;
        for (std::size_t k = 0; k < theta_grid.size(); ++k) {
            const double g = g_term_1d(family, pa, theta_grid[k]).g_theta;
            row.sup_g = std::max(row.sup_g, g);
            row.inf_g = std::min(row.inf_g, g);
            if (!(g < g_star[k])) row.below_everywhere = false;
        }
        row.sup_reaches_level = row.sup_g >= rep.level - tolerance;
        if (!row.sup_reaches_level) rep.star_is_minimax = false;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace bayespred
