#include "bayespred/commands.hpp"

#include <cmath>
#include <sstream>

#include "bayespred/asymptotics.hpp"
#include "bayespred/cumulants.hpp"
#include "bayespred/error.hpp"
#include "bayespred/location.hpp"
#include "bayespred/prior.hpp"
#include "bayespred/risk.hpp"

namespace bayespred {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) out.push_back(cur);
    return out;
}

FamilyPtr family_of(const RunConfig& c) {
    if (c.family.empty()) throw InvalidArgument("--family is required");
    return make_family(c.family, hyper_of(c));
}

std::string where(const Vector& theta, std::size_t n) {
    std::string s = "theta=" + format_point(theta);
    if (n) s += ", n=" + std::to_string(n);
    return s;
}

// Runs f and rethrows its error with the grid point prefixed, keeping the type
// of the common failures.
template <class F>
void at_point(const std::string& point, F&& f) {
    try {
        f();
    } catch (const NoiseDominatedError& e) {
        throw NoiseDominatedError("at " + point + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError("at " + point + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument("at " + point + ": " + e.what());
    } catch (const Error& e) {
        throw Error("at " + point + ": " + e.what());
    }
}

std::uint64_t seed_of(const RunConfig& c) {
    if (!c.seed) throw InvalidArgument(c.subcommand + ": --seed is required for Monte Carlo runs");
    return *c.seed;
}

MonteCarloOptions mc_options(const RunConfig& c, unsigned threads) {
    MonteCarloOptions o;
    if (c.reps == 0) throw InvalidArgument(c.subcommand + ": --reps must be positive");
    o.reps = c.reps;
    o.seed = seed_of(c);
    o.threads = threads;
    return o;
}

Prior prior_of(const std::string& spec, const Family& family) {
    try {
        return parse_prior(spec, family);
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        if (msg.find(prior_grammar) != std::string::npos) throw;
        throw InvalidArgument(msg + "; " + prior_grammar);
    }
}

}  // namespace

std::string format_point(const Vector& v) {
    std::string s;
    for (Eigen::Index a = 0; a < v.size(); ++a) s += (a ? "," : "") + format_number(v(a));
    return s;
}

bool needs_seed(const RunConfig& c) {
    if (c.subcommand == "risk") return !c.exact;
    if (c.subcommand == "dominance") return true;
    if (c.subcommand == "identities") return c.method == "monte-carlo";
    if (c.subcommand == "expansion-check") {
        const auto f = family_of(c);
        return f->support() != Support::discrete || c.method == "monte-carlo";
    }
    return false;
}

Table cmd_risk(const RunConfig& c, unsigned threads) {
    const FamilyPtr family = family_of(c);
    if (c.theta.empty()) throw InvalidArgument("risk: --theta is required");
    if (c.n.empty()) throw InvalidArgument("risk: --n is required");
    const auto thetas = parse_theta(c.theta, *family);
    const auto sizes = parse_sizes(c.n);

    std::vector<std::string> specs = c.procedures;
    if (specs.empty()) specs.push_back(c.prior.empty() ? "jeffreys" : c.prior);
    std::vector<Procedure> procs;
    for (const auto& s : specs) {
        try {
            procs.push_back(parse_procedure(s, *family));
        } catch (const InvalidArgument& e) {
            const std::string msg = e.what();
            if (msg.find(prior_grammar) != std::string::npos) throw;
            throw InvalidArgument(msg + "; " + prior_grammar);
        }
    }
    const MonteCarloOptions mc = c.exact ? MonteCarloOptions{} : mc_options(c, threads);

    Table t;
    t.columns = {"theta", "n", "procedure", "value", "std_error", "method", "seed",
                 "reps", "excluded_fraction", "first_order"};
    const double p = double(family->param_dim());
    for (std::size_t n : sizes) {
        std::ostringstream note;
        note << "first-order reference p/(2n) = " << format_number(p / (2.0 * double(n)))
             << " at n = " << n << ", p = " << family->param_dim();
        t.notes.push_back(note.str());
    }
    for (const Vector& theta : thetas)
        for (std::size_t n : sizes)
            for (const Procedure& proc : procs)
                at_point(where(theta, n) + ", procedure=" + proc.label(), [&] {
                    const RiskEstimate r = c.exact ? risk_exact(*family, theta, n, proc)
                                                   : risk_mc(*family, theta, n, proc, mc);
                    t.add({format_point(theta), static_cast<long long>(n), proc.label(), r.value,
                           r.std_error, to_string(r.method), static_cast<long long>(r.seed),
                           static_cast<long long>(r.reps), r.excluded_fraction,
                           p / (2.0 * double(n))});
                });
    return t;
}

Table cmd_alpha_search(const RunConfig& c) {
    const FamilyPtr family = family_of(c);
    const auto grid = c.theta.empty() ? default_theta_grid(*family) : parse_theta(c.theta, *family);
    AlphaSolveResult res;
    at_point("family=" + family->name(), [&] { res = alpha_solve(*family, grid); });

    Table t;
    t.columns = {"quantity", "alpha", "level", "range"};
    t.notes.push_back("G(alpha) averaged over " + std::to_string(grid.size()) +
                      " theta points: a = " + format_number(res.quadratic.a) +
                      ", b = " + format_number(res.quadratic.b) +
                      ", c = " + format_number(res.quadratic.c));
    t.notes.push_back("curvature check " + format_number(res.curvature_check) + " vs a = " +
                      format_number(res.quadratic.a));
    if (res.all_constant) t.notes.push_back("G is theta-free for every alpha");
    if (res.degenerate) t.notes.push_back("degenerate: G does not depend on alpha quadratically");
    t.add({std::string("curvature"), NAN, res.quadratic.a, std::abs(res.curvature_check - res.quadratic.a)});
    if (res.argmin_alpha) {
        double lo = INFINITY, hi = -INFINITY;
        for (double a : res.argmin_per_theta) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        t.add({std::string("argmin"), *res.argmin_alpha, res.quadratic(*res.argmin_alpha), hi - lo});
    }
    for (std::size_t k = 0; k < res.constant_risk_alphas.size(); ++k)
        t.add({std::string("constant-risk"), res.constant_risk_alphas[k], res.constant_levels[k],
               res.constant_ranges[k]});
    for (double r : res.roots) t.add({std::string("zero-of-mean-G"), r, 0.0, NAN});
    return t;
}

Table cmd_expansion_check(const RunConfig& c, unsigned threads) {
    const FamilyPtr family = family_of(c);
    if (c.theta.empty()) throw InvalidArgument("expansion-check: --theta is required");
    const auto thetas = parse_theta(c.theta, *family);
    const auto sizes = parse_sizes(c.n.empty() ? "20,40,80,160" : c.n);
    if (sizes.size() < 4) throw InvalidArgument("expansion-check: the n grid needs at least 4 sizes");
    for (std::size_t k = 1; k < sizes.size(); ++k)
        if (sizes[k] <= sizes[k - 1]) throw InvalidArgument("expansion-check: n grid must increase");

    ExtrapolationOptions opt;
    const bool discrete = family->support() == Support::discrete;
    if (!c.method.empty() && c.method != "exact" && c.method != "monte-carlo")
        throw InvalidArgument("expansion-check: --method must be exact or monte-carlo");
    opt.force_monte_carlo = c.method == "monte-carlo";
    if (!discrete || opt.force_monte_carlo) opt.mc = mc_options(c, threads);

    std::vector<std::string> specs = split_list(c.prior.empty() ? "jeffreys" : c.prior);
    const CouplingVariant variant =
        c.printed_coupling ? CouplingVariant::printed : CouplingVariant::corrected;
    const std::size_t p = family->param_dim();

    Table t;
    t.columns = {"theta", "prior", "analytic_g", "extrapolated_g", "relative_gap", "method",
                 "fit_residual", "pass"};
    t.notes.push_back("n grid " + (c.n.empty() ? std::string("20,40,80,160") : c.n) +
                      "; pass means relative gap < 0.05 (denominator floored at 0.05 p/4)");
    if (c.printed_coupling) t.notes.push_back("analytic G uses the printed h-coupling (diagnostics)");
    for (const Vector& theta : thetas)
        for (const auto& spec : specs) {
            const Prior prior = prior_of(spec, *family);
            at_point(where(theta, 0) + ", prior=" + spec, [&] {
                const ExpansionResult an = p == 1 ? g_term_1d(*family, prior, theta, variant)
                                                  : g_term_general(*family, prior, theta);
                const ExtrapolationResult ex =
                    excess_risk_extrapolate(*family, prior, theta, sizes, opt);
                const double gap = relative_gap(an.g_theta, ex.g, p);
                t.add({format_point(theta), prior.label, an.g_theta, ex.g, gap,
                       to_string(ex.method), ex.max_residual, gap < 0.05});
            });
        }
    return t;
}

Table cmd_dominance(const RunConfig& c, unsigned threads) {
    const auto p = static_cast<std::size_t>(c.dim);
    if (c.n.empty()) throw InvalidArgument("dominance: --n is required");
    const auto sizes = parse_sizes(c.n);
    if (sizes.size() != 1) throw InvalidArgument("dominance: --n takes a single size");
    const MonteCarloOptions mc = mc_options(c, threads);

    std::vector<Vector> probes;
    if (c.theta.empty()) {
        probes.push_back(Vector::Zero(c.dim));
        Vector far = Vector::Zero(c.dim);
        far(0) = 3.0;
        probes.push_back(far);
    } else {
        FamilyHyper h;
        h.dim = c.dim;
        probes = parse_theta(c.theta, *make_family("mvn-location", h));
    }
    const DominanceVerdict v = dominance_experiment(p, c.shrink_alpha, probes, sizes[0], mc);

    Table t;
    t.columns = {"mu", "delta", "std_error", "ci_low", "ci_high", "risk_shrink", "risk_uniform",
                 "exact_gap", "prediction", "excluded_fraction"};
    t.notes.push_back("verdict " + to_string(v.verdict));
    t.notes.push_back(std::string("no uniform gap: ") + (v.no_uniform_gap ? "true" : "false"));
    for (const auto& r : v.rows)
        t.add({format_point(r.mu), r.diff.delta, r.diff.std_error, r.diff.ci_low(),
               r.diff.ci_high(), r.diff.risk_a, r.diff.risk_b, r.exact_gap, r.prediction,
               r.diff.excluded_fraction});
    return t;
}

Table cmd_laplacian_scan(const RunConfig& c) {
    if (c.dim < 1) throw InvalidArgument("laplacian-scan: --dim must be >= 1");
    const auto p = static_cast<std::size_t>(c.dim);
    const double rmax = c.radius_max > 0 ? c.radius_max : 10.0;
    const std::size_t grid = c.grid_size ? c.grid_size : 101;
    const LaplacianReport rep = superharmonic_scan(p, c.shrink_alpha, rmax, grid);

    Table t;
    t.columns = {"r", "delta_g", "delta_g_over_g", "fd_delta_g"};
    std::ostringstream range;
    range << "admissible range 1 - p/2 < alpha < 0 with 1 - p/2 = " << format_number(1.0 - double(p) / 2.0);
    if (!shrinkage_range_nonempty(p)) range << ": empty for p = " << p;
    t.notes.push_back(range.str());
    t.notes.push_back(std::string("alpha in range: ") + (rep.in_range ? "true" : "false"));
    t.notes.push_back("sign summary " + to_string(rep.sign_summary) + ", tail sign " +
                      std::to_string(rep.tail_sign) + ", sup delta_g/g " +
                      format_number(rep.sup_delta_over_g));
    t.notes.push_back("finite-difference max relative error " + format_number(rep.fd_max_rel_error));
    for (std::size_t k = 0; k < rep.radii.size(); ++k)
        t.add({rep.radii[k], rep.delta_g[k], rep.delta_g_over_g[k], rep.fd_delta_g[k]});
    return t;
}

Table cmd_identities(const RunConfig& c, unsigned threads) {
    const FamilyPtr family = family_of(c);
    const auto thetas = c.theta.empty() ? family->reference_points() : parse_theta(c.theta, *family);
    CumulantOptions opt;
    if (c.method == "monte-carlo") {
        opt.method = CumulantMethod::monte_carlo;
        opt.reps = c.reps ? c.reps : opt.reps;
        opt.seed = seed_of(c);
        opt.threads = threads;
    } else if (!c.method.empty() && c.method != "analytic") {
        throw InvalidArgument("identities: --method must be analytic or monte-carlo");
    }
    Table t;
    t.columns = {"theta", "order", "max_abs", "max_z", "scale", "pass"};
    bool all = true;
    for (const Vector& theta : thetas)
        at_point(where(theta, 0), [&] {
            const IdentityReport rep = identities_check(*family, theta, opt);
            for (const auto& r : rep.identities) {
                t.add({format_point(theta), static_cast<long long>(r.order), r.max_abs, r.max_z,
                       r.scale, r.pass});
                all = all && r.pass;
            }
        });
    t.notes.push_back(std::string("all identities pass: ") + (all ? "true" : "false"));
    return t;
}

Table run_command(const RunConfig& c, unsigned threads) {
    if (c.subcommand == "risk") return cmd_risk(c, threads);
    if (c.subcommand == "alpha-search") return cmd_alpha_search(c);
    if (c.subcommand == "expansion-check") return cmd_expansion_check(c, threads);
    if (c.subcommand == "dominance") return cmd_dominance(c, threads);
    if (c.subcommand == "laplacian-scan") return cmd_laplacian_scan(c);
    if (c.subcommand == "identities") return cmd_identities(c, threads);
    throw InvalidArgument("unknown subcommand '" + c.subcommand + "'");
}

}  // namespace bayespred
