#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bayespred/family.hpp"
#include "bayespred/prior.hpp"
#include "bayespred/risk.hpp"

namespace bayespred {

/// Linear map to coordinates in which the Fisher information is the
/// identity: with F = L L^T (Cholesky), nu = L^T mu and z = L^{-1} x.
struct Whitening {
    Matrix lower;  // L
    Vector param(const Vector& mu) const { return lower.transpose() * mu; }
    Vector data(const Vector& x) const { return lower.triangularView<Eigen::Lower>().solve(x); }
    /// Gradient and Hessian of a function of mu, re-expressed in nu.
    Vector grad(const Vector& g_mu) const;
    Matrix hess(const Matrix& h_mu) const;
};

Whitening whitening(const Family& family);

/// Delta g / g in whitened coordinates for the prior h = g^2, g = sqrt(h):
/// (1/2) tr(h_nu nu) + (1/4) |h_nu|^2. The prior term of the risk expansion
/// for a location family is twice this.
double prior_term_location(const Family& family, const Prior& prior, const Vector& mu);

/// Largest admissible open interval (1 - p/2, 0) for the shrinkage exponent;
/// empty for p <= 2.
bool shrinkage_range_nonempty(std::size_t p);
bool shrinkage_alpha_in_range(std::size_t p, double alpha);

/// Delta g for g = (1 + r^2)^alpha as a function of r.
double shrinkage_laplacian(std::size_t p, double alpha, double r);
double shrinkage_g(double alpha, double r);

enum class SignSummary { all_negative, all_nonpositive, mixed, all_nonnegative, all_positive };
std::string to_string(SignSummary s);

struct LaplacianReport {
    std::size_t p = 0;
    double alpha = 0.0;
    bool in_range = false;  // 1 - p/2 < alpha < 0
    std::vector<double> radii;
    std::vector<double> delta_g, delta_g_over_g, fd_delta_g;
    double fd_max_rel_error = 0.0;
    SignSummary sign_summary = SignSummary::mixed;
    double sup_delta_over_g = 0.0;
    /// Sign of Delta g for all large r: sign of alpha (p + 2 alpha - 2).
    int tail_sign = 0;
};

/// Radial grid [0, radius_max] with grid_size points; the finite-difference
/// Laplacian is taken along e_1 with step max(1e-4, 1e-4 (1 + r)).
LaplacianReport superharmonic_scan(std::size_t p, double alpha, double radius_max,
                                   std::size_t grid_size);

/// Finite-difference Laplacian of g at mu (all coordinates).
double fd_laplacian(const std::function<double(ConstRef)>& g, const Vector& mu);

struct GapProbe {
    std::vector<double> radii;
    std::vector<double> value;  // max over probe directions of Delta g / g at each radius
    double sup = 0.0;           // over all radii
    double last = 0.0;          // at the largest radius
};

/// Delta g / g for the prior along the coordinate axes (both signs) and the
/// diagonal, at each radius.
GapProbe uniform_gap_probe(const Family& family, const Prior& prior,
                           const std::vector<double>& radii);

struct DominanceRow {
    Vector mu;
    RiskDifference diff;        // shrinkage minus uniform, paired MC
    double exact_gap = 0.0;     // deterministic value of the same difference
    double prediction = 0.0;    // 2 (Delta g / g) / n^2
};

enum class Verdict { dominates, dominated, inconclusive };
std::string to_string(Verdict v);

struct DominanceVerdict {
    std::size_t p = 0;
    double alpha = 0.0;
    std::size_t n = 0;
    std::vector<DominanceRow> rows;
    Verdict verdict = Verdict::inconclusive;
    /// No c > 0 with Delta g / g <= -c everywhere: sup over a far radius
    /// schedule is within 1e-3 of 0.
    bool no_uniform_gap = false;
};

/// Paired Monte Carlo risk differences predictive(g^2) - predictive(uniform)
/// for N(mu, I_p) data at each probe. Requires 1 - p/2 < alpha < 0 and
/// probes that include the origin and a point with |mu| >= 3.
DominanceVerdict dominance_experiment(std::size_t p, double alpha,
                                      const std::vector<Vector>& probes, std::size_t n,
                                      const MonteCarloOptions& options);

/// Exact risk(g^2) - risk(uniform) for N(mu, I_p) data:
/// E log m(Xbar; 1/n) - E log m(W; 1/(n+1)), Xbar ~ N(mu, I/n), W ~ N(mu, I/(n+1)).
double exact_shrinkage_gap(std::size_t p, double alpha, std::size_t n, const Vector& mu);

}  // namespace bayespred
