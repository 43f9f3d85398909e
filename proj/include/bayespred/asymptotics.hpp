#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bayespred/cumulants.hpp"
#include "bayespred/family.hpp"
#include "bayespred/prior.hpp"
#include "bayespred/risk.hpp"

namespace bayespred {

/// Risk to second order: p/(2n) - p/(4n^2) + G(theta)/n^2.
struct ExpansionResult {
    std::size_t dim = 1;
    double g_theta = 0.0;
    double likelihood_term = 0.0;  // G evaluated at h = Jeffreys
    double prior_term = 0.0;       // G - likelihood_term
    // One-dimensional bracket only: parts that do / do not involve h.
    double prior_free = 0.0;
    double prior_dependent = 0.0;

    double first_order(std::size_t n) const { return double(dim) / (2.0 * double(n)); }
    double second_order_const(std::size_t n) const {
        return -double(dim) / (4.0 * double(n) * double(n));
    }
    double total(std::size_t n) const {
        return first_order(n) + second_order_const(n) + g_theta / (double(n) * double(n));
    }
};

/// Coupling between h_1 and (L_{1,2} + L_3) in the one-dimensional bracket.
/// `corrected` uses the squared inverse information and the -1/4 constant;
/// `printed` keeps the single inverse and no constant (diagnostics only).
enum class CouplingVariant { corrected, printed };

ExpansionResult g_term_1d(const Family& family, const Prior& prior, const Vector& theta,
                          CouplingVariant variant = CouplingVariant::corrected);

/// Any dimension: likelihood term plus prior term.
ExpansionResult g_term_general(const Family& family, const Prior& prior, const Vector& theta);

/// Same, from precomputed tensors and prior derivatives (h_i, h_ij) and the
/// Jeffreys derivatives (J_i, J_ij).
ExpansionResult g_term_from_tensors(const CumulantTensors& c, const Vector& h_grad,
                                    const Matrix& h_hess, const Vector& j_grad,
                                    const Matrix& j_hess);

/// One factor of a contracted product: a partition tensor and the letters
/// naming its indices. Letters pair up through the inverse information:
/// (i,r), (j,s), (k,t).
struct TensorFactor {
    Partition partition;
    std::string_view indices;
};

struct CoefficientEntry {
    double weight;
    std::vector<TensorFactor> factors;
    std::string_view note;
};

/// The likelihood-only part of G as data: quartic entries contract with
/// L^{-1}_{ir} L^{-1}_{js}, cubic entries with L^{-1}_{ir} L^{-1}_{js} L^{-1}_{kt}.
const std::vector<CoefficientEntry>& likelihood_coefficients();

// ---- finite-n oracle ------------------------------------------------------------

struct ExtrapolationOptions {
    /// Exact risks for discrete families unless forced to Monte Carlo.
    bool force_monte_carlo = false;
    MonteCarloOptions mc;
};

struct ExtrapolationResult {
    double g = 0.0;   // fitted coefficient of 1/n^2
    double c3 = 0.0;  // fitted coefficient of 1/n^3
    double max_residual = 0.0;
    RiskMethod method = RiskMethod::exact;
    std::vector<std::size_t> n;
    std::vector<double> risk, std_error, scaled;  // scaled = n^2 (R - p/2n + p/4n^2)
};

/// Fits n^2 (R(n) - p/(2n) + p/(4n^2)) = G + c3/n over n_grid by weighted
/// least squares. Throws NoiseDominatedError when Monte Carlo error is more
/// than 10% of the n^-2 term, and Error when risks are not decreasing in n.
ExtrapolationResult excess_risk_extrapolate(const Family& family, const Prior& prior,
                                            const Vector& theta,
                                            const std::vector<std::size_t>& n_grid,
                                            const ExtrapolationOptions& options = {});

/// Relative gap between an analytic and an extrapolated G, with the
/// denominator floored at 5% of p/4 so that G near 0 is not divided by ~0.
double relative_gap(double analytic, double extrapolated, std::size_t p);

// ---- alpha class ----------------------------------------------------------------

struct Quadratic {
    double a = 0.0, b = 0.0, c = 0.0;
    double operator()(double x) const { return (a * x + b) * x + c; }
};

struct AlphaSolveResult {
    std::vector<Vector> theta_grid;
    std::vector<Quadratic> per_theta;  // G(alpha) at each grid point
    Quadratic quadratic;               // grid average
    std::vector<double> roots;         // of the averaged quadratic
    std::optional<double> argmin_alpha;  // nullopt when a <= 0
    std::vector<double> argmin_per_theta;
    /// Curvature from the closed form 1/2 L^{-1}_{ir} u_i u_r with
    /// u_i = L^{-1}_{js} L_{i,j,s}, averaged; must equal quadratic.a.
    double curvature_check = 0.0;
    bool all_constant = false;  // every alpha gives a theta-free G
    std::vector<double> constant_risk_alphas;
    std::vector<double> constant_levels;
    std::vector<double> constant_ranges;  // range of G over the grid at each
    bool degenerate = false;              // a == 0
};

/// Default grid of 9 points: log-spaced on positive coordinates, linear on
/// real ones.
std::vector<Vector> default_theta_grid(const Family& family, std::size_t count = 9);

AlphaSolveResult alpha_solve(const Family& family, const std::vector<Vector>& theta_grid);

/// G at theta for the alpha-class prior.
double g_alpha(const Family& family, double alpha, const Vector& theta);

struct MinimaxRow {
    double alpha = 0.0;
    double sup_g = 0.0, inf_g = 0.0;
    bool below_everywhere = false;  // G_alpha < G_alpha* at every grid point
    bool sup_reaches_level = false; // sup G_alpha >= level - tol
};

struct MinimaxReport {
    double alpha_star = 0.0;
    double level = 0.0;        // mean of G_alpha* over the grid
    double level_range = 0.0;  // max - min of G_alpha* over the grid
    std::vector<MinimaxRow> rows;
    bool star_is_minimax = false;  // no comparison has a lower sup
    double tolerance = 1e-6;
};

MinimaxReport minimax_probe_1d(const Family& family, double alpha_star,
                               const std::vector<Vector>& theta_grid,
                               const std::vector<double>& comparison_alphas,
                               double tolerance = 1e-6);

}  // namespace bayespred
