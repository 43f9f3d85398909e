#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayespred/family.hpp"
#include "bayespred/predictive.hpp"
#include "bayespred/prior.hpp"

namespace bayespred {

/// What produces the density for the next observation.
struct Procedure {
    enum class Kind { predictive, estimative, truth };
    Kind kind = Kind::estimative;
    std::optional<Prior> prior;

    static Procedure bayes(Prior p) { return {Kind::predictive, std::move(p)}; }
    static Procedure plug_in() { return {Kind::estimative, std::nullopt}; }
    /// f_hat = f_theta itself; its risk is zero.
    static Procedure oracle() { return {Kind::truth, std::nullopt}; }

    std::string label() const;
};

/// "estimative" | "truth" | "predictive:<prior spec>" | a bare prior spec.
Procedure parse_procedure(const std::string& spec, const Family& family);

enum class RiskMethod { exact, monte_carlo, extrapolated };
std::string to_string(RiskMethod m);

struct RiskEstimate {
    double value = 0.0;      // nats
    double std_error = 0.0;  // 0 for exact
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    RiskMethod method = RiskMethod::exact;
    /// Probability (exact) or fraction of replicates (MC) dropped because
    /// the procedure had no density: boundary MLE or improper posterior.
    /// The value is the risk conditional on the retained samples.
    double excluded_fraction = 0.0;
    double truncation = 0.0;  // bound on neglected tail mass effects (exact)
    std::string label;
};

struct RiskDifference {
    double delta = 0.0;  // risk(A) - risk(B)
    double std_error = 0.0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::string label_a, label_b;
    double risk_a = 0.0, risk_b = 0.0;
    double excluded_fraction = 0.0;
    double ci_low() const { return delta - 1.959963984540054 * std_error; }
    double ci_high() const { return delta + 1.959963984540054 * std_error; }
};

struct MonteCarloOptions {
    std::size_t reps = 100000;
    std::uint64_t seed = 0;
    unsigned threads = 1;  // 0 = hardware concurrency; results do not depend on it
};

/// Builds the procedure's density from a sufficient statistic. Returns
/// nullptr when the procedure is undefined for this sample.
PredictivePtr make_density(const Family& family, const Vector& theta, const Procedure& proc,
                           const SufficientStat& stat);

/// Exact risk for discrete families: expectation over the distribution of
/// the sum, truncated when the remaining mass is below 1e-12.
RiskEstimate risk_exact(const Family& family, const Vector& theta, std::size_t n,
                        const Procedure& proc);

RiskEstimate risk_mc(const Family& family, const Vector& theta, std::size_t n,
                     const Procedure& proc, const MonteCarloOptions& options);

/// Paired comparison with common random numbers: both procedures see the
/// same samples.
RiskDifference risk_difference(const Family& family, const Vector& theta, std::size_t n,
                               const Procedure& a, const Procedure& b,
                               const MonteCarloOptions& options);

/// Exact risk difference for discrete families, conditional on the sums
/// where both procedures have a density.
RiskDifference risk_difference_exact(const Family& family, const Vector& theta, std::size_t n,
                                     const Procedure& a, const Procedure& b);

}  // namespace bayespred
