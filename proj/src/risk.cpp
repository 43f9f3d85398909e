#include "bayespred/risk.hpp"

#include <cmath>
#include <sstream>

#include "bayespred/error.hpp"
#include "bayespred/kl.hpp"
#include "bayespred/rng.hpp"

namespace bayespred {

std::string Procedure::label() const {
    switch (kind) {
        case Kind::predictive: return "predictive:" + prior->label;
        case Kind::estimative: return "estimative";
        case Kind::truth: return "truth";
    }
    return "?";
}

Procedure parse_procedure(const std::string& spec, const Family& family) {
    if (spec == "estimative") return Procedure::plug_in();
    if (spec == "truth") return Procedure::oracle();
    const std::string prefix = "predictive:";
    if (spec.rfind(prefix, 0) == 0) return Procedure::bayes(parse_prior(spec.substr(prefix.size()), family));
    return Procedure::bayes(parse_prior(spec, family));
}

std::string to_string(RiskMethod m) {
    switch (m) {
        case RiskMethod::exact: return "exact";
        case RiskMethod::monte_carlo: return "monte-carlo";
        case RiskMethod::extrapolated: return "extrapolated";
    }
    return "?";
}

namespace {

class TruthDensity final : public PredictiveDensity {
public:
    TruthDensity(FamilyPtr f, Vector theta) : f_(std::move(f)), theta_(std::move(theta)) {
        prior_label = "truth";
    }
    double log_eval(ConstRef y) const override { return f_->log_density(y, theta_); }

private:
    FamilyPtr f_;
    Vector theta_;
};

SufficientStat discrete_stat(std::size_t n, double sum) {
    SufficientStat s;
    s.n = n;
    s.sum = Vector::Constant(1, sum);
    // Only the sum enters the likelihood of the discrete families.
    s.scatter = Matrix::Constant(1, 1, NAN);
    return s;
}

/// Inner KL, or NaN when the procedure produced no density.
double inner_kl(const Family& family, const Vector& theta, const std::vector<Node>* truth,
                const Procedure& proc, const SufficientStat& stat) {
    const PredictivePtr f = make_density(family, theta, proc, stat);
    if (!f) return NAN;
    if (auto exact = f->exact_kl(family, theta)) return *exact;
    if (truth) return kl_discrete(*truth, *f).value;
    return kl_divergence(family, theta, *f).value;
}

void check_exclusions(double fraction, const std::string& what) {
    if (fraction > 0.5) {
        std::ostringstream msg;
        msg << what << ": " << fraction * 100.0
            << "% of samples excluded (boundary MLE or improper posterior); estimate meaningless";
        throw ExclusionError(msg.str());
    }
}

struct Simulation {
    std::vector<std::vector<double>> values;  // [procedure][rep], NaN = excluded
};

Simulation simulate(const Family& family, const Vector& theta, std::size_t n,
                    const std::vector<const Procedure*>& procs, const MonteCarloOptions& opt) {
    if (opt.reps < 100) throw InvalidArgument("Monte Carlo risk needs at least 100 replicates");
    if (n == 0) throw InvalidArgument("sample size n must be >= 1");
    family.require_interior(theta);
    std::vector<Node> truth_nodes;
    const bool discrete = family.support() == Support::discrete;
    if (discrete) truth_nodes = family.enumerate_support(theta, kl_tail);

    Simulation sim;
    sim.values.assign(procs.size(), std::vector<double>(opt.reps, NAN));
    const std::size_t blocks = block_count(opt.reps);
    for_each_block(blocks, resolve_threads(opt.threads), [&](std::size_t b) {
        Engine rng = make_engine(opt.seed, Stream::risk, b);
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(opt.reps, begin + block_size);
        SampleBatch batch;
        for (std::size_t rep = begin; rep < end; ++rep) {
            family.sample(theta, rng, n, batch);
            const SufficientStat stat = family.sufficient_stat(batch);
            for (std::size_t k = 0; k < procs.size(); ++k)
                sim.values[k][rep] = inner_kl(family, theta, discrete ? &truth_nodes : nullptr,
                                              *procs[k], stat);
        }
    });
    return sim;
}

struct Summary {
    double mean = 0.0, se = 0.0;
    std::size_t used = 0;
};

Summary summarize(const std::vector<double>& v) {
    std::vector<double> kept;
    kept.reserve(v.size());
    for (double x : v)
        if (!std::isnan(x)) kept.push_back(x);
    Summary s;
    s.used = kept.size();
    if (kept.empty()) return s;
    s.mean = pairwise_sum(kept) / double(kept.size());
    for (double& x : kept) x = (x - s.mean) * (x - s.mean);
    if (kept.size() > 1) s.se = std::sqrt(pairwise_sum(kept) / double(kept.size() - 1) / double(kept.size()));
    return s;
}

}  // namespace

PredictivePtr make_density(const Family& family, const Vector& theta, const Procedure& proc,
                           const SufficientStat& stat) {
    switch (proc.kind) {
        case Procedure::Kind::truth:
            return std::make_shared<TruthDensity>(family.shared_from_this(), theta);
        case Procedure::Kind::estimative: {
            auto e = estimative(family, stat);
            if (e->boundary()) return nullptr;
            return e;
        }
        case Procedure::Kind::predictive:
            try {
                return bayes_predictive(family, *proc.prior, stat);
            } catch (const DivergentPosteriorError&) {
                return nullptr;
            }
    }
    return nullptr;
}

RiskEstimate risk_exact(const Family& family, const Vector& theta, std::size_t n,
                        const Procedure& proc) {
    if (family.support() != Support::discrete)
        throw InvalidArgument(family.name() +
                              ": exact risk needs a discrete family; use the Monte Carlo risk");
    if (n == 0) throw InvalidArgument("sample size n must be >= 1");
    family.require_interior(theta);
    const auto truth = family.enumerate_support(theta, kl_tail);
    const auto sums = family.sum_distribution(theta, n, kl_tail);
    double total = 0.0, kept = 0.0, excluded = 0.0, worst = 0.0;
    std::vector<double> terms;
    for (const Node& s : sums) {
        if (s.weight <= 0.0) continue;
        const double kl = inner_kl(family, theta, &truth, proc, discrete_stat(n, s.x(0)));
        if (std::isnan(kl)) {
            excluded += s.weight;
            continue;
        }
        terms.push_back(s.weight * kl);
        kept += s.weight;
        worst = std::max(worst, kl);
    }
    total = pairwise_sum(terms);
    RiskEstimate out;
    out.method = RiskMethod::exact;
    out.label = proc.label();
    out.excluded_fraction = excluded;
    check_exclusions(excluded, out.label);
    out.value = total / kept;
    out.truncation = std::max(0.0, 1.0 - kept - excluded) * std::max(1.0, worst);
    return out;
}

RiskEstimate risk_mc(const Family& family, const Vector& theta, std::size_t n,
                     const Procedure& proc, const MonteCarloOptions& options) {
    const Simulation sim = simulate(family, theta, n, {&proc}, options);
    const Summary s = summarize(sim.values[0]);
    RiskEstimate out;
    out.method = RiskMethod::monte_carlo;
    out.label = proc.label();
    out.reps = options.reps;
    out.seed = options.seed;
    out.excluded_fraction = 1.0 - double(s.used) / double(options.reps);
    check_exclusions(out.excluded_fraction, out.label);
    out.value = s.mean;
    out.std_error = s.se;
    return out;
}

RiskDifference risk_difference(const Family& family, const Vector& theta, std::size_t n,
                               const Procedure& a, const Procedure& b,
                               const MonteCarloOptions& options) {
    const Simulation sim = simulate(family, theta, n, {&a, &b}, options);
    std::vector<double> va = sim.values[0], vb = sim.values[1], diff(options.reps);
    for (std::size_t r = 0; r < options.reps; ++r) {
        if (std::isnan(va[r]) || std::isnan(vb[r])) va[r] = vb[r] = NAN;
        diff[r] = va[r] - vb[r];
    }
    const Summary sd = summarize(diff), sa = summarize(va), sb = summarize(vb);
    RiskDifference out;
    out.label_a = a.label();
    out.label_b = b.label();
    out.reps = options.reps;
    out.seed = options.seed;
    out.excluded_fraction = 1.0 - double(sd.used) / double(options.reps);
    check_exclusions(out.excluded_fraction, out.label_a + " vs " + out.label_b);
    out.delta = sd.mean;
    out.std_error = sd.se;
    out.risk_a = sa.mean;
    out.risk_b = sb.mean;
    return out;
}

RiskDifference risk_difference_exact(const Family& family, const Vector& theta, std::size_t n,
                                     const Procedure& a, const Procedure& b) {
    if (family.support() != Support::discrete)
        throw InvalidArgument(family.name() +
                              ": exact risk needs a discrete family; use the Monte Carlo risk");
    if (n == 0) throw InvalidArgument("sample size n must be >= 1");
    family.require_interior(theta);
    const auto truth = family.enumerate_support(theta, kl_tail);
    const auto sums = family.sum_distribution(theta, n, kl_tail);
    // Paired like the Monte Carlo version: a sum is dropped for both
    // procedures when either has no density there.
    std::vector<double> ta, tb;
    double kept = 0.0, excluded = 0.0;
    for (const Node& s : sums) {
        if (s.weight <= 0.0) continue;
        const SufficientStat stat = discrete_stat(n, s.x(0));
        const double ka = inner_kl(family, theta, &truth, a, stat);
        const double kb = inner_kl(family, theta, &truth, b, stat);
        if (std::isnan(ka) || std::isnan(kb)) {
            excluded += s.weight;
            continue;
        }
        ta.push_back(s.weight * ka);
        tb.push_back(s.weight * kb);
        kept += s.weight;
    }
    RiskDifference out;
    out.label_a = a.label();
    out.label_b = b.label();
    out.excluded_fraction = excluded;
    check_exclusions(excluded, out.label_a + " vs " + out.label_b);
    out.risk_a = pairwise_sum(ta) / kept;
    out.risk_b = pairwise_sum(tb) / kept;
    out.delta = out.risk_a - out.risk_b;
    return out;
}

}  // namespace bayespred
