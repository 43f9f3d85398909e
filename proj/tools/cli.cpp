#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "bayespred/commands.hpp"
#include "bayespred/error.hpp"
#include "bayespred/prior.hpp"

using namespace bayespred;

namespace {

struct Flags {
    unsigned threads = 1;
};

void add_family(CLI::App* sub, RunConfig& c) {
    sub->add_option("--family", c.family, "poisson | bernoulli-canonical | negbinomial-canonical | "
                                          "normal-location | normal-location-scale | mvn-location | mvn-scale")
        ->required();
    sub->add_option("--r", c.r, "negative binomial size");
    sub->add_option("--sigma", c.sigma, "normal-location scale");
    sub->add_option("--dim", c.dim, "dimension for mvn families");
}

void add_common(CLI::App* sub, RunConfig& c, Flags& f, bool random) {
    sub->add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output", c.output, "output file (default $BAYESPRED_OUTPUT_DIR/<subcommand>.<format>, else stdout)");
    if (random) {
        sub->add_option("--seed", c.seed, "RNG seed (required for Monte Carlo runs)");
        sub->add_option("--threads", f.threads, "worker threads, 0 = all cores; results do not depend on it");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictive density risk: expansions, priors and experiments"};
    app.require_subcommand(1);
    RunConfig c;
    Flags f;

    auto* risk = app.add_subcommand("risk", "KL risk of predictive or estimative densities");
    add_family(risk, c);
    risk->add_option("--theta", c.theta, "point(s): ';' between points, ',' between components, or lo:hi:count")->required();
    risk->add_option("--n", c.n, "sample size(s)")->required();
    risk->add_option("--prior", c.prior, prior_grammar);
    risk->add_option("--procedure", c.procedures, "estimative | truth | predictive:<prior> (repeatable)");
    risk->add_flag("--exact", c.exact, "exact expectation (discrete families)");
    risk->add_option("--reps", c.reps, "Monte Carlo replicates");
    add_common(risk, c, f, true);

    auto* alpha = app.add_subcommand("alpha-search", "minimum-risk and constant-risk exponents of the alpha class");
    add_family(alpha, c);
    alpha->add_option("--theta", c.theta, "theta grid (default: 9 points)");
    add_common(alpha, c, f, false);

    auto* exp = app.add_subcommand("expansion-check", "analytic G against the finite-n extrapolation");
    add_family(exp, c);
    exp->add_option("--theta", c.theta, "point(s)")->required();
    exp->add_option("--prior", c.prior, "comma-separated prior specs (default jeffreys)");
    exp->add_option("--n", c.n, "increasing sizes (default 20,40,80,160)");
    exp->add_option("--method", c.method, "exact | monte-carlo (continuous families always use monte-carlo)");
    exp->add_option("--reps", c.reps, "Monte Carlo replicates");
    exp->add_flag("--printed-coupling", c.printed_coupling, "use the uncorrected h-coupling (diagnostics)");
    add_common(exp, c, f, true);

    auto* dom = app.add_subcommand("dominance", "shrinkage prior against the uniform prior, N(mu, I)");
    dom->add_option("--dim", c.dim, "dimension p")->required();
    dom->add_option("--shrink-alpha", c.shrink_alpha, "exponent of g = (1 + |mu|^2)^alpha")->required();
    dom->add_option("--n", c.n, "sample size")->required();
    dom->add_option("--theta", c.theta, "probe means (default origin and 3 e_1)");
    dom->add_option("--reps", c.reps, "Monte Carlo replicates")->required();
    add_common(dom, c, f, true);

    auto* lap = app.add_subcommand("laplacian-scan", "sign of the Laplacian of g along a ray");
    lap->add_option("--dim", c.dim, "dimension p")->required();
    lap->add_option("--shrink-alpha", c.shrink_alpha, "exponent of g")->required();
    lap->add_option("--radius-max", c.radius_max, "largest radius (default 10)");
    lap->add_option("--grid-size", c.grid_size, "radial points (default 101)");
    add_common(lap, c, f, false);

    auto* ids = app.add_subcommand("identities", "likelihood identity residuals");
    add_family(ids, c);
    ids->add_option("--theta", c.theta, "point(s) (default: reference points)");
    ids->add_option("--method", c.method, "analytic | monte-carlo")
        ->check(CLI::IsMember({"analytic", "monte-carlo"}));
    ids->add_option("--reps", c.reps, "Monte Carlo draws (default 1000000)");
    add_common(ids, c, f, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (auto* sub : app.get_subcommands()) c.subcommand = sub->get_name();
    // Defaults that matter for the result are written into the config.
    if (c.subcommand == "risk" && c.reps == 0 && !c.exact) c.reps = 100000;
    if (c.subcommand == "identities" && c.method == "monte-carlo" && c.reps == 0) c.reps = 1000000;

    try {
        if (needs_seed(c) && !c.seed) {
            std::cerr << "error: " << c.subcommand << " draws random numbers; pass --seed\n";
            return 2;
        }
        const Table table = run_command(c, f.threads);
        const std::string path = output_path(c);
        if (path.empty()) {
            write_table(std::cout, c, table);
        } else {
            std::ofstream out(path, std::ios::binary);
            if (!out) throw Error("cannot open output file " + path);
            write_table(out, c, table);
            if (!out) throw Error("write failed for " + path);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
