#include "doctest.h"

#include <cmath>

#include "bayespred/asymptotics.hpp"
#include "bayespred/error.hpp"
#include "bayespred/location.hpp"
#include "support.hpp"

using namespace bayespred;

namespace {

Vector random_mu(std::size_t p, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> z(0.0, scale);
    Vector mu(static_cast<Eigen::Index>(p));
    for (auto& x : mu) x = z(rng);
    return mu;
}

}  // namespace

TEST_CASE("whitening maps the Fisher information to the identity") {
    FamilyHyper h;
    h.dim = 2;
    Matrix cov(2, 2);
    cov << 2.0, 0.6, 0.6, 1.0;
    h.covariance = cov;
    const auto f = make_family("mvn-location", h);
    const Whitening w = whitening(*f);
    const Matrix fisher = f->fisher(Vector::Zero(2));
    CHECK((w.lower * w.lower.transpose()).isApprox(fisher, 1e-12));
    CHECK_THROWS_AS(whitening(*make_family("poisson")), InvalidArgument);
}

TEST_CASE("Laplacian closed form against finite differences") {
    std::mt19937_64 rng(12);
    for (std::size_t p : {1u, 2u, 3u, 5u}) {
        const Prior s = shrinkage_prior(p, -0.25);
        for (int k = 0; k < 100; ++k) {
            const Vector mu = random_mu(p, rng, 1.5);
            const double lap = s.laplacian_g(mu);
            CHECK(lap == doctest::Approx(shrinkage_laplacian(p, -0.25, mu.norm())).epsilon(1e-12));
            const double fd = fd_laplacian(s.g, mu);
            CHECK_MESSAGE(std::abs(fd - lap) <= 1e-5 * std::max(std::abs(lap), 1e-3), "p=" << p);
        }
    }
    CHECK(shrinkage_laplacian(3, -0.25, 0.0) == doctest::Approx(-1.5));
}

TEST_CASE("prior term equals twice Delta g / g and matches the general expansion") {
    std::mt19937_64 rng(13);
    for (std::size_t p : {1u, 3u}) {
        const auto f = make_family(p == 1 ? "normal-location" : "mvn-location", testing::dim_hyper(int(p)));
        const Prior s = shrinkage_prior(p, -0.25);
        for (int k = 0; k < 10; ++k) {
            const Vector mu = random_mu(p, rng, 2.0);
            const double dg = prior_term_location(*f, s, mu);
            CHECK(dg == doctest::Approx(s.laplacian_g(mu) / s.g(mu)).epsilon(1e-10));
            const auto r = g_term_general(*f, s, mu);
            CHECK(std::abs(2.0 * dg - r.prior_term) < 1e-6);
        }
        CHECK(prior_term_location(*f, uniform_prior(p), Vector::Zero(int(p))) == 0.0);
    }
}

TEST_CASE("admissible exponent range") {
    CHECK_FALSE(shrinkage_range_nonempty(1));
    CHECK_FALSE(shrinkage_range_nonempty(2));
    CHECK(shrinkage_range_nonempty(3));
    CHECK(shrinkage_alpha_in_range(3, -0.25));
    CHECK_FALSE(shrinkage_alpha_in_range(3, -0.5));  // open at 1 - p/2
    CHECK_FALSE(shrinkage_alpha_in_range(3, 0.0));
    CHECK_FALSE(shrinkage_alpha_in_range(2, -0.1));
}

TEST_CASE("superharmonic scan") {
    const auto in = superharmonic_scan(3, -0.25, 1000.0, 2001);
    CHECK(in.in_range);
    CHECK(in.sign_summary == SignSummary::all_negative);
    CHECK(in.tail_sign == -1);
    CHECK(in.sup_delta_over_g < 0.0);
    CHECK(in.fd_max_rel_error < 1e-4);
    const auto out = superharmonic_scan(3, -0.75, 10.0, 101);
    CHECK_FALSE(out.in_range);
    CHECK(out.sign_summary == SignSummary::mixed);
    CHECK(out.tail_sign == 1);
    for (std::size_t p = 3; p <= 6; ++p)
        for (double a : {-0.05, -0.3}) {
            if (!shrinkage_alpha_in_range(p, a)) continue;
            CHECK(superharmonic_scan(p, a, 1000.0, 501).sign_summary == SignSummary::all_negative);
        }
    CHECK_THROWS_AS(superharmonic_scan(3, -0.25, 10.0, 1), InvalidArgument);
    CHECK(to_string(SignSummary::all_nonpositive) == "all-nonpositive");
}

TEST_CASE("no uniform gap") {
    const auto f = make_family("mvn-location", testing::dim_hyper(3));
    const auto probe = uniform_gap_probe(*f, shrinkage_prior(3, -0.25), {1.0, 10.0, 100.0});
    CHECK(probe.sup < 0.0);
    CHECK(std::abs(probe.last) < 1e-3);
    // Analytic limit: 2 alpha (p + (p + 2 alpha - 2) r^2) / (1 + r^2)^2.
    const double r = 100.0;
    CHECK(probe.last == doctest::Approx(-0.5 * (3 + 0.5 * r * r) / std::pow(1 + r * r, 2)).epsilon(1e-9));
}

TEST_CASE("dominance experiment input checks") {
    MonteCarloOptions o;
    o.reps = 100;
    o.seed = 1;
    const std::vector<Vector> good{Vector::Zero(3), Vector::Unit(3, 0) * 3.0};
    CHECK_THROWS_AS(dominance_experiment(2, -0.1, {Vector::Zero(2), Vector::Unit(2, 0) * 3.0}, 25, o),
                    InvalidArgument);
    CHECK_THROWS_AS(dominance_experiment(3, -0.6, good, 25, o), InvalidArgument);
    CHECK_THROWS_AS(dominance_experiment(3, -0.25, {Vector::Zero(3)}, 25, o), InvalidArgument);
    try {
        dominance_experiment(1, -0.1, {Vector::Zero(1), Vector::Constant(1, 3.0)}, 25, o);
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("empty range") != std::string::npos);
    }
}

TEST_CASE("small dominance run: direction, exact gap and sign transfer") {
    MonteCarloOptions o;
    o.reps = 20000;
    o.seed = 11;
    const std::vector<Vector> probes{Vector::Zero(3), Vector::Unit(3, 0) * 3.0};
    const auto v = dominance_experiment(3, -0.25, probes, 25, o);
    REQUIRE(v.rows.size() == 2);
    CHECK(v.verdict == Verdict::dominates);
    CHECK(v.no_uniform_gap);
    for (const auto& row : v.rows) {
        CHECK(std::abs(row.diff.delta - row.exact_gap) <= 4 * row.diff.std_error);
        if (std::abs(row.prediction) > 3 * row.diff.std_error)
            CHECK((row.diff.delta < 0) == (row.prediction < 0));
    }
    // Far from the origin the gap vanishes with Delta g / g.
    CHECK(std::abs(exact_shrinkage_gap(3, -0.25, 25, Vector::Unit(3, 0) * 50.0)) < 1e-6);
}

TEST_CASE("uniform prior has constant risk in mu") {
    const auto f = make_family("mvn-location", testing::dim_hyper(3));
    MonteCarloOptions o;
    o.reps = 5000;
    o.seed = 2;
    const Procedure u = Procedure::bayes(uniform_prior(3));
    Vector far(3);
    far << 5.0, -2.0, 1.0;
    const auto a = risk_mc(*f, Vector::Zero(3), 10, u, o);
    const auto b = risk_mc(*f, far, 10, u, o);
    CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.std_error, b.std_error));
    CHECK(std::abs(a.value - 1.5 * std::log(1.1)) <= 3 * a.std_error);
}
