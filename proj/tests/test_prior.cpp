#include "doctest.h"

#include <cmath>

#include "bayespred/error.hpp"
#include "bayespred/location.hpp"
#include "bayespred/prior.hpp"
#include "support.hpp"

using namespace bayespred;
using testing::random_interior;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

// Central differences of the log density against the analytic h_i and h_ij.
void check_differential_form(const Prior& pr, const Vector& t, const std::string& what) {
    const double h = 1e-5;
    const Vector g = pr.grad(t);
    const Matrix H = pr.hess(t);
    for (Eigen::Index a = 0; a < t.size(); ++a) {
        Vector up = t, dn = t;
        up(a) += h;
        dn(a) -= h;
        const double fd = (pr.log_density(up) - pr.log_density(dn)) / (2 * h);
        CHECK_MESSAGE(std::abs(fd - g(a)) <= 1e-6 * std::max(1.0, std::abs(g(a))), what);
        const Vector fdg = (pr.grad(up) - pr.grad(dn)) / (2 * h);
        for (Eigen::Index b = 0; b < t.size(); ++b)
            CHECK_MESSAGE(std::abs(fdg(b) - H(a, b)) <= 1e-6 * std::max(1.0, std::abs(H(a, b))), what);
    }
    CHECK_MESSAGE((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-12, what);
}

}  // namespace

TEST_CASE("Jeffreys priors") {
    SUBCASE("poisson is theta^(-1/2)") {
        const auto f = make_family("poisson");
        const Prior j = jeffreys(*f);
        CHECK(j.shape == PriorShape::jeffreys);
        CHECK(j.properness == Properness::improper);
        for (double t : {0.3, 1.0, 5.0}) {
            CHECK(j.log_density(v1(t)) - j.log_density(v1(1.0)) == doctest::Approx(-0.5 * std::log(t)));
            CHECK(j.grad(v1(t))(0) == doctest::Approx(-0.5 / t));
        }
    }
    SUBCASE("normal location is constant") {
        const auto f = make_family("normal-location");
        const Prior j = jeffreys(*f);
        CHECK(j.grad(v1(2.0))(0) == 0.0);
        CHECK(j.log_density(v1(2.0)) == j.log_density(v1(-7.0)));
    }
    SUBCASE("normal location-scale is sigma^-3 in (mu, sigma^2)") {
        const auto f = make_family("normal-location-scale");
        const Prior j = jeffreys(*f);
        Vector a(2), b(2);
        a << 0.3, 1.0;
        b << -1.0, 4.0;  // sigma = 2
        CHECK(j.log_density(b) - j.log_density(a) == doctest::Approx(-3.0 * std::log(2.0)));
    }
    SUBCASE("bernoulli Jeffreys is proper") {
        CHECK(jeffreys(*make_family("bernoulli-canonical")).properness == Properness::proper);
    }
}

TEST_CASE("alpha class") {
    const auto f = make_family("poisson");
    SUBCASE("poisson members are theta^(alpha - 1)") {
        for (double alpha : {0.2, 1.0, 1.7}) {
            const Prior p = alpha_prior(*f, alpha);
            REQUIRE(p.alpha.has_value());
            CHECK(*p.alpha == alpha);
            for (double t : {0.5, 2.0, 9.0})
                CHECK(p.log_density(v1(t)) - p.log_density(v1(1.0)) ==
                      doctest::Approx((alpha - 1.0) * std::log(t)));
        }
    }
    SUBCASE("alpha = 1/2 coincides with Jeffreys for poisson") {
        const Prior a = alpha_prior(*f, 0.5), j = jeffreys(*f);
        for (double t : {0.1, 1.0, 30.0}) {
            CHECK(a.grad(v1(t))(0) == doctest::Approx(j.grad(v1(t))(0)).epsilon(1e-14));
            CHECK(a.grad(v1(t))(0) == doctest::Approx(-1.0 / (2.0 * t)).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(alpha_prior(*f, NAN), InvalidArgument);
}

TEST_CASE("alpha priors satisfy the defining gradient condition at 50 random points") {
    std::mt19937_64 rng(42);
    for (const auto& nf : testing::seven_families()) {
        const auto f = testing::build(nf);
        for (double alpha : {0.0, 0.5, 2.0 / 3.0, 1.0, 1.3}) {
            const Prior p = alpha_prior(*f, alpha);
            for (int k = 0; k < 50; ++k) {
                const Vector t = random_interior(*f, rng);
                const Vector r = alpha_condition_residual(*f, p, t);
                CHECK_MESSAGE(r.cwiseAbs().maxCoeff() < 1e-8 * (1.0 + p.grad(t).cwiseAbs().maxCoeff()),
                              nf.name << " alpha " << alpha);
            }
        }
    }
}

TEST_CASE("Jeffreys is the alpha = 1/2 member for every family") {
    std::mt19937_64 rng(7);
    for (const auto& nf : testing::seven_families()) {
        const auto f = testing::build(nf);
        const Prior a = alpha_prior(*f, 0.5), j = jeffreys(*f);
        for (int k = 0; k < 20; ++k) {
            const Vector t = random_interior(*f, rng);
            CHECK_MESSAGE((a.grad(t) - j.grad(t)).cwiseAbs().maxCoeff() < 1e-8, nf.name);
            CHECK_MESSAGE((a.hess(t) - j.hess(t)).cwiseAbs().maxCoeff() < 1e-8, nf.name);
        }
    }
}

TEST_CASE("differential form matches the density") {
    std::mt19937_64 rng(9);
    for (const auto& nf : testing::seven_families()) {
        const auto f = testing::build(nf);
        std::vector<Prior> priors{jeffreys(*f), alpha_prior(*f, 1.0), alpha_prior(*f, 1.3)};
        if (f->is_location()) priors.push_back(shrinkage_prior(f->param_dim(), -0.25));
        for (const Prior& pr : priors) {
            REQUIRE(pr.has_density());
            for (int k = 0; k < 5; ++k) check_differential_form(pr, random_interior(*f, rng), nf.name + " " + pr.label);
        }
    }
}

TEST_CASE("Jeffreys density is det^(1/2) of the Fisher information") {
    std::mt19937_64 rng(10);
    for (const auto& nf : testing::seven_families()) {
        const auto f = testing::build(nf);
        const Prior j = jeffreys(*f);
        const Vector t0 = f->reference_points()[0];
        for (int k = 0; k < 5; ++k) {
            const Vector t = random_interior(*f, rng);
            const double want = 0.5 * (std::log(f->fisher(t).determinant()) - std::log(f->fisher(t0).determinant()));
            CHECK_MESSAGE(j.log_density(t) - j.log_density(t0) == doctest::Approx(want).epsilon(1e-10), nf.name);
        }
    }
}

TEST_CASE("shrinkage prior") {
    const Prior s = shrinkage_prior(3, -0.25);
    CHECK(s.shape == PriorShape::shrinkage);
    const Vector zero = Vector::Zero(3);
    CHECK(s.grad(zero).norm() == 0.0);
    CHECK(s.laplacian_g(zero) == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(shrinkage_alpha_in_range(3, -0.25));
    // g^2 integrable iff 4 alpha < -p.
    CHECK(s.properness == Properness::improper);
    CHECK(shrinkage_prior(3, -1.0).properness == Properness::proper);
    Vector mu(3);
    mu << 0.5, -1.0, 2.0;
    const double r2 = mu.squaredNorm();
    CHECK(s.g(mu) == doctest::Approx(std::pow(1 + r2, -0.25)).epsilon(1e-14));
    CHECK(s.log_density(mu) == doctest::Approx(2 * -0.25 * std::log1p(r2)).epsilon(1e-14));
    CHECK(s.grad(mu).isApprox(4 * -0.25 * mu / (1 + r2), 1e-14));
}

TEST_CASE("uniform prior") {
    const Prior u = uniform_prior(2);
    Vector t(2);
    t << 3.0, -8.0;
    CHECK(u.density(t) == 1.0);
    CHECK(u.grad(t).norm() == 0.0);
    CHECK(u.hess(t).norm() == 0.0);
    CHECK(u.properness == Properness::improper);
    const auto f = make_family("mvn-location", testing::dim_hyper(2));
    CHECK(jeffreys(*f).grad(t).norm() == 0.0);
}

TEST_CASE("prior spec parsing") {
    const auto pois = make_family("poisson");
    CHECK(parse_prior("jeffreys", *pois).shape == PriorShape::jeffreys);
    const Prior a = parse_prior("alpha:1.3", *pois);
    CHECK(a.alpha.value() == doctest::Approx(1.3));
    CHECK(parse_prior("uniform", *pois).shape == PriorShape::flat);
    for (const char* bad : {"", "alpha:", "alpha:x", "beta:1", "shrink:-0.25", "jeffreys2"}) {
        try {
            parse_prior(bad, *pois);
            FAIL("accepted '" << bad << "'");
        } catch (const InvalidArgument& e) {
            // shrink fails on family grounds; the others must show the grammar.
            if (std::string(bad) != "shrink:-0.25")
                CHECK(std::string(e.what()).find(prior_grammar) != std::string::npos);
        }
    }
    const auto loc = make_family("mvn-location", testing::dim_hyper(3));
    const Prior s = parse_prior("shrink:-0.25", *loc);
    CHECK(s.shape == PriorShape::shrinkage);
    CHECK(s.alpha.value() == -0.25);
}

TEST_CASE("effective alpha") {
    const auto pois = make_family("poisson");
    CHECK(effective_alpha(*pois, jeffreys(*pois)).value() == 0.5);
    CHECK(effective_alpha(*pois, alpha_prior(*pois, 1.3)).value() == doctest::Approx(1.3));
    // Flat on theta > 0 is theta^(alpha - 1) with alpha = 1.
    CHECK(effective_alpha(*pois, uniform_prior(1)).value() == doctest::Approx(1.0));
    const auto loc = make_family("normal-location");
    CHECK(effective_alpha(*loc, uniform_prior(1)).value() == 0.5);
    CHECK_FALSE(effective_alpha(*make_family("mvn-location", testing::dim_hyper(3)), shrinkage_prior(3, -0.25)).has_value());
}
