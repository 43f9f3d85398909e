#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

#include "bayespred/quadrature.hpp"
#include "bayespred/rng.hpp"
#include "bayespred/tensor.hpp"

using namespace bayespred;

TEST_CASE("tensor layout is row-major with the last index fastest") {
    Tensor t(3, 3);
    CHECK(t.size() == 27);
    t(1, 2, 0) = 5.0;
    CHECK(t.data()[(1 * 3 + 2) * 3 + 0] == 5.0);
    const std::array<std::size_t, 3> idx{1, 2, 0};
    CHECK(t.at(idx) == 5.0);
    CHECK(t.max_abs() == 5.0);
    Tensor u = t;
    u *= 2.0;
    u += t;
    CHECK(u(1, 2, 0) == 15.0);
    CHECK(max_abs_diff(u, t) == 10.0);
}

TEST_CASE("partition metadata") {
    CHECK(to_string(Partition::ij_k) == "ij,k");
    CHECK(to_string(Partition::i_j_k_l) == "i,j,k,l");
    CHECK(partition_rank(Partition::ij_kl) == 4);
    CHECK(partition_rank(Partition::i) == 1);
    const auto g = group_orders(Partition::ijk_l);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == 3);
    CHECK(g[1] == 1);
    CHECK(all_partitions.size() == 11);
}

TEST_CASE("partition symmetry detects asymmetric entries") {
    Tensor t(2, 3);
    // Symmetric in the first two indices only: valid for ij,k.
    t(0, 1, 0) = t(1, 0, 0) = 1.0;
    t(0, 0, 1) = 2.0;
    CHECK(has_partition_symmetry(t, Partition::ij_k, 1e-12));
    CHECK_FALSE(has_partition_symmetry(t, Partition::ijk, 1e-12));
    CHECK_FALSE(has_partition_symmetry(t, Partition::i_j_k, 1e-12));
}

TEST_CASE("Gauss-Hermite integrates normal moments exactly") {
    const Rule r = gauss_hermite(10);
    double m0 = 0, m2 = 0, m4 = 0, m6 = 0, m3 = 0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        const double x = r.nodes[k], w = r.weights[k];
        m0 += w;
        m2 += w * x * x;
        m3 += w * x * x * x;
        m4 += w * std::pow(x, 4);
        m6 += w * std::pow(x, 6);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m3) < 1e-12);
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("Gauss-Laguerre reproduces gamma moments") {
    const double a = 0.5;
    const Rule r = gauss_laguerre(12, a);
    double m0 = 0, m1 = 0, m2 = 0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        m0 += r.weights[k];
        m1 += r.weights[k] * r.nodes[k];
        m2 += r.weights[k] * r.nodes[k] * r.nodes[k];
    }
    // U ~ Gamma(a + 1, 1): E U = a + 1, E U^2 = (a + 1)(a + 2).
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m1 == doctest::Approx(a + 1).epsilon(1e-12));
    CHECK(m2 == doctest::Approx((a + 1) * (a + 2)).epsilon(1e-12));
}

TEST_CASE("product rule covers every coordinate") {
    const ProductRule r = product_hermite(2, 5);
    CHECK(r.size() == 25);
    double m = 0, cross = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        m += r.weights[k] * r.points[2 * k] * r.points[2 * k];
        cross += r.weights[k] * r.points[2 * k] * r.points[2 * k + 1];
    }
    CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(cross) < 1e-13);
}

TEST_CASE("adaptive integration") {
    const double pi = std::acos(-1.0);
    const auto n = integrate_real_line([&](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * pi); }, 1e-10);
    CHECK(n.value == doctest::Approx(1.0).epsilon(1e-9));
    const auto cauchy = integrate_real_line([&](double x) { return 1.0 / (pi * (1 + x * x)); }, 1e-8);
    CHECK(cauchy.value == doctest::Approx(1.0).epsilon(1e-6));
    const auto s = integrate_interval([](double x) { return std::sin(x); }, 0.0, pi, 1e-12);
    CHECK(s.value == doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("engines depend only on seed, stream and block") {
    Engine a = make_engine(5, Stream::risk, 3), b = make_engine(5, Stream::risk, 3);
    CHECK(a() == b());
    Engine c = make_engine(5, Stream::risk, 4), d = make_engine(5, Stream::cumulants, 3);
    Engine e = make_engine(6, Stream::risk, 3);
    const auto x = make_engine(5, Stream::risk, 3)();
    CHECK(c() != x);
    CHECK(d() != x);
    CHECK(e() != x);
    CHECK(block_count(0) == 0);
    CHECK(block_count(block_size) == 1);
    CHECK(block_count(block_size + 1) == 2);
}

TEST_CASE("for_each_block visits every block once for any thread count") {
    for (unsigned threads : {1u, 2u, 5u}) {
        std::vector<int> hits(37, 0);
        for_each_block(hits.size(), threads, [&](std::size_t b) { hits[b] += 1; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
    CHECK(resolve_threads(0) >= 1);
    CHECK(resolve_threads(3) == 3);
}

TEST_CASE("pairwise sum is accurate and order-fixed") {
    std::vector<double> v(100001, 0.1);
    const double s = pairwise_sum(v);
    CHECK(s == doctest::Approx(10000.1).epsilon(1e-14));
    CHECK(pairwise_sum(v) == s);
    CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}
