#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bayespred/family.hpp"

namespace testing {

using bayespred::FamilyHyper;
using bayespred::FamilyPtr;
using bayespred::Matrix;
using bayespred::Vector;

struct NamedFamily {
    std::string name;
    FamilyHyper hyper;
};

inline FamilyHyper dim_hyper(int d) {
    FamilyHyper h;
    h.dim = d;
    return h;
}

inline FamilyHyper nb_hyper(int r) {
    FamilyHyper h;
    h.r = r;
    return h;
}

/// The seven built-in families at the hyperparameters used throughout.
inline std::vector<NamedFamily> seven_families() {
    return {{"poisson", {}},
            {"bernoulli-canonical", {}},
            {"negbinomial-canonical", nb_hyper(3)},
            {"normal-location", {}},
            {"normal-location-scale", {}},
            {"mvn-location", dim_hyper(3)},
            {"mvn-scale", dim_hyper(2)}};
}

inline FamilyPtr build(const NamedFamily& f) { return bayespred::make_family(f.name, f.hyper); }

/// A random point well inside the domain of a built-in family.
inline Vector random_interior(const bayespred::Family& family, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto p = static_cast<Eigen::Index>(family.param_dim());
    const std::string name = family.name();
    Vector t(p);
    if (name == "poisson") {
        t(0) = std::exp(-1.5 + 3.0 * u(rng));
    } else if (name == "bernoulli-canonical") {
        t(0) = -3.0 + 6.0 * u(rng);
    } else if (name.rfind("negbinomial", 0) == 0) {
        t(0) = -3.0 + 2.8 * u(rng);
    } else if (name == "normal-location-scale") {
        t(0) = -3.0 + 6.0 * u(rng);
        t(1) = std::exp(-1.0 + 2.0 * u(rng));
    } else if (name == "mvn-scale") {
        // V = A A^T + 0.5 I, stored as the upper triangle row by row.
        const int d = static_cast<int>((std::sqrt(8.0 * double(p) + 1.0) - 1.0) / 2.0);
        Matrix a(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = -0.7 + 1.4 * u(rng);
        const Matrix v = a * a.transpose() + 0.5 * Matrix::Identity(d, d);
        Eigen::Index k = 0;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) t(k++) = v(i, j);
    } else {
        for (Eigen::Index a = 0; a < p; ++a) t(a) = -4.0 + 8.0 * u(rng);
    }
    return t;
}

}  // namespace testing
