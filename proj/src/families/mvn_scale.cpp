#include <algorithm>
#include <numeric>
#include <random>

#include "bayespred/quadrature.hpp"
#include "families.hpp"

namespace bayespred::detail {

namespace {

constexpr double log_2pi = 1.8378770664093454836;

struct Precomputed {
    // Per order k = 1..4: for each flat tensor index the id of its sorted
    // multi-index, and per sorted id the quadratic form matrix and constant.
    std::array<std::vector<std::size_t>, 5> flat_to_id;
    std::array<std::vector<Matrix>, 5> quad;
    std::array<std::vector<double>, 5> constant;
};

// All non-decreasing k-tuples over [0, p).
std::vector<std::vector<std::size_t>> sorted_tuples(std::size_t p, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur(k, 0);
    for (;;) {
        out.push_back(cur);
        std::size_t pos = k;
        while (pos > 0 && cur[pos - 1] == p - 1) --pos;
        if (pos == 0) break;
        ++cur[pos - 1];
        for (std::size_t q = pos; q < k; ++q) cur[q] = cur[pos - 1];
    }
    return out;
}

}  // namespace

MvnScale::MvnScale(int dim) : dim_(dim) {
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) pairs_.emplace_back(i, j);
}

Matrix MvnScale::direction(std::size_t a) const {
    const auto [i, j] = pairs_[a];
    Matrix d = Matrix::Zero(dim_, dim_);
    d(i, j) = 1.0;
    d(j, i) = 1.0;
    return d;
}

Matrix MvnScale::to_matrix(ConstRef theta) const {
    Matrix v(dim_, dim_);
    for (std::size_t a = 0; a < pairs_.size(); ++a) {
        const auto [i, j] = pairs_[a];
        v(i, j) = v(j, i) = theta(a);
    }
    return v;
}

Vector MvnScale::to_theta(const Matrix& v) const {
    Vector t(pairs_.size());
    for (std::size_t a = 0; a < pairs_.size(); ++a) t(a) = v(pairs_[a].first, pairs_[a].second);
    return t;
}

double MvnScale::boundary_distance(ConstRef theta) const {
    if (!theta.allFinite()) return -1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(to_matrix(theta), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

double MvnScale::log_density(ConstRef x, ConstRef theta) const {
    Eigen::LLT<Matrix> llt(to_matrix(theta));
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Matrix l = llt.matrixL();
    const Vector z = l.triangularView<Eigen::Lower>().solve(x);
    return -0.5 * dim_ * log_2pi - l.diagonal().array().log().sum() - 0.5 * z.squaredNorm();
}

DerivativeKernel MvnScale::derivative_kernel(const Vector& theta) const {
    const std::size_t p = pairs_.size();
    const Matrix w = to_matrix(theta).inverse();
    std::vector<Matrix> wd(p);  // W D_a
    for (std::size_t a = 0; a < p; ++a) wd[a] = w * direction(a);

    auto pre = std::make_shared<Precomputed>();
    for (std::size_t k = 1; k <= 4; ++k) {
        const auto tuples = sorted_tuples(p, k);
        std::size_t total = 1;
        for (std::size_t q = 0; q < k; ++q) total *= p;
        pre->flat_to_id[k].resize(total);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::vector<std::size_t> idx(k);
            std::size_t rem = flat;
            for (std::size_t q = k; q-- > 0;) {
                idx[q] = rem % p;
                rem /= p;
            }
            std::sort(idx.begin(), idx.end());
            pre->flat_to_id[k][flat] = static_cast<std::size_t>(
                std::lower_bound(tuples.begin(), tuples.end(), idx) - tuples.begin());
        }
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;  // (-1)^k
        for (const auto& tup : tuples) {
            // d^k (x' W x) = (-1)^k sum over orderings of x' W D W D ... D W x.
            Matrix m = Matrix::Zero(dim_, dim_);
            std::vector<std::size_t> order(k);
            std::iota(order.begin(), order.end(), 0);
            do {
                Matrix prod = w;
                for (std::size_t q = 0; q < k; ++q) prod = prod * direction(tup[order[q]]) * w;
                m += prod;
            } while (std::next_permutation(order.begin(), order.end()));
            // d^k log|V| = (-1)^(k-1) sum over orderings fixing the first
            // factor of tr(W D W D ... W D).
            double tr = 0.0;
            std::vector<std::size_t> rest(k - 1);
            std::iota(rest.begin(), rest.end(), 1);
            do {
                Matrix prod = wd[tup[0]];
                for (std::size_t q : rest) prod = prod * wd[tup[q]];
                tr += prod.trace();
            } while (std::next_permutation(rest.begin(), rest.end()));
            pre->quad[k].push_back(-0.5 * sign * m);
            pre->constant[k].push_back(-0.5 * (-sign) * tr);
        }
    }

    return [pre](ConstRef x, LogDerivatives& out) {
        Tensor* dst[5] = {nullptr, &out.d1, &out.d2, &out.d3, &out.d4};
        thread_local std::vector<double> vals;
        for (std::size_t k = 1; k <= 4; ++k) {
            const auto& q = pre->quad[k];
            vals.resize(q.size());
            for (std::size_t id = 0; id < q.size(); ++id)
                vals[id] = x.dot(q[id] * x) + pre->constant[k][id];
            auto data = dst[k]->data();
            const auto& map = pre->flat_to_id[k];
            for (std::size_t f = 0; f < map.size(); ++f) data[f] = vals[map[f]];
        }
    };
}

void MvnScale::log_derivatives(ConstRef x, ConstRef theta, LogDerivatives& out) const {
    derivative_kernel(theta)(x, out);
}

void MvnScale::sample(ConstRef theta, Engine& rng, std::size_t count, SampleBatch& out) const {
    const Matrix l = to_matrix(theta).llt().matrixL();
    std::normal_distribution<double> normal;
    out.dim = static_cast<std::size_t>(dim_);
    out.values.resize(count * dim_);
    Vector z(dim_);
    for (std::size_t m = 0; m < count; ++m) {
        for (int k = 0; k < dim_; ++k) z(k) = normal(rng);
        const Vector x = l * z;
        for (int k = 0; k < dim_; ++k) out.values[m * dim_ + k] = x(k);
    }
}

double MvnScale::log_likelihood(const SufficientStat& stat, ConstRef theta) const {
    Eigen::LLT<Matrix> llt(to_matrix(theta));
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Matrix l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double tr = (llt.solve(stat.scatter)).trace();
    return -0.5 * static_cast<double>(stat.n) * log_det - 0.5 * tr;
}

std::optional<Vector> MvnScale::mle(const SufficientStat& stat) const {
    if (stat.n < static_cast<std::size_t>(dim_)) return std::nullopt;
    const Matrix v = stat.scatter / static_cast<double>(stat.n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(v, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())))
        return std::nullopt;
    return to_theta(v);
}

Matrix MvnScale::fisher(ConstRef theta) const {
    const std::size_t p = pairs_.size();
    const Matrix w = to_matrix(theta).inverse();
    Matrix f(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
            f(a, b) = 0.5 * (w * direction(a) * w * direction(b)).trace();
    return f;
}

std::pair<Vector, Matrix> MvnScale::moments(ConstRef theta) const {
    return {Vector::Zero(dim_), to_matrix(theta)};
}

std::vector<Node> MvnScale::expectation_nodes(ConstRef theta) const {
    // Derivatives are quadratic in x; products of four need degree 8.
    const Matrix l = to_matrix(theta).llt().matrixL();
    const ProductRule rule = product_hermite(dim_, 5);
    std::vector<Node> out(rule.size());
    Vector z(dim_);
    for (std::size_t m = 0; m < rule.size(); ++m) {
        for (int k = 0; k < dim_; ++k) z(k) = rule.points[m * dim_ + k];
        out[m].x = l * z;
        out[m].weight = rule.weights[m];
    }
    return out;
}

std::vector<Vector> MvnScale::reference_points() const {
    Matrix a = Matrix::Identity(dim_, dim_);
    Matrix b = Matrix::Identity(dim_, dim_);
    Matrix c = Matrix::Identity(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        b(i, i) = 1.0 + i;
        c(i, i) = 0.5 + 0.25 * i;
        for (int j = 0; j < dim_; ++j)
            if (i != j) {
                b(i, j) = 0.3;
                c(i, j) = -0.1;
            }
    }
    return {to_theta(a), to_theta(b), to_theta(c)};
}

namespace {

struct LogDetDerivs {
    double value;
    Vector grad;  // tr(W D_a)
    Matrix hess;  // -tr(W D_a W D_b)
};

LogDetDerivs log_det_derivs(const MvnScale& fam, ConstRef theta) {
    const Matrix v = fam.to_matrix(theta);
    Eigen::LLT<Matrix> llt(v);
    const Matrix w = llt.solve(Matrix::Identity(v.rows(), v.cols()));
    const std::size_t p = fam.param_dim();
    LogDetDerivs out{2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum(), Vector(p),
                     Matrix(p, p)};
    for (std::size_t a = 0; a < p; ++a) {
        const Matrix wa = w * fam.direction(a);
        out.grad(a) = wa.trace();
        for (std::size_t b = 0; b < p; ++b)
            out.hess(a, b) = -(wa * w * fam.direction(b)).trace();
    }
    return out;
}

}  // namespace

double MvnScale::jeffreys_log_density(ConstRef theta) const {
    return -0.5 * (dim_ + 1) * log_det_derivs(*this, theta).value;
}
Vector MvnScale::jeffreys_log_grad(ConstRef theta) const {
    return -0.5 * (dim_ + 1) * log_det_derivs(*this, theta).grad;
}
Matrix MvnScale::jeffreys_log_hess(ConstRef theta) const {
    return -0.5 * (dim_ + 1) * log_det_derivs(*this, theta).hess;
}

// h = |V|^((alpha - 1)(d + 1)).
double MvnScale::alpha_log_density(ConstRef theta, double alpha) const {
    return (alpha - 1.0) * (dim_ + 1) * log_det_derivs(*this, theta).value;
}
Vector MvnScale::alpha_log_grad(ConstRef theta, double alpha) const {
    return (alpha - 1.0) * (dim_ + 1) * log_det_derivs(*this, theta).grad;
}
Matrix MvnScale::alpha_log_hess(ConstRef theta, double alpha) const {
    return (alpha - 1.0) * (dim_ + 1) * log_det_derivs(*this, theta).hess;
}

}  // namespace bayespred::detail
