#include "bayespred/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace bayespred {

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
    std::size_t out = 1;
    for (std::size_t e = 0; e < exp; ++e) out *= base;
    return out;
}

struct PartitionInfo {
    std::string_view name;
    std::array<int, 4> orders;
    std::size_t groups;
};

constexpr std::array<PartitionInfo, partition_count> kInfo{{
    {"i", {1, 0, 0, 0}, 1},
    {"i,j", {1, 1, 0, 0}, 2},
    {"ij", {2, 0, 0, 0}, 1},
    {"ijk", {3, 0, 0, 0}, 1},
    {"ij,k", {2, 1, 0, 0}, 2},
    {"i,j,k", {1, 1, 1, 0}, 3},
    {"ijkl", {4, 0, 0, 0}, 1},
    {"ijk,l", {3, 1, 0, 0}, 2},
    {"ij,kl", {2, 2, 0, 0}, 2},
    {"ij,k,l", {2, 1, 1, 0}, 3},
    {"i,j,k,l", {1, 1, 1, 1}, 4},
}};

}  // namespace

Tensor::Tensor(std::size_t dim, std::size_t rank)
    : dim_(dim), rank_(rank), data_(ipow(dim, rank), 0.0) {}

double Tensor::at(std::span<const std::size_t> index) const {
    assert(index.size() == rank_);
    std::size_t flat = 0;
    for (std::size_t v : index) flat = flat * dim_ + v;
    return data_[flat];
}

double& Tensor::at(std::span<const std::size_t> index) {
    assert(index.size() == rank_);
    std::size_t flat = 0;
    for (std::size_t v : index) flat = flat * dim_ + v;
    return data_[flat];
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
    assert(other.size() == size());
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Tensor& Tensor::operator*=(double scale) {
    for (double& v : data_) v *= scale;
    return *this;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    assert(a.size() == b.size());
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

std::string_view to_string(Partition p) noexcept { return kInfo[index_of(p)].name; }

std::span<const int> group_orders(Partition p) noexcept {
    const auto& info = kInfo[index_of(p)];
    return {info.orders.data(), info.groups};
}

std::size_t partition_rank(Partition p) noexcept {
    std::size_t r = 0;
    for (int o : group_orders(p)) r += static_cast<std::size_t>(o);
    return r;
}

bool has_partition_symmetry(const Tensor& t, Partition p, double tol) {
    const auto orders = group_orders(p);
    const std::size_t rank = t.rank();
    const std::size_t dim = t.dim();
    std::vector<std::size_t> offsets;
    std::size_t acc = 0;
    for (int o : orders) {
        offsets.push_back(acc);
        acc += static_cast<std::size_t>(o);
    }

    std::vector<std::size_t> idx(rank, 0), perm(rank);
    const std::size_t total = t.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t a = rank; a-- > 0;) {
            idx[a] = rem % dim;
            rem /= dim;
        }
        const double ref = t.at(idx);
        // Swap neighbours inside each group.
        for (std::size_t g = 0; g < orders.size(); ++g) {
            for (int a = 0; a + 1 < orders[g]; ++a) {
                perm = idx;
                std::swap(perm[offsets[g] + a], perm[offsets[g] + a + 1]);
                if (std::abs(t.at(perm) - ref) > tol) return false;
            }
        }
        // Swap whole groups of equal order.
        for (std::size_t g = 0; g < orders.size(); ++g) {
            for (std::size_t h = g + 1; h < orders.size(); ++h) {
                if (orders[g] != orders[h]) continue;
                perm = idx;
                for (int a = 0; a < orders[g]; ++a)
                    std::swap(perm[offsets[g] + a], perm[offsets[h] + a]);
                if (std::abs(t.at(perm) - ref) > tol) return false;
            }
        }
    }
    return true;
}

}  // namespace bayespred
