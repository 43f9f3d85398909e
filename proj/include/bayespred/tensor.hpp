#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace bayespred {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense cubic array of rank <= 4 with every axis of length `dim`.
/// Storage is row-major: the last index varies fastest.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t dim, std::size_t rank);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t rank() const noexcept { return rank_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i) { return data_[i]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * dim_ + j) * dim_ + k];
    }
    double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data_[((i * dim_ + j) * dim_ + k) * dim_ + l];
    }
    double operator()(std::size_t i) const { return data_[i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * dim_ + j) * dim_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[((i * dim_ + j) * dim_ + k) * dim_ + l];
    }

    /// Element addressed by a full multi-index (length == rank).
    double at(std::span<const std::size_t> index) const;
    double& at(std::span<const std::size_t> index);

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    void fill(double value);
    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(double scale);

    /// Largest absolute entry.
    double max_abs() const;

private:
    std::size_t dim_ = 0;
    std::size_t rank_ = 0;
    std::vector<double> data_;
};

/// Entry-wise max |a - b|; the tensors must share shape.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// A grouping of log-likelihood derivative indices. Each group is one
/// derivative l_{...}; commas separate the factors of the expected product,
/// e.g. `ij_k` is E[l_ij * l_k]. Tensor indices are laid out group by group
/// in the order of the name.
enum class Partition {
    i,
    i_j,
    ij,
    ijk,
    ij_k,
    i_j_k,
    ijkl,
    ijk_l,
    ij_kl,
    ij_k_l,
    i_j_k_l,
};

inline constexpr std::array<Partition, 11> all_partitions{
    Partition::i,    Partition::i_j,   Partition::ij,    Partition::ijk,
    Partition::ij_k, Partition::i_j_k, Partition::ijkl,  Partition::ijk_l,
    Partition::ij_kl, Partition::ij_k_l, Partition::i_j_k_l,
};

inline constexpr std::size_t partition_count = all_partitions.size();

constexpr std::size_t index_of(Partition p) noexcept { return static_cast<std::size_t>(p); }

/// Comma notation, e.g. "ij,k".
std::string_view to_string(Partition p) noexcept;

/// Derivative order of each group, e.g. {2, 1} for ij,k.
std::span<const int> group_orders(Partition p) noexcept;

/// Total number of indices.
std::size_t partition_rank(Partition p) noexcept;

/// True when every permutation within each group, and every exchange of
/// groups of equal order, leaves the tensor unchanged to `tol`.
bool has_partition_symmetry(const Tensor& t, Partition p, double tol);

}  // namespace bayespred
