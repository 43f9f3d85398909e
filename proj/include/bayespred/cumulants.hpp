#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bayespred/family.hpp"
#include "bayespred/tensor.hpp"

namespace bayespred {

enum class CumulantMethod { analytic, monte_carlo };

struct CumulantOptions {
    CumulantMethod method = CumulantMethod::analytic;
    std::size_t reps = 1000000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Per-observation expectations of products of log-density derivatives,
/// one tensor per partition.
struct CumulantTensors {
    std::size_t dim = 0;
    std::array<Tensor, partition_count> values;
    std::array<Tensor, partition_count> std_error;  // zero for analytic
    Matrix fisher;
    Matrix fisher_inv;
    CumulantMethod method = CumulantMethod::analytic;
    std::size_t reps = 0;
    std::uint64_t seed = 0;

    const Tensor& operator[](Partition p) const { return values[index_of(p)]; }
    const Tensor& se(Partition p) const { return std_error[index_of(p)]; }
};

/// Analytic: exact expectations (support enumeration or Gauss-Hermite nodes;
/// for mvn-scale the score moments and expected Hessian come from the Wick
/// pairing formulas). Monte Carlo: sample means with standard errors.
CumulantTensors cumulants(const Family& family, const Vector& theta,
                          const CumulantOptions& options = {});

/// Exact expectations from the family's expectation nodes only, with no
/// closed-form overrides.
CumulantTensors cumulants_from_nodes(const Family& family, const Vector& theta);

/// The four likelihood identities, as residual tensors of orders 1..4:
///   L_i,
///   L_ij + L_i,j,
///   L_ijk + L_ij,k + L_ik,j + L_jk,i + L_i,j,k,
///   L_ijkl + (4 terms ijk,l) + (3 terms ij,kl) + (6 terms ij,k,l) + L_i,j,k,l.
std::array<Tensor, 4> identity_residuals(const std::array<Tensor, partition_count>& L);

struct IdentityResidual {
    int order = 0;
    Tensor residual;
    Tensor std_error;     // zero for analytic
    double max_abs = 0.0; // over unique entries
    double max_z = 0.0;   // max |residual| / std_error, Monte Carlo only
    double scale = 0.0;   // largest contributing term, analytic only
    bool pass = false;
};

struct IdentityReport {
    CumulantMethod method = CumulantMethod::analytic;
    std::size_t reps = 0;
    std::vector<IdentityResidual> identities;
    bool pass() const;
};

/// Analytic residuals must be below 1e-8 (relative to the largest term when
/// that exceeds 1); Monte Carlo residuals within 4 standard errors.
IdentityReport identities_check(const Family& family, const Vector& theta,
                                const CumulantOptions& options = {});

/// Closed forms for the zero-mean normal with covariance V, parameters
/// V_{ii'} (i <= i'). With y = V^{-1} x the score for (ii') is
/// c (y_i y_i' - W_ii'), c = 1/2 when i = i' and 1 otherwise, so products of
/// scores are sums over Wick pairings of the y-legs.
namespace wick {

/// Pairings of the 2m legs of m score factors with no leg paired inside its
/// own factor; `connected_only` keeps those that link all factors.
std::size_t pairing_count(int m, bool connected_only);

/// E[l_a1 ... l_am] (connected_only = false) or the joint cumulant
/// (connected_only = true), for m = 2, 3, 4.
Tensor score_product(const Matrix& v, int m, bool connected_only);

/// E[l_ab] = -(W_ir W_i'r' + W_ir' W_i'r) c_a c_b.
Tensor expected_hessian(const Matrix& v);

/// Inverse Fisher matrix V_ir V_i'r' + V_ir' V_i'r.
Matrix inverse_fisher(const Matrix& v);

}  // namespace wick

}  // namespace bayespred
