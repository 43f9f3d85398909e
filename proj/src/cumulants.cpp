#include "bayespred/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "bayespred/error.hpp"
#include "bayespred/rng.hpp"
#include "families/families.hpp"

namespace bayespred {

namespace {

std::size_t ipow(std::size_t p, std::size_t k) {
    std::size_t out = 1;
    for (std::size_t q = 0; q < k; ++q) out *= p;
    return out;
}

// Flat layout of the 11 partition tensors followed by the 4 residuals.
struct Layout {
    std::size_t p = 0;
    std::array<std::size_t, partition_count> offset{};
    std::array<std::size_t, 4> residual_offset{};
    std::size_t partitions_size = 0;
    std::size_t total = 0;

    explicit Layout(std::size_t dim) : p(dim) {
        std::size_t at = 0;
        for (Partition part : all_partitions) {
            offset[index_of(part)] = at;
            at += ipow(p, partition_rank(part));
        }
        partitions_size = at;
        for (std::size_t r = 0; r < 4; ++r) {
            residual_offset[r] = at;
            at += ipow(p, r + 1);
        }
        total = at;
    }
};

// Writes every partition product for one observation into out[0, partitions_size).
void fill_products(const LogDerivatives& d, const Layout& lay, double* out) {
    const std::size_t p = lay.p;
    auto d1 = d.d1.data();
    auto d2 = d.d2.data();
    auto d3 = d.d3.data();
    auto d4 = d.d4.data();
    auto at = [&](Partition part) { return out + lay.offset[index_of(part)]; };

    std::copy(d1.begin(), d1.end(), at(Partition::i));
    std::copy(d2.begin(), d2.end(), at(Partition::ij));
    std::copy(d3.begin(), d3.end(), at(Partition::ijk));
    std::copy(d4.begin(), d4.end(), at(Partition::ijkl));

    double* i_j = at(Partition::i_j);
    double* ij_k = at(Partition::ij_k);
    double* i_j_k = at(Partition::i_j_k);
    double* ijk_l = at(Partition::ijk_l);
    double* ij_kl = at(Partition::ij_kl);
    double* ij_k_l = at(Partition::ij_k_l);
    double* i_j_k_l = at(Partition::i_j_k_l);
    const std::size_t p2 = p * p, p3 = p2 * p;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) i_j[a * p + b] = d1[a] * d1[b];
    for (std::size_t ab = 0; ab < p2; ++ab)
        for (std::size_t c = 0; c < p; ++c) {
            ij_k[ab * p + c] = d2[ab] * d1[c];
            i_j_k[ab * p + c] = i_j[ab] * d1[c];
        }
    for (std::size_t abc = 0; abc < p3; ++abc)
        for (std::size_t e = 0; e < p; ++e) {
            ijk_l[abc * p + e] = d3[abc] * d1[e];
            i_j_k_l[abc * p + e] = i_j_k[abc] * d1[e];
        }
    for (std::size_t ab = 0; ab < p2; ++ab)
        for (std::size_t ce = 0; ce < p2; ++ce) {
            ij_kl[ab * p2 + ce] = d2[ab] * d2[ce];
            ij_k_l[ab * p2 + ce] = d2[ab] * i_j[ce];
        }
}

std::array<Tensor, partition_count> unpack(const Layout& lay, const double* src) {
    std::array<Tensor, partition_count> out;
    for (Partition part : all_partitions) {
        Tensor t(lay.p, partition_rank(part));
        std::copy_n(src + lay.offset[index_of(part)], t.size(), t.data().begin());
        out[index_of(part)] = std::move(t);
    }
    return out;
}

void finish(CumulantTensors& out, const std::string& family_name) {
    const std::size_t p = out.dim;
    const Tensor& f = out[Partition::i_j];
    Matrix fisher(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) fisher(a, b) = 0.5 * (f(a, b) + f(b, a));
    out.fisher = fisher;
    Eigen::LLT<Matrix> llt(fisher);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(fisher, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (llt.info() != Eigen::Success || !(lo > 1e-12 * std::max(hi, 1e-300))) {
        std::ostringstream msg;
        msg << family_name << ": Fisher information is singular or not positive definite "
            << "(smallest eigenvalue " << lo << "); it must be nonsingular and positive definite";
        throw SingularFisherError(msg.str());
    }
    out.fisher_inv = llt.solve(Matrix::Identity(p, p));
}

CumulantTensors from_nodes(const Family& family, const Vector& theta) {
    const std::size_t p = family.param_dim();
    const Layout lay(p);
    std::vector<double> acc(lay.partitions_size, 0.0), rec(lay.partitions_size);
    const auto kernel = family.derivative_kernel(theta);
    LogDerivatives d(p);
    for (const Node& node : family.expectation_nodes(theta)) {
        if (node.weight == 0.0) continue;
        kernel(node.x, d);
        fill_products(d, lay, rec.data());
        for (std::size_t k = 0; k < rec.size(); ++k) acc[k] += node.weight * rec[k];
    }
    CumulantTensors out;
    out.dim = p;
    out.values = unpack(lay, acc.data());
    for (Partition part : all_partitions)
        out.std_error[index_of(part)] = Tensor(p, partition_rank(part));
    out.method = CumulantMethod::analytic;
    return out;
}

// Running mean and centred sum of squares; blocks merge in a fixed order.
struct Moments {
    double count = 0.0;
    std::vector<double> mean, m2;
    explicit Moments(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0) {}
    void add(const std::vector<double>& x) {
        count += 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double delta = x[k] - mean[k];
            mean[k] += delta / count;
            m2[k] += delta * (x[k] - mean[k]);
        }
    }
    void merge(const Moments& o) {
        if (o.count == 0.0) return;
        const double total = count + o.count;
        for (std::size_t k = 0; k < mean.size(); ++k) {
            const double delta = o.mean[k] - mean[k];
            mean[k] += delta * o.count / total;
            m2[k] += o.m2[k] + delta * delta * count * o.count / total;
        }
        count = total;
    }
};

struct McResult {
    Layout lay;
    Moments moments;
};

McResult monte_carlo(const Family& family, const Vector& theta, const CumulantOptions& opt) {
    if (opt.reps < 100) throw InvalidArgument("Monte Carlo cumulants need at least 100 replicates");
    const std::size_t p = family.param_dim();
    McResult res{Layout(p), Moments()};
    const Layout& lay = res.lay;
    const std::size_t blocks = block_count(opt.reps);
    std::vector<Moments> per_block(blocks, Moments(lay.total));
    const auto kernel = family.derivative_kernel(theta);

    for_each_block(blocks, opt.threads, [&](std::size_t b) {
        Engine rng = make_engine(opt.seed, Stream::cumulants, b);
        const std::size_t begin = b * block_size;
        const std::size_t count = std::min(block_size, opt.reps - begin);
        SampleBatch batch;
        family.sample(theta, rng, count, batch);
        LogDerivatives d(p);
        std::vector<double> rec(lay.total);
        for (std::size_t m = 0; m < count; ++m) {
            kernel(batch.point(m), d);
            fill_products(d, lay, rec.data());
            const auto parts = unpack(lay, rec.data());
            const auto resid = identity_residuals(parts);
            for (std::size_t r = 0; r < 4; ++r)
                std::copy(resid[r].data().begin(), resid[r].data().end(),
                          rec.begin() + lay.residual_offset[r]);
            per_block[b].add(rec);
        }
    });
    res.moments = Moments(lay.total);
    for (const auto& m : per_block) res.moments.merge(m);
    return res;
}

CumulantTensors from_monte_carlo(const Family& family, const McResult& mc,
                                 const CumulantOptions& opt) {
    const Layout& lay = mc.lay;
    const double n = mc.moments.count;
    std::vector<double> se(lay.total);
    for (std::size_t k = 0; k < lay.total; ++k)
        se[k] = std::sqrt(std::max(mc.moments.m2[k], 0.0) / (n - 1.0) / n);
    CumulantTensors out;
    out.dim = lay.p;
    out.values = unpack(lay, mc.moments.mean.data());
    out.std_error = unpack(lay, se.data());
    out.method = CumulantMethod::monte_carlo;
    out.reps = opt.reps;
    out.seed = opt.seed;
    finish(out, family.name());
    return out;
}

void overlay_lemma1(const detail::MvnScale& fam, const Vector& theta, CumulantTensors& out) {
    const Matrix v = fam.to_matrix(theta);
    out.values[index_of(Partition::ij)] = wick::expected_hessian(v);
    out.values[index_of(Partition::i_j)] = wick::score_product(v, 2, false);
    out.values[index_of(Partition::i_j_k)] = wick::score_product(v, 3, false);
    out.values[index_of(Partition::i_j_k_l)] = wick::score_product(v, 4, false);
}

}  // namespace

CumulantTensors cumulants_from_nodes(const Family& family, const Vector& theta) {
    family.require_interior(theta);
    CumulantTensors out = from_nodes(family, theta);
    finish(out, family.name());
    return out;
}

CumulantTensors cumulants(const Family& family, const Vector& theta,
                          const CumulantOptions& options) {
    family.require_interior(theta);
    if (options.method == CumulantMethod::monte_carlo)
        return from_monte_carlo(family, monte_carlo(family, theta, options), options);
    CumulantTensors out = from_nodes(family, theta);
    if (const auto* scale = dynamic_cast<const detail::MvnScale*>(&family))
        overlay_lemma1(*scale, theta, out);
    finish(out, family.name());
    return out;
}

std::array<Tensor, 4> identity_residuals(const std::array<Tensor, partition_count>& L) {
    const std::size_t p = L[index_of(Partition::i)].dim();
    auto T = [&](Partition part) -> const Tensor& { return L[index_of(part)]; };
    std::array<Tensor, 4> r{Tensor(p, 1), Tensor(p, 2), Tensor(p, 3), Tensor(p, 4)};
    const Tensor& l_i = T(Partition::i);
    const Tensor& l_ij = T(Partition::ij);
    const Tensor& l_i_j = T(Partition::i_j);
    const Tensor& l_ijk = T(Partition::ijk);
    const Tensor& l_ij_k = T(Partition::ij_k);
    const Tensor& l_i_j_k = T(Partition::i_j_k);
    const Tensor& l_ijkl = T(Partition::ijkl);
    const Tensor& l_ijk_l = T(Partition::ijk_l);
    const Tensor& l_ij_kl = T(Partition::ij_kl);
    const Tensor& l_ij_k_l = T(Partition::ij_k_l);
    const Tensor& l_i_j_k_l = T(Partition::i_j_k_l);
    for (std::size_t i = 0; i < p; ++i) {
        r[0](i) = l_i(i);
        for (std::size_t j = 0; j < p; ++j) {
            r[1](i, j) = l_ij(i, j) + l_i_j(i, j);
            for (std::size_t k = 0; k < p; ++k) {
                r[2](i, j, k) = l_ijk(i, j, k) + l_ij_k(i, j, k) + l_ij_k(i, k, j) +
                                l_ij_k(j, k, i) + l_i_j_k(i, j, k);
                for (std::size_t l = 0; l < p; ++l) {
                    r[3](i, j, k, l) =
                        l_ijkl(i, j, k, l) + l_ijk_l(i, j, k, l) + l_ijk_l(i, j, l, k) +
                        l_ijk_l(i, k, l, j) + l_ijk_l(j, k, l, i) + l_ij_kl(i, j, k, l) +
                        l_ij_kl(i, k, j, l) + l_ij_kl(i, l, j, k) + l_ij_k_l(i, j, k, l) +
                        l_ij_k_l(i, k, j, l) + l_ij_k_l(i, l, j, k) + l_ij_k_l(j, k, i, l) +
                        l_ij_k_l(j, l, i, k) + l_ij_k_l(k, l, i, j) + l_i_j_k_l(i, j, k, l);
                }
            }
        }
    }
    return r;
}

bool IdentityReport::pass() const {
    return std::all_of(identities.begin(), identities.end(),
                       [](const IdentityResidual& r) { return r.pass; });
}

IdentityReport identities_check(const Family& family, const Vector& theta,
                                const CumulantOptions& options) {
    family.require_interior(theta);
    IdentityReport report;
    report.method = options.method;
    const std::size_t p = family.param_dim();

    // Every residual tensor is fully symmetric, so only sorted indices matter.
    auto for_sorted = [p](std::size_t rank, const std::function<void(std::size_t)>& fn) {
        const std::size_t total = ipow(p, rank);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat, prev = p;
            bool sorted = true;
            for (std::size_t a = 0; a < rank; ++a) {
                const std::size_t digit = rem % p;  // last index first
                rem /= p;
                if (digit > prev) sorted = false;
                prev = digit;
            }
            if (sorted) fn(flat);
        }
    };

    if (options.method == CumulantMethod::monte_carlo) {
        const McResult mc = monte_carlo(family, theta, options);
        report.reps = options.reps;
        const double n = mc.moments.count;
        for (std::size_t r = 0; r < 4; ++r) {
            IdentityResidual row;
            row.order = static_cast<int>(r + 1);
            row.residual = Tensor(p, r + 1);
            row.std_error = Tensor(p, r + 1);
            const std::size_t off = mc.lay.residual_offset[r];
            for (std::size_t k = 0; k < row.residual.size(); ++k) {
                row.residual.data()[k] = mc.moments.mean[off + k];
                row.std_error.data()[k] =
                    std::sqrt(std::max(mc.moments.m2[off + k], 0.0) / (n - 1.0) / n);
            }
            row.pass = true;
            for_sorted(r + 1, [&](std::size_t flat) {
                const double v = std::abs(row.residual.data()[flat]);
                const double s = row.std_error.data()[flat];
                row.max_abs = std::max(row.max_abs, v);
                if (s > 0.0) row.max_z = std::max(row.max_z, v / s);
                if (v > 4.0 * s + 1e-12) row.pass = false;
            });
            report.identities.push_back(std::move(row));
        }
        return report;
    }

    const CumulantTensors c = cumulants(family, theta, options);
    const auto resid = identity_residuals(c.values);
    double scale = 0.0;
    for (const Tensor& t : c.values) scale = std::max(scale, t.max_abs());
    for (std::size_t r = 0; r < 4; ++r) {
        IdentityResidual row;
        row.order = static_cast<int>(r + 1);
        row.residual = resid[r];
        row.std_error = Tensor(p, r + 1);
        row.scale = scale;
        for_sorted(r + 1, [&](std::size_t flat) {
            row.max_abs = std::max(row.max_abs, std::abs(row.residual.data()[flat]));
        });
        row.pass = row.max_abs <= 1e-8 * std::max(1.0, scale);
        report.identities.push_back(std::move(row));
    }
    return report;
}

// ---- closed forms for the normal covariance family --------------------------

namespace wick {

namespace {

struct Pairing {
    std::vector<std::pair<int, int>> pairs;  // leg positions
    bool connected = false;
};

std::vector<Pairing> enumerate_pairings(int m) {
    // Legs 2q and 2q + 1 belong to factor q.
    std::vector<Pairing> out;
    std::vector<int> partner(2 * m, -1);
    std::function<void()> rec = [&] {
        int first = -1;
        for (int leg = 0; leg < 2 * m; ++leg)
            if (partner[leg] < 0) {
                first = leg;
                break;
            }
        if (first < 0) {
            Pairing pr;
            std::vector<int> comp(m);
            for (int q = 0; q < m; ++q) comp[q] = q;
            std::function<int(int)> find = [&](int x) {
                return comp[x] == x ? x : comp[x] = find(comp[x]);
            };
            for (int leg = 0; leg < 2 * m; ++leg)
                if (leg < partner[leg]) {
                    pr.pairs.emplace_back(leg, partner[leg]);
                    comp[find(leg / 2)] = find(partner[leg] / 2);
                }
            pr.connected = true;
            for (int q = 1; q < m; ++q)
                if (find(q) != find(0)) pr.connected = false;
            out.push_back(std::move(pr));
            return;
        }
        for (int other = first + 1; other < 2 * m; ++other) {
            if (partner[other] >= 0 || other / 2 == first / 2) continue;
            partner[first] = other;
            partner[other] = first;
            rec();
            partner[first] = partner[other] = -1;
        }
    };
    rec();
    return out;
}

const std::vector<Pairing>& pairings(int m) {
    static const std::array<std::vector<Pairing>, 5> cache{
        std::vector<Pairing>{}, std::vector<Pairing>{}, enumerate_pairings(2), enumerate_pairings(3),
        enumerate_pairings(4)};
    if (m < 2 || m > 4) throw InvalidArgument("score products are available for m = 2, 3, 4");
    return cache[m];
}

std::vector<std::pair<int, int>> index_pairs(int d) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) out.emplace_back(i, j);
    return out;
}

}  // namespace

std::size_t pairing_count(int m, bool connected_only) {
    const auto& all = pairings(m);
    if (!connected_only) return all.size();
    return static_cast<std::size_t>(
        std::count_if(all.begin(), all.end(), [](const Pairing& p) { return p.connected; }));
}

Tensor score_product(const Matrix& v, int m, bool connected_only) {
    const Matrix w = v.inverse();
    const auto idx = index_pairs(static_cast<int>(v.rows()));
    const std::size_t p = idx.size();
    const auto& pats = pairings(m);
    Tensor out(p, static_cast<std::size_t>(m));
    std::vector<std::size_t> a(m);
    std::vector<int> legs(2 * m);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        std::size_t rem = flat;
        for (int q = m; q-- > 0;) {
            a[q] = rem % p;
            rem /= p;
        }
        double c = 1.0;
        for (int q = 0; q < m; ++q) {
            legs[2 * q] = idx[a[q]].first;
            legs[2 * q + 1] = idx[a[q]].second;
            if (idx[a[q]].first == idx[a[q]].second) c *= 0.5;
        }
        double sum = 0.0;
        for (const Pairing& pr : pats) {
            if (connected_only && !pr.connected) continue;
            double term = 1.0;
            for (const auto& [x, y] : pr.pairs) term *= w(legs[x], legs[y]);
            sum += term;
        }
        out.data()[flat] = c * sum;
    }
    return out;
}

Tensor expected_hessian(const Matrix& v) {
    Tensor f = score_product(v, 2, false);
    f *= -1.0;
    return f;
}

Matrix inverse_fisher(const Matrix& v) {
    const auto idx = index_pairs(static_cast<int>(v.rows()));
    const std::size_t p = idx.size();
    Matrix out(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            const auto [i, i2] = idx[a];
            const auto [r, r2] = idx[b];
            out(a, b) = v(i, r) * v(i2, r2) + v(i, r2) * v(i2, r);
        }
    return out;
}

}  // namespace wick

}  // namespace bayespred
