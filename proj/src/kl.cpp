#include "bayespred/kl.hpp"

#include <cmath>

#include "bayespred/error.hpp"
#include "bayespred/quadrature.hpp"

namespace bayespred {

KlValue kl_discrete(const std::vector<Node>& truth, const PredictiveDensity& f_hat) {
    KlValue out;
    double mass = 0.0, last_ratio = 0.0;
    for (const Node& node : truth) {
        if (node.weight <= 0.0) continue;
        const double lq = f_hat.log_eval(node.x);
        if (lq == -INFINITY) {
            out.value = INFINITY;
            return out;
        }
        last_ratio = std::log(node.weight) - lq;
        out.value += node.weight * last_ratio;
        mass += node.weight;
    }
    const double tail = std::max(0.0, 1.0 - mass);
    out.truncation = tail * std::max(1.0, std::abs(last_ratio));
    return out;
}

namespace {

KlValue kl_continuous_1d(const Family& family, const Vector& theta, const PredictiveDensity& f) {
    const auto [mean, cov] = family.moments(theta);
    const double m = mean(0), s = std::sqrt(cov(0, 0));
    bool zero_hit = false;
    const auto r = integrate_real_line(
        [&](double z) {
            const Vector x = Vector::Constant(1, m + s * z);
            const double lp = family.log_density(x, theta);
            if (lp < -700.0) return 0.0;
            const double lq = f.log_eval(x);
            if (lq == -INFINITY) {
                zero_hit = true;
                return 0.0;
            }
            return s * std::exp(lp) * (lp - lq);
        },
        1e-10);
    KlValue out;
    out.value = zero_hit ? INFINITY : r.value;
    return out;
}

KlValue kl_continuous_nd(const Family& family, const Vector& theta, const PredictiveDensity& f) {
    const auto [mean, cov] = family.moments(theta);
    const std::size_t d = static_cast<std::size_t>(mean.size());
    const Eigen::LLT<Matrix> llt(cov);
    const Matrix lower = llt.matrixL();
    double previous = NAN;
    for (std::size_t nodes = 8;; nodes *= 2) {
        const ProductRule rule = product_hermite(d, nodes);
        double total = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const Eigen::Map<const Vector> z(rule.points.data() + k * d,
                                             static_cast<Eigen::Index>(d));
            const Vector x = mean + lower * z;
            const double lq = f.log_eval(x);
            if (lq == -INFINITY) return {INFINITY, 0.0};
            total += rule.weights[k] * (family.log_density(x, theta) - lq);
        }
        const bool converged = std::abs(total - previous) < 1e-9;
        const bool capped = std::pow(double(nodes * 2), double(d)) > 4e5;
        previous = total;
        if (converged || capped) return {total, 0.0};
    }
}

}  // namespace

KlValue kl_divergence(const Family& family, const Vector& theta, const PredictiveDensity& f_hat) {
    family.require_interior(theta);
    if (auto exact = f_hat.exact_kl(family, theta)) return {*exact, 0.0};
    if (family.support() == Support::discrete)
        return kl_discrete(family.enumerate_support(theta, kl_tail), f_hat);
    if (family.obs_dim() == 1) return kl_continuous_1d(family, theta, f_hat);
    return kl_continuous_nd(family, theta, f_hat);
}

}  // namespace bayespred
