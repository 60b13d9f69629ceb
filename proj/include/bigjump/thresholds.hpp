#pragma once

#include <cmath>
#include <vector>

#include "bigjump/distribution.hpp"
#include "bigjump/errors.hpp"

namespace bigjump {

// Thresholds for the uniform sum-tail asymptotics. The regularly varying
// alpha > 2 rule is sqrt(t n log n) with t = alpha - 2 + 1/2; other families
// have no citable rule here, so the caller must supply a grid.
inline double d_n(const Distribution& dist, std::size_t n, double t_margin = 0.5) {
    if (n < 2) throw Error("d_n: n must be >= 2");
    auto alpha = dist.tail_index();
    if (!alpha || *alpha <= 2.0)
        throw UserGridRequired("d_n: no threshold rule for " + dist.spec_string() + "; supply an x grid");
    double t = *alpha - 2.0 + t_margin;
    return std::sqrt(t * static_cast<double>(n) * std::log(static_cast<double>(n)));
}

// ell_n defaults to d_n, so q_n = d_n unless a larger ell_n is forced.
inline double q_n(const Distribution& dist, std::size_t n, double ell_n = 0.0) {
    return std::max(d_n(dist, n), ell_n);
}

// Normalizing scale for S_{n-1}: sigma*sqrt(n-1) with mean centering when the
// variance is finite, otherwise the quantile-based scaling for stable index
// alpha < 2 (used only for two-sample comparisons, no specific limit claimed).
struct SumNormalization {
    double b_n = 1.0;
    double centering = 0.0;
};

inline SumNormalization sum_normalization(const Distribution& dist, std::size_t n) {
    SumNormalization s;
    double m = static_cast<double>(n - 1);
    if (auto var = dist.variance()) {
        s.b_n = std::sqrt(*var * m);
        s.centering = m * dist.mean().value_or(0.0);
        return s;
    }
    auto st = dist.stable_attraction();
    if (st && st->index < 2.0) {
        s.b_n = dist.quantile_from_tail(1.0 / m);
        s.centering = dist.mean() ? m * *dist.mean() : 0.0;
        return s;
    }
    throw Error("sum_normalization: no rule for " + dist.spec_string());
}

// Largest relative drop of the interval mass over shifts |y| <= L*b_n, scanned
// on a finite grid standing in for the supremum. delta_len may be infinite.
inline double uniformity_modulus(const Distribution& dist, double L, double b_n, const std::vector<double>& x_grid,
                                 double delta_len) {
    double worst = 0.0;
    const int steps = 16;
    for (double x : x_grid) {
        double base = dist.interval_mass(x, delta_len);
        if (!(base > 0.0)) continue;
        for (int k = -steps; k <= steps; ++k) {
            double y = L * b_n * static_cast<double>(k) / steps;
            double shifted = dist.interval_mass(x - y, delta_len);
            worst = std::max(worst, 1.0 - shifted / base);
        }
    }
    return worst;
}

// geometric x grid (ratio ~1.25) from `start`, `count` points
inline std::vector<double> geometric_grid(double start, std::size_t count, double ratio = 1.25) {
    std::vector<double> g;
    double x = start;
    for (std::size_t i = 0; i < count; ++i) {
        g.push_back(x);
        x *= ratio;
    }
    return g;
}

// Smallest threshold at which the first-order bulk correction to the sum-tail
// ratio, tail-index * (n-1) * mean / x, stays below eps. Positive-support
// heavy-tailed sums need x beyond this for the single-jump picture to show at
// finite scale.
inline double bulk_clearance(const Distribution& dist, std::size_t n, double eps) {
    auto alpha = dist.tail_index();
    auto mean = dist.mean();
    if (!alpha || !mean) throw UserGridRequired("bulk_clearance: needs a tail index and a mean");
    return *alpha * static_cast<double>(n - 1) * *mean / eps;
}

}  // namespace bigjump
