#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bigjump {

// Sum_{k>=m} k^{-s} for s > 1, m >= 1, via direct summation plus an
// Euler-Maclaurin remainder. Relative error well below 1e-15 for the
// exponents used here.
inline double hurwitz_tail(double s, std::uint64_t m) {
    if (m < 1) m = 1;
    std::uint64_t cut = m + 32;
    double sum = 0.0;
    for (std::uint64_t k = m; k < cut; ++k) sum += std::pow(static_cast<double>(k), -s);
    const double N = static_cast<double>(cut);
    double r = std::pow(N, 1.0 - s) / (s - 1.0);
    r += 0.5 * std::pow(N, -s);
    r += s / 12.0 * std::pow(N, -s - 1.0);
    r -= s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(N, -s - 3.0);
    r += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * std::pow(N, -s - 5.0);
    return sum + r;
}

inline double riemann_zeta(double s) { return hurwitz_tail(s, 1); }

// ---------------------------------------------------------------------------
// Regularized incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a), series/continued
// fraction split at x = a+1 (Numerical Recipes style).
// ---------------------------------------------------------------------------
namespace detail {

inline double gamma_series_p(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_cf_q(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

inline double reg_gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("reg_gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_series_p(a, x);
    return detail::gamma_cf_q(a, x);
}

// Upper tail p-value of a chi-square statistic with the given degrees of freedom.
inline double chi_square_pvalue(double stat, double dof) { return reg_gamma_q(dof / 2.0, stat / 2.0); }

// ---------------------------------------------------------------------------
// Standard normal helpers. The quantile works directly from the upper-tail
// probability so it keeps full relative precision for very small tails
// (Acklam's rational approximation polished with one Halley step).
// ---------------------------------------------------------------------------
inline double std_normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Phi^{-1}(p): Acklam's rational approximation with Halley refinement.
// The tail branches work from log(p) directly, so relative precision is kept
// for p down to the smallest uniform draws.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("std_normal_quantile: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        double e = std_normal_cdf(x) - p;
        double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
        x = x - u / (1.0 + x * u / 2.0);
    }
    return x;
}

// z with P[Z > z] = tail
inline double std_normal_upper_quantile(double tail) { return -std_normal_quantile(tail); }

}  // namespace bigjump
