#pragma once

// Scalar special functions used by the q-Gaussian family: log-gamma, beta,
// the regularized incomplete beta function, and the standard normal CDF and
// quantile. All functions are pure and safe to call concurrently.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qvar/errors.hpp"

namespace qvar::special {

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
    }
#if defined(__GLIBC__)
    // lgamma_r does not touch the global signgam.
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

namespace detail {

// Stirling remainder ln Gamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)], x >= 20.
inline double stirling_remainder(double x) {
    const double r = 1.0 / x;
    const double r2 = r * r;
    return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
}

// ln Gamma(a) - ln Gamma(a + b) for a >= 20, without subtracting two large
// log-gamma values.
inline double log_gamma_difference(double a, double b) {
    return -b * std::log(a) - (a + b - 0.5) * std::log1p(b / a) + b + stirling_remainder(a) - stirling_remainder(a + b);
}

}  // namespace detail

/// ln B(a, b). When one argument is large the difference of log-gamma values
/// is formed directly so that the result keeps full relative precision.
inline double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("beta: arguments must be positive");
    }
    const double big = std::max(a, b);
    const double small = std::min(a, b);
    if (big >= 20.0) return log_gamma(small) + detail::log_gamma_difference(big, small);
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b), evaluated in log space.
inline double beta(double a, double b) { return std::exp(log_beta(a, b)); }

namespace detail {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
// Converges quickly for x < (a + 1) / (a + b + 2).
inline double ibeta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    constexpr int max_iter = 10000;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw NumericError("reg_inc_beta: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so callers that know y exactly
// (e.g. y = t^2 / (nu + t^2)) keep full precision near x = 1.
inline double ibeta(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * ibeta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(log_front) * ibeta_continued_fraction(b, a, y) / b;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1.
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("reg_inc_beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("reg_inc_beta: x must lie in [0, 1], got " + std::to_string(x));
    }
    return detail::ibeta(a, b, x, 1.0 - x);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi^{-1}(p): Acklam's rational approximation followed by one Halley step
/// against erfc, which brings the result to double precision.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("std_normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement. Work on the smaller tail to avoid cancellation.
    double e;
    if (p < 0.5) {
        e = std_normal_cdf(x) - p;
    } else {
        e = (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    }
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace qvar::special
