#pragma once

// Independent numerical checks: adaptive Simpson quadrature, infinite-range
// integration for power-law tails, and the Kolmogorov-Smirnov distance.
// Nothing here depends on the closed-form distribution code it is used to verify.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "qvar/errors.hpp"

namespace qvar::oracle {

struct QuadratureOptions {
    int max_depth = 60;
    std::size_t max_evaluations = 20'000'000;
};

namespace detail {

struct SimpsonState {
    const std::function<double(double)>& f;
    std::size_t evaluations = 0;
    std::size_t budget;
    int max_depth;

    double eval(double x) {
        if (++evaluations > budget) {
            throw NumericError("quad_integrate: evaluation budget exhausted");
        }
        return f(x);
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        // Below the rounding floor further halving cannot improve the estimate.
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(left + right);
        if (std::fabs(delta) <= 15.0 * std::max(tol, floor) || !(a < lm && rm < b)) {
            return left + right + delta / 15.0;
        }
        if (depth >= max_depth) {
            throw NumericError("quad_integrate: subdivision depth exhausted");
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
};

}  // namespace detail

/// Adaptive Simpson estimate of the integral of f over [lo, hi] with
/// estimated absolute error below tol. Throws NumericError when the
/// subdivision depth or evaluation budget runs out.
inline double quad_integrate(const std::function<double(double)>& f, double lo, double hi, double tol,
                             const QuadratureOptions& opts = {}) {
    if (!(tol > 0.0)) throw DomainError("quad_integrate: tol must be positive");
    if (lo == hi) return 0.0;
    if (hi < lo) return -quad_integrate(f, hi, lo, tol, opts);

    detail::SimpsonState st{f, 0, opts.max_evaluations, opts.max_depth};
    // Start from a few panels so that narrow features are not missed by the
    // first five-point estimate.
    constexpr int panels = 8;
    const double width = (hi - lo) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = lo + i * width;
        const double b = (i + 1 == panels) ? hi : a + width;
        const double fa = st.eval(a);
        const double fb = st.eval(b);
        const double fm = st.eval(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += st.recurse(a, b, fa, fm, fb, whole, tol / panels, 0);
    }
    return total;
}

/// Integral of f over [0, inf) for an integrand that decays like x^-tail_exponent
/// (pass +inf for faster-than-power decay). Uses x = scale * cot(d) with
/// d = (pi/2) s^m on s in (0, 1]; m is chosen so the transformed integrand
/// vanishes at s = 0 even when tail_exponent is barely above 1.
inline double integrate_half_line(const std::function<double(double)>& f, double scale, double tail_exponent,
                                  double tol, const QuadratureOptions& opts = {}) {
    if (!(scale > 0.0)) throw DomainError("integrate_half_line: scale must be positive");
    if (!(tail_exponent > 1.0)) throw DomainError("integrate_half_line: integrand must decay faster than 1/x");
    const double m = std::isinf(tail_exponent) ? 1.0 : std::max(1.0, std::ceil(2.0 / (tail_exponent - 1.0)));
    const auto g = [&](double s) -> double {
        if (s <= 0.0) return 0.0;
        const double d = 0.5 * std::numbers::pi * std::pow(s, m);
        if (d <= 0.0) return 0.0;
        const double sd = std::sin(d);
        const double x = scale * std::cos(d) / sd;
        if (!std::isfinite(x)) return 0.0;
        // Jacobian scale / sin^2(d) * dd/ds, applied factor by factor so that it
        // does not overflow before meeting the decaying integrand.
        const double v = (f(x) / sd) * scale * (0.5 * std::numbers::pi * m * std::pow(s, m - 1.0) / sd);
        return std::isfinite(v) ? v : 0.0;
    };
    return quad_integrate(g, 0.0, 1.0, tol, opts);
}

/// Integral of f over the whole real line, split at zero.
inline double integrate_real_line(const std::function<double(double)>& f, double scale, double tail_exponent,
                                  double tol, const QuadratureOptions& opts = {}) {
    const auto neg = [&](double x) { return f(-x); };
    return integrate_half_line(f, scale, tail_exponent, 0.5 * tol, opts) +
           integrate_half_line(neg, scale, tail_exponent, 0.5 * tol, opts);
}

/// sup_x |F_n(x) - F(x)| for the empirical CDF F_n of `sample`.
inline double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ks_statistic: empty sample");
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        const double above = static_cast<double>(i + 1) / n - f;
        const double below = f - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    return d;
}

}  // namespace qvar::oracle
