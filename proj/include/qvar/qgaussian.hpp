#pragma once

// The q-Gaussian density for 1 < q < 3,
//
//   P(x) = (1/Z) * (1 - (1-q)/(3-q) * x^2/sigma^2)_+ ^ (1/(1-q)),
//   Z    = sqrt((3-q)/(q-1) * sigma^2) * B((3-q)/(2(q-1)), 1/2),
//
// where sigma is the width fixed by the escort second moment. On this branch
// the density is a Student-t with nu = (3-q)/(q-1) degrees of freedom
// rescaled by sigma, which is how the CDF, quantile and sampler work.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qvar/errors.hpp"
#include "qvar/oracle.hpp"
#include "qvar/special_fn.hpp"

namespace qvar {

/// Shape q and escort width sigma_q of a q-Gaussian. Immutable; the
/// constructor enforces 1 < q < 3 and sigma_q > 0.
class QGaussianParams {
public:
    QGaussianParams(double q, double sigma_q) : q_(q), sigma_q_(sigma_q) {
        if (!(q > 1.0 && q < 3.0)) {
            throw DomainError("q-Gaussian: q must lie in (1, 3), got " + std::to_string(q));
        }
        if (!(sigma_q > 0.0) || !std::isfinite(sigma_q)) {
            throw DomainError("q-Gaussian: sigma_q must be positive, got " + std::to_string(sigma_q));
        }
    }

    double q() const noexcept { return q_; }
    double sigma_q() const noexcept { return sigma_q_; }

    /// Degrees of freedom of the equivalent Student-t.
    double nu() const noexcept { return (3.0 - q_) / (q_ - 1.0); }

    friend bool operator==(const QGaussianParams&, const QGaussianParams&) = default;

private:
    double q_;
    double sigma_q_;
};

namespace qgauss {

inline double log_normalization(const QGaussianParams& p) {
    const double q = p.q();
    const double s = p.sigma_q();
    return 0.5 * std::log((3.0 - q) / (q - 1.0) * s * s) + special::log_beta((3.0 - q) / (2.0 * (q - 1.0)), 0.5);
}

/// Z_q.
inline double normalization(const QGaussianParams& p) { return std::exp(log_normalization(p)); }

namespace detail {

// ln(1 + c x^2) without overflowing x^2 for |x| beyond ~1e154.
inline double log1p_cx2(double c, double x) {
    const double ax = std::fabs(x);
    if (ax > 1e100) return std::log(c) + 2.0 * std::log(ax) + std::log1p(1.0 / (c * ax * ax));
    return std::log1p(c * x * x);
}

}  // namespace detail

inline double pdf(double x, const QGaussianParams& p) {
    const double q = p.q();
    const double s = p.sigma_q();
    if (std::fabs(x) > 1e100) {
        return std::exp(-detail::log1p_cx2((q - 1.0) / ((3.0 - q) * s * s), x) / (q - 1.0) - log_normalization(p));
    }
    // The positive-part clamp only bites for q < 1, which the parameter type excludes.
    const double base = std::max(0.0, 1.0 - (1.0 - q) / (3.0 - q) * x * x / (s * s));
    return std::pow(base, 1.0 / (1.0 - q)) / normalization(p);
}

/// ln P(x), computed with log1p so the far tails neither underflow nor lose digits.
inline double log_pdf(double x, const QGaussianParams& p) {
    const double q = p.q();
    const double s = p.sigma_q();
    return -detail::log1p_cx2((q - 1.0) / ((3.0 - q) * s * s), x) / (q - 1.0) - log_normalization(p);
}

/// Student-t density with nu degrees of freedom. Second evaluation path for pdf().
inline double student_t_pdf(double t, double nu) {
    const double log_c = special::log_gamma(0.5 * (nu + 1.0)) - special::log_gamma(0.5 * nu) -
                         0.5 * std::log(nu * std::numbers::pi);
    return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

/// Ordinary variance sigma_q^2 (3-q)/(5-3q); +inf for q >= 5/3.
inline double ordinary_variance(const QGaussianParams& p) {
    const double q = p.q();
    if (q >= 5.0 / 3.0) return std::numeric_limits<double>::infinity();
    return p.sigma_q() * p.sigma_q() * (3.0 - q) / (5.0 - 3.0 * q);
}

/// sigma_q that gives unit ordinary variance at shape q (q < 5/3).
inline double sigma_for_unit_variance(double q) {
    if (!(q > 1.0 && q < 5.0 / 3.0)) {
        throw DomainError("sigma_for_unit_variance: variance is finite only for 1 < q < 5/3");
    }
    return std::sqrt((5.0 - 3.0 * q) / (3.0 - q));
}

namespace detail {

// P(X <= x) for x <= 0 through the incomplete beta form of the Student-t CDF.
inline double lower_tail(double x, const QGaussianParams& p) {
    const double nu = p.nu();
    const double t = x / p.sigma_q();
    const double t2 = t * t;
    const double w = nu / (nu + t2);
    const double v = t2 / (nu + t2);
    return 0.5 * special::detail::ibeta(0.5 * nu, 0.5, w, v);
}

}  // namespace detail

/// P(X <= x).
inline double cdf(double x, const QGaussianParams& p) {
    if (std::isnan(x)) throw DomainError("q-Gaussian cdf: NaN argument");
    if (x <= 0.0) return detail::lower_tail(x, p);
    return 1.0 - detail::lower_tail(-x, p);
}

/// Inverse CDF. Brackets the root by doubling, then alternates secant steps
/// with bisection whenever a secant step fails to halve the bracket.
inline double quantile(double prob, const QGaussianParams& p) {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw DomainError("q-Gaussian quantile: p must lie in (0, 1), got " + std::to_string(prob));
    }
    if (prob == 0.5) return 0.0;
    if (prob > 0.5) return -quantile(1.0 - prob, p);

    // Lower tail: find x < 0 with lower_tail(x) = prob.
    const auto f = [&](double x) { return detail::lower_tail(x, p) - prob; };
    double hi = 0.0;
    double f_hi = 0.5 - prob;
    double lo = -p.sigma_q();
    double f_lo = f(lo);
    while (f_lo > 0.0) {
        hi = lo;
        f_hi = f_lo;
        lo *= 2.0;
        if (!std::isfinite(lo)) throw NumericError("q-Gaussian quantile: bracket expansion overflowed");
        f_lo = f(lo);
    }
    if (f_lo == 0.0) return lo;

    bool bisect_next = false;
    double prev_width = hi - lo;
    for (int iter = 0; iter < 400; ++iter) {
        double mid;
        if (bisect_next || f_hi == f_lo) {
            mid = 0.5 * (lo + hi);
        } else {
            mid = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        }
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (fm < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
        const double width = hi - lo;
        if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(lo)) break;
        bisect_next = width > 0.5 * prev_width;
        prev_width = width;
    }
    return std::fabs(f_lo) < std::fabs(f_hi) ? lo : hi;
}

/// Draws from q-Gaussians of varying parameters off one seeded engine, as
/// sigma_q * Z / sqrt(V / nu) with Z standard normal and V chi-square(nu).
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double operator()(const QGaussianParams& p) {
        const double nu = p.nu();
        const double z = normal_(rng_);
        std::chi_squared_distribution<double> chi2(nu);
        const double v = chi2(rng_);
        return p.sigma_q() * z / std::sqrt(v / nu);
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// n i.i.d. draws; deterministic for a given seed.
inline std::vector<double> sample(std::size_t n, const QGaussianParams& p, std::uint64_t seed) {
    if (n == 0) throw DomainError("q-Gaussian sample: n must be positive");
    Sampler draw(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(draw(p));
    return out;
}

/// Tsallis entropy S_q = (1 - integral of P^q) / (q - 1), by quadrature.
inline double tsallis_entropy(const QGaussianParams& p, double tol = 1e-12) {
    const double q = p.q();
    const double log_z = log_normalization(p);
    const double s = p.sigma_q();
    const double c = (q - 1.0) / ((3.0 - q) * s * s);
    const auto pq = [&](double x) { return std::exp(q * (-detail::log1p_cx2(c, x) / (q - 1.0) - log_z)); };
    // P^q decays like |x|^(-2q/(q-1)).
    const double tail = 2.0 * q / (q - 1.0);
    const double integral = oracle::integrate_real_line(pq, s, tail, tol);
    return (1.0 - integral) / (q - 1.0);
}

}  // namespace qgauss
}  // namespace qvar
