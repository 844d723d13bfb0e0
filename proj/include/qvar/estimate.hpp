#pragma once

// Maximum-likelihood fit of q-Gaussian parameters to a return series, with
// asymptotic confidence intervals for q from the observed information matrix.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qvar/errors.hpp"
#include "qvar/optimize.hpp"
#include "qvar/qgaussian.hpp"

namespace qvar {

/// How the escort width is treated during the fit.
///   free: sigma_q is estimated jointly with q.
///   unit: sigma_q is held at 1, so only q is estimated. On unit-variance
///         normalized returns this is the convention behind the published
///         back-test tables.
enum class ScaleMode { free, unit };

inline const char* to_string(ScaleMode m) { return m == ScaleMode::free ? "free" : "unit"; }

struct FitOptions {
    ScaleMode scale = ScaleMode::free;
    double q_min = 1.0 + 1e-6;
    double q_max = 3.0 - 1e-6;
    double sigma_min = 1e-6;
    // Coarse stage: q = grid_lo, grid_lo + grid_step, ..., grid_hi.
    double grid_lo = 1.01;
    double grid_hi = 2.5;
    double grid_step = 0.01;
    // When set the coarse grid is skipped and the polish starts here.
    std::optional<QGaussianParams> start;
    int max_iterations = 4000;
    std::size_t min_observations = 100;
    // Skip the information-matrix interval (q_stderr and the CI are then NaN).
    bool compute_interval = true;
    // Finite-difference steps for the information matrix: h_q and h_sigma / sigma_q.
    double hessian_step_q = 1e-4;
    double hessian_step_sigma_rel = 1e-4;
};

struct ConfidenceInterval {
    double low;
    double high;
};

struct FisherInterval {
    double q_stderr;
    ConfidenceInterval q_ci_95;
};

struct FitResult {
    QGaussianParams params;
    double q_stderr;
    ConfidenceInterval q_ci_95;
    double log_likelihood;
    std::size_t n_obs;
    ScaleMode scale = ScaleMode::free;
};

inline constexpr double kConfidenceMultiplier95 = 1.96;

/// Sum of log densities. Evaluates the normalization once.
inline double log_likelihood(std::span<const double> xs, const QGaussianParams& p) {
    const double q = p.q();
    const double s = p.sigma_q();
    const double c = (q - 1.0) / ((3.0 - q) * s * s);
    double acc = 0.0;
    for (const double x : xs) acc += std::log1p(c * x * x);
    return -acc / (q - 1.0) - static_cast<double>(xs.size()) * qgauss::log_normalization(p);
}

namespace detail {

inline double robust_scale(std::span<const double> xs) {
    std::vector<double> a(xs.begin(), xs.end());
    const std::size_t mid = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + mid, a.end());
    const double med = a[mid];
    for (double& v : a) v = std::fabs(v - med);
    std::nth_element(a.begin(), a.begin() + mid, a.end());
    double s = 1.4826 * a[mid];
    if (s > 0.0) return s;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

// Log-likelihood on the optimizer's coordinates (q, ln sigma); -inf outside the box.
struct Objective {
    std::span<const double> xs;
    const FitOptions& opts;

    double operator()(double q, double sigma) const {
        if (!(q > opts.q_min && q < opts.q_max) || !(sigma > opts.sigma_min) || !std::isfinite(sigma)) {
            return -std::numeric_limits<double>::infinity();
        }
        return log_likelihood(xs, QGaussianParams(q, sigma));
    }
};

struct Point {
    double q;
    double sigma;
    double value;
};

inline Point profile_sigma(const Objective& obj, double q, double scale) {
    const double lo = std::log(std::max(scale * 1e-3, obj.opts.sigma_min * 1.0001));
    const double hi = std::log(scale * 10.0);
    const auto g = optimize::golden_max([&](double ls) { return obj(q, std::exp(ls)); }, lo, hi, 1e-4);
    return {q, std::exp(g.x), g.value};
}

inline Point polish_unit(const Objective& obj, double center, double half_width) {
    double lo = std::max(obj.opts.q_min, center - half_width);
    double hi = std::min(obj.opts.q_max, center + half_width);
    for (int shifts = 0; shifts < 200; ++shifts) {
        const auto g = optimize::golden_max([&](double q) { return obj(q, 1.0); }, lo, hi, 1e-10);
        const double edge_tol = 1e-8;
        const double width = hi - lo;
        if (g.x - lo < edge_tol && lo > obj.opts.q_min) {
            hi = lo + 0.1 * width;
            lo = std::max(obj.opts.q_min, lo - width);
            continue;
        }
        if (hi - g.x < edge_tol && hi < obj.opts.q_max) {
            lo = hi - 0.1 * width;
            hi = std::min(obj.opts.q_max, hi + width);
            continue;
        }
        return {g.x, 1.0, g.value};
    }
    throw EstimationError("fit_mle: q search did not settle", center, 1.0, obj(center, 1.0));
}

}  // namespace detail

/// Standard error of q and the 1.96-sigma interval from the observed
/// information (negative Hessian of the total log-likelihood by central
/// differences). In unit mode the information is the scalar d2l/dq2.
/// Stencils that would leave the parameter domain are shifted inward.
inline FisherInterval fisher_ci(std::span<const double> xs, const QGaussianParams& p,
                                ScaleMode scale = ScaleMode::free, const FitOptions& opts = {}) {
    const double h = opts.hessian_step_q;
    const double qc = std::clamp(p.q(), 1.0 + 1.5 * h, 3.0 - 1.5 * h);
    const auto ll = [&](double q, double s) { return log_likelihood(xs, QGaussianParams(q, s)); };

    double var_q;
    if (scale == ScaleMode::unit) {
        const double s = p.sigma_q();
        const double iqq = -(ll(qc + h, s) - 2.0 * ll(qc, s) + ll(qc - h, s)) / (h * h);
        if (!(iqq > 0.0) || !std::isfinite(iqq)) {
            throw NumericError("fisher_ci: observed information is not positive");
        }
        var_q = 1.0 / iqq;
    } else {
        const double s = p.sigma_q();
        const double k = opts.hessian_step_sigma_rel * s;
        const double f0 = ll(qc, s);
        const double iqq = -(ll(qc + h, s) - 2.0 * f0 + ll(qc - h, s)) / (h * h);
        const double iss = -(ll(qc, s + k) - 2.0 * f0 + ll(qc, s - k)) / (k * k);
        const double iqs = -(ll(qc + h, s + k) - ll(qc + h, s - k) - ll(qc - h, s + k) + ll(qc - h, s - k)) / (4.0 * h * k);
        const double det = iqq * iss - iqs * iqs;
        if (!(iqq > 0.0) || !(det > 0.0) || !std::isfinite(det)) {
            throw NumericError("fisher_ci: observed information matrix is not positive definite");
        }
        var_q = iss / det;
    }
    const double se = std::sqrt(var_q);
    const double half = kConfidenceMultiplier95 * se;
    return {se, {std::max(p.q() - half, opts.q_min), std::min(p.q() + half, opts.q_max)}};
}

/// Maximum-likelihood (q, sigma_q). Coarse grid over q with sigma profiled by
/// golden section, then a Nelder-Mead polish in (q, ln sigma). In unit mode
/// the polish is a 1-D golden search with sigma_q = 1.
inline FitResult fit_mle(std::span<const double> xs, const FitOptions& opts = {}) {
    if (xs.size() < opts.min_observations) {
        throw DataError("fit_mle: need at least " + std::to_string(opts.min_observations) + " observations, got " +
                        std::to_string(xs.size()));
    }
    for (const double x : xs) {
        if (!std::isfinite(x)) throw DataError("fit_mle: non-finite return value");
    }
    const detail::Objective obj{xs, opts};

    detail::Point best{0.0, 0.0, -std::numeric_limits<double>::infinity()};
    if (opts.scale == ScaleMode::unit) {
        if (opts.start) {
            best = detail::polish_unit(obj, std::clamp(opts.start->q(), opts.q_min, opts.q_max), 0.02);
        } else {
            double grid_best_q = opts.grid_lo;
            double grid_best = -std::numeric_limits<double>::infinity();
            const int steps = static_cast<int>(std::round((opts.grid_hi - opts.grid_lo) / opts.grid_step));
            for (int i = 0; i <= steps; ++i) {
                const double q = opts.grid_lo + i * opts.grid_step;
                const double v = obj(q, 1.0);
                if (v > grid_best) {
                    grid_best = v;
                    grid_best_q = q;
                }
            }
            best = detail::polish_unit(obj, grid_best_q, opts.grid_step);
        }
    } else {
        const double scale = detail::robust_scale(xs);
        if (!(scale > 0.0)) throw DataError("fit_mle: series has zero dispersion");
        detail::Point start{};
        if (opts.start) {
            start = {opts.start->q(), opts.start->sigma_q(), obj(opts.start->q(), opts.start->sigma_q())};
        } else {
            start.value = -std::numeric_limits<double>::infinity();
            const int steps = static_cast<int>(std::round((opts.grid_hi - opts.grid_lo) / opts.grid_step));
            for (int i = 0; i <= steps; ++i) {
                const double q = opts.grid_lo + i * opts.grid_step;
                if (!(q > opts.q_min && q < opts.q_max)) continue;
                const auto pt = detail::profile_sigma(obj, q, scale);
                if (pt.value > start.value) start = pt;
            }
        }
        const auto f = [&](const std::array<double, 2>& v) { return obj(v[0], std::exp(v[1])); };
        const std::array<double, 2> x0{start.q, std::log(start.sigma)};
        const double dq = std::min(0.01, 0.5 * (start.q - opts.q_min) + 1e-7);
        optimize::SimplexOptions so;
        so.max_iterations = opts.max_iterations;
        auto res = optimize::nelder_mead_max<2>(f, x0, {dq, 0.01}, so);
        // One restart from the reported optimum guards against a collapsed simplex.
        if (res.converged) {
            res = optimize::nelder_mead_max<2>(f, res.x, {std::min(0.001, 0.5 * (res.x[0] - opts.q_min) + 1e-8), 0.001}, so);
        }
        if (!res.converged) {
            throw EstimationError("fit_mle: Nelder-Mead did not converge within " + std::to_string(opts.max_iterations) +
                                      " iterations",
                                  res.x[0], std::exp(res.x[1]), res.value);
        }
        best = {res.x[0], std::exp(res.x[1]), res.value};
    }

    const QGaussianParams params(best.q, best.sigma);
    if (!opts.compute_interval) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {params, nan, {nan, nan}, best.value, xs.size(), opts.scale};
    }
    const auto ci = fisher_ci(xs, params, opts.scale, opts);
    return {params, ci.q_stderr, ci.q_ci_95, best.value, xs.size(), opts.scale};
}

}  // namespace qvar
