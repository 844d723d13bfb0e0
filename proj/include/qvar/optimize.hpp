#pragma once

// Small derivative-free optimizers used by the likelihood fit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace qvar::optimize {

struct GoldenResult {
    double x;
    double value;
};

/// Maximizes a unimodal f on [lo, hi] by golden-section search.
template <class F>
GoldenResult golden_max(F&& f, double lo, double hi, double x_tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > x_tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x;
    double value;
    int iterations;
    bool converged;
};

struct SimplexOptions {
    int max_iterations = 2000;
    double f_tol = 1e-11;  // relative spread of function values
    double x_tol = 1e-9;   // absolute simplex diameter
};

/// Nelder-Mead maximization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// Infeasible points should return -inf.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead_max(F&& f, const std::array<double, N>& start, const std::array<double, N>& step,
                                 const SimplexOptions& opts = {}) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> pts;
    std::array<double, N + 1> vals;
    pts[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1] = start;
        pts[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= N; ++i) vals[i] = f(pts[i]);

    const auto order = [&] {
        std::array<std::size_t, N + 1> idx;
        for (std::size_t i = 0; i <= N; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
        std::array<Point, N + 1> p2;
        std::array<double, N + 1> v2;
        for (std::size_t i = 0; i <= N; ++i) {
            p2[i] = pts[idx[i]];
            v2[i] = vals[idx[i]];
        }
        pts = p2;
        vals = v2;
    };
    const auto along = [](const Point& from, const Point& to, double t) {
        Point r;
        for (std::size_t i = 0; i < N; ++i) r[i] = from[i] + t * (to[i] - from[i]);
        return r;
    };

    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        order();
        double diameter = 0.0;
        for (std::size_t i = 1; i <= N; ++i) {
            for (std::size_t k = 0; k < N; ++k) diameter = std::max(diameter, std::fabs(pts[i][k] - pts[0][k]));
        }
        const double spread = std::fabs(vals[0] - vals[N]);
        if (std::isfinite(vals[N]) && spread <= opts.f_tol * (std::fabs(vals[0]) + 1e-30) && diameter <= opts.x_tol) {
            return {pts[0], vals[0], iter, true};
        }

        Point centroid{};
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t k = 0; k < N; ++k) centroid[k] += pts[i][k] / static_cast<double>(N);
        }
        const Point reflected = along(centroid, pts[N], -1.0);
        const double fr = f(reflected);
        if (fr > vals[0]) {
            const Point expanded = along(centroid, pts[N], -2.0);
            const double fe = f(expanded);
            if (fe > fr) {
                pts[N] = expanded;
                vals[N] = fe;
            } else {
                pts[N] = reflected;
                vals[N] = fr;
            }
            continue;
        }
        if (fr > vals[N - 1]) {
            pts[N] = reflected;
            vals[N] = fr;
            continue;
        }
        const bool outside = fr > vals[N];
        const Point contracted = outside ? along(centroid, pts[N], -0.5) : along(centroid, pts[N], 0.5);
        const double fc = f(contracted);
        if (fc > (outside ? fr : vals[N])) {
            pts[N] = contracted;
            vals[N] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= N; ++i) {
            pts[i] = along(pts[0], pts[i], 0.5);
            vals[i] = f(pts[i]);
        }
    }
    order();
    return {pts[0], vals[0], iter, false};
}

}  // namespace qvar::optimize
