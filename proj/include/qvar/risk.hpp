#pragma once

// Value-at-Risk under the Gaussian and q-Gaussian models, and in-sample
// violation back-tests.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qvar/errors.hpp"
#include "qvar/estimate.hpp"
#include "qvar/qgaussian.hpp"
#include "qvar/series.hpp"
#include "qvar/special_fn.hpp"

namespace qvar {

enum class VarModel { gaussian, q_gaussian };

inline const char* to_string(VarModel m) { return m == VarModel::gaussian ? "gaussian" : "q-gaussian"; }

struct VarEstimate {
    VarModel model;
    double alpha;
    int horizon_days;
    double var_percent;
    double mu;     // raw-return mean used for the location
    double sigma;  // raw-return standard deviation used for the scale
    std::optional<QGaussianParams> q_params;
};

struct BacktestReport {
    std::size_t violations;
    std::size_t n_obs;
    double violation_ratio;
    double alpha;
    VarModel model;
};

/// Fit settings used by the VaR pipelines: sigma_q = 1 on normalized returns.
inline FitOptions pipeline_fit_options() {
    FitOptions o;
    o.scale = ScaleMode::unit;
    return o;
}

namespace detail {

inline void check_alpha(double alpha) {
    if (!(alpha >= 0.5 && alpha < 1.0)) {
        throw DomainError("confidence level must lie in [0.5, 1), got " + std::to_string(alpha));
    }
}

inline void check_moments(const ReturnSeries& r) {
    if (r.size() < 2 || !(r.sigma_r > 0.0) || !std::isfinite(r.sigma_r) || !std::isfinite(r.mu_r)) {
        throw DataError("VaR: degenerate return series (need at least 2 values and positive variance)");
    }
}

}  // namespace detail

/// VaR = -(mu_r + sigma_r * Phi^{-1}(1 - alpha)), in percent.
inline VarEstimate var_gaussian(const ReturnSeries& returns, double alpha) {
    detail::check_alpha(alpha);
    detail::check_moments(returns);
    const double z = alpha == 0.5 ? 0.0 : special::std_normal_quantile(1.0 - alpha);
    const double var = -(returns.mu_r + returns.sigma_r * z) * 100.0;
    return {VarModel::gaussian, alpha, returns.scale_days, var, returns.mu_r, returns.sigma_r, std::nullopt};
}

/// VaR from the fitted q-Gaussian (1 - alpha) quantile of the normalized
/// returns, mapped back to raw units: -(mu_r + sigma_r * x_q), in percent.
inline VarEstimate var_q(const ReturnSeries& returns, const FitResult& fit, double alpha) {
    detail::check_alpha(alpha);
    detail::check_moments(returns);
    if (fit.n_obs != returns.size()) {
        throw DataError("var_q: fit was produced from a series of different length");
    }
    const double x = alpha == 0.5 ? 0.0 : qgauss::quantile(1.0 - alpha, fit.params);
    const double var = -(returns.mu_r + returns.sigma_r * x) * 100.0;
    return {VarModel::q_gaussian, alpha, returns.scale_days, var, returns.mu_r, returns.sigma_r, fit.params};
}

/// Counts raw returns strictly below -VaR.
inline BacktestReport backtest(const ReturnSeries& returns, const VarEstimate& var) {
    if (returns.normalized) throw DataError("backtest: expects raw (unnormalized) returns");
    if (returns.scale_days != var.horizon_days) {
        throw DataError("backtest: series timescale " + std::to_string(returns.scale_days) +
                        " does not match VaR horizon " + std::to_string(var.horizon_days));
    }
    if (returns.size() == 0) throw DataError("backtest: empty series");
    const double threshold = -var.var_percent / 100.0;
    std::size_t violations = 0;
    for (const double r : returns.values) {
        if (r < threshold) ++violations;
    }
    return {violations, returns.size(),
            static_cast<double>(violations) / static_cast<double>(returns.size()), var.alpha, var.model};
}

struct BacktestRow {
    double alpha;
    VarModel model;
    VarEstimate var;
    BacktestReport report;
};

struct BacktestTable {
    std::string index_name;
    std::size_t n_prices;
    FitResult fit;
    std::vector<BacktestRow> rows;
};

inline const std::vector<double>& default_alphas() {
    static const std::vector<double> alphas{0.95, 0.96, 0.97, 0.98};
    return alphas;
}

/// Daily returns, normalize, fit once, then both models at every alpha.
/// Rows come in table order: q-Gaussian then Gaussian for each alpha.
inline BacktestTable backtest_table(const PriceSeries& prices, std::span<const double> alphas,
                                    const FitOptions& fit_opts = pipeline_fit_options()) {
    for (const double a : alphas) {
        if (!(a > 0.5 && a < 1.0)) throw DomainError("backtest_table: alphas must lie in (0.5, 1)");
    }
    const ReturnSeries raw = log_returns(prices);
    const ReturnSeries norm = normalize(raw);
    const FitResult fit = fit_mle(norm.values, fit_opts);

    BacktestTable table{prices.index_name(), prices.size(), fit, {}};
    table.rows.reserve(alphas.size() * 2);
    for (const double a : alphas) {
        const auto vq = var_q(raw, fit, a);
        table.rows.push_back({a, VarModel::q_gaussian, vq, backtest(raw, vq)});
        const auto vg = var_gaussian(raw, a);
        table.rows.push_back({a, VarModel::gaussian, vg, backtest(raw, vg)});
    }
    return table;
}

}  // namespace qvar
