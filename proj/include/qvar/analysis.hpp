#pragma once

// Rolling difference between q-Gaussian and Gaussian VaR with a mean + 1 std
// crisis threshold, and the same difference across aggregation timescales.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qvar/errors.hpp"
#include "qvar/estimate.hpp"
#include "qvar/risk.hpp"
#include "qvar/series.hpp"

namespace qvar {

struct DateRange {
    Date from;
    Date to;

    friend bool operator==(const DateRange&, const DateRange&) = default;
};

inline bool intersects(const DateRange& a, const DateRange& b) { return a.from <= b.to && b.from <= a.to; }

struct RollingOptions {
    int window_days = 250;
    // Reuse the previous window's q as the search start.
    bool warm_start = true;
    double max_failed_fraction = 0.2;
    FitOptions fit = [] {
        FitOptions o = pipeline_fit_options();
        o.q_min = 1.001;
        o.q_max = 2.9;
        o.compute_interval = false;
        o.min_observations = 2;
        return o;
    }();
};

struct RollingDiffSeries {
    std::string index_name;
    double alpha;
    int window_days;
    // Window end dates; one entry per window position.
    std::vector<Date> dates;
    // q-VaR minus Gaussian VaR in percent; empty where the window fit failed.
    std::vector<std::optional<double>> diff_values;
    std::vector<std::optional<double>> q_values;
    double mean_line;
    double std_line;  // mean_line + sample std of diff_values
    std::vector<DateRange> crossings;

    std::size_t gaps() const {
        return static_cast<std::size_t>(std::count(diff_values.begin(), diff_values.end(), std::nullopt));
    }
};

/// Mean, mean + 1 sample std and threshold crossings from a diff series.
/// Crossings are maximal runs of consecutive windows whose diff exceeds the
/// threshold; a gap ends a run.
inline void summarize(RollingDiffSeries& s) {
    std::vector<double> present;
    for (const auto& v : s.diff_values) {
        if (v) present.push_back(*v);
    }
    if (present.empty()) throw DataError("rolling_diff: no window produced a value");
    s.mean_line = sample_mean(present);
    s.std_line = s.mean_line + sample_stddev(present);
    s.crossings.clear();
    std::optional<DateRange> run;
    for (std::size_t i = 0; i < s.diff_values.size(); ++i) {
        const bool flagged = s.diff_values[i] && *s.diff_values[i] > s.std_line;
        if (flagged) {
            if (run) {
                run->to = s.dates[i];
            } else {
                run = DateRange{s.dates[i], s.dates[i]};
            }
        } else if (run) {
            s.crossings.push_back(*run);
            run.reset();
        }
    }
    if (run) s.crossings.push_back(*run);
}

/// Slides a window over daily log-returns (step one day). Each window is
/// normalized and fitted on its own; both VaRs are computed on the window's
/// raw returns and their difference is recorded at the window's last date.
inline RollingDiffSeries rolling_diff(const PriceSeries& prices, double alpha, const RollingOptions& opts = {}) {
    if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError("rolling_diff: alpha must lie in (0.5, 1)");
    if (opts.window_days < 2) throw DomainError("rolling_diff: window must hold at least 2 returns");
    const ReturnSeries daily = log_returns(prices);
    const std::size_t w = static_cast<std::size_t>(opts.window_days);
    if (daily.size() < w) {
        throw DataError("rolling_diff: window of " + std::to_string(w) + " days exceeds the " +
                        std::to_string(daily.size()) + " available returns");
    }

    RollingDiffSeries out;
    out.index_name = prices.index_name();
    out.alpha = alpha;
    out.window_days = opts.window_days;
    const std::size_t n_windows = daily.size() - w + 1;
    out.dates.reserve(n_windows);
    out.diff_values.reserve(n_windows);
    out.q_values.reserve(n_windows);

    std::optional<QGaussianParams> previous;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < n_windows; ++i) {
        ReturnSeries win;
        win.index_name = daily.index_name;
        win.scale_days = 1;
        win.dates.assign(daily.dates.begin() + i, daily.dates.begin() + i + w);
        win.values.assign(daily.values.begin() + i, daily.values.begin() + i + w);
        win.mu_r = sample_mean(win.values);
        win.sigma_r = sample_stddev(win.values);
        out.dates.push_back(win.dates.back());
        try {
            const ReturnSeries norm = normalize(win);
            FitOptions fo = opts.fit;
            if (opts.warm_start && previous) fo.start = previous;
            const FitResult fit = fit_mle(norm.values, fo);
            const double diff = var_q(win, fit, alpha).var_percent - var_gaussian(win, alpha).var_percent;
            out.diff_values.push_back(diff);
            out.q_values.push_back(fit.params.q());
            previous = fit.params;
        } catch (const std::runtime_error&) {
            out.diff_values.push_back(std::nullopt);
            out.q_values.push_back(std::nullopt);
            ++failures;
        }
    }
    if (static_cast<double>(failures) > opts.max_failed_fraction * static_cast<double>(n_windows)) {
        throw NumericError("rolling_diff: " + std::to_string(failures) + " of " + std::to_string(n_windows) +
                           " window fits failed");
    }
    summarize(out);
    return out;
}

enum class PeriodLabel { pre_crisis, crisis, post_crisis, custom };

struct Period {
    PeriodLabel label;
    DateRange range;
};

inline const char* to_string(PeriodLabel p) {
    switch (p) {
        case PeriodLabel::pre_crisis: return "pre_crisis";
        case PeriodLabel::crisis: return "crisis";
        case PeriodLabel::post_crisis: return "post_crisis";
        case PeriodLabel::custom: return "custom";
    }
    return "custom";
}

inline Date make_date(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline Period pre_crisis_period() { return {PeriodLabel::pre_crisis, {make_date(2004, 1, 1), make_date(2006, 12, 31)}}; }
inline Period crisis_period() { return {PeriodLabel::crisis, {make_date(2007, 1, 1), make_date(2009, 12, 31)}}; }
inline Period post_crisis_period() { return {PeriodLabel::post_crisis, {make_date(2010, 1, 1), make_date(2012, 12, 31)}}; }

inline constexpr const char* kPeriodLabels = "pre_crisis, crisis, post_crisis";

/// Named period; throws DomainError listing the valid labels otherwise.
inline Period period_from_label(const std::string& label) {
    if (label == "pre_crisis") return pre_crisis_period();
    if (label == "crisis") return crisis_period();
    if (label == "post_crisis") return post_crisis_period();
    throw DomainError("unknown period '" + label + "'; valid labels: " + kPeriodLabels);
}

struct ScalePoint {
    int scale_days;
    std::size_t n_obs;
    double q;
    double var_q_percent;
    double var_gaussian_percent;
    double diff;
};

struct ScaleGrid {
    std::string index_name;
    double alpha;
    Period period;
    std::vector<ScalePoint> points;
    std::vector<std::string> warnings;
};

struct ScaleGridOptions {
    // Fewer aggregated returns than this and the scale is skipped with a warning.
    std::size_t min_observations = 30;
    FitOptions fit = [] {
        FitOptions o = pipeline_fit_options();
        o.compute_interval = false;
        return o;
    }();
};

/// For each k: k-day block sums of the daily returns inside the period,
/// normalized and fitted, and the q-VaR minus Gaussian VaR difference.
inline ScaleGrid scale_grid(const PriceSeries& prices, double alpha, const Period& period, std::span<const int> scales,
                            const ScaleGridOptions& opts = {}) {
    if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError("scale_grid: alpha must lie in (0.5, 1)");
    std::vector<int> ks(scales.begin(), scales.end());
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (const int k : ks) {
        if (k < 1 || k > kMaxScaleDays) throw DomainError("scale_grid: scales must lie in [1, 60]");
    }
    const ReturnSeries daily = slice(log_returns(prices), period.range.from, period.range.to);

    ScaleGrid grid{prices.index_name(), alpha, period, {}, {}};
    for (const int k : ks) {
        const std::size_t n_blocks = daily.size() / static_cast<std::size_t>(k);
        if (n_blocks < opts.min_observations || n_blocks < 2) {
            grid.warnings.push_back("scale " + std::to_string(k) + ": only " + std::to_string(n_blocks) +
                                    " returns in period, skipped");
            continue;
        }
        const ReturnSeries agg = aggregate_scale(daily, k);
        try {
            const ReturnSeries norm = normalize(agg);
            FitOptions fo = opts.fit;
            fo.min_observations = std::min(fo.min_observations, opts.min_observations);
            const FitResult fit = fit_mle(norm.values, fo);
            const auto vq = var_q(agg, fit, alpha);
            const auto vg = var_gaussian(agg, alpha);
            grid.points.push_back({k, agg.size(), fit.params.q(), vq.var_percent, vg.var_percent,
                                   vq.var_percent - vg.var_percent});
        } catch (const std::runtime_error& e) {
            grid.warnings.push_back("scale " + std::to_string(k) + ": " + e.what());
        }
    }
    return grid;
}

}  // namespace qvar
