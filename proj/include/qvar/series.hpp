#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qvar/errors.hpp"

namespace qvar {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date, YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    const auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        const auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
        return r.ec == std::errc{} && r.ptr == s.data() + pos + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

struct PriceObservation {
    Date date;
    double close;
};

/// Closing prices of one index, strictly increasing in date.
class PriceSeries {
public:
    PriceSeries(std::string index_name, std::vector<PriceObservation> obs)
        : index_name_(std::move(index_name)), obs_(std::move(obs)) {
        std::stable_sort(obs_.begin(), obs_.end(),
                         [](const PriceObservation& a, const PriceObservation& b) { return a.date < b.date; });
        for (std::size_t i = 0; i < obs_.size(); ++i) {
            if (!(obs_[i].close > 0.0) || !std::isfinite(obs_[i].close)) {
                throw DataError("price series: non-positive close on " + format_date(obs_[i].date));
            }
            if (i > 0 && obs_[i].date == obs_[i - 1].date) {
                throw DataError("price series: duplicate date " + format_date(obs_[i].date));
            }
        }
    }

    const std::string& index_name() const noexcept { return index_name_; }
    std::span<const PriceObservation> observations() const noexcept { return obs_; }
    std::size_t size() const noexcept { return obs_.size(); }

    /// Copy with every close multiplied by factor.
    PriceSeries scaled(double factor) const {
        auto obs = obs_;
        for (auto& o : obs) o.close *= factor;
        return PriceSeries(index_name_, std::move(obs));
    }

private:
    std::string index_name_;
    std::vector<PriceObservation> obs_;
};

/// Log-returns at a given timescale. When `normalized` is set, values hold
/// (r - mu_r) / sigma_r and mu_r, sigma_r describe the raw series.
struct ReturnSeries {
    std::string index_name;
    int scale_days = 1;
    std::vector<Date> dates;
    std::vector<double> values;
    double mu_r = 0.0;
    double sigma_r = 0.0;
    bool normalized = false;

    std::size_t size() const noexcept { return values.size(); }
};

inline double sample_mean(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation with the n - 1 denominator.
inline double sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = sample_mean(xs);
    double ss = 0.0;
    for (const double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace detail {

inline ReturnSeries make_raw_returns(std::string name, int scale, std::vector<Date> dates, std::vector<double> values) {
    ReturnSeries r;
    r.index_name = std::move(name);
    r.scale_days = scale;
    r.dates = std::move(dates);
    r.values = std::move(values);
    if (!r.values.empty()) r.mu_r = sample_mean(r.values);
    r.sigma_r = sample_stddev(r.values);
    return r;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

/// Reads `date,close` rows (header required, any column order, extra columns
/// ignored). Blank lines are skipped and rows are sorted by date.
inline PriceSeries parse_price_csv(std::istream& in, std::string index_name) {
    std::string line;
    std::size_t row = 0;
    std::optional<std::size_t> date_col;
    std::optional<std::size_t> close_col;
    std::size_t n_cols = 0;
    std::vector<PriceObservation> obs;
    while (std::getline(in, line)) {
        ++row;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto fields = detail::split_commas(text);
        if (!date_col) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const auto name = detail::lower(fields[i]);
                if (name == "date") date_col = i;
                if (name == "close") close_col = i;
            }
            if (!date_col || !close_col) throw ParseError(row, "header must name 'date' and 'close' columns");
            n_cols = fields.size();
            continue;
        }
        if (fields.size() < n_cols) throw ParseError(row, "expected " + std::to_string(n_cols) + " fields");
        const auto date = parse_date(fields[*date_col]);
        if (!date) throw ParseError(row, "malformed date '" + std::string(fields[*date_col]) + "'");
        const auto cs = fields[*close_col];
        double close = 0.0;
        const auto r = std::from_chars(cs.data(), cs.data() + cs.size(), close);
        if (r.ec != std::errc{} || r.ptr != cs.data() + cs.size() || !std::isfinite(close)) {
            throw ParseError(row, "non-numeric close '" + std::string(cs) + "'");
        }
        if (!(close > 0.0)) throw ParseError(row, "close must be positive, got '" + std::string(cs) + "'");
        obs.push_back({*date, close});
    }
    if (!date_col) throw DataError("price csv: missing header row");
    if (obs.size() < 2) throw DataError("price csv: need at least 2 rows, got " + std::to_string(obs.size()));
    return PriceSeries(std::move(index_name), std::move(obs));
}

/// Loads a price CSV; the index name is the file stem.
inline PriceSeries ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("no such input: " + path.string());
    return parse_price_csv(in, path.stem().string());
}

/// r_t = ln(x_t / x_{t-1}), dated by the later observation.
inline ReturnSeries log_returns(const PriceSeries& prices) {
    const auto obs = prices.observations();
    if (obs.size() < 2) throw DataError("log_returns: need at least 2 prices");
    std::vector<Date> dates;
    std::vector<double> values;
    dates.reserve(obs.size() - 1);
    values.reserve(obs.size() - 1);
    for (std::size_t i = 1; i < obs.size(); ++i) {
        dates.push_back(obs[i].date);
        values.push_back(std::log(obs[i].close / obs[i - 1].close));
    }
    return detail::make_raw_returns(prices.index_name(), 1, std::move(dates), std::move(values));
}

/// (r - mu_r) / sigma_r with sample mean and sample standard deviation.
/// A series that is already normalized is returned unchanged.
inline ReturnSeries normalize(const ReturnSeries& r) {
    if (r.normalized) return r;
    if (r.size() < 2) throw DataError("normalize: need at least 2 returns");
    const double mu = sample_mean(r.values);
    const double sd = sample_stddev(r.values);
    if (!(sd > 0.0)) throw DataError("normalize: return series has zero variance");
    ReturnSeries out = r;
    for (double& v : out.values) v = (v - mu) / sd;
    out.mu_r = mu;
    out.sigma_r = sd;
    out.normalized = true;
    return out;
}

/// Inverse of normalize().
inline ReturnSeries denormalize(const ReturnSeries& r) {
    if (!r.normalized) return r;
    ReturnSeries out = r;
    for (double& v : out.values) v = r.mu_r + r.sigma_r * v;
    out.normalized = false;
    return out;
}

inline constexpr int kMaxScaleDays = 60;

/// Non-overlapping k-day block sums of daily log-returns; the trailing
/// remainder is dropped and each block is dated by its last day.
inline ReturnSeries aggregate_scale(const ReturnSeries& daily, int k) {
    if (k < 1 || k > kMaxScaleDays) {
        throw DomainError("aggregate_scale: k must lie in [1, " + std::to_string(kMaxScaleDays) + "], got " +
                          std::to_string(k));
    }
    if (daily.scale_days != 1 || daily.normalized) {
        throw DataError("aggregate_scale: input must be unnormalized daily returns");
    }
    if (daily.size() < static_cast<std::size_t>(k)) {
        throw DataError("aggregate_scale: series shorter than the block length");
    }
    const std::size_t blocks = daily.size() / static_cast<std::size_t>(k);
    std::vector<Date> dates;
    std::vector<double> values;
    dates.reserve(blocks);
    values.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        double sum = 0.0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) sum += daily.values[b * k + j];
        values.push_back(sum);
        dates.push_back(daily.dates[b * k + k - 1]);
    }
    return detail::make_raw_returns(daily.index_name, k, std::move(dates), std::move(values));
}

/// Returns dated within [from, to] inclusive. Statistics are recomputed.
inline ReturnSeries slice(const ReturnSeries& r, const Date& from, const Date& to) {
    if (r.normalized) throw DataError("slice: expects an unnormalized series");
    std::vector<Date> dates;
    std::vector<double> values;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r.dates[i] >= from && r.dates[i] <= to) {
            dates.push_back(r.dates[i]);
            values.push_back(r.values[i]);
        }
    }
    return detail::make_raw_returns(r.index_name, r.scale_days, std::move(dates), std::move(values));
}

}  // namespace qvar
