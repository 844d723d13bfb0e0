#pragma once

// Command-line front end: fit, backtest, rolling, scales, simulate.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qvar/qvar.hpp"

namespace qvar::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

enum class Format { csv, json };

struct CommonFlags {
    std::string format = "csv";
    std::string out;
    std::string scale_mode = "unit";
};

/// 6 significant digits for human-readable tables.
inline std::string csv_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Shortest decimal that round-trips to the same double.
inline std::string exact_num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline ScaleMode parse_scale_mode(const std::string& s) {
    if (s == "unit") return ScaleMode::unit;
    if (s == "free") return ScaleMode::free;
    throw DomainError("unknown scale mode '" + s + "'; valid: unit, free");
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw DomainError("not a number: '" + item + "'");
        }
        if (used != item.size()) throw DomainError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw DomainError("empty list");
    return out;
}

/// "1,5,20" or "1-60" or a mix such as "1-5,10,20".
inline std::vector<int> parse_scale_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        try {
            if (dash == std::string::npos) {
                out.push_back(std::stoi(item));
            } else {
                const int a = std::stoi(item.substr(0, dash));
                const int b = std::stoi(item.substr(dash + 1));
                if (b < a) throw DomainError("bad scale range '" + item + "'");
                for (int k = a; k <= b; ++k) out.push_back(k);
            }
        } catch (const std::invalid_argument&) {
            throw DomainError("bad scale list '" + s + "'");
        }
    }
    for (const int k : out) {
        if (k < 1 || k > kMaxScaleDays) throw DomainError("scales must lie in [1, 60]");
    }
    if (out.empty()) throw DomainError("empty scale list");
    return out;
}

inline Date require_date(const std::string& s, const char* flag) {
    const auto d = parse_date(s);
    if (!d) throw DomainError(std::string(flag) + ": expected YYYY-MM-DD, got '" + s + "'");
    return *d;
}

inline Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw DomainError("unknown format '" + s + "'; valid: csv, json");
}

/// Writes text to path via a temporary file and rename, or to `fallback`
/// when no path is given.
inline void write_artifact(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        return;
    }
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write output: " + path);
        f << text;
        if (!f) throw DataError("cannot write output: " + path);
    }
    std::filesystem::rename(tmp, target);
}

inline json input_meta(const std::string& path, const PriceSeries& p) {
    const auto obs = p.observations();
    return {{"path", path},
            {"index", p.index_name()},
            {"n_prices", p.size()},
            {"first_date", format_date(obs.front().date)},
            {"last_date", format_date(obs.back().date)}};
}

/// Writes the artifact and, when it goes to a file, a `.meta.json` sidecar
/// with the command line and input summary. No timestamps, so reruns are
/// byte-identical.
inline void emit(const CommonFlags& flags, const std::vector<std::string>& argv, const std::string& command,
                 const json& inputs, const std::string& text, std::ostream& out) {
    write_artifact(flags.out, text, out);
    if (flags.out.empty()) return;
    json meta = {{"tool", "qvar"}, {"version", kVersion}, {"command", command}, {"arguments", argv},
                 {"inputs", inputs}};
    write_artifact(flags.out + ".meta.json", meta.dump(2) + "\n", out);
}

inline json fit_json(const FitResult& f) {
    return {{"q", f.params.q()},
            {"q_stderr", num_or_null(f.q_stderr)},
            {"q_ci_95", {num_or_null(f.q_ci_95.low), num_or_null(f.q_ci_95.high)}},
            {"sigma_q", f.params.sigma_q()},
            {"log_likelihood", f.log_likelihood},
            {"n_obs", f.n_obs},
            {"scale_mode", to_string(f.scale)}};
}

// --- commands ---------------------------------------------------------------

inline std::string render_fit(const std::string& index, std::size_t n_prices, const FitResult& fit, Format fmt) {
    if (fmt == Format::json) {
        json j = fit_json(fit);
        j["index"] = index;
        j["n_prices"] = n_prices;
        return j.dump(2) + "\n";
    }
    std::ostringstream s;
    s << "index,q,q_stderr,ci_low,ci_high,sigma_q,loglik,n_obs,n_prices,scale_mode\n";
    s << index << ',' << csv_num(fit.params.q()) << ',' << csv_num(fit.q_stderr) << ',' << csv_num(fit.q_ci_95.low)
      << ',' << csv_num(fit.q_ci_95.high) << ',' << csv_num(fit.params.sigma_q()) << ','
      << csv_num(fit.log_likelihood) << ',' << fit.n_obs << ',' << n_prices << ',' << to_string(fit.scale) << '\n';
    return s.str();
}

inline std::string render_backtest(const BacktestTable& t, Format fmt) {
    if (fmt == Format::json) {
        json rows = json::array();
        for (const auto& r : t.rows) {
            rows.push_back({{"alpha", r.alpha},
                            {"model", to_string(r.model)},
                            {"var_percent", r.var.var_percent},
                            {"violations", r.report.violations},
                            {"violation_percent", 100.0 * r.report.violation_ratio},
                            {"n_obs", r.report.n_obs}});
        }
        json j = {{"index", t.index_name}, {"n_prices", t.n_prices}, {"fit", fit_json(t.fit)}, {"rows", rows}};
        return j.dump(2) + "\n";
    }
    std::ostringstream s;
    s << "alpha,model,var_percent,violations,violation_percent,n_obs\n";
    for (const auto& r : t.rows) {
        s << csv_num(r.alpha) << ',' << to_string(r.model) << ',' << csv_num(r.var.var_percent) << ','
          << r.report.violations << ',' << csv_num(100.0 * r.report.violation_ratio) << ',' << r.report.n_obs
          << '\n';
    }
    return s.str();
}

inline std::string render_rolling(const RollingDiffSeries& r, Format fmt) {
    if (fmt == Format::json) {
        json dates = json::array();
        json diffs = json::array();
        json qs = json::array();
        for (std::size_t i = 0; i < r.dates.size(); ++i) {
            if (!r.diff_values[i]) continue;
            dates.push_back(format_date(r.dates[i]));
            diffs.push_back(*r.diff_values[i]);
            qs.push_back(*r.q_values[i]);
        }
        json crossings = json::array();
        for (const auto& c : r.crossings) crossings.push_back({{"from", format_date(c.from)}, {"to", format_date(c.to)}});
        json j = {{"index", r.index_name}, {"alpha", r.alpha},      {"window_days", r.window_days},
                  {"mean_line", r.mean_line}, {"std_line", r.std_line}, {"gaps", r.gaps()},
                  {"crossings", crossings}, {"dates", dates},         {"diff_percent", diffs},
                  {"q", qs}};
        return j.dump(2) + "\n";
    }
    std::ostringstream s;
    s << "# index=" << r.index_name << " alpha=" << csv_num(r.alpha) << " window_days=" << r.window_days
      << " gaps=" << r.gaps() << '\n';
    s << "# mean_line=" << csv_num(r.mean_line) << " std_line=" << csv_num(r.std_line) << '\n';
    for (const auto& c : r.crossings) s << "# crossing=" << format_date(c.from) << ':' << format_date(c.to) << '\n';
    s << "date,diff_percent\n";
    for (std::size_t i = 0; i < r.dates.size(); ++i) {
        if (!r.diff_values[i]) continue;
        s << format_date(r.dates[i]) << ',' << csv_num(*r.diff_values[i]) << '\n';
    }
    return s.str();
}

inline std::string render_scales(const ScaleGrid& g, Format fmt) {
    if (fmt == Format::json) {
        json points = json::array();
        for (const auto& p : g.points) {
            points.push_back({{"scale_days", p.scale_days},
                              {"diff_percent", p.diff},
                              {"q", p.q},
                              {"var_q_percent", p.var_q_percent},
                              {"var_gaussian_percent", p.var_gaussian_percent},
                              {"n_obs", p.n_obs}});
        }
        json j = {{"index", g.index_name},
                  {"alpha", g.alpha},
                  {"period", to_string(g.period.label)},
                  {"from", format_date(g.period.range.from)},
                  {"to", format_date(g.period.range.to)},
                  {"points", points},
                  {"warnings", g.warnings}};
        return j.dump(2) + "\n";
    }
    std::ostringstream s;
    for (const auto& w : g.warnings) s << "# warning: " << w << '\n';
    s << "scale_days,diff_percent\n";
    for (const auto& p : g.points) s << p.scale_days << ',' << csv_num(p.diff) << '\n';
    return s.str();
}

struct Regime {
    DateRange range;
    double q;
    double sigma;
    double mu;
};

inline Regime parse_regime(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 4 && parts.size() != 5) {
        throw DomainError("--regime expects FROM:TO:Q:SIGMA[:MU], got '" + s + "'");
    }
    Regime r{{require_date(parts[0], "--regime"), require_date(parts[1], "--regime")},
             parse_double_list(parts[2]).at(0), parse_double_list(parts[3]).at(0), 0.0};
    if (parts.size() == 5) r.mu = parse_double_list(parts[4]).at(0);
    if (r.range.to < r.range.from) throw DomainError("--regime: range ends before it starts");
    QGaussianParams(r.q, r.sigma);  // validates the domain
    return r;
}

struct SimulateFlags {
    double q = 0.0;
    double sigma = 0.01;
    double mu = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    double price0 = 100.0;
    std::string start = "2000-01-03";
    std::string from;
    std::string to;
    std::vector<std::string> regimes;
    std::string out;
};

inline bool is_weekday(const Date& d) {
    const std::chrono::weekday w{std::chrono::sys_days{d}};
    return w != std::chrono::Saturday && w != std::chrono::Sunday;
}

/// Synthetic `date,close` series on a weekday calendar. With --from/--to the
/// n + 1 price dates are spread evenly over the weekdays in the range.
inline std::string simulate(const SimulateFlags& f) {
    const QGaussianParams base(f.q, f.sigma);
    std::vector<Regime> regimes;
    for (const auto& s : f.regimes) regimes.push_back(parse_regime(s));

    std::vector<Date> calendar;
    if (!f.from.empty() || !f.to.empty()) {
        if (f.from.empty() || f.to.empty()) throw DomainError("--from and --to must be given together");
        const auto from = std::chrono::sys_days{require_date(f.from, "--from")};
        const auto to = std::chrono::sys_days{require_date(f.to, "--to")};
        std::vector<Date> weekdays;
        for (auto d = from; d <= to; d += std::chrono::days{1}) {
            if (is_weekday(Date{d})) weekdays.push_back(Date{d});
        }
        const std::size_t n_prices = f.n == 0 ? weekdays.size() : f.n + 1;
        if (n_prices < 2 || n_prices > weekdays.size()) {
            throw DomainError("--n does not fit in the weekdays between --from and --to");
        }
        for (std::size_t i = 0; i < n_prices; ++i) {
            const std::size_t idx = n_prices == 1 ? 0 : i * (weekdays.size() - 1) / (n_prices - 1);
            calendar.push_back(weekdays[idx]);
        }
    } else {
        const std::size_t n_prices = (f.n == 0 ? 1000 : f.n) + 1;
        auto d = std::chrono::sys_days{require_date(f.start, "--start")};
        while (calendar.size() < n_prices) {
            if (is_weekday(Date{d})) calendar.push_back(Date{d});
            d += std::chrono::days{1};
        }
    }

    qgauss::Sampler draw(f.seed);
    std::ostringstream s;
    s << "date,close\n";
    double price = f.price0;
    s << format_date(calendar[0]) << ',' << exact_num(price) << '\n';
    for (std::size_t i = 1; i < calendar.size(); ++i) {
        const Regime* active = nullptr;
        for (const auto& r : regimes) {
            if (calendar[i] >= r.range.from && calendar[i] <= r.range.to) active = &r;
        }
        const double r = active ? active->mu + draw(QGaussianParams(active->q, active->sigma)) : f.mu + draw(base);
        price *= std::exp(r);
        s << format_date(calendar[i]) << ',' << exact_num(price) << '\n';
    }
    return s.str();
}

// --- entry point ------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian and q-Gaussian Value-at-Risk for index return series", "qvar"};
    app.require_subcommand(1);

    CommonFlags common;
    std::string input;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("input", input, "price CSV with date,close columns")->required();
        sub->add_option("--format", common.format, "csv or json")->capture_default_str();
        sub->add_option("--out", common.out, "output file (stdout when omitted)");
        sub->add_option("--scale-mode", common.scale_mode, "unit (sigma_q = 1) or free")->capture_default_str();
    };

    auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood q and its 95% interval");
    add_common(fit_cmd);

    std::string alphas = "0.95,0.96,0.97,0.98";
    auto* bt_cmd = app.add_subcommand("backtest", "VaR and violation counts per confidence level and model");
    add_common(bt_cmd);
    bt_cmd->add_option("--alphas,--alpha", alphas, "comma-separated confidence levels")->capture_default_str();

    double alpha = 0.95;
    int window = 250;
    bool cold = false;
    auto* roll_cmd = app.add_subcommand("rolling", "rolling q-VaR minus Gaussian VaR with crisis threshold");
    add_common(roll_cmd);
    roll_cmd->add_option("--alpha", alpha, "confidence level")->capture_default_str();
    roll_cmd->add_option("--window", window, "window length in trading days")->capture_default_str();
    roll_cmd->add_flag("--cold-start", cold, "fit every window from the coarse grid");

    std::string period = "crisis";
    std::string from;
    std::string to;
    std::string scales = "1-60";
    auto* sc_cmd = app.add_subcommand("scales", "q-VaR minus Gaussian VaR across aggregation timescales");
    add_common(sc_cmd);
    sc_cmd->add_option("--alpha", alpha, "confidence level")->capture_default_str();
    sc_cmd->add_option("--period", period, std::string("period label: ") + kPeriodLabels)->capture_default_str();
    sc_cmd->add_option("--from", from, "explicit period start (YYYY-MM-DD)");
    sc_cmd->add_option("--to", to, "explicit period end (YYYY-MM-DD)");
    sc_cmd->add_option("--scales", scales, "timescales in days, e.g. 1-60 or 1,5,20")->capture_default_str();

    SimulateFlags sim;
    auto* sim_cmd = app.add_subcommand("simulate", "write a synthetic date,close CSV from q-Gaussian returns");
    sim_cmd->add_option("--q", sim.q, "q of the base regime")->required();
    sim_cmd->add_option("--sigma", sim.sigma, "sigma_q of daily log-returns in the base regime")->capture_default_str();
    sim_cmd->add_option("--mu", sim.mu, "daily drift of the base regime")->capture_default_str();
    sim_cmd->add_option("--n", sim.n, "number of returns (prices = n + 1)");
    sim_cmd->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    sim_cmd->add_option("--price0", sim.price0, "first close")->capture_default_str();
    sim_cmd->add_option("--start", sim.start, "first date when no range is given")->capture_default_str();
    sim_cmd->add_option("--from", sim.from, "calendar start (YYYY-MM-DD)");
    sim_cmd->add_option("--to", sim.to, "calendar end (YYYY-MM-DD)");
    sim_cmd->add_option("--regime", sim.regimes, "FROM:TO:Q:SIGMA[:MU], repeatable; later regimes win");
    sim_cmd->add_option("--out", sim.out, "output file (stdout when omitted)");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (sim_cmd->parsed()) {
            const std::string text = simulate(sim);
            CommonFlags f;
            f.out = sim.out;
            emit(f, args, "simulate", json::array(), text, out);
            return kOk;
        }

        const Format fmt = parse_format(common.format);
        FitOptions fit_opts = pipeline_fit_options();
        fit_opts.scale = parse_scale_mode(common.scale_mode);
        const PriceSeries prices = ingest_csv(input);
        const json inputs = json::array({input_meta(input, prices)});

        if (fit_cmd->parsed()) {
            const FitResult fit = fit_mle(normalize(log_returns(prices)).values, fit_opts);
            emit(common, args, "fit", inputs, render_fit(prices.index_name(), prices.size(), fit, fmt), out);
        } else if (bt_cmd->parsed()) {
            const auto list = parse_double_list(alphas);
            const auto table = backtest_table(prices, list, fit_opts);
            emit(common, args, "backtest", inputs, render_backtest(table, fmt), out);
        } else if (roll_cmd->parsed()) {
            RollingOptions ro;
            ro.window_days = window;
            ro.warm_start = !cold;
            ro.fit.scale = fit_opts.scale;
            const auto r = rolling_diff(prices, alpha, ro);
            emit(common, args, "rolling", inputs, render_rolling(r, fmt), out);
        } else if (sc_cmd->parsed()) {
            Period p = period_from_label(period);
            if (!from.empty() || !to.empty()) {
                if (from.empty() || to.empty()) throw DomainError("--from and --to must be given together");
                p = {PeriodLabel::custom, {require_date(from, "--from"), require_date(to, "--to")}};
            }
            ScaleGridOptions so;
            so.fit.scale = fit_opts.scale;
            const auto ks = parse_scale_list(scales);
            const auto g = scale_grid(prices, alpha, p, ks, so);
            emit(common, args, "scales", inputs, render_scales(g, fmt), out);
        }
        return kOk;
    } catch (const DomainError& e) {
        err << "qvar: usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "qvar: data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericError& e) {
        err << "qvar: numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        err << "qvar: error: " << e.what() << '\n';
        return kNumeric;
    }
}

}  // namespace qvar::cli
