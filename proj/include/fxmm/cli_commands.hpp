#pragma once

// Experiment commands behind the command-line tool. Each command reads a
// config, applies the common overrides, writes CSV/JSON files in display
// units under one output directory and finishes with manifest.json, which
// records everything needed to rerun it. Outputs carry no timestamps, so a
// rerun with the same manifest reproduces every file byte for byte.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fxmm/config_io.hpp"
#include "fxmm/hjb_reference.hpp"
#include "fxmm/metrics.hpp"
#include "fxmm/model_config.hpp"
#include "fxmm/riccati.hpp"
#include "fxmm/simulator.hpp"
#include "fxmm/strategy.hpp"
#include "fxmm/units.hpp"

namespace fxmm::cli {

using nlohmann::json;

struct CommonOptions {
    std::string config_path;
    std::string out_dir{"out"};
    std::uint64_t seed{1};
    std::optional<double> gamma_override;    // 1/M$
    std::optional<double> horizon_override;  // day
    StrategyMode mode{StrategyMode::Stationary};
    std::size_t riccati_steps{5000};
};

class CommandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inclusive arithmetic grid min, min + step, ..., max.
struct ScanSpec {
    std::string currency;
    double min{-60.0};
    double max{60.0};
    double step{1.0};

    std::vector<double> values() const {
        if (!(step > 0.0) || !(max >= min) || !std::isfinite(min) || !std::isfinite(max)) {
            throw CommandError("scan: need step > 0 and min <= max (got " + std::to_string(min) + ".." +
                               std::to_string(max) + " step " + std::to_string(step) + ")");
        }
        const double n = std::floor((max - min) / step + 1e-9);
        if (n > 1e6) throw CommandError("scan: more than 10^6 points");
        std::vector<double> out;
        for (long k = 0; k <= static_cast<long>(n); ++k) out.push_back(min + static_cast<double>(k) * step);
        return out;
    }
};

namespace detail {

inline std::string num(double v, int digits = 12) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// JSON cannot carry NaN or infinities.
inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline const char* mode_name(StrategyMode m) { return m == StrategyMode::Stationary ? "stationary" : "time-dependent"; }

class OutputDir {
public:
    explicit OutputDir(const std::string& path) : root_(path) {
        if (path.empty()) throw CommandError("--out must not be empty");
        std::filesystem::create_directories(root_);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(root_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw CommandError("cannot write " + (root_ / name).string());
        f << content;
        files_.push_back(name);
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    const std::vector<std::string>& files() const { return files_; }
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::vector<std::string> files_;
};

inline ModelConfig prepare_config(const CommonOptions& o) {
    if (o.config_path.empty()) throw CommandError("--config is required");
    ModelConfig c = load_config(o.config_path);
    if (o.gamma_override) c = with_gamma(std::move(c), *o.gamma_override);
    if (o.horizon_override) c = with_horizon(std::move(c), *o.horizon_override);
    validate(c);
    return c;
}

inline RiccatiOptions riccati_options(const CommonOptions& o) {
    RiccatiOptions r;
    r.n_steps = o.riccati_steps;
    return r;
}

inline void finish(OutputDir& out, const std::string& command, const CommonOptions& o, const ModelConfig& c,
                   json parameters) {
    json m;
    m["command"] = command;
    m["config_path"] = o.config_path;
    m["out"] = o.out_dir;
    m["seed"] = o.seed;
    m["mode"] = mode_name(o.mode);
    m["gamma_override"] = o.gamma_override ? json(*o.gamma_override) : json(nullptr);
    m["horizon_override"] = o.horizon_override ? json(*o.horizon_override) : json(nullptr);
    m["riccati_steps"] = o.riccati_steps;
    m["parameters"] = std::move(parameters);
    m["files"] = out.files();
    m["effective_config"] = to_json(c);
    out.write_json("manifest.json", m);
}

inline std::size_t risky_index(const ModelConfig& c, const std::string& code, const std::string& flag) {
    const auto k = c.universe.find(code);
    if (!k) throw CommandError(flag + ": unknown currency '" + code + "'");
    if (*k == c.universe.reference_index) throw CommandError(flag + ": '" + code + "' is the reference currency");
    return *k;
}

inline std::pair<std::size_t, std::size_t> pair_legs(const ModelConfig& c, const std::string& name) {
    if (auto k = c.find_pair(name)) return {c.pairs[*k].base, c.pairs[*k].quote};
    try {
        return config_detail::split_pair(name, c.universe, "--pair");
    } catch (const ConfigError& e) {
        throw CommandError(std::string("--pair: ") + e.what());
    }
}

inline std::string matrix_csv(const Eigen::MatrixXd& m, const CurrencyUniverse& u) {
    std::ostringstream s;
    s << "currency";
    for (const auto& l : u.labels) s << "," << l;
    s << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        s << u.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) s << "," << num(m(i, j), 17);
        s << "\n";
    }
    return s.str();
}

struct StructureReport {
    double symmetry_error{0.0};
    double min_eigenvalue{0.0};
    double reference_max_abs{0.0};
    double min_risky_offdiagonal{0.0};
};

inline StructureReport structure(const Eigen::MatrixXd& a, std::size_t ref) {
    StructureReport r;
    r.symmetry_error = (a - a.transpose()).cwiseAbs().maxCoeff();
    r.min_eigenvalue = min_symmetric_eigenvalue(a);
    const auto ri = static_cast<Eigen::Index>(ref);
    r.reference_max_abs = std::max(a.row(ri).cwiseAbs().maxCoeff(), a.col(ri).cwiseAbs().maxCoeff());
    r.min_risky_offdiagonal = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && i != ri && j != ri) r.min_risky_offdiagonal = std::min(r.min_risky_offdiagonal, a(i, j));
    return r;
}

/// Largest per-entry relative change between two matrices; entries below
/// `floor` times the largest magnitude are compared absolutely against it.
inline double max_relative_change(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1e-12) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(std::abs(a(i, j)), floor * scale));
    return worst;
}

inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(y[k])) continue;
        mx += x[k];
        my += y[k];
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(y[k])) continue;
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// --- solve ---------------------------------------------------------------

struct SolveOptions {
    std::size_t path_every{50};
    bool euler{false};
};

/// Writes A(0), B(0), the integrated path and structural diagnostics,
/// including the change in A(0) when the horizon is doubled.
inline json run_solve(const CommonOptions& o, const SolveOptions& so = {}) {
    const ModelConfig c = detail::prepare_config(o);
    detail::OutputDir out(o.out_dir);
    RiccatiOptions ro = detail::riccati_options(o);
    if (so.euler) ro.integrator = Integrator::Euler;
    const RiccatiSolution sol = solve_riccati(c, ro);
    const RiccatiSolution twice = solve_riccati(with_horizon(c, 2.0 * c.objective.horizon), ro);

    out.write("A0.csv", detail::matrix_csv(sol.a.front(), c.universe));
    {
        std::ostringstream s;
        s << "currency,B\n";
        for (std::size_t i = 0; i < c.dim(); ++i)
            s << c.universe.labels[i] << "," << detail::num(sol.b.front()(static_cast<Eigen::Index>(i)), 17) << "\n";
        out.write("B0.csv", s.str());
    }
    {
        std::ostringstream s;
        write_riccati_csv(s, sol, c.universe, std::max<std::size_t>(1, so.path_every));
        out.write("riccati_path.csv", s.str());
    }
    const auto st = detail::structure(sol.a.front(), c.universe.reference_index);
    json diag;
    diag["gamma_per_musd"] = c.objective.gamma;
    diag["horizon_days"] = c.objective.horizon;
    diag["steps"] = ro.n_steps;
    diag["integrator"] = so.euler ? "euler" : "rk4";
    diag["symmetry_error"] = st.symmetry_error;
    diag["min_eigenvalue"] = st.min_eigenvalue;
    diag["reference_row_max_abs"] = st.reference_max_abs;
    diag["min_risky_offdiagonal"] = detail::jnum(st.min_risky_offdiagonal);
    diag["doubled_horizon_max_relative_change"] =
        detail::max_relative_change(sol.a.front(), twice.a.front());
    diag["B0_max_abs"] = sol.b.front().cwiseAbs().maxCoeff();
    out.write_json("diagnostics.json", diag);
    detail::finish(out, "solve", o, c, json{{"path_every", so.path_every}, {"euler", so.euler}});
    return diag;
}

// --- quote-surface / hedge-surface ---------------------------------------

struct SurfaceOptions {
    ScanSpec scan{"", -60.0, 60.0, 1.0};
    std::size_t tier{1};  // 1-based
    double size{1.0};     // M$
};

/// Top-of-book markups (bps) for every quoted pair as one inventory varies
/// with the others at zero. "bid" is the markup when the dealer buys the
/// base currency, "ask" when it sells it.
inline void run_quote_surface(const CommonOptions& o, const SurfaceOptions& so) {
    const ModelConfig c = detail::prepare_config(o);
    const std::size_t axis = detail::risky_index(c, so.scan.currency, "--scan");
    if (so.tier < 1 || so.tier > c.n_tiers) throw CommandError("--tier must be in 1.." + std::to_string(c.n_tiers));
    const auto values = so.scan.values();
    detail::OutputDir out(o.out_dir);
    const StrategyEngine engine(c, solve_riccati(c, detail::riccati_options(o)), o.mode);

    std::ostringstream s;
    s << "inventory_" << so.scan.currency << "_musd,pair,bid_bps,ask_bps\n";
    InventoryState st = InventoryState::flat(c.dim());
    for (double v : values) {
        st.y(static_cast<Eigen::Index>(axis)) = v;
        for (const auto& p : c.pairs) {
            const double bid = engine.quote(st, so.tier - 1, p.base, p.quote, so.size);
            const double ask = engine.quote(st, so.tier - 1, p.quote, p.base, so.size);
            s << detail::num(v) << "," << p.name << "," << detail::num(units::to_bps(bid)) << ","
              << detail::num(units::to_bps(ask)) << "\n";
        }
    }
    out.write("quote_surface.csv", s.str());
    detail::finish(out, "quote-surface", o, c,
                   json{{"scan", so.scan.currency}, {"min", so.scan.min}, {"max", so.scan.max}, {"step", so.scan.step},
                        {"tier", so.tier}, {"size_musd", so.size}});
}

/// D2D hedge rates (M$/day, positive buys the base currency of the pair as
/// named) for every available pair as one inventory varies.
inline void run_hedge_surface(const CommonOptions& o, const ScanSpec& scan) {
    const ModelConfig c = detail::prepare_config(o);
    const std::size_t axis = detail::risky_index(c, scan.currency, "--scan");
    const auto values = scan.values();
    detail::OutputDir out(o.out_dir);
    const StrategyEngine engine(c, solve_riccati(c, detail::riccati_options(o)), o.mode);

    std::ostringstream s;
    s << "inventory_" << scan.currency << "_musd,pair,argument_bps,rate_musd_per_day\n";
    InventoryState st = InventoryState::flat(c.dim());
    for (double v : values) {
        st.y(static_cast<Eigen::Index>(axis)) = v;
        const HedgePlan plan = engine.hedge_rates(st);
        for (std::size_t k = 0; k < plan.rates.size(); ++k) {
            const auto& r = plan.rates[k];
            if (!c.hedge_costs.pairs[k].available) continue;
            const std::string name = c.pair_name(r.i, r.j);
            const double sign = name.rfind(c.universe.labels[r.i], 0) == 0 ? 1.0 : -1.0;
            s << detail::num(v) << "," << name << "," << detail::num(sign * units::to_bps(r.argument)) << ","
              << detail::num(sign * r.rate) << "\n";
        }
    }
    out.write("hedge_surface.csv", s.str());
    detail::finish(out, "hedge-surface", o, c,
                   json{{"scan", scan.currency}, {"min", scan.min}, {"max", scan.max}, {"step", scan.step}});
}

// --- zone ----------------------------------------------------------------

struct ZoneOptions {
    std::string pair;   // D2D pair whose thresholds are traced, e.g. GBPUSD
    std::string axis;   // currency whose inventory carries the thresholds
    std::optional<ScanSpec> scan;  // second inventory varied; none means a single point at 0
    std::string without_pair;      // quoted pair removed from the market, if any
    double resolution{1e-3};       // M$
};

/// Pure internalization thresholds of one pair along `axis` as another
/// inventory is scanned, plus every pair's activation interval at zero.
inline json run_zone(const CommonOptions& o, const ZoneOptions& zo) {
    ModelConfig c = detail::prepare_config(o);
    if (!zo.without_pair.empty()) c = without_pair(std::move(c), zo.without_pair);
    const std::size_t axis = detail::risky_index(c, zo.axis, "--axis");
    const auto [pi, pj] = detail::pair_legs(c, zo.pair);
    if (!c.hedge_costs.at(pi, pj, c.dim()).available) throw CommandError("--pair: " + zo.pair + " is not traded D2D");
    std::size_t scan_idx = axis;
    std::vector<double> values{0.0};
    if (zo.scan) {
        scan_idx = detail::risky_index(c, zo.scan->currency, "--scan");
        if (scan_idx == axis) throw CommandError("--scan and --axis must differ");
        values = zo.scan->values();
    }
    detail::OutputDir out(o.out_dir);
    const StrategyEngine engine(c, solve_riccati(c, detail::riccati_options(o)), o.mode);
    const InventoryState base = InventoryState::flat(c.dim());

    const auto zone = engine.internalization_zone(scan_idx, values, axis, pi, pj, base, zo.resolution);
    std::ostringstream s;
    s << "inventory_" << c.universe.labels[scan_idx] << "_musd,lower_" << zo.axis << "_musd,upper_" << zo.axis
      << "_musd\n";
    std::vector<double> xs, lo, hi;
    for (const auto& z : zone) {
        s << detail::num(z.scan_inventory) << "," << detail::num(z.lower) << "," << detail::num(z.upper) << "\n";
        xs.push_back(z.scan_inventory);
        lo.push_back(z.lower);
        hi.push_back(z.upper);
    }
    out.write("zone.csv", s.str());

    std::ostringstream a;
    a << "pair,lower_" << zo.axis << "_musd,upper_" << zo.axis << "_musd\n";
    for (const auto& hc : c.hedge_costs.pairs) {
        if (!hc.available) continue;
        const auto iv = engine.activation_interval(base, axis, hc.i, hc.j, zo.resolution);
        a << c.pair_name(hc.i, hc.j) << "," << detail::num(iv.lower) << ","
          << detail::num(iv.upper) << "\n";
    }
    out.write("activation.csv", a.str());

    json summary;
    summary["pair"] = zo.pair;
    summary["axis"] = zo.axis;
    summary["scan"] = c.universe.labels[scan_idx];
    summary["lower_slope"] = detail::jnum(detail::slope(xs, lo));
    summary["upper_slope"] = detail::jnum(detail::slope(xs, hi));
    out.write_json("zone_summary.json", summary);

    json params{{"pair", zo.pair}, {"axis", zo.axis}, {"without_pair", zo.without_pair}, {"resolution", zo.resolution}};
    if (zo.scan) params["scan"] = json{{"currency", zo.scan->currency}, {"min", zo.scan->min}, {"max", zo.scan->max},
                                       {"step", zo.scan->step}};
    detail::finish(out, "zone", o, c, params);
    return summary;
}

// --- simulate ------------------------------------------------------------

struct SimulateOptions {
    std::size_t steps{100000};
    double dt_seconds{1.0};
    std::size_t record_every{1};
    std::size_t output_every{10};  // down-sampling of record.csv
    std::size_t max_lag{5000};     // in recorded samples
    bool trades_log{true};
    std::string hist_x, hist_y;    // default: first two risky currencies
    double hist_range{60.0};       // M$
    double hist_bin{2.0};          // M$
};

inline SimConfig sim_config(const CommonOptions& o, const SimulateOptions& so) {
    SimConfig sc;
    if (!(so.dt_seconds > 0.0)) throw CommandError("--dt-seconds must be positive");
    sc.dt = units::seconds_to_days(so.dt_seconds);
    sc.n_steps = so.steps;
    sc.seed = o.seed;
    sc.record_every = std::max<std::size_t>(1, so.record_every);
    sc.record_trades = so.trades_log;
    return sc;
}

/// Runs one trajectory and writes the record, trade log, ACFs, flow and
/// P&L shares, the joint inventory histogram and summary metrics.
inline json run_simulate(const CommonOptions& o, const SimulateOptions& so) {
    const ModelConfig c = detail::prepare_config(o);
    std::vector<std::size_t> risky;
    for (std::size_t i = 0; i < c.dim(); ++i)
        if (i != c.universe.reference_index) risky.push_back(i);
    std::size_t hx = risky.front(), hy = risky.size() > 1 ? risky[1] : risky.front();
    if (!so.hist_x.empty()) hx = detail::risky_index(c, so.hist_x, "--hist-x");
    if (!so.hist_y.empty()) hy = detail::risky_index(c, so.hist_y, "--hist-y");
    if (!(so.hist_bin > 0.0) || !(so.hist_range > 0.0)) throw CommandError("histogram range and bin must be positive");
    const SimConfig sc = sim_config(o, so);
    detail::OutputDir out(o.out_dir);
    const StrategyEngine engine(c, solve_riccati(c, detail::riccati_options(o)), o.mode);
    const SimulationRecord rec = simulate(engine, sc);
    const std::size_t d = c.dim();

    {
        std::ostringstream s;
        s << "time_days";
        for (const auto& l : c.universe.labels) s << ",Y_" << l << "_musd";
        s << ",X_musd,risk_musd_per_day\n";
        const std::size_t every = std::max<std::size_t>(1, so.output_every);
        for (std::size_t k = 0; k < rec.samples(); ++k) {
            if (k % every != 0 && k + 1 != rec.samples()) continue;
            s << detail::num(rec.times[k]);
            for (std::size_t i = 0; i < d; ++i) s << "," << detail::num(rec.y_flat[k * d + i]);
            s << "," << detail::num(rec.x[k]) << "," << detail::num(rec.risk[k]) << "\n";
        }
        out.write("record.csv", s.str());
    }
    if (so.trades_log) {
        std::ostringstream s;
        s << "step,time_days,tier,dealer_buys,dealer_sells,size_musd,markup_bps\n";
        for (const auto& t : rec.trades) {
            const auto& st = c.liquidity[t.stream];
            s << t.step << "," << detail::num(static_cast<double>(t.step) * sc.dt) << ",T" << st.tier + 1 << ","
              << c.universe.labels[st.buy] << "," << c.universe.labels[st.sell] << "," << detail::num(t.size) << ","
              << detail::num(units::to_bps(t.markup)) << "\n";
        }
        out.write("trades.csv", s.str());
    }

    json metrics;
    metrics["steps"] = so.steps;
    metrics["dt_seconds"] = so.dt_seconds;
    metrics["fills"] = rec.fills;
    const std::size_t lag = std::min(so.max_lag, rec.samples() - 1);
    {
        std::vector<std::vector<AcfPoint>> cols;
        std::vector<std::string> names;
        json lags = json::object();
        auto add = [&](const std::string& name, const std::vector<double>& series) {
            try {
                cols.push_back(autocorrelation(series, lag));
            } catch (const DegenerateSeriesError&) {
                cols.push_back({});
            }
            names.push_back(name);
            const auto l = cols.back().empty() ? std::nullopt : first_lag_below(cols.back(), 0.5);
            lags[name] = l ? json(static_cast<double>(*l * sc.record_every) * so.dt_seconds) : json(nullptr);
        };
        add("risk", rec.risk);
        for (std::size_t i : risky) add("Y_" + c.universe.labels[i], inventory_series(rec, i));
        std::ostringstream s;
        s << "lag_seconds";
        for (const auto& n : names) s << "," << n;
        s << "\n";
        for (std::size_t k = 0; k <= lag; ++k) {
            s << detail::num(static_cast<double>(k * sc.record_every) * so.dt_seconds);
            for (const auto& col : cols) s << "," << (col.empty() ? "nan" : detail::num(col[k].acf));
            s << "\n";
        }
        out.write("acf.csv", s.str());
        metrics["acf_half_life_seconds"] = lags;
    }

    json shares;
    try {
        const FlowShares fs = flow_decomposition(rec, c);
        auto layer = [](const std::vector<Share>& v) {
            json a = json::array();
            for (const auto& s : v) a.push_back(json{{"label", s.label}, {"amount_musd", s.value}, {"share", s.share}});
            return a;
        };
        shares["pair_volume"] = layer(fs.pair_volume);
        shares["currency_pnl"] = layer(fs.currency_pnl);
        shares["tier_and_hedge_volume"] = layer(fs.tier_and_hedge);
        shares["client_volume_musd"] = fs.client_volume;
        shares["hedge_volume_musd"] = fs.hedge_volume;
        shares["internalization_ratio"] = fs.internalization_ratio;
        metrics["internalization_ratio"] = fs.internalization_ratio;
    } catch (const std::invalid_argument& e) {
        shares["error"] = e.what();
        metrics["internalization_ratio"] = nullptr;
    }
    out.write_json("shares.json", shares);

    {
        const auto nb = static_cast<std::size_t>(std::ceil(2.0 * so.hist_range / so.hist_bin));
        std::vector<std::size_t> h(nb * nb, 0);
        std::size_t outside = 0;
        for (std::size_t k = 0; k < rec.samples(); ++k) {
            const double vx = rec.y_flat[k * d + hx], vy = rec.y_flat[k * d + hy];
            const double bx = std::floor((vx + so.hist_range) / so.hist_bin);
            const double by = std::floor((vy + so.hist_range) / so.hist_bin);
            if (bx < 0 || by < 0 || bx >= static_cast<double>(nb) || by >= static_cast<double>(nb)) {
                ++outside;
                continue;
            }
            ++h[static_cast<std::size_t>(bx) * nb + static_cast<std::size_t>(by)];
        }
        std::ostringstream s;
        s << "Y_" << c.universe.labels[hx] << "_musd,Y_" << c.universe.labels[hy] << "_musd,count\n";
        for (std::size_t a = 0; a < nb; ++a)
            for (std::size_t b = 0; b < nb; ++b)
                s << detail::num(-so.hist_range + (static_cast<double>(a) + 0.5) * so.hist_bin) << ","
                  << detail::num(-so.hist_range + (static_cast<double>(b) + 0.5) * so.hist_bin) << ","
                  << h[a * nb + b] << "\n";
        out.write("histogram.csv", s.str());
        metrics["histogram_outside"] = outside;
    }

    const std::size_t half = rec.samples() / 2;
    metrics["mean_risk_musd_per_day"] = mean(rec.risk);
    metrics["mean_risk_first_half"] = mean(std::vector<double>(rec.risk.begin(), rec.risk.begin() + half));
    metrics["mean_risk_second_half"] = mean(std::vector<double>(rec.risk.begin() + half, rec.risk.end()));
    const FrontierPoint fp = frontier_point(rec);
    metrics["pnl_rate_musd_per_day"] = fp.pnl_rate;
    metrics["mean_variance_musd_per_day"] = fp.variance_rate;
    {
        // Sample correlations of the risky inventories.
        json corr = json::object();
        for (std::size_t a = 0; a < risky.size(); ++a) {
            for (std::size_t b = a + 1; b < risky.size(); ++b) {
                const auto xa = inventory_series(rec, risky[a]), xb = inventory_series(rec, risky[b]);
                const double ma = mean(xa), mb = mean(xb);
                double sab = 0.0, saa = 0.0, sbb = 0.0;
                for (std::size_t k = 0; k < xa.size(); ++k) {
                    sab += (xa[k] - ma) * (xb[k] - mb);
                    saa += (xa[k] - ma) * (xa[k] - ma);
                    sbb += (xb[k] - mb) * (xb[k] - mb);
                }
                corr[c.universe.labels[risky[a]] + "/" + c.universe.labels[risky[b]]] =
                    detail::jnum(sab / std::sqrt(saa * sbb));
            }
        }
        metrics["inventory_correlation"] = corr;
    }
    out.write_json("metrics.json", metrics);

    detail::finish(out, "simulate", o, c,
                   json{{"steps", so.steps}, {"dt_seconds", so.dt_seconds}, {"record_every", so.record_every},
                        {"output_every", so.output_every}, {"max_lag", so.max_lag}, {"trades_log", so.trades_log},
                        {"hist_x", c.universe.labels[hx]}, {"hist_y", c.universe.labels[hy]},
                        {"hist_range_musd", so.hist_range}, {"hist_bin_musd", so.hist_bin}});
    return metrics;
}

// --- frontier ------------------------------------------------------------

/// Mean P&L and variance rates per gamma, all runs sharing one seed.
inline std::vector<FrontierPoint> run_frontier(const CommonOptions& o, const std::vector<double>& gammas,
                                               const SimulateOptions& so) {
    if (gammas.empty()) throw CommandError("--gammas needs at least one value");
    const ModelConfig c = detail::prepare_config(o);
    SimulateOptions quiet = so;
    quiet.trades_log = false;
    const SimConfig sc = sim_config(o, quiet);
    detail::OutputDir out(o.out_dir);
    const auto pts = efficient_frontier(c, gammas, sc, detail::riccati_options(o), o.mode);
    std::ostringstream s;
    s << "gamma_per_musd,pnl_rate_musd_per_day,mean_variance_musd_per_day,risk_penalty_musd_per_day\n";
    for (const auto& p : pts)
        s << detail::num(p.gamma) << "," << detail::num(p.pnl_rate) << "," << detail::num(p.variance_rate) << ","
          << detail::num(p.risk_penalty) << "\n";
    out.write("frontier.csv", s.str());
    detail::finish(out, "frontier", o, c,
                   json{{"gammas", gammas}, {"steps", so.steps}, {"dt_seconds", so.dt_seconds},
                        {"record_every", so.record_every}});
    return pts;
}

// --- validate ------------------------------------------------------------

struct ValidateOptions {
    double y_max{60.0};  // M$
    double h{1.0};       // M$
    std::vector<double> band_edges{20.0, 40.0};  // M$, on max |y|
    double quote_abs_tol_bps{0.05};
    double quote_rel_tol{0.10};
    double zone_tol_musd{2.0};
};

struct ValidationBand {
    double lower{0.0}, upper{0.0};
    double sup_bps{0.0}, mean_bps{0.0};
    double sup_excess{0.0};  // max over points of |diff| / max(abs_tol, rel_tol |riccati|)
    std::size_t points{0};
};

struct ZoneEdgeComparison {
    std::string pair;
    std::string axis;
    double riccati_lower{0.0}, riccati_upper{0.0};
    double grid_lower{0.0}, grid_upper{0.0};
};

struct ValidationReport {
    std::vector<ValidationBand> bands;
    std::vector<ZoneEdgeComparison> zones;
    bool inner_quotes_ok{false};
    bool zones_ok{false};
    std::size_t hjb_steps{0};
};

/// Solves the HJB equation on a grid over the risky currencies (at most
/// two) and compares top-of-book quotes and zone edges with the Riccati
/// strategy at t = 0. Large deviations are reported, not treated as errors.
inline ValidationReport compare_with_grid(const ModelConfig& c, const ValidateOptions& vo, std::ostream* csv,
                                          RiccatiOptions ro = {}) {
    std::vector<std::size_t> risky;
    for (std::size_t i = 0; i < c.dim(); ++i)
        if (i != c.universe.reference_index) risky.push_back(i);
    if (risky.size() > 2) throw CommandError("validate: at most two risky currencies (got " + std::to_string(risky.size()) + ")");

    GridSpec gs;
    gs.axes = risky;
    gs.y_max = vo.y_max;
    gs.h = vo.h;
    const ValueGrid vg = solve_hjb(c, gs);
    const StrategyEngine engine(c, solve_riccati(c, ro), StrategyMode::Stationary);
    const auto [a, b] = engine.coefficients_at(0.0);

    ValidationReport rep;
    rep.hjb_steps = vg.steps;
    std::vector<double> edges{0.0};
    for (double e : vo.band_edges)
        if (e < vo.y_max) edges.push_back(e);
    edges.push_back(vo.y_max);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) rep.bands.push_back({edges[k], edges[k + 1]});
    std::vector<double> sums(rep.bands.size(), 0.0);

    if (csv) {
        *csv << "node";
        for (std::size_t r : risky) *csv << ",Y_" << c.universe.labels[r] << "_musd";
        *csv << ",tier,dealer_buys,dealer_sells,size_musd,riccati_bps,grid_bps,diff_bps\n";
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.dim()));
    for (std::size_t node = 0; node < vg.node_count(); ++node) {
        const auto m = vg.unpack(node);
        double ymax = 0.0;
        for (std::size_t ax = 0; ax < risky.size(); ++ax) {
            y(static_cast<Eigen::Index>(risky[ax])) = vg.coordinate(m[ax]);
            ymax = std::max(ymax, std::abs(vg.coordinate(m[ax])));
        }
        std::size_t band = 0;
        while (band + 1 < rep.bands.size() && ymax > rep.bands[band].upper + 1e-12) ++band;
        for (std::size_t s = 0; s < c.liquidity.size(); ++s) {
            const auto& st = c.liquidity[s];
            double grid_delta;
            try {
                grid_delta = extract_quote(c, vg, 0, y, s, 0);
            } catch (const OutOfGridError&) {
                continue;
            }
            const auto& bk = st.buckets.front();
            const double ric = optimal_markup(bk.curve, StrategyEngine::quote_argument(a, b, y, st.buy, st.sell, bk.size));
            const double diff = units::to_bps(grid_delta - ric);
            auto& bd = rep.bands[band];
            bd.sup_bps = std::max(bd.sup_bps, std::abs(diff));
            sums[band] += std::abs(diff);
            ++bd.points;
            const double tol = std::max(vo.quote_abs_tol_bps, vo.quote_rel_tol * std::abs(units::to_bps(ric)));
            bd.sup_excess = std::max(bd.sup_excess, std::abs(diff) / tol);
            if (csv) {
                *csv << node;
                for (std::size_t ax = 0; ax < risky.size(); ++ax) *csv << "," << detail::num(vg.coordinate(m[ax]));
                *csv << ",T" << st.tier + 1 << "," << c.universe.labels[st.buy] << "," << c.universe.labels[st.sell]
                     << "," << detail::num(bk.size) << "," << detail::num(units::to_bps(ric)) << ","
                     << detail::num(units::to_bps(grid_delta)) << "," << detail::num(diff) << "\n";
            }
        }
    }
    for (std::size_t k = 0; k < rep.bands.size(); ++k)
        rep.bands[k].mean_bps = rep.bands[k].points ? sums[k] / static_cast<double>(rep.bands[k].points) : 0.0;
    rep.inner_quotes_ok = !rep.bands.empty() && rep.bands.front().sup_excess <= 1.0;

    rep.zones_ok = true;
    const InventoryState flat = InventoryState::flat(c.dim());
    const Eigen::VectorXd zero = flat.y;
    for (const auto& hc : c.hedge_costs.pairs) {
        if (!hc.available || !(hc.cost.psi > 0.0)) continue;
        for (std::size_t ax : risky) {
            if (ax != hc.i && ax != hc.j) continue;
            const auto iv = engine.activation_interval(flat, ax, hc.i, hc.j);
            const auto [gl, gu] = grid_activation_interval(c, vg, 0, zero, ax, hc.i, hc.j);
            rep.zones.push_back({c.pair_name(hc.i, hc.j), c.universe.labels[ax], iv.lower, iv.upper, gl, gu});
            const bool ok = std::isfinite(gl) && std::isfinite(gu) && std::abs(gl - iv.lower) <= vo.zone_tol_musd &&
                            std::abs(gu - iv.upper) <= vo.zone_tol_musd;
            rep.zones_ok = rep.zones_ok && ok;
        }
    }
    return rep;
}

inline ValidationReport run_validate(const CommonOptions& o, const ValidateOptions& vo) {
    const ModelConfig c = detail::prepare_config(o);
    detail::OutputDir out(o.out_dir);
    std::ostringstream csv;
    const ValidationReport rep = compare_with_grid(c, vo, &csv, detail::riccati_options(o));
    out.write("quote_comparison.csv", csv.str());

    json r;
    r["hjb_time_steps"] = rep.hjb_steps;
    json bands = json::array();
    for (const auto& b : rep.bands)
        bands.push_back(json{{"max_abs_inventory_from_musd", b.lower}, {"max_abs_inventory_to_musd", b.upper},
                             {"points", b.points}, {"sup_abs_diff_bps", b.sup_bps}, {"mean_abs_diff_bps", b.mean_bps},
                             {"sup_diff_over_tolerance", b.sup_excess},
                             {"large_deviation", b.sup_excess > 1.0}});
    r["quote_bands"] = bands;
    json zones = json::array();
    for (const auto& z : rep.zones)
        zones.push_back(json{{"pair", z.pair}, {"axis", z.axis}, {"riccati_lower_musd", detail::jnum(z.riccati_lower)},
                             {"riccati_upper_musd", detail::jnum(z.riccati_upper)},
                             {"grid_lower_musd", detail::jnum(z.grid_lower)},
                             {"grid_upper_musd", detail::jnum(z.grid_upper)}});
    r["zone_edges"] = zones;
    r["inner_band_quotes_within_tolerance"] = rep.inner_quotes_ok;
    r["zone_edges_within_tolerance"] = rep.zones_ok;
    out.write_json("validation_report.json", r);
    detail::finish(out, "validate", o, c,
                   json{{"y_max_musd", vo.y_max}, {"h_musd", vo.h}, {"band_edges_musd", vo.band_edges},
                        {"quote_abs_tol_bps", vo.quote_abs_tol_bps}, {"quote_rel_tol", vo.quote_rel_tol},
                        {"zone_tol_musd", vo.zone_tol_musd}});
    return rep;
}

}  // namespace fxmm::cli
