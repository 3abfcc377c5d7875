// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: acceptance <scratch-dir> [cli-binary]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "fxmm/cli_commands.hpp"
#include "fxmm/metrics.hpp"
#include "oracles.hpp"

using namespace fxmm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass{false};
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::size_t idx(const ModelConfig& c, const std::string& code) { return *c.universe.find(code); }

SimConfig sim_steps(std::size_t n, std::uint64_t seed) {
    SimConfig sc;
    sc.n_steps = n;
    sc.seed = seed;
    sc.record_trades = false;
    return sc;
}

SimulationRecord run_sim(const ModelConfig& c, std::size_t n, std::uint64_t seed) {
    const StrategyEngine e(c, solve_riccati(c));
    return simulate(e, sim_steps(n, seed));
}

// Ordinary least-squares slope.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = oracle::mean(x, 0, x.size()), my = oracle::mean(y, 0, y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

// 1. Hamiltonian and markup vs brute force; quadratic coefficients vs finite differences.
Outcome criterion1() {
    const auto c = fixture::load("majors.json");
    std::vector<LogisticCurve> curves;
    for (const auto& s : c.liquidity)
        for (const auto& b : s.buckets) {
            const bool seen = std::any_of(curves.begin(), curves.end(), [&](const LogisticCurve& k) {
                return k.alpha == b.curve.alpha && k.beta == b.curve.beta;
            });
            if (!seen) curves.push_back(b.curve);
        }

    const auto t0 = Clock::now();
    std::vector<MarkupSolution> sol;
    std::vector<QuadraticCoefficients> quad;
    for (const auto& k : curves) {
        sol.push_back(solve_markup(k, 0.0));
        quad.push_back(quadratic_coefficients(k));
    }
    const double lib_time = seconds_since(t0);

    double worst_delta = 0.0, worst_h = 0.0, worst_a1 = 0.0, worst_a2 = 0.0;
    for (std::size_t n = 0; n < curves.size(); ++n) {
        const auto& k = curves[n];
        const double beta_bps = units::to_per_bps(k.beta);
        const double hi = (std::abs(k.alpha) + 5.0) / beta_bps;
        const auto g = oracle::grid_search(
            [&](double d) { return oracle::logistic(k.alpha, beta_bps, d) * d; }, 0.0, hi, 1e-4);
        worst_delta = std::max(worst_delta, std::abs(units::to_bps(sol[n].delta) - g.argmax));
        worst_h = std::max(worst_h, std::abs(units::to_bps(sol[n].hamiltonian) - g.value));
        const auto h = [&](double p) { return oracle::hamiltonian(k.alpha, k.beta, p); };
        const auto [d1, d2] = oracle::richardson_derivatives(h, 0.02 / k.beta);
        worst_a1 = std::max(worst_a1, std::abs(quad[n].a1 - d1) / std::abs(d1));
        worst_a2 = std::max(worst_a2, std::abs(quad[n].a2 - d2) / std::abs(d2));
    }
    const bool pass = worst_delta <= 1e-6 && worst_h <= 1e-6 && worst_a1 <= 1e-6 && worst_a2 <= 1e-6 && lib_time < 1.0;
    return {pass, std::to_string(curves.size()) + " curves, max |d_markup| " + fmt("%.2e", worst_delta) +
                      " bps, max |d_H| " + fmt("%.2e", worst_h) + " bps, a1 rel " + fmt("%.2e", worst_a1) +
                      ", a2 rel " + fmt("%.2e", worst_a2) + ", runtime " + fmt("%.4f", lib_time) + " s"};
}

// 2. Structure and stationarity of A(0) on the five-currency config.
Outcome criterion2() {
    const auto c = fixture::load("majors.json");
    const auto t0 = Clock::now();
    const auto sol = solve_riccati(c);
    const double runtime = seconds_since(t0);
    const auto twice = solve_riccati(with_horizon(c, 2.0 * c.objective.horizon));
    const Eigen::MatrixXd& a = sol.a.front();
    const std::size_t ref = c.universe.reference_index;
    const auto r = static_cast<Eigen::Index>(ref);
    const double sym = (a - a.transpose()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    const double min_eig = es.eigenvalues().minCoeff();
    const double ref_row = std::max(a.row(r).cwiseAbs().maxCoeff(), a.col(r).cwiseAbs().maxCoeff());
    double min_off = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && i != r && j != r) min_off = std::min(min_off, a(i, j));
    double change = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != r && j != r) change = std::max(change, std::abs(twice.a.front()(i, j) - a(i, j)) / std::abs(a(i, j)));
    const bool pass = c.objective.gamma == 20.0 && c.objective.horizon == 0.05 && sol.a.size() == 5001 &&
                      sym <= 1e-12 && min_eig >= -1e-10 && ref_row <= 1e-12 && min_off >= 0.0 && change <= 1e-3 &&
                      runtime < 1.0;
    return {pass, "symmetry " + fmt("%.1e", sym) + ", min eig " + fmt("%.3e", min_eig) + ", USD row " +
                      fmt("%.1e", ref_row) + ", min off-diag " + fmt("%.3e", min_off) + ", T-doubling change " +
                      fmt("%.2e", change) + ", runtime " + fmt("%.4f", runtime) + " s"};
}

// 3. Skews at +20 M$ GBP, tier 1, top of book.
Outcome criterion3() {
    const auto c = fixture::load("majors.json");
    const StrategyEngine e(c, solve_riccati(c));
    const std::size_t usd = idx(c, "USD"), eur = idx(c, "EUR"), gbp = idx(c, "GBP");
    const double z = c.liquidity.front().buckets.front().size;
    InventoryState flat = InventoryState::flat(c.dim()), longg = flat;
    longg.y(static_cast<Eigen::Index>(gbp)) = 20.0;
    auto q = [&](const InventoryState& s, std::size_t buy, std::size_t sell) { return units::to_bps(e.quote(s, 0, buy, sell, z)); };
    const double m = 1e-3;
    std::vector<std::pair<std::string, bool>> checks{
        {"GBPUSD dealer sells GBP tighter", q(longg, usd, gbp) < q(flat, usd, gbp) - m},
        {"GBPUSD dealer buys GBP wider", q(longg, gbp, usd) > q(flat, gbp, usd) + m},
        {"EURUSD dealer sells EUR tighter", q(longg, usd, eur) < q(flat, usd, eur) - m},
        {"EURUSD dealer buys EUR wider", q(longg, eur, usd) > q(flat, eur, usd) + m},
        {"EURGBP dealer sells GBP tighter", q(longg, eur, gbp) < q(flat, eur, gbp) - m},
        {"EURGBP dealer buys GBP wider", q(longg, gbp, eur) > q(flat, gbp, eur) + m},
    };
    bool pass = true;
    std::string failed;
    for (const auto& [name, ok] : checks) {
        pass = pass && ok;
        if (!ok) failed += " [" + name + "]";
    }
    return {pass, "GBPUSD sell-GBP " + fmt("%.4f", q(longg, usd, gbp)) + " vs flat " + fmt("%.4f", q(flat, usd, gbp)) +
                      " bps, buy-GBP " + fmt("%.4f", q(longg, gbp, usd)) + " vs " + fmt("%.4f", q(flat, gbp, usd)) +
                      " bps" + (failed.empty() ? std::string(", all 6 orderings hold") : ", failed:" + failed)};
}

// 4. EURUSD hedge rate along the EUR axis: dead zone, monotone outside, other pairs later.
Outcome criterion4() {
    const auto c = fixture::load("majors.json");
    const StrategyEngine e(c, solve_riccati(c));
    const std::size_t usd = idx(c, "USD"), eur = idx(c, "EUR");
    const auto ax = static_cast<Eigen::Index>(eur);
    const InventoryState flat = InventoryState::flat(c.dim());
    const auto zone = e.activation_interval(flat, eur, usd, eur, 1e-3);

    InventoryState st = flat;
    const double res = 1e-3;
    double prev = -INFINITY;
    bool zero_inside = true, monotone = true, active_outside = true;
    for (long k = -60000; k <= 60000; ++k) {
        const double v = static_cast<double>(k) * res;
        st.y(ax) = v;
        // Positive rates buy USD against EUR.
        const double r = e.hedge_rates(st).rate(usd, eur);
        if (v > zone.lower + res && v < zone.upper - res) {
            zero_inside = zero_inside && r == 0.0;
        } else if (v < zone.lower - res || v > zone.upper + res) {
            active_outside = active_outside && r != 0.0;
        }
        monotone = monotone && r >= prev;
        prev = r;
    }
    const bool nonempty = zone.lower < -res && zone.upper > res;
    bool later = true;
    std::string narrowest;
    double narrow = std::numeric_limits<double>::infinity();
    for (const auto& hc : c.hedge_costs.pairs) {
        if (!hc.available || (hc.i == usd && hc.j == eur)) continue;
        const auto iv = e.activation_interval(flat, eur, hc.i, hc.j, 1e-3);
        const double lo = std::isnan(iv.lower) ? -INFINITY : iv.lower, hi = std::isnan(iv.upper) ? INFINITY : iv.upper;
        later = later && lo < zone.lower && hi > zone.upper;
        const double w = std::min(-lo, hi);
        if (w < narrow) {
            narrow = w;
            narrowest = c.pair_name(hc.i, hc.j);
        }
    }
    const bool pass = nonempty && zero_inside && active_outside && monotone && later;
    return {pass, "EURUSD zone [" + fmt("%.3f", zone.lower) + ", " + fmt("%.3f", zone.upper) + "] M$, zero inside " +
                      (zero_inside ? "yes" : "no") + ", active outside " + (active_outside ? "yes" : "no") +
                      ", nondecreasing on [-60, 60] " + (monotone ? "yes" : "no") +
                      ", next pair to activate " + narrowest + " at " + fmt("%.3f", narrow) + " M$"};
}

// 5. Slant of the GBPUSD thresholds in the (EUR, GBP) plane.
Outcome criterion5() {
    auto slopes = [](const std::string& file) {
        const auto c = fixture::load(file);
        const StrategyEngine e(c, solve_riccati(c));
        const std::size_t usd = idx(c, "USD"), eur = idx(c, "EUR"), gbp = idx(c, "GBP");
        std::vector<double> xs;
        for (int k = -30; k <= 30; ++k) xs.push_back(k);
        const auto zone = e.internalization_zone(eur, xs, gbp, usd, gbp, InventoryState::flat(c.dim()), 1e-3);
        std::vector<double> lo, hi;
        for (const auto& z : zone) {
            lo.push_back(z.lower);
            hi.push_back(z.upper);
        }
        return std::pair{ls_slope(xs, lo), ls_slope(xs, hi)};
    };
    const auto cross = slopes("trio.json"), nocross = slopes("trio_nocross.json");
    const auto rho0 = slopes("trio_rho0.json"), rho0_nocross = slopes("trio_rho0_nocross.json");
    const bool a = cross.first < 0.0 && cross.second < 0.0;
    const bool b = cross.first < nocross.first && cross.second < nocross.second;
    const bool cc = std::abs(rho0_nocross.first) <= 1e-6 && std::abs(rho0_nocross.second) <= 1e-6;
    const bool d = std::abs(rho0.first) > 1e-6 && std::abs(rho0.second) > 1e-6;
    return {a && b && cc && d, "lower/upper slopes: rho=0.6 cross " + fmt("%.4f", cross.first) + "/" +
                                   fmt("%.4f", cross.second) + ", no cross " + fmt("%.4f", nocross.first) + "/" +
                                   fmt("%.4f", nocross.second) + "; rho=0 cross " + fmt("%.4f", rho0.first) + "/" +
                                   fmt("%.4f", rho0.second) + ", no cross " + fmt("%.1e", rho0_nocross.first) + "/" +
                                   fmt("%.1e", rho0_nocross.second)};
}

// 6. Grid HJB vs Riccati on the single-pair config.
Outcome criterion6() {
    const auto c = fixture::load("eurusd.json");
    cli::ValidateOptions vo;
    vo.y_max = 60.0;
    vo.h = 1.0;
    vo.band_edges = {20.0, 40.0};
    const auto t0 = Clock::now();
    const auto rep = cli::compare_with_grid(c, vo, nullptr);
    const double runtime = seconds_since(t0);
    const bool quotes = rep.bands.size() == 3 && rep.bands[0].sup_excess <= 1.0 && rep.bands[1].sup_excess <= 1.0;
    std::string zones;
    for (const auto& z : rep.zones)
        zones += " " + z.pair + " grid [" + fmt("%.2f", z.grid_lower) + ", " + fmt("%.2f", z.grid_upper) + "] vs [" +
                 fmt("%.2f", z.riccati_lower) + ", " + fmt("%.2f", z.riccati_upper) + "]";
    return {c.objective.gamma == 20.0 && quotes && rep.zones_ok && !rep.zones.empty(),
            "121 nodes, sup |diff| " + fmt("%.4f", rep.bands[0].sup_bps) + " bps (|Y|<=20), " +
                fmt("%.4f", rep.bands[1].sup_bps) + " bps (20-40), " + fmt("%.4f", rep.bands[2].sup_bps) +
                " bps (>40); zone edges" + zones + "; runtime " + fmt("%.1f", runtime) + " s"};
}

// 7. Trio trajectory: inventories anti-correlated, risk stationary.
Outcome criterion7() {
    const auto c = fixture::load("trio.json");
    const auto rec = run_sim(c, 100000, 7);
    const double corr = oracle::correlation(inventory_series(rec, idx(c, "EUR")), inventory_series(rec, idx(c, "GBP")));
    const std::size_t half = rec.samples() / 2;
    const double m1 = oracle::mean(rec.risk, 0, half), m2 = oracle::mean(rec.risk, half, rec.samples());
    const bool finite = std::isfinite(m1) && std::isfinite(m2) && m1 > 0.0 && m2 > 0.0;
    const bool stationary = std::abs(m1 - m2) <= 0.25 * std::min(m1, m2);
    return {corr < 0.0 && finite && stationary, "corr(Y_EUR, Y_GBP) " + fmt("%.3f", corr) + ", mean risk halves " +
                                                    fmt("%.4f", m1) + " / " + fmt("%.4f", m2) + " M$/day"};
}

// 8. Risk decorrelates faster than any single inventory.
Outcome criterion8() {
    const auto c = fixture::load("majors.json");
    const auto rec = run_sim(c, 100000, 7);
    const std::size_t max_lag = 5000;
    const auto risk_lag = first_lag_below(autocorrelation(rec.risk, max_lag));
    bool pass = risk_lag.has_value();
    std::string d = "risk " + (risk_lag ? std::to_string(*risk_lag) : std::string("none")) + " s";
    for (std::size_t i = 0; i < c.dim(); ++i) {
        if (i == c.universe.reference_index) continue;
        const auto lag = first_lag_below(autocorrelation(inventory_series(rec, i), max_lag));
        d += ", " + c.universe.labels[i] + " " + (lag ? std::to_string(*lag) : std::string(">5000")) + " s";
        pass = pass && (!lag || *risk_lag < *lag);
    }
    return {pass, "ACF < 0.5 first at: " + d};
}

// 9. Internalization ratio and its response to D2D costs.
Outcome criterion9() {
    const auto c = fixture::load("majors.json");
    const auto base = flow_decomposition(run_sim(c, 100000, 7), c);
    const auto costly_cfg = with_scaled_psi(c, 3.0);
    const auto costly = flow_decomposition(run_sim(costly_cfg, 100000, 7), costly_cfg);
    const bool pass = c.objective.gamma == 20.0 && base.internalization_ratio >= 0.6 &&
                      base.internalization_ratio <= 0.95 && costly.internalization_ratio > base.internalization_ratio;
    return {pass, "ratio " + fmt("%.4f", base.internalization_ratio) + ", with 3x psi " +
                      fmt("%.4f", costly.internalization_ratio)};
}

// 10. Variance falls as risk aversion rises.
Outcome criterion10() {
    const auto c = fixture::load("majors.json");
    const auto pts = efficient_frontier(c, {5.0, 20.0, 80.0}, sim_steps(100000, 7));
    const bool pass = pts[0].variance_rate > pts[1].variance_rate && pts[1].variance_rate > pts[2].variance_rate;
    std::string d;
    for (const auto& p : pts)
        d += (d.empty() ? "" : ", ") + std::string("gamma ") + fmt("%g", p.gamma) + ": " + fmt("%.5f", p.variance_rate);
    return {pass, "mean y'Sy/2 " + d};
}

// 11. Every CLI command, run twice into the same directory, writes identical bytes.
Outcome criterion11(const fs::path& scratch, const std::string& cli) {
    const std::string trio = fixture::config_path("trio.json");
    const std::string eurusd = fixture::config_path("eurusd.json");
    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve", "solve --config " + trio},
        {"quote-surface", "quote-surface --config " + trio + " --scan GBP --min -40 --max 40 --step 2"},
        {"hedge-surface", "hedge-surface --config " + trio + " --scan EUR"},
        {"zone", "zone --config " + trio + " --pair GBPUSD --axis GBP --scan EUR --min -30 --max 30 --step 5"},
        {"simulate", "simulate --config " + trio + " --seed 5 --steps 20000 --max-lag 200"},
        {"validate", "validate --config " + eurusd + " --horizon-override 0.01 --y-max 20 --grid-step 1"},
        {"frontier", "frontier --config " + trio + " --steps 5000 --gammas 5,20"},
    };
    auto snapshot = [](const fs::path& dir) {
        std::map<std::string, std::string> out;
        for (const auto& e : fs::directory_iterator(dir)) {
            std::ifstream f(e.path(), std::ios::binary);
            std::ostringstream s;
            s << f.rdbuf();
            out[e.path().filename().string()] = s.str();
        }
        return out;
    };
    bool pass = true;
    std::size_t files = 0;
    std::string failed;
    for (const auto& [name, args] : commands) {
        const fs::path dir = scratch / ("determinism_" + name);
        fs::remove_all(dir);
        const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + dir.string() + "\" > /dev/null";
        std::map<std::string, std::string> first;
        bool ok = std::system(cmd.c_str()) == 0;
        if (ok) first = snapshot(dir);
        ok = ok && std::system(cmd.c_str()) == 0;
        ok = ok && first.count("manifest.json") == 1 && snapshot(dir) == first;
        files += first.size();
        if (!ok) failed += " " + name;
        pass = pass && ok;
    }
    return {pass, std::to_string(commands.size()) + " commands, " + std::to_string(files) + " files compared" +
                      (failed.empty() ? std::string() : ", mismatched:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fxmm_acceptance";
    const std::string cli = argc > 2 ? argv[2] : FXMM_CLI_PATH;
    fs::create_directories(scratch);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"hamiltonian oracle", criterion1},
        {"riccati structure", criterion2},
        {"inventory skews", criterion3},
        {"hedge-rate dead zone", criterion4},
        {"zone slant", criterion5},
        {"grid vs riccati", criterion6},
        {"risk shaping", criterion7},
        {"acf ordering", criterion8},
        {"internalization ratio", criterion9},
        {"frontier", criterion10},
        {"determinism", [&] { return criterion11(scratch, cli); }},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
