// fxmm: command-line front end for the market-making engine.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "fxmm/cli_commands.hpp"

namespace {

using namespace fxmm;
using namespace fxmm::cli;

void add_common(CLI::App* sub, CommonOptions& o, bool& time_dependent) {
    sub->add_option("--config", o.config_path, "Model configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option_function<double>(
        "--gamma-override", [&o](const double& g) { o.gamma_override = g; }, "Risk aversion, 1/M$");
    sub->add_option_function<double>(
        "--horizon-override", [&o](const double& t) { o.horizon_override = t; }, "Horizon, days");
    auto* st = sub->add_flag("--stationary", "Use A(0), B(0) at all times (default)");
    auto* td = sub->add_flag("--time-dependent", time_dependent, "Use A(t), B(t)");
    st->excludes(td);
    sub->add_option("--riccati-steps", o.riccati_steps, "RK4 steps for the Riccati system")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

void add_scan(CLI::App* sub, ScanSpec& s, bool required) {
    auto* opt = sub->add_option("--scan", s.currency, "Currency whose inventory is scanned");
    if (required) opt->required();
    sub->add_option("--min", s.min, "Scan start, M$")->capture_default_str();
    sub->add_option("--max", s.max, "Scan end, M$")->capture_default_str();
    sub->add_option("--step", s.step, "Scan step, M$")->capture_default_str();
}

void add_sim(CLI::App* sub, SimulateOptions& so) {
    sub->add_option("--steps", so.steps, "Number of time steps")->capture_default_str();
    sub->add_option("--dt-seconds", so.dt_seconds, "Time step, seconds")->capture_default_str();
    sub->add_option("--record-every", so.record_every, "Keep every n-th state")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-currency FX market making: pricing ladders, D2D hedging, simulation"};
    app.require_subcommand(1);

    CommonOptions common;
    bool time_dependent = false;

    SolveOptions solve_opts;
    auto* solve = app.add_subcommand("solve", "Solve the Riccati system and write A(0), B(0)");
    add_common(solve, common, time_dependent);
    solve->add_option("--path-every", solve_opts.path_every, "Stride of the written A/B path")->capture_default_str();
    solve->add_flag("--euler", solve_opts.euler, "Explicit Euler instead of RK4");

    SurfaceOptions surf;
    auto* quote = app.add_subcommand("quote-surface", "Top-of-book markups over an inventory scan");
    add_common(quote, common, time_dependent);
    add_scan(quote, surf.scan, true);
    quote->add_option("--tier", surf.tier, "Client tier (1-based)")->capture_default_str();
    quote->add_option("--size", surf.size, "Trade size, M$")->capture_default_str();

    ScanSpec hedge_scan{"", -60.0, 60.0, 1.0};
    auto* hedge = app.add_subcommand("hedge-surface", "D2D hedge rates over an inventory scan");
    add_common(hedge, common, time_dependent);
    add_scan(hedge, hedge_scan, true);

    ZoneOptions zone_opts;
    ScanSpec zone_scan{"", -30.0, 30.0, 1.0};
    auto* zone = app.add_subcommand("zone", "Pure internalization thresholds");
    add_common(zone, common, time_dependent);
    zone->add_option("--pair", zone_opts.pair, "D2D pair, e.g. GBPUSD")->required();
    zone->add_option("--axis", zone_opts.axis, "Currency carrying the thresholds")->required();
    add_scan(zone, zone_scan, false);
    zone->add_option("--without-pair", zone_opts.without_pair, "Remove a quoted pair from the market");
    zone->add_option("--resolution", zone_opts.resolution, "Threshold resolution, M$")->capture_default_str();

    SimulateOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo trajectory and diagnostics");
    add_common(simulate, common, time_dependent);
    add_sim(simulate, sim_opts);
    simulate->add_option("--output-every", sim_opts.output_every, "Stride of record.csv rows")->capture_default_str();
    simulate->add_option("--max-lag", sim_opts.max_lag, "Largest ACF lag, in recorded samples")->capture_default_str();
    simulate->add_flag("!--no-trades", sim_opts.trades_log, "Skip the trade log");
    simulate->add_option("--hist-x", sim_opts.hist_x, "Histogram x currency");
    simulate->add_option("--hist-y", sim_opts.hist_y, "Histogram y currency");
    simulate->add_option("--hist-range", sim_opts.hist_range, "Histogram half-width, M$")->capture_default_str();
    simulate->add_option("--hist-bin", sim_opts.hist_bin, "Histogram bin width, M$")->capture_default_str();

    ValidateOptions val_opts;
    auto* validate = app.add_subcommand("validate", "Compare the Riccati strategy with the HJB grid solver");
    add_common(validate, common, time_dependent);
    validate->add_option("--y-max", val_opts.y_max, "Grid half-width, M$")->capture_default_str();
    validate->add_option("--grid-step", val_opts.h, "Grid spacing, M$")->capture_default_str();
    validate->add_option("--bands", val_opts.band_edges, "Band edges on max |y|, M$")->delimiter(',');

    std::vector<double> gammas{5.0, 20.0, 80.0};
    SimulateOptions frontier_opts;
    auto* frontier = app.add_subcommand("frontier", "Mean P&L and risk across risk aversions");
    add_common(frontier, common, time_dependent);
    add_sim(frontier, frontier_opts);
    frontier->add_option("--gammas", gammas, "Risk aversions, 1/M$")->delimiter(',')->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    common.mode = time_dependent ? StrategyMode::TimeDependent : StrategyMode::Stationary;

    try {
        if (solve->parsed()) {
            run_solve(common, solve_opts);
        } else if (quote->parsed()) {
            run_quote_surface(common, surf);
        } else if (hedge->parsed()) {
            run_hedge_surface(common, hedge_scan);
        } else if (zone->parsed()) {
            if (!zone_scan.currency.empty()) zone_opts.scan = zone_scan;
            run_zone(common, zone_opts);
        } else if (simulate->parsed()) {
            run_simulate(common, sim_opts);
        } else if (validate->parsed()) {
            const auto rep = run_validate(common, val_opts);
            if (!rep.inner_quotes_ok || !rep.zones_ok) {
                std::fprintf(stderr, "note: deviations above tolerance, see validation_report.json\n");
            }
        } else if (frontier->parsed()) {
            run_frontier(common, gammas, frontier_opts);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::printf("wrote %s\n", common.out_dir.c_str());
    return 0;
}
