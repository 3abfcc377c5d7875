#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "fxmm/cli_commands.hpp"

using namespace fxmm;
using namespace fxmm::cli;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

CommonOptions common(const std::string& cfg, const std::string& sub) {
    CommonOptions o;
    o.config_path = fixture::config_path(cfg);
    o.out_dir = (fs::temp_directory_path() / "fxmm_cli_tests" / sub).string();
    fs::remove_all(o.out_dir);
    o.riccati_steps = 2000;
    return o;
}

std::map<std::string, std::string> snapshot(const std::string& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
    return out;
}

nlohmann::json manifest(const std::string& dir) { return nlohmann::json::parse(slurp(fs::path(dir) / "manifest.json")); }

std::vector<std::vector<std::string>> csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> r;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) r.push_back(cell);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_CASE("solve writes A0, B0, path and manifest", "[cli]") {
    const auto o = common("trio.json", "solve");
    const auto diag = run_solve(o);
    for (const char* f : {"A0.csv", "B0.csv", "riccati_path.csv", "diagnostics.json", "manifest.json"})
        CHECK(fs::exists(fs::path(o.out_dir) / f));
    const auto a = csv(fs::path(o.out_dir) / "A0.csv");
    REQUIRE(a.size() == 4);
    CHECK(a[0] == std::vector<std::string>{"currency", "USD", "EUR", "GBP"});
    CHECK(a[1][0] == "USD");
    for (std::size_t k = 1; k < 4; ++k) CHECK(std::stod(a[1][k]) == 0.0);
    CHECK(std::stod(a[2][2]) > 0.0);
    CHECK(diag["min_eigenvalue"].get<double>() >= -1e-12);
    CHECK(diag["doubled_horizon_max_relative_change"].get<double>() < 1e-3);

    const auto m = manifest(o.out_dir);
    CHECK(m["command"] == "solve");
    CHECK(m["mode"] == "stationary");
    CHECK(m["files"].size() == 4);
    CHECK(m["effective_config"]["reference"] == "USD");
}

TEST_CASE("gamma override to zero gives a zero quadratic term", "[cli]") {
    auto o = common("eurusd.json", "solve_gamma0");
    o.gamma_override = 0.0;
    run_solve(o);
    const auto a = csv(fs::path(o.out_dir) / "A0.csv");
    for (std::size_t r = 1; r < a.size(); ++r)
        for (std::size_t k = 1; k < a[r].size(); ++k) CHECK(std::stod(a[r][k]) == 0.0);
    CHECK(manifest(o.out_dir)["gamma_override"] == 0.0);
}

TEST_CASE("reruns are byte-identical", "[cli]") {
    auto o = common("trio.json", "determinism");
    SimulateOptions so;
    so.steps = 3000;
    so.max_lag = 100;
    o.seed = 99;
    run_simulate(o, so);
    const auto first = snapshot(o.out_dir);
    run_simulate(o, so);
    CHECK(snapshot(o.out_dir) == first);
    CHECK(first.size() == 7);

    SurfaceOptions sf;
    sf.scan = {"EUR", -10.0, 10.0, 1.0};
    const auto q = common("trio.json", "determinism_quote");
    run_quote_surface(q, sf);
    const auto qa = snapshot(q.out_dir);
    run_quote_surface(q, sf);
    CHECK(snapshot(q.out_dir) == qa);
}

TEST_CASE("quote and hedge surfaces", "[cli]") {
    const auto o = common("trio.json", "surface");
    SurfaceOptions sf;
    sf.scan = {"EUR", -20.0, 20.0, 5.0};
    run_quote_surface(o, sf);
    const auto rows = csv(fs::path(o.out_dir) / "quote_surface.csv");
    REQUIRE(rows.size() == 1 + 9 * 3);
    CHECK(rows[0][0] == "inventory_EUR_musd");
    // Long EUR: the EURUSD bid widens past the ask.
    for (const auto& r : rows) {
        if (r[0] == "20" && r[1] == "EURUSD") CHECK(std::stod(r[2]) > std::stod(r[3]));
        if (r[0] == "-20" && r[1] == "EURUSD") CHECK(std::stod(r[2]) < std::stod(r[3]));
    }

    const auto h = common("trio.json", "hedge_surface");
    run_hedge_surface(h, ScanSpec{"EUR", -60.0, 60.0, 30.0});
    const auto hr = csv(fs::path(h.out_dir) / "hedge_surface.csv");
    REQUIRE(hr.size() == 1 + 5 * 3);
    for (const auto& r : hr) {
        if (r[0] == "0") CHECK(std::stod(r[3]) == 0.0);
        if (r[0] == "60" && r[1] == "EURUSD") CHECK(std::stod(r[3]) < 0.0);  // sell EUR for USD
    }
}

TEST_CASE("scan and option errors", "[cli]") {
    const auto o = common("trio.json", "errors");
    SurfaceOptions sf;
    sf.scan = {"EUR", 10.0, -10.0, 1.0};
    CHECK_THROWS_AS(run_quote_surface(o, sf), CommandError);
    sf.scan = {"EUR", -10.0, 10.0, 0.0};
    CHECK_THROWS_AS(run_quote_surface(o, sf), CommandError);
    sf.scan = {"USD", -10.0, 10.0, 1.0};
    CHECK_THROWS_WITH(run_quote_surface(o, sf), ContainsSubstring("reference currency"));
    sf.scan = {"XXX", -10.0, 10.0, 1.0};
    CHECK_THROWS_WITH(run_quote_surface(o, sf), ContainsSubstring("unknown currency"));
    sf.scan = {"EUR", -10.0, 10.0, 1.0};
    sf.tier = 3;
    CHECK_THROWS_AS(run_quote_surface(o, sf), CommandError);
    CHECK(ScanSpec{"EUR", -1.0, 1.0, 0.5}.values() == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});

    ZoneOptions z;
    z.pair = "GBPUSD";
    z.axis = "GBP";
    z.scan = ScanSpec{"GBP", -1.0, 1.0, 1.0};
    CHECK_THROWS_AS(run_zone(o, z), CommandError);
    CHECK_THROWS_AS(run_frontier(o, {}, SimulateOptions{}), CommandError);
    auto bad = o;
    bad.config_path = fixture::config_path("missing.json");
    CHECK_THROWS(run_solve(bad));
}

TEST_CASE("zone thresholds and pair removal", "[cli]") {
    auto o = common("trio.json", "zone");
    ZoneOptions z;
    z.pair = "GBPUSD";
    z.axis = "GBP";
    z.scan = ScanSpec{"EUR", -10.0, 10.0, 5.0};
    const auto with = run_zone(o, z);
    const auto rows = csv(fs::path(o.out_dir) / "zone.csv");
    REQUIRE(rows.size() == 6);
    for (std::size_t r = 1; r < rows.size(); ++r) CHECK(std::stod(rows[r][1]) < std::stod(rows[r][2]));
    CHECK(with["lower_slope"].get<double>() < 0.0);
    CHECK_THAT(with["lower_slope"].get<double>(), WithinAbs(with["upper_slope"].get<double>(), 1e-3));

    auto o2 = common("trio_rho0.json", "zone_without");
    z.without_pair = "EURGBP";
    const auto without = run_zone(o2, z);
    CHECK_THAT(without["lower_slope"].get<double>(), WithinAbs(0.0, 1e-3));
    CHECK(manifest(o2.out_dir)["parameters"]["without_pair"] == "EURGBP");
    const auto act = csv(fs::path(o2.out_dir) / "activation.csv");
    CHECK(act.size() == 3);  // EURGBP is no longer traded D2D
}

TEST_CASE("simulate outputs", "[cli]") {
    auto o = common("trio.json", "simulate");
    SimulateOptions so;
    so.steps = 5000;
    so.output_every = 100;
    so.max_lag = 50;
    so.hist_range = 30.0;
    so.hist_bin = 10.0;
    const auto m = run_simulate(o, so);
    const auto rec = csv(fs::path(o.out_dir) / "record.csv");
    CHECK(rec.size() == 1 + 51);
    CHECK(rec[0].size() == 6);
    const auto acf = csv(fs::path(o.out_dir) / "acf.csv");
    CHECK(acf.size() == 1 + 51);
    CHECK(acf[1][1] == "1");
    const auto hist = csv(fs::path(o.out_dir) / "histogram.csv");
    CHECK(hist.size() == 1 + 36);
    std::size_t total = 0;
    for (std::size_t r = 1; r < hist.size(); ++r) total += std::stoul(hist[r][2]);
    CHECK(total + m["histogram_outside"].get<std::size_t>() == 5001);
    CHECK(m["internalization_ratio"].is_number());
    CHECK(m["inventory_correlation"].contains("EUR/GBP"));
    const auto trades = csv(fs::path(o.out_dir) / "trades.csv");
    CHECK(trades.size() == 1 + m["fills"].get<std::size_t>());

    so.trades_log = false;
    o = common("trio.json", "simulate_no_trades");
    run_simulate(o, so);
    CHECK_FALSE(fs::exists(fs::path(o.out_dir) / "trades.csv"));
}

TEST_CASE("frontier output", "[cli]") {
    const auto o = common("trio.json", "frontier");
    SimulateOptions so;
    so.steps = 3000;
    const auto pts = run_frontier(o, {5.0, 50.0}, so);
    const auto rows = csv(fs::path(o.out_dir) / "frontier.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "5");
    CHECK(pts[1].gamma == 50.0);
}

TEST_CASE("validate on a small grid", "[cli]") {
    auto o = common("eurusd.json", "validate");
    o.horizon_override = 0.01;
    ValidateOptions vo;
    vo.y_max = 20.0;
    vo.band_edges = {10.0};
    const auto rep = run_validate(o, vo);
    REQUIRE(rep.bands.size() == 2);
    CHECK(rep.bands[0].points > 0);
    CHECK(rep.hjb_steps > 0);
    const auto j = nlohmann::json::parse(slurp(fs::path(o.out_dir) / "validation_report.json"));
    CHECK(j["quote_bands"].size() == 2);
    CHECK(fs::exists(fs::path(o.out_dir) / "quote_comparison.csv"));
    CHECK_THROWS_AS(run_validate(common("majors.json", "validate_big"), vo), CommandError);
}
