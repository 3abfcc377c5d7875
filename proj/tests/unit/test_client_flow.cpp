#include <catch_amalgamated.hpp>

#include <cmath>

#include "fxmm/client_flow.hpp"
#include "fxmm/units.hpp"
#include "oracles.hpp"

using namespace fxmm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// EURUSD tier 1 and tier 2 curves.
const LogisticCurve kTier1{-1.9, units::from_per_bps(11.0)};
const LogisticCurve kTier2{-0.3, units::from_per_bps(3.5)};

}  // namespace

TEST_CASE("fill probability is the logistic function and stays finite", "[client_flow]") {
    const double d = units::from_bps(0.3);
    CHECK_THAT(fill_probability(kTier1, d), WithinRel(1.0 / (1.0 + std::exp(kTier1.alpha + kTier1.beta * d)), 1e-14));
    CHECK(fill_probability({800.0, 1.0}, 0.0) >= 0.0);
    CHECK(fill_probability({800.0, 1.0}, 0.0) < 1e-300);
    CHECK(fill_probability({-800.0, 1.0}, 0.0) == 1.0);
    CHECK_THAT(fill_probability({0.0, 1.0}, 0.0), WithinAbs(0.5, 0.0));
}

TEST_CASE("optimal markup satisfies the first-order condition", "[client_flow]") {
    for (double p_bps : {-5.0, -1.0, 0.0, 0.2, 3.0}) {
        const double p = units::from_bps(p_bps);
        for (const auto& c : {kTier1, kTier2}) {
            const auto s = solve_markup(c, p);
            CHECK_THAT(s.delta, WithinRel(p + 1.0 / (c.beta * (1.0 - s.fill)), 1e-12));
            CHECK_THAT(s.hamiltonian, WithinRel(s.fill * (s.delta - p), 1e-14));
        }
    }
}

TEST_CASE("optimal markup matches a brute-force grid search", "[client_flow]") {
    for (const auto& c : {kTier1, kTier2}) {
        const auto g = oracle::grid_search(
            [&](double d_bps) { return oracle::logistic(c.alpha, c.beta, units::from_bps(d_bps)) * d_bps; }, 0.0, 30.0,
            1e-4);
        const auto s = solve_markup(c, 0.0);
        CHECK_THAT(units::to_bps(s.delta), WithinAbs(g.argmax, 1e-6));
        CHECK_THAT(units::to_bps(s.hamiltonian), WithinAbs(g.value, 1e-6));
        CHECK(units::to_bps(s.hamiltonian) >= g.raw_value - 1e-12);
    }
}

TEST_CASE("quadratic coefficients match Richardson finite differences", "[client_flow]") {
    for (const auto& c : {kTier1, kTier2, LogisticCurve{0.7, units::from_per_bps(1.0)}}) {
        const auto q = quadratic_coefficients(c);
        const auto h = [&](double p) { return oracle::hamiltonian(c.alpha, c.beta, p); };
        const auto [d1, d2] = oracle::richardson_derivatives(h, 0.02 / c.beta);
        CHECK_THAT(q.a0, WithinRel(h(0.0), 1e-10));
        CHECK_THAT(q.a1, WithinRel(d1, 1e-6));
        CHECK_THAT(q.a2, WithinRel(d2, 1e-6));
        CHECK(q.a0 >= 0.0);
        CHECK(q.a1 <= 0.0);
        CHECK(q.a2 >= 0.0);
    }
}

TEST_CASE("quadratic expansion is second-order accurate", "[client_flow]") {
    const auto q = quadratic_coefficients(kTier1);
    const double p1 = 0.1 / kTier1.beta, p2 = 0.05 / kTier1.beta;
    const double e1 = std::abs(hamiltonian(kTier1, p1) - quadratic_hamiltonian(q, p1));
    const double e2 = std::abs(hamiltonian(kTier1, p2) - quadratic_hamiltonian(q, p2));
    CHECK_THAT(e1 / e2, WithinAbs(8.0, 0.5));
}

TEST_CASE("markup solver copes with extreme spreads and warm starts", "[client_flow]") {
    const LogisticCurve c{0.0, units::from_per_bps(10.0)};
    for (double p_bps : {-100.0, 100.0}) {
        const auto s = solve_markup(c, units::from_bps(p_bps));
        CHECK(std::isfinite(s.delta));
        CHECK_THAT(s.delta, WithinAbs(units::from_bps(p_bps) + 1.0 / (c.beta * (1.0 - s.fill)), 1e-14));
    }
    const auto cold = solve_markup(kTier1, units::from_bps(0.4));
    const auto warm = solve_markup(kTier1, units::from_bps(0.4), solve_markup(kTier1, units::from_bps(0.39)).scaled);
    CHECK_THAT(warm.delta, WithinRel(cold.delta, 1e-14));
    CHECK_THROWS_AS(solve_markup({0.0, 0.0}, 0.0), MarkupSolveError);
    CHECK_THROWS_AS(solve_markup({0.0, 1.0}, std::nan("")), MarkupSolveError);
}

TEST_CASE("markup increases with the reservation spread", "[client_flow]") {
    double prev = -1.0;
    for (int k = -20; k <= 20; ++k) {
        const double d = optimal_markup(kTier2, units::from_bps(0.25 * k));
        CHECK(d > prev);
        prev = d;
    }
}
