#include <catch_amalgamated.hpp>

#include "fxmm/d2d_hedging.hpp"
#include "fxmm/units.hpp"
#include "oracles.hpp"

using namespace fxmm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("execution cost is proportional plus quadratic", "[d2d]") {
    const HedgePairCost c{units::from_bps(0.1), units::from_bps(1e-5)};
    CHECK_THAT(execution_cost(c, 200.0), WithinRel(1e-5 * 200.0 + 1e-9 * 4e4, 1e-14));
    CHECK(execution_cost(c, -200.0) == execution_cost(c, 200.0));
    CHECK(execution_cost(c, 0.0) == 0.0);
}

TEST_CASE("hedge transform and rate match a grid oracle", "[d2d]") {
    const HedgePairCost c{units::from_bps(0.1), units::from_bps(1e-5)};
    for (double p_bps : {-0.9, -0.3, -0.1, 0.05, 0.25, 0.8}) {
        const double p = units::from_bps(p_bps);
        const auto g = oracle::hedge_transform(c.psi, c.eta, p, 1e5, 0.1);
        CHECK_THAT(hedge_hamiltonian(c, p), WithinAbs(g.raw_value, 1e-9));
        CHECK_THAT(optimal_rate(c, p), WithinAbs(g.raw_argmax, 0.05 + 1e-9));
    }
}

TEST_CASE("no trading inside the cost band", "[d2d]") {
    const HedgePairCost c{units::from_bps(0.25), units::from_bps(2.5e-5)};
    CHECK(optimal_rate(c, c.psi) == 0.0);
    CHECK(optimal_rate(c, -c.psi) == 0.0);
    CHECK(optimal_rate(c, 0.5 * c.psi) == 0.0);
    CHECK(hedge_hamiltonian(c, c.psi) == 0.0);
    CHECK(optimal_rate(c, 1.01 * c.psi) > 0.0);
    CHECK(optimal_rate(c, -1.01 * c.psi) < 0.0);
}

TEST_CASE("rate is odd and the one-sided transforms split the two-sided one", "[d2d]") {
    const HedgePairCost c{units::from_bps(0.15), units::from_bps(1.5e-5)};
    for (double p_bps : {-1.0, -0.2, 0.0, 0.1, 0.4}) {
        const double p = units::from_bps(p_bps);
        CHECK(optimal_rate(c, -p) == -optimal_rate(c, p));
        CHECK_THAT(hedge_hamiltonian_buy(c, p) + hedge_hamiltonian_sell(c, p), WithinRel(hedge_hamiltonian(c, p), 1e-14));
        // Rate is the derivative of the transform.
        const double e = 1e-9;
        if (std::abs(std::abs(p) - c.psi) > 1e-7) {
            CHECK_THAT((hedge_hamiltonian(c, p + e) - hedge_hamiltonian(c, p - e)) / (2 * e),
                       WithinAbs(optimal_rate(c, p), 1e-3));
        }
    }
}
