#pragma once

// Dealer-to-dealer execution costs L(xi) = psi |xi| + eta xi^2 and the
// associated transform Hc(p) = sup_xi p xi - L(xi).

#include <algorithm>
#include <cmath>

namespace fxmm {

struct HedgePairCost {
    double psi{0.0};  // proportional cost, fraction
    double eta{1.0};  // quadratic cost, fraction * day / M$
    // The cost exponent is fixed to 1 (quadratic term), which keeps the
    // transform and its derivative in closed form.
    static constexpr double phi = 1.0;
};

/// M$/day for a rate `xi` in M$/day.
inline double execution_cost(const HedgePairCost& cost, double xi) {
    return cost.psi * std::abs(xi) + cost.eta * xi * xi;
}

inline double hedge_hamiltonian(const HedgePairCost& cost, double p) {
    const double excess = std::max(std::abs(p) - cost.psi, 0.0);
    return excess * excess / (4.0 * cost.eta);
}

/// Derivative of hedge_hamiltonian; zero on the closed band |p| <= psi.
inline double optimal_rate(const HedgePairCost& cost, double p) {
    const double excess = std::abs(p) - cost.psi;
    if (excess <= 0.0) return 0.0;
    return std::copysign(excess / (2.0 * cost.eta), p);
}

// One-sided transforms sup_{xi >= 0} and sup_{xi <= 0}, used by upwind
// discretisations where the sign of the rate selects the difference.
inline double hedge_hamiltonian_buy(const HedgePairCost& cost, double p) {
    const double excess = std::max(p - cost.psi, 0.0);
    return excess * excess / (4.0 * cost.eta);
}

inline double hedge_hamiltonian_sell(const HedgePairCost& cost, double p) {
    const double excess = std::max(-p - cost.psi, 0.0);
    return excess * excess / (4.0 * cost.eta);
}

}  // namespace fxmm
