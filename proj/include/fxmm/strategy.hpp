#pragma once

// Closed-form approximate controls built from a Riccati solution: client
// quote ladders, D2D hedge rates and the pure internalization zone.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fxmm/client_flow.hpp"
#include "fxmm/d2d_hedging.hpp"
#include "fxmm/model_config.hpp"
#include "fxmm/riccati.hpp"

namespace fxmm {

struct InventoryState {
    double t{0.0};        // day
    Eigen::VectorXd y;    // reference-valued inventories, M$
    double x{0.0};        // fee and cost account, M$

    static InventoryState flat(std::size_t d) { return {0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)), 0.0}; }
};

enum class StrategyMode { Stationary, TimeDependent };

/// Markups and fill intensities aligned with ModelConfig::liquidity.
struct QuoteLadder {
    std::vector<std::vector<double>> markup;     // fraction
    std::vector<std::vector<double>> intensity;  // lambda f(markup), 1/day
};

struct HedgeRate {
    std::size_t i{0};  // i < j; a positive rate buys i and pays j
    std::size_t j{0};
    double argument{0.0};
    double rate{0.0};  // M$/day
};

struct HedgePlan {
    std::vector<HedgeRate> rates;

    double rate(std::size_t i, std::size_t j) const {
        const double sign = i < j ? 1.0 : -1.0;
        if (i > j) std::swap(i, j);
        for (const auto& r : rates) {
            if (r.i == i && r.j == j) return sign * r.rate;
        }
        throw std::out_of_range("hedge plan has no pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
};

/// Inventory values along one axis where a pair's hedge argument reaches
/// -psi and +psi; the pair does not trade strictly between them. NaN marks
/// a threshold that is not reached within the search limit.
struct ActivationInterval {
    double lower{std::numeric_limits<double>::quiet_NaN()};
    double upper{std::numeric_limits<double>::quiet_NaN()};
};

struct ZonePoint {
    double scan_inventory{0.0};
    double lower{0.0};
    double upper{0.0};
};

class ZoneEmptyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StrategyEngine {
public:
    StrategyEngine(ModelConfig config, RiccatiSolution solution, StrategyMode mode = StrategyMode::Stationary)
        : config_(std::move(config)), solution_(std::move(solution)), mode_(mode) {
        if (solution_.a.empty()) throw std::invalid_argument("StrategyEngine: empty Riccati solution");
        if (solution_.dim() != config_.dim()) throw std::invalid_argument("StrategyEngine: dimension mismatch");
    }

    const ModelConfig& config() const { return config_; }
    const RiccatiSolution& solution() const { return solution_; }
    StrategyMode mode() const { return mode_; }

    /// A and B used at time t: A(0), B(0) in stationary mode.
    std::pair<Eigen::MatrixXd, Eigen::VectorXd> coefficients_at(double t) const {
        if (mode_ == StrategyMode::Stationary) return {solution_.a.front(), solution_.b.front()};
        return {solution_.a_at(t), solution_.b_at(t)};
    }

    /// ((2y + z(e_i - e_j))' A + B') (e_i - e_j).
    static double quote_argument(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& y,
                                 std::size_t i, std::size_t j, double z) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        const double aw_y = y.dot(a.col(ii) - a.col(jj));
        const double quad = a(ii, ii) - 2.0 * a(ii, jj) + a(jj, jj);
        return 2.0 * aw_y + z * quad + b(ii) - b(jj);
    }

    double quote(const InventoryState& state, std::size_t stream, std::size_t bucket) const {
        const auto [a, b] = coefficients_at(state.t);
        const auto& s = config_.liquidity.at(stream);
        const auto& bk = s.buckets.at(bucket);
        return optimal_markup(bk.curve, quote_argument(a, b, state.y, s.buy, s.sell, bk.size));
    }

    /// Markup for tier `tier` when the dealer buys currency i against j for size z.
    double quote(const InventoryState& state, std::size_t tier, std::size_t i, std::size_t j, double z) const {
        if (i == j) throw std::invalid_argument("quote: a pair needs two distinct currencies");
        const auto [s, k] = locate(tier, i, j, z);
        return quote(state, s, k);
    }

    QuoteLadder ladder(const InventoryState& state) const {
        const auto [a, b] = coefficients_at(state.t);
        QuoteLadder out;
        for (const auto& s : config_.liquidity) {
            std::vector<double> mk, in;
            for (const auto& bk : s.buckets) {
                const double delta = optimal_markup(bk.curve, quote_argument(a, b, state.y, s.buy, s.sell, bk.size));
                mk.push_back(delta);
                in.push_back(bk.lambda * fill_probability(bk.curve, delta));
            }
            out.markup.push_back(std::move(mk));
            out.intensity.push_back(std::move(in));
        }
        return out;
    }

    /// Argument of the hedge-rate map for pair (i, j), with G = 2Ay + B the
    /// inventory gradient of -theta:
    ///   -(G_i - G_j) + k_i y_i (1 - G_i) - k_j y_j (1 - G_j).
    double hedge_argument(const InventoryState& state, std::size_t i, std::size_t j) const {
        const auto [a, b] = coefficients_at(state.t);
        return hedge_argument(a, b, state.y, i, j);
    }

    double hedge_argument(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& y,
                          std::size_t i, std::size_t j) const {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        const double gi = 2.0 * a.row(ii).dot(y) + b(ii);
        const double gj = 2.0 * a.row(jj).dot(y) + b(jj);
        const auto& k = config_.dynamics.impact_k;
        return -(gi - gj) + k(ii) * y(ii) * (1.0 - gi) - k(jj) * y(jj) * (1.0 - gj);
    }

    HedgePlan hedge_rates(const InventoryState& state) const {
        const auto [a, b] = coefficients_at(state.t);
        HedgePlan plan;
        const std::size_t d = config_.dim();
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i + 1; j < d; ++j) {
                const double p = hedge_argument(a, b, state.y, i, j);
                plan.rates.push_back({i, j, p, optimal_rate(config_.hedge_cost(i, j), p)});
            }
        }
        return plan;
    }

    /// Thresholds along `axis` (other inventories as in `base`) where the
    /// hedge argument of pair (i, j) crosses -psi and +psi, by bisection to
    /// `resolution` M$.
    ActivationInterval activation_interval(const InventoryState& base, std::size_t axis, std::size_t i, std::size_t j,
                                           double resolution = 1e-3, double search_limit = 1e4) const {
        const double psi = config_.hedge_cost(i, j).psi;
        if (!(psi > 0.0)) throw ZoneEmptyError("internalization zone is empty: psi = 0 for " + config_.pair_name(i, j));
        const auto [a, b] = coefficients_at(base.t);
        const auto ax = static_cast<Eigen::Index>(axis);
        Eigen::VectorXd y = base.y;
        auto arg = [&](double v) {
            y(ax) = v;
            return hedge_argument(a, b, y, i, j);
        };
        const double r1 = crossing(arg, psi, base.y(ax), resolution, search_limit);
        const double r2 = crossing(arg, -psi, base.y(ax), resolution, search_limit);
        ActivationInterval out;
        if (std::isnan(r1) || std::isnan(r2)) {
            out.lower = std::isnan(r1) ? r2 : r1;
            out.upper = out.lower;
            if (std::isnan(r1) && std::isnan(r2)) return out;
            // Only one crossing: the other side is unbounded.
            const double y0 = base.y(ax);
            if (out.lower > y0) {
                out.lower = -std::numeric_limits<double>::infinity();
            } else {
                out.upper = std::numeric_limits<double>::infinity();
            }
            return out;
        }
        out.lower = std::min(r1, r2);
        out.upper = std::max(r1, r2);
        return out;
    }

    /// Zone thresholds on `axis` for pair (i, j) as `scan` currency varies.
    std::vector<ZonePoint> internalization_zone(std::size_t scan, const std::vector<double>& scan_values, std::size_t axis,
                                                std::size_t i, std::size_t j, const InventoryState& base,
                                                double resolution = 1e-3) const {
        std::vector<ZonePoint> out;
        InventoryState st = base;
        for (double v : scan_values) {
            st.y(static_cast<Eigen::Index>(scan)) = v;
            const auto iv = activation_interval(st, axis, i, j, resolution);
            out.push_back({v, iv.lower, iv.upper});
        }
        return out;
    }

private:
    std::pair<std::size_t, std::size_t> locate(std::size_t tier, std::size_t i, std::size_t j, double z) const {
        for (std::size_t s = 0; s < config_.liquidity.size(); ++s) {
            const auto& st = config_.liquidity[s];
            if (st.tier != tier || st.buy != i || st.sell != j) continue;
            for (std::size_t k = 0; k < st.buckets.size(); ++k) {
                if (std::abs(st.buckets[k].size - z) <= 1e-12 * std::max(1.0, z)) return {s, k};
            }
            throw std::invalid_argument("quote: size " + std::to_string(z) + " is not on the ladder");
        }
        throw std::invalid_argument("quote: no client flow for tier " + std::to_string(tier + 1) + " on " +
                                    config_.pair_name(i, j));
    }

    // Root of arg(v) = target, searching outward from v0 in the direction in
    // which arg moves towards the target.
    template <typename F>
    static double crossing(F& arg, double target, double v0, double resolution, double limit) {
        const double f0 = arg(v0) - target;
        if (f0 == 0.0) return v0;
        const double slope = arg(v0 + 1.0) - arg(v0 - 1.0);
        if (slope == 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double dir = (f0 < 0.0) == (slope > 0.0) ? 1.0 : -1.0;
        double lo = v0;
        double step = 1.0;
        double hi = v0 + dir * step;
        while ((arg(hi) - target > 0.0) == (f0 > 0.0)) {
            lo = hi;
            step *= 2.0;
            if (step > limit) return std::numeric_limits<double>::quiet_NaN();
            hi = v0 + dir * step;
        }
        while (std::abs(hi - lo) > resolution) {
            const double mid = 0.5 * (lo + hi);
            if ((arg(mid) - target > 0.0) == (f0 > 0.0)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    ModelConfig config_;
    RiccatiSolution solution_;
    StrategyMode mode_;
};

}  // namespace fxmm
