#pragma once

// Diagnostics over simulation records: autocorrelation functions, flow and
// P&L decomposition, and the risk/return frontier across risk aversions.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fxmm/model_config.hpp"
#include "fxmm/riccati.hpp"
#include "fxmm/simulator.hpp"
#include "fxmm/strategy.hpp"

namespace fxmm {

class DegenerateSeriesError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct AcfPoint {
    std::size_t lag{0};
    double acf{0.0};
};

/// Biased ACF of the demeaned series for lags 0..max_lag.
inline std::vector<AcfPoint> autocorrelation(const std::vector<double>& series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n < 2) throw DegenerateSeriesError("autocorrelation: series needs at least two points");
    if (max_lag >= n) throw std::invalid_argument("autocorrelation: max_lag must be below the series length");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> c(n);
    double c0 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        c[t] = series[t] - mean;
        c0 += c[t] * c[t];
    }
    if (!(c0 > 0.0)) throw DegenerateSeriesError("autocorrelation: series is constant");
    std::vector<AcfPoint> out;
    out.reserve(max_lag + 1);
    out.push_back({0, 1.0});
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) s += c[t] * c[t + k];
        out.push_back({k, s / c0});
    }
    return out;
}

/// First lag at which the ACF drops below `level`, if any.
inline std::optional<std::size_t> first_lag_below(const std::vector<AcfPoint>& acf, double level = 0.5) {
    for (const auto& p : acf) {
        if (p.acf < level) return p.lag;
    }
    return std::nullopt;
}

inline std::vector<double> inventory_series(const SimulationRecord& rec, std::size_t currency) {
    std::vector<double> out(rec.samples());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = rec.y_flat[k * rec.dim() + currency];
    return out;
}

/// Risk series without the gamma factor: y' S y / 2.
inline std::vector<double> variance_series(const SimulationRecord& rec) {
    std::vector<double> out(rec.samples());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto y = rec.y(k);
        out[k] = 0.5 * y.dot(rec.covariance * y);
    }
    return out;
}

struct Share {
    std::string label;
    double value{0.0};  // raw amount, M$
    double share{0.0};  // in [0, 1]
};

struct FlowShares {
    std::vector<Share> pair_volume;      // client plus hedge volume per unordered pair
    std::vector<Share> currency_pnl;     // per non-reference currency, over positive parts
    std::vector<Share> tier_and_hedge;   // client volume per tier, then D2D volume
    double client_volume{0.0};
    double hedge_volume{0.0};
    double internalization_ratio{0.0};   // 1 - hedge / client
};

namespace metrics_detail {

inline void normalize(std::vector<Share>& v, bool positive_part) {
    double total = 0.0;
    for (const auto& s : v) total += positive_part ? std::max(s.value, 0.0) : s.value;
    if (!(total > 0.0)) return;
    for (auto& s : v) s.share = (positive_part ? std::max(s.value, 0.0) : s.value) / total;
}

}  // namespace metrics_detail

/// Shares of volume and P&L. P&L per currency is fees and hedge costs on
/// pairs involving it (split evenly on crosses) plus its revaluation; the
/// share layer uses positive parts so that every share lies in [0, 1].
inline FlowShares flow_decomposition(const SimulationRecord& rec, const ModelConfig& config) {
    const std::size_t d = config.dim();
    const std::size_t ref = config.universe.reference_index;
    FlowShares out;

    std::vector<double> pair_vol(config.hedge_costs.pairs.size(), 0.0);
    std::vector<double> tier_vol(config.n_tiers, 0.0);
    Eigen::VectorXd pnl = rec.revaluation;

    auto attribute = [&](std::size_t i, std::size_t j, double amount) {
        if (i == ref) {
            pnl(static_cast<Eigen::Index>(j)) += amount;
        } else if (j == ref) {
            pnl(static_cast<Eigen::Index>(i)) += amount;
        } else {
            pnl(static_cast<Eigen::Index>(i)) += 0.5 * amount;
            pnl(static_cast<Eigen::Index>(j)) += 0.5 * amount;
        }
    };

    for (std::size_t s = 0; s < config.liquidity.size(); ++s) {
        const auto& st = config.liquidity[s];
        pair_vol[HedgeCostTable::index(st.buy, st.sell, d)] += rec.stream_volume[s];
        tier_vol[st.tier] += rec.stream_volume[s];
        out.client_volume += rec.stream_volume[s];
        attribute(st.buy, st.sell, rec.stream_fees[s]);
    }
    for (std::size_t p = 0; p < config.hedge_costs.pairs.size(); ++p) {
        const auto& hc = config.hedge_costs.pairs[p];
        pair_vol[p] += rec.hedge_volume[p];
        out.hedge_volume += rec.hedge_volume[p];
        attribute(hc.i, hc.j, -rec.hedge_costs[p]);
    }
    if (!(out.client_volume + out.hedge_volume > 0.0)) {
        throw std::invalid_argument("flow_decomposition: the record has no traded volume");
    }

    for (std::size_t p = 0; p < config.hedge_costs.pairs.size(); ++p) {
        const auto& hc = config.hedge_costs.pairs[p];
        out.pair_volume.push_back({config.pair_name(hc.i, hc.j), pair_vol[p], 0.0});
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (i == ref) continue;
        out.currency_pnl.push_back({config.universe.labels[i], pnl(static_cast<Eigen::Index>(i)), 0.0});
    }
    for (std::size_t n = 0; n < config.n_tiers; ++n) out.tier_and_hedge.push_back({"T" + std::to_string(n + 1), tier_vol[n], 0.0});
    out.tier_and_hedge.push_back({"D2D", out.hedge_volume, 0.0});

    metrics_detail::normalize(out.pair_volume, false);
    metrics_detail::normalize(out.currency_pnl, true);
    metrics_detail::normalize(out.tier_and_hedge, false);
    out.internalization_ratio = out.client_volume > 0.0 ? 1.0 - out.hedge_volume / out.client_volume : 0.0;
    return out;
}

struct FrontierPoint {
    double gamma{0.0};
    double pnl_rate{0.0};       // mean (X + sum Y) growth, M$/day
    double variance_rate{0.0};  // mean y' S y / 2, M$/day
    double risk_penalty{0.0};   // gamma * variance_rate
};

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline FrontierPoint frontier_point(const SimulationRecord& rec) {
    FrontierPoint p;
    p.gamma = rec.gamma;
    const std::size_t last = rec.samples() - 1;
    const double span = rec.times[last] - rec.times.front();
    p.pnl_rate = span > 0.0 ? (rec.value(last) - rec.value(0)) / span : 0.0;
    p.variance_rate = mean(variance_series(rec));
    p.risk_penalty = p.gamma * p.variance_rate;
    return p;
}

/// One simulation per gamma, all with the same seed.
inline std::vector<FrontierPoint> efficient_frontier(const ModelConfig& config, const std::vector<double>& gammas,
                                                     const SimConfig& sim, const RiccatiOptions& ropts = {},
                                                     StrategyMode mode = StrategyMode::Stationary) {
    std::vector<FrontierPoint> out;
    for (double g : gammas) {
        ModelConfig c = with_gamma(config, g);
        StrategyEngine engine(c, solve_riccati(c, ropts), mode);
        out.push_back(frontier_point(simulate(engine, sim)));
    }
    return out;
}

}  // namespace fxmm
