#pragma once

// Event-driven Monte Carlo of the controlled market-making system. Client
// fills are thinned per time step (one Bernoulli draw per tier, direction
// and size), exchange rates follow impacted geometric Brownian motions, and
// hedging is applied continuously at the strategy's rates.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fxmm/client_flow.hpp"
#include "fxmm/d2d_hedging.hpp"
#include "fxmm/model_config.hpp"
#include "fxmm/strategy.hpp"
#include "fxmm/units.hpp"

namespace fxmm {

struct SimConfig {
    double dt{units::seconds_to_days(1.0)};
    std::size_t n_steps{100000};
    std::uint64_t seed{1};
    std::size_t record_every{1};
    bool record_trades{true};
    Eigen::VectorXd initial_inventory;  // M$, empty means flat
};

class ThinningError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kMaxThinningProbability = 0.05;

struct TradeEvent {
    std::size_t step{0};
    std::size_t stream{0};
    std::size_t bucket{0};
    double size{0.0};    // M$
    double markup{0.0};  // fraction
};

struct SimulationRecord {
    std::vector<std::string> labels;
    std::size_t reference_index{0};
    std::size_t n_tiers{1};
    double dt{0.0};
    double gamma{0.0};
    Eigen::MatrixXd covariance;

    // Sampled every record_every steps, including the initial state.
    std::vector<double> times;
    std::vector<double> y_flat;  // row-major, dim() values per sample
    std::vector<double> s_flat;  // exchange rates relative to their initial value
    std::vector<double> x;
    std::vector<double> risk;  // (gamma / 2) y' S y, M$/day

    std::vector<TradeEvent> trades;
    std::size_t fills{0};

    // Totals over the run.
    std::vector<double> stream_volume;  // per liquidity stream, M$
    std::vector<double> stream_fees;    // per liquidity stream, M$
    std::vector<double> hedge_volume;   // per unordered pair (HedgeCostTable order), M$
    std::vector<double> hedge_costs;    // per unordered pair, M$
    Eigen::VectorXd revaluation;        // mark-to-market P&L per currency, M$

    std::size_t dim() const { return labels.size(); }
    std::size_t samples() const { return times.size(); }

    Eigen::Map<const Eigen::VectorXd> y(std::size_t k) const {
        return {y_flat.data() + k * dim(), static_cast<Eigen::Index>(dim())};
    }
    Eigen::Map<const Eigen::VectorXd> s(std::size_t k) const {
        return {s_flat.data() + k * dim(), static_cast<Eigen::Index>(dim())};
    }

    /// Mark-to-market value X + sum Y at sample k.
    double value(std::size_t k) const { return x[k] + y(k).sum(); }
};

namespace sim_detail {

// Symmetric square root of the covariance: increments are R z sqrt(dt).
inline Eigen::MatrixXd covariance_root(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace sim_detail

/// One trajectory under the engine's strategy. Identical inputs and seed
/// give an identical record.
inline SimulationRecord simulate(const StrategyEngine& engine, const SimConfig& sim) {
    const ModelConfig& config = engine.config();
    const std::size_t d = config.dim();
    const auto di = static_cast<Eigen::Index>(d);
    if (!(sim.dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
    if (sim.record_every < 1) throw std::invalid_argument("simulate: record_every must be >= 1");
    for (const auto& st : config.liquidity) {
        for (const auto& b : st.buckets) {
            if (b.lambda * sim.dt > kMaxThinningProbability) {
                throw ThinningError("simulate: lambda * dt = " + std::to_string(b.lambda * sim.dt) + " exceeds " +
                                    std::to_string(kMaxThinningProbability) + " on " + config.pair_name(st.buy, st.sell) +
                                    "; reduce the time step");
            }
        }
    }

    SimulationRecord rec;
    rec.labels = config.universe.labels;
    rec.reference_index = config.universe.reference_index;
    rec.n_tiers = config.n_tiers;
    rec.dt = sim.dt;
    rec.gamma = config.objective.gamma;
    rec.covariance = build_covariance(config);
    rec.stream_volume.assign(config.liquidity.size(), 0.0);
    rec.stream_fees.assign(config.liquidity.size(), 0.0);
    rec.hedge_volume.assign(config.hedge_costs.pairs.size(), 0.0);
    rec.hedge_costs.assign(config.hedge_costs.pairs.size(), 0.0);
    rec.revaluation = Eigen::VectorXd::Zero(di);

    const Eigen::MatrixXd root = sim_detail::covariance_root(rec.covariance);
    const double sqrt_dt = std::sqrt(sim.dt);
    const auto& k_imp = config.dynamics.impact_k;
    const double horizon = config.objective.horizon;

    std::mt19937_64 rng(sim.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::VectorXd s = Eigen::VectorXd::Ones(di);
    Eigen::VectorXd q = sim.initial_inventory.size() == di ? sim.initial_inventory : Eigen::VectorXd::Zero(di);
    Eigen::VectorXd y = q.cwiseProduct(s);
    double x = 0.0;

    auto record = [&](std::size_t step) {
        rec.times.push_back(static_cast<double>(step) * sim.dt);
        for (Eigen::Index i = 0; i < di; ++i) {
            rec.y_flat.push_back(y(i));
            rec.s_flat.push_back(s(i));
        }
        rec.x.push_back(x);
        rec.risk.push_back(0.5 * rec.gamma * y.dot(rec.covariance * y));
    };
    record(0);

    std::vector<std::vector<double>> hints;
    for (const auto& st : config.liquidity) hints.emplace_back(st.buckets.size(), 0.0);

    struct Fill {
        std::size_t stream, bucket;
        double size, markup;
    };
    std::vector<Fill> fills;
    Eigen::VectorXd net(di), z(di);
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    const bool stationary = engine.mode() == StrategyMode::Stationary;
    if (stationary) std::tie(a, b) = engine.coefficients_at(0.0);

    for (std::size_t step = 1; step <= sim.n_steps; ++step) {
        const double t = static_cast<double>(step - 1) * sim.dt;
        if (!stationary) std::tie(a, b) = engine.coefficients_at(std::min(t, horizon));

        // (1)-(2) quotes at the current state and thinned fills.
        fills.clear();
        for (std::size_t si = 0; si < config.liquidity.size(); ++si) {
            const auto& st = config.liquidity[si];
            for (std::size_t k = 0; k < st.buckets.size(); ++k) {
                const auto& bk = st.buckets[k];
                if (bk.lambda == 0.0) continue;
                const double p = StrategyEngine::quote_argument(a, b, y, st.buy, st.sell, bk.size);
                const MarkupSolution ms = solve_markup(bk.curve, p, hints[si][k]);
                hints[si][k] = ms.scaled;
                if (uniform(rng) < bk.lambda * ms.fill * sim.dt) fills.push_back({si, k, bk.size, ms.delta});
            }
        }
        // (3) client trades.
        for (const auto& f : fills) {
            const auto& st = config.liquidity[f.stream];
            const auto i = static_cast<Eigen::Index>(st.buy);
            const auto j = static_cast<Eigen::Index>(st.sell);
            q(i) += f.size / s(i);
            q(j) -= f.size / s(j);
            x += f.size * f.markup;
            rec.stream_volume[f.stream] += f.size;
            rec.stream_fees[f.stream] += f.size * f.markup;
            ++rec.fills;
            if (sim.record_trades) rec.trades.push_back({step, f.stream, f.bucket, f.size, f.markup});
        }
        y = q.cwiseProduct(s);

        // (4) hedging at the post-trade state.
        net.setZero();
        for (std::size_t pi = 0; pi < config.hedge_costs.pairs.size(); ++pi) {
            const auto& hc = config.hedge_costs.pairs[pi];
            if (!hc.available) continue;
            const double xi = optimal_rate(hc.cost, engine.hedge_argument(a, b, y, hc.i, hc.j));
            if (xi == 0.0) continue;
            const auto i = static_cast<Eigen::Index>(hc.i);
            const auto j = static_cast<Eigen::Index>(hc.j);
            q(i) += xi * sim.dt / s(i);
            q(j) -= xi * sim.dt / s(j);
            const double cost = execution_cost(hc.cost, xi) * sim.dt;
            x -= cost;
            net(i) += xi;
            net(j) -= xi;
            rec.hedge_volume[pi] += std::abs(xi) * sim.dt;
            rec.hedge_costs[pi] += cost;
        }

        // (5) exchange rates: exact log-step with impact drift.
        for (Eigen::Index i = 0; i < di; ++i) z(i) = normal(rng);
        const Eigen::VectorXd shocks = root * z;
        const Eigen::VectorXd mu = config.dynamics.drift_at(t);
        for (Eigen::Index i = 0; i < di; ++i) {
            if (static_cast<std::size_t>(i) == config.universe.reference_index) continue;
            const double drift = mu(i) - 0.5 * rec.covariance(i, i) + k_imp(i) * net(i);
            const double s_new = s(i) * std::exp(drift * sim.dt + shocks(i) * sqrt_dt);
            rec.revaluation(i) += q(i) * (s_new - s(i));
            s(i) = s_new;
        }
        // (6) reference-valued inventories.
        y = q.cwiseProduct(s);

        if (step % sim.record_every == 0) record(step);
    }
    return rec;
}

}  // namespace fxmm
