#pragma once

// Market model description in canonical units (M$, day, fraction) together
// with structural validation and the exchange-rate covariance.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fxmm/client_flow.hpp"
#include "fxmm/d2d_hedging.hpp"

namespace fxmm {

/// Raised on parse, schema and invariant failures. The message starts with
/// the offending field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct CurrencyUniverse {
    std::vector<std::string> labels;
    std::size_t reference_index{0};

    std::size_t size() const { return labels.size(); }
    const std::string& reference() const { return labels.at(reference_index); }

    std::optional<std::size_t> find(const std::string& code) const {
        auto it = std::find(labels.begin(), labels.end(), code);
        if (it == labels.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels.begin());
    }

    std::size_t index_of(const std::string& code) const {
        if (auto i = find(code)) return *i;
        throw ConfigError("currency", "unknown currency '" + code + "'");
    }
};

/// Deterministic drift mu(t) in 1/day, piecewise linear between knots and
/// flat outside them. No knots means mu = 0.
struct DriftCurve {
    std::vector<double> times;
    std::vector<double> values;

    static DriftCurve constant(double v) { return DriftCurve{{0.0}, {v}}; }

    double at(double t) const {
        if (values.empty()) return 0.0;
        if (values.size() == 1 || t <= times.front()) return values.front();
        if (t >= times.back()) return values.back();
        auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
        return (1.0 - w) * values[k - 1] + w * values[k];
    }

    bool is_zero() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
    }
};

struct CurrencyDynamics {
    Eigen::VectorXd sigma;     // 1/sqrt(day)
    Eigen::VectorXd impact_k;  // fraction per M$
    std::vector<DriftCurve> drift;

    Eigen::VectorXd drift_at(double t) const {
        Eigen::VectorXd mu(static_cast<Eigen::Index>(drift.size()));
        for (std::size_t i = 0; i < drift.size(); ++i) mu(static_cast<Eigen::Index>(i)) = drift[i].at(t);
        return mu;
    }

    bool drift_is_zero() const {
        return std::all_of(drift.begin(), drift.end(), [](const DriftCurve& c) { return c.is_zero(); });
    }
};

struct CorrelationMatrix {
    Eigen::MatrixXd rho;
};

struct SizeBucket {
    double size{0.0};    // M$
    double lambda{0.0};  // 1/day
    LogisticCurve curve;
};

/// Client flow of one tier in one direction. A fill on this stream means
/// the dealer receives currency `buy` and delivers currency `sell`: the
/// reference-valued inventory moves by +z on `buy` and -z on `sell`.
struct FlowStream {
    std::size_t tier{0};
    std::size_t buy{0};
    std::size_t sell{0};
    std::vector<SizeBucket> buckets;
};

/// A client-quoted currency pair, named as in the market (e.g. "EURUSD").
struct QuotedPair {
    std::string name;
    std::size_t base{0};
    std::size_t quote{0};
};

struct PairHedgeCost {
    std::size_t i{0};  // i < j
    std::size_t j{0};
    HedgePairCost cost;
    bool available{true};
};

/// D2D costs for every unordered pair i < j, in lexicographic order.
struct HedgeCostTable {
    std::vector<PairHedgeCost> pairs;

    static std::size_t index(std::size_t i, std::size_t j, std::size_t d) {
        if (i > j) std::swap(i, j);
        // Row-major enumeration of the strict upper triangle.
        return i * d - i * (i + 1) / 2 + (j - i - 1);
    }

    const PairHedgeCost& at(std::size_t i, std::size_t j, std::size_t d) const {
        return pairs.at(index(i, j, d));
    }
};

struct ObjectiveParams {
    double gamma{0.0};    // 1/M$
    double horizon{0.0};  // day
    Eigen::MatrixXd kappa;  // terminal penalty y' kappa y, 1/M$
};

struct ModelConfig {
    CurrencyUniverse universe;
    CurrencyDynamics dynamics;
    CorrelationMatrix correlations;
    std::size_t n_tiers{1};
    std::vector<QuotedPair> pairs;
    std::vector<FlowStream> liquidity;
    HedgeCostTable hedge_costs;
    ObjectiveParams objective;
    HedgePairCost missing_hedge_cost{1.0, 1e-7};

    std::size_t dim() const { return universe.size(); }

    const HedgePairCost& hedge_cost(std::size_t i, std::size_t j) const {
        return hedge_costs.at(i, j, dim()).cost;
    }

    /// Market name of the unordered pair {i, j}: the quoted name when the
    /// pair is streamed to clients, the concatenated codes otherwise.
    std::string pair_name(std::size_t i, std::size_t j) const {
        for (const auto& p : pairs) {
            if ((p.base == i && p.quote == j) || (p.base == j && p.quote == i)) return p.name;
        }
        return universe.labels.at(i) + universe.labels.at(j);
    }

    std::optional<std::size_t> find_pair(const std::string& name) const {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (pairs[k].name == name) return k;
        }
        return std::nullopt;
    }
};

inline Eigen::MatrixXd build_covariance(const ModelConfig& config) {
    const auto& s = config.dynamics.sigma;
    Eigen::MatrixXd cov = config.correlations.rho.cwiseProduct(s * s.transpose());
    const auto r = static_cast<Eigen::Index>(config.universe.reference_index);
    cov.row(r).setZero();
    cov.col(r).setZero();
    return cov;
}

inline double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline void validate(const ModelConfig& c) {
    const std::size_t d = c.dim();
    const auto di = static_cast<Eigen::Index>(d);
    if (d < 2) throw ConfigError("currencies", "at least two currencies are required");
    for (std::size_t i = 0; i < d; ++i) {
        if (c.universe.labels[i].empty()) throw ConfigError("currencies", "empty currency code");
        for (std::size_t j = i + 1; j < d; ++j) {
            if (c.universe.labels[i] == c.universe.labels[j]) {
                throw ConfigError("currencies", "duplicate currency '" + c.universe.labels[i] + "'");
            }
        }
    }
    if (c.universe.reference_index >= d) throw ConfigError("reference", "reference index out of range");
    const std::size_t ref = c.universe.reference_index;

    const auto& dyn = c.dynamics;
    if (dyn.sigma.size() != di || dyn.impact_k.size() != di || dyn.drift.size() != d) {
        throw ConfigError("currencies", "dynamics must be given for every currency");
    }
    for (std::size_t i = 0; i < d; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const std::string where = "currencies." + c.universe.labels[i];
        if (!(dyn.sigma(ii) >= 0.0) || !std::isfinite(dyn.sigma(ii))) {
            throw ConfigError(where + ".sigma", "volatility must be finite and non-negative");
        }
        if (!(dyn.impact_k(ii) >= 0.0) || !std::isfinite(dyn.impact_k(ii))) {
            throw ConfigError(where + ".impact", "market impact must be finite and non-negative");
        }
        const auto& dc = dyn.drift[i];
        if (dc.times.size() != dc.values.size()) {
            throw ConfigError(where + ".drift", "knot times and values differ in length");
        }
        if (!std::is_sorted(dc.times.begin(), dc.times.end()) ||
            std::adjacent_find(dc.times.begin(), dc.times.end()) != dc.times.end()) {
            throw ConfigError(where + ".drift", "knot times must be strictly increasing");
        }
        if (i == ref && (dyn.sigma(ii) != 0.0 || dyn.impact_k(ii) != 0.0 || !dc.is_zero())) {
            throw ConfigError(where, "reference currency must have zero volatility, drift and impact");
        }
    }

    const auto& rho = c.correlations.rho;
    if (rho.rows() != di || rho.cols() != di) throw ConfigError("correlations", "matrix must be d x d");
    for (Eigen::Index i = 0; i < di; ++i) {
        if (rho(i, i) != 1.0) throw ConfigError("correlations", "diagonal must be one");
        for (Eigen::Index j = 0; j < di; ++j) {
            if (!(std::abs(rho(i, j)) <= 1.0)) {
                throw ConfigError("correlations." + c.universe.labels[static_cast<std::size_t>(i)] +
                                      c.universe.labels[static_cast<std::size_t>(j)],
                                  "correlation out of range [-1, 1]");
            }
            if (rho(i, j) != rho(j, i)) throw ConfigError("correlations", "matrix must be symmetric");
        }
    }
    if (min_symmetric_eigenvalue(rho) < -1e-12) {
        throw ConfigError("correlations", "correlation matrix is not positive semi-definite");
    }

    if (c.n_tiers < 1) throw ConfigError("tiers", "at least one client tier is required");
    for (std::size_t s = 0; s < c.liquidity.size(); ++s) {
        const auto& st = c.liquidity[s];
        const std::string where = "pairs." + c.pair_name(st.buy, st.sell) + ".tier" + std::to_string(st.tier + 1);
        if (st.buy >= d || st.sell >= d || st.buy == st.sell) throw ConfigError(where, "invalid currency indices");
        if (st.tier >= c.n_tiers) throw ConfigError(where, "tier index out of range");
        if (st.buckets.empty()) throw ConfigError(where, "empty size ladder");
        double prev = 0.0;
        for (const auto& b : st.buckets) {
            if (!(b.size > prev)) throw ConfigError(where + ".sizes", "sizes must be positive and strictly increasing");
            prev = b.size;
            if (!(b.lambda >= 0.0) || !std::isfinite(b.lambda)) {
                throw ConfigError(where + ".lambda", "intensities must be finite and non-negative");
            }
            if (!(b.curve.beta > 0.0) || !std::isfinite(b.curve.beta)) {
                throw ConfigError(where + ".beta", "logistic slope must be positive");
            }
            if (!std::isfinite(b.curve.alpha)) throw ConfigError(where + ".alpha", "must be finite");
        }
    }
    for (const auto& p : c.pairs) {
        for (std::size_t tier = 0; tier < c.n_tiers; ++tier) {
            for (auto [i, j] : {std::pair{p.base, p.quote}, std::pair{p.quote, p.base}}) {
                const bool found = std::any_of(c.liquidity.begin(), c.liquidity.end(), [&](const FlowStream& s) {
                    return s.tier == tier && s.buy == i && s.sell == j;
                });
                if (!found) {
                    throw ConfigError("pairs." + p.name, "missing liquidity for tier " + std::to_string(tier + 1));
                }
            }
        }
    }

    if (c.hedge_costs.pairs.size() != d * (d - 1) / 2) {
        throw ConfigError("d2d", "hedge costs must cover every unordered pair");
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const auto& pc = c.hedge_costs.at(i, j, d);
            const std::string where = "d2d." + c.pair_name(i, j);
            if (pc.i != i || pc.j != j) throw ConfigError(where, "hedge cost table out of order");
            if (!(pc.cost.psi >= 0.0)) throw ConfigError(where + ".psi", "must be non-negative");
            if (!(pc.cost.eta > 0.0) || !std::isfinite(pc.cost.eta)) throw ConfigError(where + ".eta", "must be positive");
        }
    }

    const auto& obj = c.objective;
    if (!(obj.gamma >= 0.0) || !std::isfinite(obj.gamma)) {
        throw ConfigError("objective.gamma", "risk aversion must be finite and non-negative");
    }
    if (!(obj.horizon > 0.0) || !std::isfinite(obj.horizon)) throw ConfigError("objective.horizon", "must be positive");
    if (obj.kappa.rows() != di || obj.kappa.cols() != di) throw ConfigError("objective.terminal_penalty", "must be d x d");
    if ((obj.kappa - obj.kappa.transpose()).cwiseAbs().maxCoeff() > 0.0) {
        throw ConfigError("objective.terminal_penalty", "must be symmetric");
    }
    if (min_symmetric_eigenvalue(obj.kappa) < -1e-12 * std::max(1.0, obj.kappa.cwiseAbs().maxCoeff())) {
        throw ConfigError("objective.terminal_penalty", "must be positive semi-definite");
    }
}

// --- experiment variants -------------------------------------------------

inline ModelConfig with_gamma(ModelConfig c, double gamma) {
    c.objective.gamma = gamma;
    return c;
}

inline ModelConfig with_horizon(ModelConfig c, double horizon) {
    c.objective.horizon = horizon;
    return c;
}

inline ModelConfig with_correlation(ModelConfig c, const std::string& a, const std::string& b, double rho) {
    const auto i = static_cast<Eigen::Index>(c.universe.index_of(a));
    const auto j = static_cast<Eigen::Index>(c.universe.index_of(b));
    c.correlations.rho(i, j) = rho;
    c.correlations.rho(j, i) = rho;
    return c;
}

/// Removes a quoted pair from both the client and the D2D segments.
inline ModelConfig without_pair(ModelConfig c, const std::string& name) {
    auto k = c.find_pair(name);
    if (!k) throw ConfigError("pairs", "unknown pair '" + name + "'");
    const QuotedPair p = c.pairs[*k];
    c.pairs.erase(c.pairs.begin() + static_cast<std::ptrdiff_t>(*k));
    std::erase_if(c.liquidity, [&](const FlowStream& s) {
        return (s.buy == p.base && s.sell == p.quote) || (s.buy == p.quote && s.sell == p.base);
    });
    auto& hc = c.hedge_costs.pairs[HedgeCostTable::index(p.base, p.quote, c.dim())];
    hc.cost = c.missing_hedge_cost;
    hc.available = false;
    return c;
}

/// Multiplies the proportional cost of every available D2D pair.
inline ModelConfig with_scaled_psi(ModelConfig c, double factor) {
    for (auto& hc : c.hedge_costs.pairs) {
        if (hc.available) hc.cost.psi *= factor;
    }
    return c;
}

/// Keeps only the listed currencies (the reference must be among them) and
/// every pair whose two legs survive.
inline ModelConfig restrict_to(const ModelConfig& c, const std::vector<std::string>& keep) {
    std::vector<std::size_t> old_index;
    for (const auto& code : keep) old_index.push_back(c.universe.index_of(code));
    std::sort(old_index.begin(), old_index.end());
    old_index.erase(std::unique(old_index.begin(), old_index.end()), old_index.end());
    std::vector<std::optional<std::size_t>> new_index(c.dim());
    for (std::size_t k = 0; k < old_index.size(); ++k) new_index[old_index[k]] = k;
    if (!new_index[c.universe.reference_index]) {
        throw ConfigError("currencies", "restriction must keep the reference currency");
    }

    ModelConfig r;
    const std::size_t d = old_index.size();
    const auto di = static_cast<Eigen::Index>(d);
    for (auto o : old_index) r.universe.labels.push_back(c.universe.labels[o]);
    r.universe.reference_index = *new_index[c.universe.reference_index];
    r.dynamics.sigma.resize(di);
    r.dynamics.impact_k.resize(di);
    r.correlations.rho.resize(di, di);
    r.objective = c.objective;
    r.objective.kappa.resize(di, di);
    for (std::size_t a = 0; a < d; ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        const auto oa = static_cast<Eigen::Index>(old_index[a]);
        r.dynamics.sigma(ai) = c.dynamics.sigma(oa);
        r.dynamics.impact_k(ai) = c.dynamics.impact_k(oa);
        r.dynamics.drift.push_back(c.dynamics.drift[old_index[a]]);
        for (std::size_t b = 0; b < d; ++b) {
            const auto bi = static_cast<Eigen::Index>(b);
            const auto ob = static_cast<Eigen::Index>(old_index[b]);
            r.correlations.rho(ai, bi) = c.correlations.rho(oa, ob);
            r.objective.kappa(ai, bi) = c.objective.kappa(oa, ob);
        }
    }
    r.n_tiers = c.n_tiers;
    r.missing_hedge_cost = c.missing_hedge_cost;
    for (const auto& p : c.pairs) {
        if (new_index[p.base] && new_index[p.quote]) r.pairs.push_back({p.name, *new_index[p.base], *new_index[p.quote]});
    }
    for (const auto& s : c.liquidity) {
        if (new_index[s.buy] && new_index[s.sell]) {
            FlowStream t = s;
            t.buy = *new_index[s.buy];
            t.sell = *new_index[s.sell];
            r.liquidity.push_back(std::move(t));
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            PairHedgeCost pc = c.hedge_costs.at(old_index[i], old_index[j], c.dim());
            pc.i = i;
            pc.j = j;
            r.hedge_costs.pairs.push_back(pc);
        }
    }
    return r;
}

}  // namespace fxmm
