#pragma once

// JSON configuration files in display units (bps, bps/sqrt(day),
// bps*day/M$, bps/M$, 1/bps, 1/day, M$). See docs/config_schema.md.

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fxmm/model_config.hpp"
#include "fxmm/units.hpp"

namespace fxmm {

namespace config_detail {

using nlohmann::json;

inline const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(where + "." + key, "missing required field");
    return j.at(key);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where, "expected a number");
    return j.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    return number(j.at(key), where + "." + key);
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

// A scalar applies to every bucket; an array gives one value per bucket.
inline std::vector<double> per_bucket(const json& j, std::size_t n, const std::string& where) {
    if (j.is_number()) return std::vector<double>(n, j.get<double>());
    auto v = numbers(j, where);
    if (v.size() != n) throw ConfigError(where, "expected " + std::to_string(n) + " values (one per size)");
    return v;
}

/// Splits "EURUSD" or "EUR/USD" into known currency codes.
inline std::pair<std::size_t, std::size_t> split_pair(const std::string& name, const CurrencyUniverse& u,
                                                      const std::string& where) {
    if (auto slash = name.find('/'); slash != std::string::npos) {
        auto a = u.find(name.substr(0, slash));
        auto b = u.find(name.substr(slash + 1));
        if (a && b && *a != *b) return {*a, *b};
    } else {
        std::vector<std::pair<std::size_t, std::size_t>> hits;
        for (std::size_t k = 1; k < name.size(); ++k) {
            auto a = u.find(name.substr(0, k));
            auto b = u.find(name.substr(k));
            if (a && b && *a != *b) hits.emplace_back(*a, *b);
        }
        if (hits.size() == 1) return hits.front();
    }
    throw ConfigError(where, "cannot resolve currency pair '" + name + "'");
}

struct DirectionSpec {
    std::vector<double> lambdas;
    std::vector<LogisticCurve> tiers_curves;  // flattened [tier][bucket]
};

inline std::vector<FlowStream> parse_direction(const json& j, std::size_t buy, std::size_t sell,
                                               const std::vector<double>& sizes, std::size_t n_tiers,
                                               const std::string& where) {
    const std::size_t n = sizes.size();
    const auto lambdas = per_bucket(require(j, "lambda_per_day", where), n, where + ".lambda_per_day");
    const json& tiers = require(j, "tiers", where);
    if (!tiers.is_array() || tiers.size() != n_tiers) {
        throw ConfigError(where + ".tiers", "expected " + std::to_string(n_tiers) + " tier entries");
    }
    std::vector<FlowStream> out;
    for (std::size_t t = 0; t < n_tiers; ++t) {
        const std::string tw = where + ".tiers[" + std::to_string(t) + "]";
        const auto alpha = per_bucket(require(tiers[t], "alpha", tw), n, tw + ".alpha");
        const auto beta = per_bucket(require(tiers[t], "beta_per_bps", tw), n, tw + ".beta_per_bps");
        std::vector<double> lam = lambdas;
        if (tiers[t].contains("lambda_per_day")) lam = per_bucket(tiers[t].at("lambda_per_day"), n, tw + ".lambda_per_day");
        FlowStream s;
        s.tier = t;
        s.buy = buy;
        s.sell = sell;
        for (std::size_t k = 0; k < n; ++k) {
            s.buckets.push_back({sizes[k], lam[k], LogisticCurve{alpha[k], units::from_per_bps(beta[k])}});
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline HedgePairCost parse_hedge_cost(const json& j, const std::string& where) {
    return HedgePairCost{units::from_bps(number(require(j, "psi_bps", where), where + ".psi_bps")),
                         units::from_bps(number(require(j, "eta_bps_day_per_musd", where), where + ".eta_bps_day_per_musd"))};
}

inline DriftCurve parse_drift(const json& j, const std::string& where) {
    if (j.is_number()) return DriftCurve::constant(units::from_bps(j.get<double>()));
    DriftCurve dc;
    dc.times = numbers(require(j, "times_days", where), where + ".times_days");
    for (double v : numbers(require(j, "values_bps_per_day", where), where + ".values_bps_per_day")) {
        dc.values.push_back(units::from_bps(v));
    }
    return dc;
}

}  // namespace config_detail

/// Builds a validated ModelConfig from a parsed JSON document.
inline ModelConfig parse_config(const nlohmann::json& root) {
    using namespace config_detail;
    ModelConfig c;

    const json& currencies = require(root, "currencies", "config");
    if (!currencies.is_array()) throw ConfigError("currencies", "expected an array");
    for (std::size_t k = 0; k < currencies.size(); ++k) {
        const auto& e = currencies[k];
        const std::string w = "currencies[" + std::to_string(k) + "]";
        const auto& code = require(e, "code", w);
        if (!code.is_string()) throw ConfigError(w + ".code", "expected a string");
        c.universe.labels.push_back(code.get<std::string>());
    }
    const std::size_t d = c.universe.size();
    const auto di = static_cast<Eigen::Index>(d);
    if (d < 2) throw ConfigError("currencies", "at least two currencies are required");
    for (std::size_t k = 0; k < d; ++k) {
        if (c.universe.find(c.universe.labels[k]) != k) {
            throw ConfigError("currencies", "duplicate currency '" + c.universe.labels[k] + "'");
        }
    }

    const auto& ref = require(root, "reference", "config");
    if (!ref.is_string()) throw ConfigError("reference", "expected a currency code");
    auto ref_index = c.universe.find(ref.get<std::string>());
    if (!ref_index) throw ConfigError("reference", "unknown currency '" + ref.get<std::string>() + "'");
    c.universe.reference_index = *ref_index;

    c.dynamics.sigma = Eigen::VectorXd::Zero(di);
    c.dynamics.impact_k = Eigen::VectorXd::Zero(di);
    c.dynamics.drift.assign(d, DriftCurve{});
    for (std::size_t k = 0; k < d; ++k) {
        const auto& e = currencies[k];
        const std::string w = "currencies." + c.universe.labels[k];
        const auto ki = static_cast<Eigen::Index>(k);
        c.dynamics.sigma(ki) = units::from_bps(number_or(e, "sigma_bps_per_sqrt_day", 0.0, w));
        c.dynamics.impact_k(ki) = units::from_bps(number_or(e, "impact_bps_per_musd", 0.0, w));
        if (e.contains("drift_bps_per_day")) c.dynamics.drift[k] = parse_drift(e.at("drift_bps_per_day"), w + ".drift_bps_per_day");
    }

    c.correlations.rho = Eigen::MatrixXd::Identity(di, di);
    if (root.contains("correlations")) {
        const json& corr = root.at("correlations");
        if (!corr.is_object()) throw ConfigError("correlations", "expected an object keyed by pair");
        for (auto it = corr.begin(); it != corr.end(); ++it) {
            const std::string w = "correlations." + it.key();
            auto [i, j] = split_pair(it.key(), c.universe, w);
            const double r = number(it.value(), w);
            if (!(std::abs(r) <= 1.0)) throw ConfigError(w, "correlation out of range [-1, 1]");
            c.correlations.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
            c.correlations.rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
        }
    }

    const json& tiers = require(root, "tiers", "config");
    if (!tiers.is_array() || tiers.empty()) throw ConfigError("tiers", "expected a non-empty array of tier names");
    c.n_tiers = tiers.size();

    std::vector<double> default_sizes;
    if (root.contains("sizes_musd")) default_sizes = numbers(root.at("sizes_musd"), "sizes_musd");

    c.missing_hedge_cost = HedgePairCost{1.0, 1e-7};
    if (root.contains("d2d")) {
        const json& dd = root.at("d2d");
        c.missing_hedge_cost.psi = units::from_bps(number_or(dd, "missing_psi_bps", 1e4, "d2d"));
        c.missing_hedge_cost.eta = units::from_bps(number_or(dd, "missing_eta_bps_day_per_musd", 1e-3, "d2d"));
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) c.hedge_costs.pairs.push_back({i, j, c.missing_hedge_cost, false});
    }
    auto set_hedge = [&](std::size_t i, std::size_t j, const HedgePairCost& cost) {
        auto& pc = c.hedge_costs.pairs[HedgeCostTable::index(i, j, d)];
        pc.cost = cost;
        pc.available = true;
    };

    const json& pairs = require(root, "pairs", "config");
    if (!pairs.is_array()) throw ConfigError("pairs", "expected an array");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const json& p = pairs[k];
        const auto& name_j = require(p, "pair", "pairs[" + std::to_string(k) + "]");
        if (!name_j.is_string()) throw ConfigError("pairs[" + std::to_string(k) + "].pair", "expected a string");
        const std::string name = name_j.get<std::string>();
        const std::string w = "pairs." + name;
        auto [base, quote] = split_pair(name, c.universe, w);
        if (c.find_pair(name)) throw ConfigError(w, "duplicate pair");
        for (const auto& q : c.pairs) {
            if ((q.base == base && q.quote == quote) || (q.base == quote && q.quote == base)) {
                throw ConfigError(w, "pair already quoted as " + q.name);
            }
        }
        c.pairs.push_back({name, base, quote});

        std::vector<double> sizes = p.contains("sizes_musd") ? numbers(p.at("sizes_musd"), w + ".sizes_musd") : default_sizes;
        if (sizes.empty()) throw ConfigError(w + ".sizes_musd", "no size ladder given");

        // Both directions share the pair-level values unless overridden.
        auto direction = [&](const char* key) {
            json merged = p;
            if (p.contains(key)) {
                for (auto it = p.at(key).begin(); it != p.at(key).end(); ++it) merged[it.key()] = it.value();
            }
            return merged;
        };
        for (auto& s : parse_direction(direction("dealer_buys_base"), base, quote, sizes, c.n_tiers, w + ".dealer_buys_base")) {
            c.liquidity.push_back(std::move(s));
        }
        for (auto& s : parse_direction(direction("dealer_sells_base"), quote, base, sizes, c.n_tiers, w + ".dealer_sells_base")) {
            c.liquidity.push_back(std::move(s));
        }

        const bool d2d = !p.contains("d2d") || p.at("d2d").get<bool>();
        if (d2d) set_hedge(base, quote, parse_hedge_cost(p, w));
    }
    if (root.contains("d2d") && root.at("d2d").contains("pairs")) {
        for (const auto& e : root.at("d2d").at("pairs")) {
            const std::string name = require(e, "pair", "d2d.pairs").get<std::string>();
            auto [i, j] = split_pair(name, c.universe, "d2d.pairs." + name);
            set_hedge(i, j, parse_hedge_cost(e, "d2d.pairs." + name));
        }
    }

    const json& obj = require(root, "objective", "config");
    c.objective.gamma = number(require(obj, "gamma_per_musd", "objective"), "objective.gamma_per_musd");
    c.objective.horizon = number(require(obj, "horizon_days", "objective"), "objective.horizon_days");
    c.objective.kappa = Eigen::MatrixXd::Zero(di, di);
    if (obj.contains("terminal_penalty_per_musd")) {
        const json& kap = obj.at("terminal_penalty_per_musd");
        if (!kap.is_array() || kap.size() != d) throw ConfigError("objective.terminal_penalty_per_musd", "expected a d x d matrix");
        for (std::size_t i = 0; i < d; ++i) {
            auto row = numbers(kap[i], "objective.terminal_penalty_per_musd");
            if (row.size() != d) throw ConfigError("objective.terminal_penalty_per_musd", "expected a d x d matrix");
            for (std::size_t j = 0; j < d; ++j) c.objective.kappa(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
    }

    validate(c);
    return c;
}

inline ModelConfig parse_config_text(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
    try {
        return parse_config(root);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("schema violation: ") + e.what());
    }
}

inline ModelConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Serialises a config back to display units. Every direction is written
/// explicitly so that asymmetric flows survive the round trip.
inline nlohmann::json to_json(const ModelConfig& c) {
    using nlohmann::json;
    json root;
    const std::size_t d = c.dim();
    root["reference"] = c.universe.reference();
    json cur = json::array();
    for (std::size_t i = 0; i < d; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        json e;
        e["code"] = c.universe.labels[i];
        if (i != c.universe.reference_index) {
            e["sigma_bps_per_sqrt_day"] = units::to_bps(c.dynamics.sigma(ii));
            e["impact_bps_per_musd"] = units::to_bps(c.dynamics.impact_k(ii));
            const auto& dc = c.dynamics.drift[i];
            if (!dc.values.empty()) {
                json dj;
                dj["times_days"] = dc.times;
                std::vector<double> v;
                for (double x : dc.values) v.push_back(units::to_bps(x));
                dj["values_bps_per_day"] = v;
                e["drift_bps_per_day"] = dj;
            }
        }
        cur.push_back(e);
    }
    root["currencies"] = cur;

    json corr = json::object();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double r = c.correlations.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (r != 0.0) corr[c.universe.labels[i] + "/" + c.universe.labels[j]] = r;
        }
    }
    root["correlations"] = corr;

    json tiers = json::array();
    for (std::size_t t = 0; t < c.n_tiers; ++t) tiers.push_back("T" + std::to_string(t + 1));
    root["tiers"] = tiers;

    auto direction_json = [&](std::size_t buy, std::size_t sell) {
        json dj;
        json tj = json::array();
        for (std::size_t t = 0; t < c.n_tiers; ++t) {
            for (const auto& s : c.liquidity) {
                if (s.tier != t || s.buy != buy || s.sell != sell) continue;
                std::vector<double> sizes, lam, alpha, beta;
                for (const auto& b : s.buckets) {
                    sizes.push_back(b.size);
                    lam.push_back(b.lambda);
                    alpha.push_back(b.curve.alpha);
                    beta.push_back(units::to_per_bps(b.curve.beta));
                }
                dj["sizes_musd"] = sizes;
                tj.push_back(json{{"alpha", alpha}, {"beta_per_bps", beta}, {"lambda_per_day", lam}});
            }
        }
        dj["tiers"] = tj;
        dj["lambda_per_day"] = tj.empty() ? json::array() : tj[0]["lambda_per_day"];
        return dj;
    };

    json pairs = json::array();
    for (const auto& p : c.pairs) {
        json pj;
        pj["pair"] = p.name;
        json buys = direction_json(p.base, p.quote);
        json sells = direction_json(p.quote, p.base);
        pj["sizes_musd"] = buys["sizes_musd"];
        buys.erase("sizes_musd");
        sells.erase("sizes_musd");
        pj["lambda_per_day"] = buys["lambda_per_day"];
        pj["tiers"] = buys["tiers"];
        pj["dealer_sells_base"] = sells;
        const auto& hc = c.hedge_costs.at(p.base, p.quote, d);
        pj["d2d"] = hc.available;
        if (hc.available) {
            pj["psi_bps"] = units::to_bps(hc.cost.psi);
            pj["eta_bps_day_per_musd"] = units::to_bps(hc.cost.eta);
        }
        pairs.push_back(pj);
    }
    root["pairs"] = pairs;

    json dd;
    dd["missing_psi_bps"] = units::to_bps(c.missing_hedge_cost.psi);
    dd["missing_eta_bps_day_per_musd"] = units::to_bps(c.missing_hedge_cost.eta);
    json extra = json::array();
    for (const auto& hc : c.hedge_costs.pairs) {
        if (!hc.available) continue;
        bool quoted = false;
        for (const auto& p : c.pairs) {
            quoted |= (p.base == hc.i && p.quote == hc.j) || (p.base == hc.j && p.quote == hc.i);
        }
        if (quoted) continue;
        extra.push_back(json{{"pair", c.universe.labels[hc.i] + "/" + c.universe.labels[hc.j]},
                             {"psi_bps", units::to_bps(hc.cost.psi)},
                             {"eta_bps_day_per_musd", units::to_bps(hc.cost.eta)}});
    }
    if (!extra.empty()) dd["pairs"] = extra;
    root["d2d"] = dd;

    json obj;
    obj["gamma_per_musd"] = c.objective.gamma;
    obj["horizon_days"] = c.objective.horizon;
    if (c.objective.kappa.cwiseAbs().maxCoeff() > 0.0) {
        json k = json::array();
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> row;
            for (std::size_t j = 0; j < d; ++j) row.push_back(c.objective.kappa(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            k.push_back(row);
        }
        obj["terminal_penalty_per_musd"] = k;
    }
    root["objective"] = obj;
    return root;
}

}  // namespace fxmm
