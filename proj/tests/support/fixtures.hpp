#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "fxmm/config_io.hpp"

namespace fixture {

inline std::string config_path(const std::string& name) { return std::string(FXMM_CONFIG_DIR) + "/" + name; }

inline fxmm::ModelConfig load(const std::string& name) { return fxmm::load_config(config_path(name)); }

// USD plus one risky currency, one tier, two sizes.
inline nlohmann::json small_pair_json() {
    return nlohmann::json::parse(R"({
      "currencies": [
        {"code": "USD"},
        {"code": "EUR", "sigma_bps_per_sqrt_day": 80, "impact_bps_per_musd": 0.005}
      ],
      "reference": "USD",
      "tiers": ["T1"],
      "sizes_musd": [1, 2],
      "pairs": [
        {"pair": "EURUSD", "lambda_per_day": [900, 300],
         "tiers": [{"alpha": -1.9, "beta_per_bps": 11}],
         "psi_bps": 0.1, "eta_bps_day_per_musd": 1e-5}
      ],
      "objective": {"gamma_per_musd": 20, "horizon_days": 0.05}
    })");
}

// USD, EUR, GBP with a EURGBP cross, one tier, sizes 1 and 2.
inline nlohmann::json small_trio_json(double rho = 0.6) {
    auto j = nlohmann::json::parse(R"({
      "currencies": [
        {"code": "USD"},
        {"code": "EUR", "sigma_bps_per_sqrt_day": 80, "impact_bps_per_musd": 0.005},
        {"code": "GBP", "sigma_bps_per_sqrt_day": 70, "impact_bps_per_musd": 0.007}
      ],
      "reference": "USD",
      "tiers": ["T1"],
      "sizes_musd": [1, 2],
      "pairs": [
        {"pair": "EURUSD", "lambda_per_day": [900, 300], "tiers": [{"alpha": -1.9, "beta_per_bps": 11}],
         "psi_bps": 0.1, "eta_bps_day_per_musd": 1e-5},
        {"pair": "GBPUSD", "lambda_per_day": [600, 200], "tiers": [{"alpha": -1.4, "beta_per_bps": 5.5}],
         "psi_bps": 0.15, "eta_bps_day_per_musd": 1.5e-5},
        {"pair": "EURGBP", "lambda_per_day": [400, 50], "tiers": [{"alpha": -0.5, "beta_per_bps": 3.5}],
         "psi_bps": 0.25, "eta_bps_day_per_musd": 2.5e-5}
      ],
      "objective": {"gamma_per_musd": 20, "horizon_days": 0.05}
    })");
    j["correlations"] = {{"EURGBP", rho}};
    return j;
}

}  // namespace fixture
