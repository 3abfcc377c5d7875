#pragma once

// Quadratic approximation of the value function,
//   theta(t, y) ~ -y' A(t) y - y' B(t) - C(t),
// obtained by replacing each client Hamiltonian by its second-order
// expansion at p = 0 and dropping the hedging Hamiltonians. A and B solve a
// backward matrix Riccati system; C is not needed for the controls.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fxmm/client_flow.hpp"
#include "fxmm/model_config.hpp"

namespace fxmm {

/// Quadratic coefficients aligned with ModelConfig::liquidity:
/// table[s][k] belongs to bucket k of stream s.
using CoefficientTable = std::vector<std::vector<QuadraticCoefficients>>;

inline CoefficientTable compute_coefficients(const ModelConfig& config) {
    CoefficientTable table;
    table.reserve(config.liquidity.size());
    for (const auto& stream : config.liquidity) {
        std::vector<QuadraticCoefficients> row;
        row.reserve(stream.buckets.size());
        for (const auto& b : stream.buckets) row.push_back(quadratic_coefficients(b.curve));
        table.push_back(std::move(row));
    }
    return table;
}

struct FlowMatrices {
    Eigen::MatrixXd m_bar;    // sum a2 z lambda, M$/day per fraction
    Eigen::MatrixXd m_under;  // sum a1 z lambda
    Eigen::MatrixXd p_mat;    // sum a2 z^2 lambda
    Eigen::MatrixXd m;        // Laplacian of m_bar + m_bar'
    Eigen::VectorXd v;        // (m_under - m_under') 1
};

inline FlowMatrices build_flow_matrices(const ModelConfig& config, const CoefficientTable& coeffs) {
    const auto d = static_cast<Eigen::Index>(config.dim());
    if (coeffs.size() != config.liquidity.size()) {
        throw std::invalid_argument("build_flow_matrices: missing coefficient entries for some streams");
    }
    FlowMatrices f;
    f.m_bar = Eigen::MatrixXd::Zero(d, d);
    f.m_under = Eigen::MatrixXd::Zero(d, d);
    f.p_mat = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t s = 0; s < config.liquidity.size(); ++s) {
        const auto& stream = config.liquidity[s];
        if (coeffs[s].size() != stream.buckets.size()) {
            throw std::invalid_argument("build_flow_matrices: missing coefficient entry for stream " + std::to_string(s));
        }
        const auto i = static_cast<Eigen::Index>(stream.buy);
        const auto j = static_cast<Eigen::Index>(stream.sell);
        for (std::size_t k = 0; k < stream.buckets.size(); ++k) {
            const auto& b = stream.buckets[k];
            const auto& q = coeffs[s][k];
            f.m_bar(i, j) += q.a2 * b.size * b.lambda;
            f.m_under(i, j) += q.a1 * b.size * b.lambda;
            f.p_mat(i, j) += q.a2 * b.size * b.size * b.lambda;
        }
    }
    const Eigen::MatrixXd sym = f.m_bar + f.m_bar.transpose();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
    f.m = Eigen::MatrixXd((sym * ones).asDiagonal()) - sym;
    f.v = (f.m_under - f.m_under.transpose()) * ones;
    return f;
}

inline FlowMatrices build_flow_matrices(const ModelConfig& config) {
    return build_flow_matrices(config, compute_coefficients(config));
}

/// (Vbar - Vbar') 1 with Vbar = D(A) P + P D(A) - 2 P o A, D(A) = diag(A).
inline Eigen::VectorXd tilde_v(const FlowMatrices& flow, const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd diag = a.diagonal().asDiagonal();
    const Eigen::MatrixXd vbar = diag * flow.p_mat + flow.p_mat * diag - 2.0 * flow.p_mat.cwiseProduct(a);
    return (vbar - vbar.transpose()) * Eigen::VectorXd::Ones(a.rows());
}

enum class Integrator { Euler, RK4 };

struct RiccatiOptions {
    std::size_t n_steps{5000};
    Integrator integrator{Integrator::RK4};
};

class RiccatiBlowUp : public std::runtime_error {
public:
    explicit RiccatiBlowUp(double t)
        : std::runtime_error("Riccati integration blew up at t = " + std::to_string(t) +
                             " day; reduce gamma or the horizon, or increase the step count"),
          time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

struct RiccatiSolution {
    std::vector<double> times;         // ascending, times.front() = 0, times.back() = T
    std::vector<Eigen::MatrixXd> a;    // 1/M$
    std::vector<Eigen::VectorXd> b;    // dimensionless

    std::size_t dim() const { return a.empty() ? 0 : static_cast<std::size_t>(a.front().rows()); }

    /// Linear interpolation between snapshots, clamped to [0, T].
    Eigen::MatrixXd a_at(double t) const { return interpolate(a, t); }
    Eigen::VectorXd b_at(double t) const { return interpolate(b, t); }

private:
    template <typename M>
    M interpolate(const std::vector<M>& v, double t) const {
        if (t <= times.front()) return v.front();
        if (t >= times.back()) return v.back();
        const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        auto k = static_cast<std::size_t>((t - times.front()) / step);
        if (k + 1 >= times.size()) k = times.size() - 2;
        const double w = (t - times[k]) / (times[k + 1] - times[k]);
        return ((1.0 - w) * v[k] + w * v[k + 1]).eval();
    }
};

namespace detail {

struct RiccatiRhs {
    const ModelConfig& config;
    const FlowMatrices& flow;
    Eigen::MatrixXd sigma;
    double gamma;

    void operator()(double t, const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Eigen::MatrixXd& da,
                    Eigen::VectorXd& db) const {
        const Eigen::MatrixXd am = a * flow.m;
        da = 2.0 * am * a - sigma.cwiseProduct(a) - 0.5 * gamma * sigma;
        db = config.dynamics.drift_at(t) + 2.0 * a * (flow.v + tilde_v(flow, a)) + 2.0 * am * b;
    }
};

}  // namespace detail

/// Integrates A' = 2AMA - S o A - (gamma/2) S and
/// B' = mu + 2AV + 2A Vtilde(A) + 2AMB backward from A(T) = kappa, B(T) = 0.
inline RiccatiSolution integrate_backward(const ModelConfig& config, const FlowMatrices& flow,
                                          const RiccatiOptions& opts = {}) {
    if (opts.n_steps < 1) throw std::invalid_argument("integrate_backward: n_steps must be >= 1");
    const auto d = static_cast<Eigen::Index>(config.dim());
    const double horizon = config.objective.horizon;
    const double h = horizon / static_cast<double>(opts.n_steps);
    const detail::RiccatiRhs rhs{config, flow, build_covariance(config), config.objective.gamma};

    RiccatiSolution sol;
    sol.times.resize(opts.n_steps + 1);
    sol.a.resize(opts.n_steps + 1);
    sol.b.resize(opts.n_steps + 1);
    for (std::size_t m = 0; m <= opts.n_steps; ++m) sol.times[m] = horizon * static_cast<double>(m) / static_cast<double>(opts.n_steps);

    Eigen::MatrixXd a = 0.5 * (config.objective.kappa + config.objective.kappa.transpose());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    sol.a[opts.n_steps] = a;
    sol.b[opts.n_steps] = b;

    Eigen::MatrixXd k1a(d, d), k2a(d, d), k3a(d, d), k4a(d, d);
    Eigen::VectorXd k1b(d), k2b(d), k3b(d), k4b(d);
    for (std::size_t m = opts.n_steps; m-- > 0;) {
        const double t = sol.times[m + 1];
        if (opts.integrator == Integrator::Euler) {
            rhs(t, a, b, k1a, k1b);
            a -= h * k1a;
            b -= h * k1b;
        } else {
            rhs(t, a, b, k1a, k1b);
            rhs(t - 0.5 * h, a - 0.5 * h * k1a, b - 0.5 * h * k1b, k2a, k2b);
            rhs(t - 0.5 * h, a - 0.5 * h * k2a, b - 0.5 * h * k2b, k3a, k3b);
            rhs(t - h, a - h * k3a, b - h * k3b, k4a, k4b);
            a -= (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            b -= (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        }
        a = (0.5 * (a + a.transpose())).eval();
        if (!a.allFinite() || !b.allFinite() || a.cwiseAbs().maxCoeff() > 1e100) throw RiccatiBlowUp(sol.times[m]);
        sol.a[m] = a;
        sol.b[m] = b;
    }
    return sol;
}

inline RiccatiSolution solve_riccati(const ModelConfig& config, const RiccatiOptions& opts = {}) {
    return integrate_backward(config, build_flow_matrices(config), opts);
}

/// CSV of snapshots: time followed by A row-major and B, every `every` steps.
inline void write_riccati_csv(std::ostream& out, const RiccatiSolution& sol, const CurrencyUniverse& u,
                              std::size_t every = 1) {
    const std::size_t d = sol.dim();
    out << "time_days";
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out << ",A_" << u.labels[i] << "_" << u.labels[j];
    for (std::size_t i = 0; i < d; ++i) out << ",B_" << u.labels[i];
    out << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
    };
    for (std::size_t m = 0; m < sol.times.size(); ++m) {
        if (m % every != 0 && m + 1 != sol.times.size()) continue;
        std::snprintf(buf, sizeof buf, "%.17g", sol.times[m]);
        out << buf;
        for (Eigen::Index i = 0; i < sol.a[m].rows(); ++i)
            for (Eigen::Index j = 0; j < sol.a[m].cols(); ++j) put(sol.a[m](i, j));
        for (Eigen::Index i = 0; i < sol.b[m].size(); ++i) put(sol.b[m](i));
        out << "\n";
    }
}

}  // namespace fxmm
