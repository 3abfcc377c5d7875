#pragma once

// Finite-difference reference solver for the full HJB equation on an
// inventory grid with up to three axes. Used to validate the Riccati
// approximation when at most two currencies are risky.
//
// Backward time stepping in tau = T - t:
//   * client-flow and hedging Hamiltonians are explicit and monotone
//     (upwind one-sided differences for the hedging terms), under a CFL
//     restriction computed from the current rates and fill intensities;
//   * the diffusion term tr(D(y) S D(y) D2 theta) / 2 is implicit (backward
//     Euler), solved by Gauss-Seidel sweeps.
// Trades whose inventory shift leaves the grid are dropped. An axis that
// carries the reference currency clamps its shifts instead: nothing in the
// dynamics depends on that coordinate.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fxmm/client_flow.hpp"
#include "fxmm/d2d_hedging.hpp"
#include "fxmm/model_config.hpp"

namespace fxmm {

struct GridSpec {
    std::vector<std::size_t> axes;  // currency index of each grid axis
    double y_max{60.0};             // M$, grid spans [-y_max, y_max] on every axis
    double h{1.0};                  // M$
    double dtau{0.0};               // fixed time step in days; 0 selects the CFL step
    double cfl_safety{0.9};
    std::size_t retained_slices{1};  // uniform time slices kept besides t = T
    std::vector<double> terminal;    // nodal theta(T); empty means -y' kappa y
};

class CflViolation : public std::runtime_error {
public:
    explicit CflViolation(double admissible)
        : std::runtime_error("HJB time step violates the monotonicity (CFL) bound; admissible dtau <= " +
                             std::to_string(admissible) + " day"),
          admissible_(admissible) {}
    double admissible() const { return admissible_; }

private:
    double admissible_;
};

class OutOfGridError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// theta on every node for each retained time (ascending; front is t = 0).
struct ValueGrid {
    GridSpec spec;
    std::size_t n_per_axis{0};
    std::vector<bool> clamp;  // per axis: shifts are clamped (reference-currency axis)
    std::vector<double> times;
    std::vector<std::vector<double>> theta;
    std::size_t steps{0};

    std::size_t rank() const { return spec.axes.size(); }
    std::size_t node_count() const { return theta.empty() ? 0 : theta.front().size(); }

    double coordinate(std::size_t idx) const { return -spec.y_max + static_cast<double>(idx) * spec.h; }

    /// Multi-index of a node along each axis.
    std::array<std::size_t, 3> unpack(std::size_t node) const {
        std::array<std::size_t, 3> m{0, 0, 0};
        for (std::size_t a = rank(); a-- > 0;) {
            m[a] = node % n_per_axis;
            node /= n_per_axis;
        }
        return m;
    }

    std::size_t pack(const std::array<std::size_t, 3>& m) const {
        std::size_t node = 0;
        for (std::size_t a = 0; a < rank(); ++a) node = node * n_per_axis + m[a];
        return node;
    }

    /// Node holding full-dimensional inventory y (grid currencies only; the
    /// other coordinates are ignored). Throws if y is off the lattice.
    std::size_t node_of(const Eigen::VectorXd& y) const {
        std::array<std::size_t, 3> m{0, 0, 0};
        for (std::size_t a = 0; a < rank(); ++a) {
            const double v = y(static_cast<Eigen::Index>(spec.axes[a]));
            const double r = (v + spec.y_max) / spec.h;
            double ri = std::round(r);
            if (!clamp.empty() && clamp[a]) ri = std::clamp(ri, 0.0, static_cast<double>(n_per_axis - 1));
            if (std::abs(r - ri) > 1e-9 && !(clamp.size() > a && clamp[a])) {
                throw OutOfGridError("inventory " + std::to_string(v) + " is not a grid node");
            }
            if (ri < 0.0 || ri > static_cast<double>(n_per_axis - 1)) {
                throw OutOfGridError("inventory " + std::to_string(v) + " is not a grid node");
            }
            m[a] = static_cast<std::size_t>(ri);
        }
        return pack(m);
    }

    bool contains(const Eigen::VectorXd& y) const {
        try {
            node_of(y);
            return true;
        } catch (const OutOfGridError&) {
            return false;
        }
    }

    double value(std::size_t slice, const Eigen::VectorXd& y) const { return theta.at(slice)[node_of(y)]; }
};

namespace hjb_detail {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Layout {
    std::size_t rank{0};
    std::size_t n{0};
    std::size_t nodes{0};
    std::size_t d{0};
    std::vector<int> axis_of;  // currency -> axis or -1
    std::vector<bool> clamp;   // per axis
    std::vector<Eigen::VectorXd> y;  // full inventory per node
    std::vector<std::array<std::size_t, 3>> idx;
    std::vector<std::size_t> stride;

    // Node shifted by `steps` along axis a, or kNone when dropped.
    std::size_t shift(std::size_t node, std::size_t a, long steps) const {
        const long target = static_cast<long>(idx[node][a]) + steps;
        long t = target;
        if (target < 0 || target >= static_cast<long>(n)) {
            if (!clamp[a]) return kNone;
            t = std::clamp(target, 0L, static_cast<long>(n) - 1);
        }
        const long delta = t - static_cast<long>(idx[node][a]);
        return static_cast<std::size_t>(static_cast<long>(node) + delta * static_cast<long>(stride[a]));
    }
};

inline long steps_for(double size, double h, const std::string& what) {
    const double r = size / h;
    const double ri = std::round(r);
    if (std::abs(r - ri) > 1e-9) throw std::invalid_argument(what + " = " + std::to_string(size) + " M$ is not a multiple of the grid spacing");
    return static_cast<long>(ri);
}

}  // namespace hjb_detail

/// Solves the HJB equation backward from theta(T, y) = -y' kappa y.
inline ValueGrid solve_hjb(const ModelConfig& config, const GridSpec& spec) {
    using hjb_detail::kNone;
    const std::size_t d = config.dim();
    const std::size_t ref = config.universe.reference_index;
    if (spec.axes.empty() || spec.axes.size() > 3) throw std::invalid_argument("solve_hjb: grid needs 1 to 3 axes");
    if (!(spec.h > 0.0) || !(spec.y_max > 0.0)) throw std::invalid_argument("solve_hjb: y_max and h must be positive");
    const double cells = spec.y_max / spec.h;
    if (std::abs(cells - std::round(cells)) > 1e-9) throw std::invalid_argument("solve_hjb: y_max / h must be integral");

    hjb_detail::Layout L;
    L.rank = spec.axes.size();
    L.n = 2 * static_cast<std::size_t>(std::round(cells)) + 1;
    L.d = d;
    L.axis_of.assign(d, -1);
    for (std::size_t a = 0; a < L.rank; ++a) {
        const std::size_t c = spec.axes[a];
        if (c >= d) throw std::invalid_argument("solve_hjb: axis currency out of range");
        if (L.axis_of[c] != -1) throw std::invalid_argument("solve_hjb: duplicate axis currency");
        L.axis_of[c] = static_cast<int>(a);
        L.clamp.push_back(c == ref);
    }
    for (std::size_t c = 0; c < d; ++c) {
        if (c != ref && L.axis_of[c] == -1) {
            throw std::invalid_argument("solve_hjb: risky currency " + config.universe.labels[c] +
                                        " is not a grid axis; restrict the config first");
        }
    }
    L.stride.assign(L.rank, 1);
    for (std::size_t a = L.rank - 1; a-- > 0;) L.stride[a] = L.stride[a + 1] * L.n;
    L.nodes = L.stride[0] * L.n;

    ValueGrid vg;
    vg.spec = spec;
    vg.n_per_axis = L.n;
    vg.clamp = L.clamp;
    L.y.resize(L.nodes);
    L.idx.resize(L.nodes);
    for (std::size_t node = 0; node < L.nodes; ++node) {
        L.idx[node] = vg.unpack(node);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t a = 0; a < L.rank; ++a) y(static_cast<Eigen::Index>(spec.axes[a])) = vg.coordinate(L.idx[node][a]);
        L.y[node] = y;
    }

    const Eigen::MatrixXd sigma = build_covariance(config);
    const double gamma = config.objective.gamma;
    const auto& kimp = config.dynamics.impact_k;

    // Client trade targets, flattened over (stream, bucket).
    struct ClientTerm {
        LogisticCurve curve;
        double z;
        double lambda;
    };
    std::vector<ClientTerm> terms;
    std::vector<std::array<long, 3>> term_shift;
    for (const auto& s : config.liquidity) {
        for (const auto& b : s.buckets) {
            std::array<long, 3> sh{0, 0, 0};
            const long st = hjb_detail::steps_for(b.size, spec.h, "ladder size");
            if (L.axis_of[s.buy] >= 0) sh[static_cast<std::size_t>(L.axis_of[s.buy])] += st;
            if (L.axis_of[s.sell] >= 0) sh[static_cast<std::size_t>(L.axis_of[s.sell])] -= st;
            terms.push_back({b.curve, b.size, b.lambda});
            term_shift.push_back(sh);
        }
    }
    const std::size_t n_terms = terms.size();
    std::vector<std::size_t> target(L.nodes * n_terms, kNone);
    for (std::size_t node = 0; node < L.nodes; ++node) {
        for (std::size_t t = 0; t < n_terms; ++t) {
            std::size_t cur = node;
            for (std::size_t a = 0; a < L.rank && cur != kNone; ++a) {
                if (term_shift[t][a] != 0) cur = L.shift(cur, a, term_shift[t][a]);
            }
            target[node * n_terms + t] = cur;
        }
    }

    // Hedge pairs.
    struct PairTerm {
        std::size_t i, j;
        int ai, aj;
        HedgePairCost cost;
    };
    std::vector<PairTerm> pairs;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const auto& hc = config.hedge_costs.at(i, j, d);
            if (!hc.available) continue;
            pairs.push_back({i, j, L.axis_of[i], L.axis_of[j], hc.cost});
        }
    }

    // Implicit diffusion operator: L theta(node) = sum c * theta(nb) - diag * theta(node).
    struct Entry {
        std::size_t nb;
        double c;
    };
    std::vector<std::vector<Entry>> diff_rows(L.nodes);
    std::vector<double> diff_diag(L.nodes, 0.0);
    const double h2 = spec.h * spec.h;
    for (std::size_t node = 0; node < L.nodes; ++node) {
        auto& row = diff_rows[node];
        const auto& y = L.y[node];
        auto add = [&](std::size_t nb, double c) {
            row.push_back({nb, c});
            diff_diag[node] += c;
        };
        for (std::size_t a = 0; a < L.rank; ++a) {
            const auto ca = static_cast<Eigen::Index>(spec.axes[a]);
            const double caa = 0.5 * y(ca) * y(ca) * sigma(ca, ca);
            if (caa == 0.0) continue;
            const std::size_t up = L.shift(node, a, 1), dn = L.shift(node, a, -1);
            if (up == kNone || dn == kNone) continue;
            add(up, caa / h2);
            add(dn, caa / h2);
        }
        for (std::size_t a = 0; a < L.rank; ++a) {
            for (std::size_t b = a + 1; b < L.rank; ++b) {
                const auto ca = static_cast<Eigen::Index>(spec.axes[a]);
                const auto cb = static_cast<Eigen::Index>(spec.axes[b]);
                // Both orderings of the mixed derivative: 2 * (y_a y_b S_ab / 2).
                const double cab = y(ca) * y(cb) * sigma(ca, cb);
                if (cab == 0.0) continue;
                const long sb = cab > 0.0 ? 1 : -1;
                const std::size_t pa = L.shift(node, a, 1), ma = L.shift(node, a, -1);
                const std::size_t pb = L.shift(node, b, 1), mb = L.shift(node, b, -1);
                if (pa == kNone || ma == kNone || pb == kNone || mb == kNone) continue;
                const std::size_t d1 = L.shift(pa, b, sb), d2 = L.shift(ma, b, -sb);
                if (d1 == kNone || d2 == kNone) continue;
                // 7-point stencil oriented along the sign of the cross term.
                const double w = std::abs(cab) / (2.0 * h2);
                add(d1, w);
                add(d2, w);
                add(pa, -w);
                add(ma, -w);
                add(pb, -w);
                add(mb, -w);
            }
        }
    }

    // Terminal condition.
    std::vector<double> theta(L.nodes);
    if (!spec.terminal.empty()) {
        if (spec.terminal.size() != L.nodes) throw std::invalid_argument("solve_hjb: terminal values do not match the grid");
        theta = spec.terminal;
    } else {
        for (std::size_t node = 0; node < L.nodes; ++node) theta[node] = -L.y[node].dot(config.objective.kappa * L.y[node]);
    }
    std::vector<double> running(L.nodes);
    for (std::size_t node = 0; node < L.nodes; ++node) running[node] = -0.5 * gamma * L.y[node].dot(sigma * L.y[node]);

    const double horizon = config.objective.horizon;
    const std::size_t n_ret = std::max<std::size_t>(spec.retained_slices, 1);
    vg.times.resize(n_ret + 1);
    vg.theta.resize(n_ret + 1);
    for (std::size_t r = 0; r <= n_ret; ++r) vg.times[r] = horizon * static_cast<double>(r) / static_cast<double>(n_ret);
    vg.theta[n_ret] = theta;

    std::vector<double> hints(L.nodes * n_terms, 0.0);
    std::vector<double> rhs(L.nodes), coef(L.nodes), star(L.nodes);
    double tau = 0.0;
    std::size_t next_slice = n_ret;  // slice index to fill next (descending)
    const bool drift_zero = config.dynamics.drift_is_zero();

    while (next_slice-- > 0) {
        const double tau_target = horizon - vg.times[next_slice];
        while (tau < tau_target * (1.0 - 1e-14)) {
            const double t = horizon - tau;
            const Eigen::VectorXd mu = drift_zero ? Eigen::VectorXd() : config.dynamics.drift_at(t);
            double max_coef = 0.0;
            for (std::size_t node = 0; node < L.nodes; ++node) {
                const auto& y = L.y[node];
                double f = running[node];
                if (!drift_zero) f += y.dot(mu);
                double c = 0.0;
                const double th = theta[node];
                for (std::size_t k = 0; k < n_terms; ++k) {
                    const std::size_t tg = target[node * n_terms + k];
                    if (tg == kNone) continue;
                    const auto& term = terms[k];
                    const double p = (th - theta[tg]) / term.z;
                    const MarkupSolution ms = solve_markup(term.curve, p, hints[node * n_terms + k]);
                    hints[node * n_terms + k] = ms.scaled;
                    f += term.z * term.lambda * ms.hamiltonian;
                    c += term.lambda * ms.fill;
                }
                for (const auto& pr : pairs) {
                    // Directional one-sided differences; ref axis absent => 0.
                    double fwd_i = 0.0, bwd_i = 0.0, fwd_j = 0.0, bwd_j = 0.0;
                    double gi = 0.0, gj = 0.0;  // 1 + k y
                    double kyi = 0.0, kyj = 0.0;
                    bool ok_buy = true, ok_sell = true;
                    if (pr.ai >= 0) {
                        const auto a = static_cast<std::size_t>(pr.ai);
                        const std::size_t up = L.shift(node, a, 1), dn = L.shift(node, a, -1);
                        kyi = kimp(static_cast<Eigen::Index>(pr.i)) * y(static_cast<Eigen::Index>(pr.i));
                        gi = 1.0 + kyi;
                        if (up == kNone) ok_buy = false; else fwd_i = (theta[up] - th) / spec.h;
                        if (dn == kNone) ok_sell = false; else bwd_i = (th - theta[dn]) / spec.h;
                    }
                    if (pr.aj >= 0) {
                        const auto a = static_cast<std::size_t>(pr.aj);
                        const std::size_t up = L.shift(node, a, 1), dn = L.shift(node, a, -1);
                        kyj = kimp(static_cast<Eigen::Index>(pr.j)) * y(static_cast<Eigen::Index>(pr.j));
                        gj = 1.0 + kyj;
                        if (dn == kNone) ok_buy = false; else bwd_j = (th - theta[dn]) / spec.h;
                        if (up == kNone) ok_sell = false; else fwd_j = (theta[up] - th) / spec.h;
                    }
                    const double drift_k = kyi - kyj;
                    const double p_buy = fwd_i * gi - bwd_j * gj + drift_k;
                    const double p_sell = bwd_i * gi - fwd_j * gj + drift_k;
                    const double v_buy = ok_buy ? hedge_hamiltonian_buy(pr.cost, p_buy) : 0.0;
                    const double v_sell = ok_sell ? hedge_hamiltonian_sell(pr.cost, p_sell) : 0.0;
                    double rate = 0.0;
                    if (v_buy >= v_sell && v_buy > 0.0) {
                        f += v_buy;
                        rate = optimal_rate(pr.cost, p_buy);
                    } else if (v_sell > 0.0) {
                        f += v_sell;
                        rate = optimal_rate(pr.cost, p_sell);
                    }
                    c += std::abs(rate) * (std::abs(gi) + std::abs(gj)) / spec.h;
                }
                rhs[node] = f;
                coef[node] = c;
                max_coef = std::max(max_coef, c);
            }

            const double admissible = max_coef > 0.0 ? 1.0 / max_coef : std::numeric_limits<double>::infinity();
            double dt;
            if (spec.dtau > 0.0) {
                if (spec.dtau > admissible) throw CflViolation(admissible);
                dt = spec.dtau;
            } else {
                dt = spec.cfl_safety * admissible;
            }
            dt = std::min(dt, tau_target - tau);

            for (std::size_t node = 0; node < L.nodes; ++node) star[node] = theta[node] + dt * rhs[node];
            // (I - dt L) theta_new = star, Gauss-Seidel from the explicit guess.
            theta = star;
            for (int sweep = 0; sweep < 200; ++sweep) {
                double change = 0.0, scale = 1.0;
                for (std::size_t node = 0; node < L.nodes; ++node) {
                    if (diff_rows[node].empty()) continue;
                    double acc = star[node];
                    for (const auto& e : diff_rows[node]) acc += dt * e.c * theta[e.nb];
                    const double nv = acc / (1.0 + dt * diff_diag[node]);
                    change = std::max(change, std::abs(nv - theta[node]));
                    scale = std::max(scale, std::abs(nv));
                    theta[node] = nv;
                }
                if (change <= 1e-15 * scale) break;
            }
            tau += dt;
            ++vg.steps;
        }
        tau = tau_target;
        vg.theta[next_slice] = theta;
    }
    return vg;
}

struct GridHedge {
    std::size_t i{0};
    std::size_t j{0};
    double argument{0.0};
    double rate{0.0};
};

/// Markup of one stream and bucket from the exact-Hamiltonian formula,
/// p = (theta(y) - theta(y + z e_buy - z e_sell)) / z.
inline double extract_quote(const ModelConfig& config, const ValueGrid& vg, std::size_t slice, const Eigen::VectorXd& y,
                            std::size_t stream, std::size_t bucket) {
    const auto& s = config.liquidity.at(stream);
    const auto& b = s.buckets.at(bucket);
    Eigen::VectorXd shifted = y;
    shifted(static_cast<Eigen::Index>(s.buy)) += b.size;
    shifted(static_cast<Eigen::Index>(s.sell)) -= b.size;
    const double th = vg.value(slice, y);
    const double ts = vg.value(slice, shifted);
    return optimal_markup(b.curve, (th - ts) / b.size);
}

/// All markups at y, aligned with ModelConfig::liquidity; NaN where the
/// trade would leave the grid.
inline std::vector<std::vector<double>> extract_quotes(const ModelConfig& config, const ValueGrid& vg, std::size_t slice,
                                                       const Eigen::VectorXd& y) {
    vg.node_of(y);
    std::vector<std::vector<double>> out;
    for (std::size_t s = 0; s < config.liquidity.size(); ++s) {
        std::vector<double> row;
        for (std::size_t k = 0; k < config.liquidity[s].buckets.size(); ++k) {
            try {
                row.push_back(extract_quote(config, vg, slice, y, s, k));
            } catch (const OutOfGridError&) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

namespace hjb_detail {

// One-sided or central difference of theta along currency c at y. dir > 0
// forward, dir < 0 backward, dir == 0 central; falls back to whatever
// neighbours exist. Zero for currencies that are not grid axes.
inline double difference(const ValueGrid& vg, std::size_t slice, const Eigen::VectorXd& y, std::size_t c, int dir) {
    const auto it = std::find(vg.spec.axes.begin(), vg.spec.axes.end(), c);
    if (it == vg.spec.axes.end()) return 0.0;
    const double h = vg.spec.h;
    Eigen::VectorXd up = y, dn = y;
    up(static_cast<Eigen::Index>(c)) += h;
    dn(static_cast<Eigen::Index>(c)) -= h;
    const bool has_up = vg.contains(up);
    const bool has_dn = vg.contains(dn);
    const double th = vg.value(slice, y);
    if (dir > 0 && has_up) return (vg.value(slice, up) - th) / h;
    if (dir < 0 && has_dn) return (th - vg.value(slice, dn)) / h;
    if (has_up && has_dn) return (vg.value(slice, up) - vg.value(slice, dn)) / (2.0 * h);
    if (has_up) return (vg.value(slice, up) - th) / h;
    if (has_dn) return (th - vg.value(slice, dn)) / h;
    return 0.0;
}

inline double grid_hedge_argument(const ModelConfig& config, const ValueGrid& vg, std::size_t slice,
                                  const Eigen::VectorXd& y, std::size_t i, std::size_t j, int dir) {
    const auto& k = config.dynamics.impact_k;
    const double kyi = k(static_cast<Eigen::Index>(i)) * y(static_cast<Eigen::Index>(i));
    const double kyj = k(static_cast<Eigen::Index>(j)) * y(static_cast<Eigen::Index>(j));
    const double di = difference(vg, slice, y, i, dir);
    const double dj = difference(vg, slice, y, j, -dir);
    return di * (1.0 + kyi) - dj * (1.0 + kyj) + kyi - kyj;
}

}  // namespace hjb_detail

/// Hedge rates at y for every available pair: central differences pick
/// the sign of the rate, then one upwind pass in that direction.
inline std::vector<GridHedge> extract_hedges(const ModelConfig& config, const ValueGrid& vg, std::size_t slice,
                                             const Eigen::VectorXd& y) {
    vg.node_of(y);
    const std::size_t d = config.dim();
    std::vector<GridHedge> out;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const auto& hc = config.hedge_costs.at(i, j, d);
            const double pc = hjb_detail::grid_hedge_argument(config, vg, slice, y, i, j, 0);
            double rate = hc.available ? optimal_rate(hc.cost, pc) : 0.0;
            double p = pc;
            if (rate != 0.0) {
                const int dir = rate > 0.0 ? 1 : -1;
                p = hjb_detail::grid_hedge_argument(config, vg, slice, y, i, j, dir);
                const double up = optimal_rate(hc.cost, p);
                rate = (up > 0.0) == (dir > 0) ? up : 0.0;
            }
            out.push_back({i, j, p, rate});
        }
    }
    return out;
}

/// Inventory values along `axis` through `base` where the central-difference
/// hedge argument of pair (i, j) crosses -psi and +psi, by linear
/// interpolation between nodes. NaN when not crossed on the grid.
inline std::pair<double, double> grid_activation_interval(const ModelConfig& config, const ValueGrid& vg, std::size_t slice,
                                                          const Eigen::VectorXd& base, std::size_t axis, std::size_t i,
                                                          std::size_t j) {
    const double psi = config.hedge_cost(i, j).psi;
    const auto ax = static_cast<Eigen::Index>(axis);
    std::vector<double> ys, ps;
    for (std::size_t m = 0; m < vg.n_per_axis; ++m) {
        Eigen::VectorXd y = base;
        y(ax) = vg.coordinate(m);
        ys.push_back(y(ax));
        ps.push_back(hjb_detail::grid_hedge_argument(config, vg, slice, y, i, j, 0));
    }
    // Start from the node closest to the base and walk outwards.
    const auto centre = static_cast<std::size_t>(std::lround((base(ax) + vg.spec.y_max) / vg.spec.h));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto walk = [&](int step) {
        for (long m = static_cast<long>(centre); m + step >= 0 && m + step < static_cast<long>(ys.size()); m += step) {
            const auto a = static_cast<std::size_t>(m), b = static_cast<std::size_t>(m + step);
            for (double target : {psi, -psi}) {
                if ((ps[a] - target) * (ps[b] - target) <= 0.0 && ps[a] != ps[b] && std::abs(ps[a]) <= psi) {
                    const double w = (target - ps[a]) / (ps[b] - ps[a]);
                    return ys[a] + w * (ys[b] - ys[a]);
                }
            }
        }
        return nan;
    };
    return {walk(-1), walk(1)};
}

}  // namespace fxmm
