#pragma once

// Client flow: logistic fill probabilities, the client Hamiltonian
//   H(p) = sup_delta f(delta) (delta - p)
// its maximiser, and the quadratic expansion of H around p = 0.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fxmm {

/// Fill probability f(delta) = 1 / (1 + exp(alpha + beta * delta)).
/// `beta` is in 1/fraction, `alpha` is dimensionless.
struct LogisticCurve {
    double alpha{0.0};
    double beta{1.0};
};

struct QuadraticCoefficients {
    double a0{0.0};  // H(0)
    double a1{0.0};  // H'(0), in (-1, 0)
    double a2{0.0};  // H''(0), 1/fraction
};

class MarkupSolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double fill_probability(const LogisticCurve& curve, double delta) {
    const double x = curve.alpha + curve.beta * delta;
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

namespace detail {

// With u = beta * (delta - p) and c = alpha + beta * p, the first-order
// condition delta = p + 1 / (beta (1 - f(delta))) reads
//   G(u) = u - 1 - exp(-(c + u)) = 0,
// G is strictly increasing and concave with G(1) < 0.
inline double scaled_residual(double c, double u) { return u - 1.0 - std::exp(-(c + u)); }

inline double scaled_slope(double c, double u) { return 1.0 + std::exp(-(c + u)); }

/// Root of G on (1, inf). `hint` > 1 is used as the starting point when
/// it lies inside the bracket (warm starts from neighbouring solves).
inline double solve_scaled_markup(double c, double hint = 0.0, int max_iter = 200) {
    if (!std::isfinite(c)) {
        throw MarkupSolveError("optimal markup: non-finite logistic argument");
    }
    double lo = 1.0;
    double hi = 51.0;
    int doublings = 0;
    while (!(scaled_residual(c, hi) > 0.0)) {
        lo = hi;
        hi = 1.0 + 2.0 * (hi - 1.0);
        if (++doublings > 64) {
            throw MarkupSolveError("optimal markup: bracket expansion failed (c = " +
                                   std::to_string(c) + ")");
        }
    }

    double u;
    if (hint > lo && hint < hi) {
        u = hint;
    } else {
        // v = u - 1 solves v e^v = exp(-(c + 1)).
        const double s = -(c + 1.0);
        const double v0 = s < 1.0 ? std::exp(s) : s - std::log(s);
        u = 1.0 + v0;
        if (!(u > lo && u < hi)) u = 0.5 * (lo + hi);
    }

    double dx_old = hi - lo;
    double dx = dx_old;
    double g = scaled_residual(c, u);
    double dg = scaled_slope(c, u);
    for (int it = 0; it < max_iter; ++it) {
        if (g < 0.0) {
            lo = u;
        } else {
            hi = u;
        }
        const bool newton_out = !std::isfinite(g) || !std::isfinite(dg) ||
                                ((u - hi) * dg - g) * ((u - lo) * dg - g) > 0.0;
        if (newton_out || std::abs(2.0 * g) > std::abs(dx_old * dg)) {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            u = lo + dx;
        } else {
            dx_old = dx;
            dx = g / dg;
            u -= dx;
        }
        if (std::abs(dx) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, u)) {
            return u;
        }
        g = scaled_residual(c, u);
        dg = scaled_slope(c, u);
        if (g == 0.0) return u;
    }
    throw MarkupSolveError("optimal markup: no convergence after " + std::to_string(max_iter) +
                           " iterations (c = " + std::to_string(c) + ")");
}

}  // namespace detail

/// Everything known at the optimum for a given reservation spread p.
struct MarkupSolution {
    double delta{0.0};        // optimal markup
    double fill{0.0};         // f(delta)
    double hamiltonian{0.0};  // f(delta) (delta - p)
    double scaled{0.0};       // beta (delta - p), reusable as a warm-start hint
};

inline MarkupSolution solve_markup(const LogisticCurve& curve, double p, double hint = 0.0) {
    if (!(curve.beta > 0.0)) {
        throw MarkupSolveError("optimal markup: beta must be positive");
    }
    const double c = curve.alpha + curve.beta * p;
    const double u = detail::solve_scaled_markup(c, hint);
    MarkupSolution s;
    s.scaled = u;
    s.delta = p + u / curve.beta;
    s.fill = fill_probability(curve, s.delta);
    s.hamiltonian = s.fill * (s.delta - p);
    return s;
}

/// Unique maximiser of f(delta) (delta - p).
inline double optimal_markup(const LogisticCurve& curve, double p) {
    return solve_markup(curve, p).delta;
}

inline double hamiltonian(const LogisticCurve& curve, double p) {
    return solve_markup(curve, p).hamiltonian;
}

/// Envelope theorem gives H'(p) = -f(delta*) and delta*'(p) = 1 - f(delta*),
/// hence H''(p) = beta f (1 - f)^2.
inline QuadraticCoefficients quadratic_coefficients(const LogisticCurve& curve) {
    const MarkupSolution s = solve_markup(curve, 0.0);
    const double f = s.fill;
    return {f * s.delta, -f, curve.beta * f * (1.0 - f) * (1.0 - f)};
}

inline double quadratic_hamiltonian(const QuadraticCoefficients& q, double p) {
    return q.a0 + q.a1 * p + 0.5 * q.a2 * p * p;
}

}  // namespace fxmm
