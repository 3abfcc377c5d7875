#pragma once

// Canonical internal units: M$ (millions of reference currency), day, and
// dimensionless fractions. Configuration files use bps-based display units.

namespace fxmm::units {

inline constexpr double kBps = 1e-4;
inline constexpr double kSecondsPerDay = 86400.0;

constexpr double from_bps(double v) { return v * kBps; }
constexpr double to_bps(double v) { return v / kBps; }

// 1/bps -> 1/fraction
constexpr double from_per_bps(double v) { return v / kBps; }
constexpr double to_per_bps(double v) { return v * kBps; }

constexpr double seconds_to_days(double s) { return s / kSecondsPerDay; }

}  // namespace fxmm::units
