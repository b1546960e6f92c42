#pragma once

// Internal unit system: N, mm, rad, N*mm, N/mm^2 (MPa).

namespace ncr::units {

inline constexpr double kStandardGravity = 9.80665;            // m/s^2
inline constexpr double kNewtonPerGramForce = 9.80665e-3;      // 1 gf in N
inline constexpr double kNewtonPerPoundForce = 4.4482216152605;
inline constexpr double kMpaPerGpa = 1.0e3;                    // N/mm^2 per GPa

constexpr double newtons_to_grams(double n) { return n / kNewtonPerGramForce; }
constexpr double grams_to_newtons(double gf) { return gf * kNewtonPerGramForce; }

}  // namespace ncr::units
