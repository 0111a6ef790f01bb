#pragma once

#include <cmath>

namespace multimon {

// SI defining constants (2019 redefinition).
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s

// Charging energy e^2/(2hC) expressed in GHz for C in fF.
inline constexpr double kChargingGHzfF =
    kElementaryCharge * kElementaryCharge / (2.0 * kPlanck) * 1e6;

// Inductive energy phi0^2/(hL) in GHz for L in nH, phi0 = hbar/2e.
// (Numerically equal to the Hz*H value since the 1e-9 factors cancel.)
inline constexpr double kInductiveGHznH =
    kPlanck / (16.0 * M_PI * M_PI) / (kElementaryCharge * kElementaryCharge);

// Generalized eigenvalue (E_L in GHz, C in fF) to squared frequency in GHz^2:
// f^2 = kEigToFreqSq * lambda.
inline constexpr double kEigToFreqSq = 8.0 * kChargingGHzfF;

// Zero-point scale: node-phase fluctuation of a C-orthonormal mode column is
// column * kZpfScale / sqrt(f_GHz).
inline const double kZpfScale = std::sqrt(4.0 * kChargingGHzfF);

inline constexpr double kTwoPi = 2.0 * M_PI;

}  // namespace multimon
