#pragma once

#include <limits>
#include <numbers>

namespace mwtrap::constants {

inline constexpr double pi = std::numbers::pi;

// SI values. c0 is exact by definition; mu0 uses the conventional 4pi.e-7,
// which differs from the 2018 redefinition by ~1.5e-10 relative.
inline constexpr double c0 = 299792458.0;            // m/s
inline constexpr double mu0 = 4.0e-7 * pi;           // H/m
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);  // F/m
inline constexpr double hbar = 1.054571817e-34;      // J.s
inline constexpr double amu = 1.66053906660e-27;     // kg

// Distinguished quality factor meaning "no loss". Using infinity keeps
// zero-loss identities exact: 1/(2*Q) is exactly 0.
inline constexpr double lossless_q = std::numeric_limits<double>::infinity();

}  // namespace mwtrap::constants
