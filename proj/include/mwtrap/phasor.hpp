#pragma once

#include <cmath>
#include <complex>

namespace mwtrap {

/// Complex amplitude of a sinusoidally oscillating quantity. The unit is
/// carried by context: amperes for currents, ohms for impedances, tesla for
/// magnetic fields.
using Phasor = std::complex<double>;

inline double magnitude(const Phasor& p) { return std::abs(p); }
inline double phase(const Phasor& p) { return std::arg(p); }

/// 20*log10|p|, the dB convention used for reflection coefficients.
inline double to_db(const Phasor& p) { return 20.0 * std::log10(std::abs(p)); }
inline double to_db(double magnitude) { return 20.0 * std::log10(magnitude); }

/// Inverse of to_db for a magnitude (phase information is not recoverable).
inline double db_to_magnitude(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace mwtrap
