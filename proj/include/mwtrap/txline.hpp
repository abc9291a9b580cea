#pragma once

#include "mwtrap/constants.hpp"
#include "mwtrap/phasor.hpp"

namespace mwtrap::txline {

/// Transmission-line cross-section description: characteristic impedance,
/// effective relative dielectric constant, and the total quality factor a
/// quarter-wave resonator built from the line would have. A q_tot of
/// constants::lossless_q marks a lossless line.
struct LineSpec {
    double z_c;      // characteristic impedance (ohm)
    double eps_eff;  // effective relative dielectric constant
    double q_tot = constants::lossless_q;

    LineSpec(double z_c, double eps_eff, double q_tot = constants::lossless_q);

    bool is_lossless() const;

    /// Guided wavelength on this line at the given frequency (m).
    double wavelength_at(double frequency_hz) const;

    /// Lossy propagation constant at the given frequency (1/m).
    Phasor propagation_at(double frequency_hz) const;
};

/// Guided wavelength c/(sqrt(eps_eff) * f) (m).
double guided_wavelength(double frequency_hz, double eps_eff);

/// gamma = (2*pi/lambda) * (1/(2*Q_tot) + j). For the lossless sentinel the
/// real part is exactly zero.
Phasor propagation_constant(double wavelength_m, double q_tot);

/// Current phasor at distance u (u <= 0 by convention, short at u = 0) along
/// a short-circuited line: i(u) = i0 * (exp(-gamma*u) + exp(gamma*u)).
/// For purely imaginary gamma this reduces to 2*i0*cos(2*pi*u/lambda).
Phasor shorted_stub_current(double u_m, Phasor i0, Phasor gamma);

/// Sign convention for the open-stub input impedance. Paper follows the
/// -j*Z_c/tan(-2*pi*l/lambda) expression used for the RF-line boundary
/// condition, which is the negative of the textbook -j*Z_c*cot(2*pi*l/lambda).
enum class StubConvention { Paper, Textbook };

/// Impedance value that can represent an ideal open circuit (the tangent
/// singularities of a stub swept through l = k*lambda/2).
struct StubImpedance {
    Phasor value{0.0, 0.0};
    bool open_circuit = false;

    static StubImpedance open() { return {Phasor{0.0, 0.0}, true}; }
};

/// Input impedance of an open-terminated stub of length l. Values at tangent
/// singularities are returned as the open-circuit sentinel, not an error.
StubImpedance open_stub_impedance(double l_m, double wavelength_m, double z_c,
                                  StubConvention convention = StubConvention::Paper);

/// Power reflection |(z_ref - z_load)/(z_ref + z_load)|^2 at an impedance step.
double mismatch_reflection(double z_ref, Phasor z_load);

/// Overload accepting a stub sentinel: an open circuit reflects everything.
double mismatch_reflection(double z_ref, const StubImpedance& z_load);

/// Load formed by a resistance in parallel with a capacitance to ground:
/// 1/Z_L = 1/z_parallel + j*omega*c.
Phasor parallel_rc_load(double z_parallel_ohm, double c_farad, double frequency_hz);

/// Resonance-frequency shift of a quarter-wave resonator split by cause.
struct FrequencyShiftComponents {
    double dielectric_hz;  // from a relative change of the substrate dielectric constant
    double length_hz;      // from thermal contraction of the resonator length
    double combined_hz;    // both applied together (not the sum; equal to first order)
};

/// Shift components for a fractional change eps_fraction of the substrate
/// dielectric constant (which dominates eps_eff) and a fractional length
/// contraction. f scales as 1/sqrt(eps) and as 1/length.
FrequencyShiftComponents resonator_frequency_scaling(double f0_hz, double eps_fraction,
                                                     double length_fraction);

}  // namespace mwtrap::txline
