#pragma once

#include <optional>
#include <utility>

#include "mwtrap/phasor.hpp"

namespace mwtrap::lumped {

/// Lumped-element equivalent of the quarter-wave resonator: a parallel L-C-R
/// tank shunted to ground, coupled to a resistive feedline through a series
/// capacitor. Setting c_couple to exactly 0 marks the uncoupled tank.
struct LumpedResonator {
    double l_ind;     // tank inductance (H)
    double c_cap;     // tank capacitance (F)
    double r_int;     // internal loss resistance in parallel with the tank (ohm)
    double c_couple;  // series coupling capacitance to the feedline (F); 0 = uncoupled
    double z_feed;    // feedline impedance (ohm, real)

    LumpedResonator(double l_ind, double c_cap, double r_int, double c_couple,
                    double z_feed);

    /// Unloaded angular resonance 1/sqrt(L*C) (rad/s).
    double omega0() const;

    /// Tank built from the quarter-wave equivalence at unloaded resonance f0.
    static LumpedResonator from_quarter_wave(double f0_hz, double z0_ohm, double r_int,
                                             double c_couple, double z_feed);
};

/// Characterization of one resonance: frequency, full-width energy decay rate
/// kappa, and quality factors. q_int/q_ext are present only when the producing
/// operation can determine the split (fits, or the limiting decomposition).
struct ResonatorParams {
    double f_r = 0.0;    // resonance frequency (Hz)
    double kappa = 0.0;  // dissipation rate (rad/s); q_tot = 2*pi*f_r / kappa
    double q_tot = 0.0;
    std::optional<double> q_int;
    std::optional<double> q_ext;

    /// |1/q_tot - 1/q_int - 1/q_ext| * q_tot. Requires both split factors.
    double harmonic_residual() const;
};

/// L and C of the parallel tank equivalent to a quarter-wave resonator with
/// unloaded resonance f0 and characteristic impedance z0:
/// L = 4*z0/(pi*omega0), C = pi/(4*omega0*z0).
std::pair<double, double> quarter_wave_equivalent(double f0_hz, double z0_ohm);

/// Total admittance seen across the tank at complex angular frequency omega:
/// 1/(j*omega*L) + j*omega*C + 1/R plus the coupling branch
/// j*omega*C_c/(1 + j*omega*C_c*Z_feed).
std::complex<double> admittance(const LumpedResonator& circuit, std::complex<double> omega);

/// Derivative of admittance with respect to omega (analytic).
std::complex<double> admittance_derivative(const LumpedResonator& circuit,
                                           std::complex<double> omega);

struct SolveOptions {
    double relative_tolerance = 1e-10;
    int max_iterations = 200;
};

/// Loaded resonance from the complex zero of the admittance, located by Newton
/// iteration initialized at the unloaded resonance. f_r = Re(pole)/(2*pi),
/// kappa = 2*|Im(pole)|. Throws ConvergenceError carrying the last iterate on
/// failure. q_int/q_ext are left unset.
ResonatorParams loaded_resonance(const LumpedResonator& circuit,
                                 const SolveOptions& options = {});

/// Q decomposition by the limiting procedure: q_int from the circuit with
/// c_couple scaled by 1e-4, q_ext from the circuit with r_int scaled by 1e6,
/// f_r/kappa/q_tot from the unmodified circuit. The limits are approximate;
/// harmonic_residual() on the result reports how far the identity
/// 1/q_tot = 1/q_int + 1/q_ext is violated.
ResonatorParams quality_factor_decomposition(const LumpedResonator& circuit,
                                             const SolveOptions& options = {});

/// Temperature-driven frequency-shift budget, each contribution separately.
struct ShiftReport {
    double dielectric_hz;   // waveguide dielectric constant change (scaling law)
    double coupling_hz;     // re-solved with c_couple*(1 + eps_fraction)
    double resistance_hz;   // re-solved with r_int*r_factor
    double contraction_hz;  // resonator length contraction (scaling law)
    double total_hz;        // sum of the four components
    ResonatorParams base;   // loaded resonance of the unmodified circuit
    double f_meas_room_hz;  // reference frequency used for the scaling-law terms
};

/// Shift budget for a substrate dielectric change eps_fraction (the coupling
/// capacitor scales with the substrate dielectric constant), an internal-loss
/// resistance multiplier, and a fractional thermal contraction. Scaling-law
/// components are evaluated at the measured room-temperature resonance.
ShiftReport frequency_shift_report(const LumpedResonator& circuit, double eps_fraction,
                                   double r_factor, double contraction,
                                   double f_meas_room_hz);

}  // namespace mwtrap::lumped
