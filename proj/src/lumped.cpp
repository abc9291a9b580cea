#include "mwtrap/lumped.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mwtrap/constants.hpp"
#include "mwtrap/errors.hpp"
#include "mwtrap/txline.hpp"

namespace mwtrap::lumped {

using std::complex;
using constants::pi;

LumpedResonator::LumpedResonator(double l_ind_, double c_cap_, double r_int_,
                                 double c_couple_, double z_feed_)
    : l_ind(l_ind_), c_cap(c_cap_), r_int(r_int_), c_couple(c_couple_), z_feed(z_feed_) {
    if (!(l_ind > 0.0) || !(c_cap > 0.0) || !(r_int > 0.0) || !(z_feed > 0.0)) {
        throw DomainError("LumpedResonator: L, C, R, and feedline impedance must be positive");
    }
    if (c_couple < 0.0 || !std::isfinite(c_couple)) {
        throw DomainError("LumpedResonator: c_couple must be >= 0 (0 = uncoupled)");
    }
    if (!std::isfinite(omega0())) {
        throw DomainError("LumpedResonator: unloaded resonance is not finite");
    }
}

double LumpedResonator::omega0() const { return 1.0 / std::sqrt(l_ind * c_cap); }

LumpedResonator LumpedResonator::from_quarter_wave(double f0_hz, double z0_ohm,
                                                   double r_int, double c_couple,
                                                   double z_feed) {
    auto [l, c] = quarter_wave_equivalent(f0_hz, z0_ohm);
    return {l, c, r_int, c_couple, z_feed};
}

double ResonatorParams::harmonic_residual() const {
    if (!q_int || !q_ext) {
        throw DomainError("harmonic_residual: q_int/q_ext are not set");
    }
    return std::abs(1.0 / q_tot - 1.0 / *q_int - 1.0 / *q_ext) * q_tot;
}

std::pair<double, double> quarter_wave_equivalent(double f0_hz, double z0_ohm) {
    if (!(f0_hz > 0.0) || !(z0_ohm > 0.0)) {
        throw DomainError("quarter_wave_equivalent: f0 and z0 must be positive");
    }
    const double omega0 = 2.0 * pi * f0_hz;
    return {4.0 * z0_ohm / (pi * omega0), pi / (4.0 * omega0 * z0_ohm)};
}

complex<double> admittance(const LumpedResonator& c, complex<double> omega) {
    const complex<double> j{0.0, 1.0};
    complex<double> y = 1.0 / (j * omega * c.l_ind) + j * omega * c.c_cap + 1.0 / c.r_int;
    if (c.c_couple > 0.0) {
        y += j * omega * c.c_couple / (1.0 + j * omega * c.c_couple * c.z_feed);
    }
    return y;
}

complex<double> admittance_derivative(const LumpedResonator& c, complex<double> omega) {
    const complex<double> j{0.0, 1.0};
    complex<double> d = -1.0 / (j * omega * omega * c.l_ind) + j * c.c_cap;
    if (c.c_couple > 0.0) {
        const complex<double> u = 1.0 + j * omega * c.c_couple * c.z_feed;
        d += j * c.c_couple / (u * u);
    }
    return d;
}

ResonatorParams loaded_resonance(const LumpedResonator& circuit, const SolveOptions& opt) {
    complex<double> omega{circuit.omega0(), 0.0};
    bool converged = false;
    for (int i = 0; i < opt.max_iterations; ++i) {
        const complex<double> step =
            admittance(circuit, omega) / admittance_derivative(circuit, omega);
        omega -= step;
        if (std::abs(step) < opt.relative_tolerance * std::abs(omega)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError(
            "loaded_resonance: Newton iteration did not converge after " +
                std::to_string(opt.max_iterations) + " iterations",
            {omega.real(), omega.imag()});
    }
    // The admittance zeros come in the pair (omega, -conj(omega)); report the
    // positive-frequency one.
    if (omega.real() < 0.0) {
        omega = -std::conj(omega);
    }
    ResonatorParams p;
    p.f_r = omega.real() / (2.0 * pi);
    p.kappa = 2.0 * std::abs(omega.imag());
    p.q_tot = omega.real() / p.kappa;
    return p;
}

ResonatorParams quality_factor_decomposition(const LumpedResonator& circuit,
                                             const SolveOptions& opt) {
    ResonatorParams full = loaded_resonance(circuit, opt);

    LumpedResonator weak_coupling = circuit;
    weak_coupling.c_couple *= 1e-4;
    const ResonatorParams internal_only = loaded_resonance(weak_coupling, opt);

    LumpedResonator weak_loss = circuit;
    weak_loss.r_int *= 1e6;
    const ResonatorParams external_only = loaded_resonance(weak_loss, opt);

    full.q_int = internal_only.q_tot;
    full.q_ext = external_only.q_tot;
    return full;
}

ShiftReport frequency_shift_report(const LumpedResonator& circuit, double eps_fraction,
                                   double r_factor, double contraction,
                                   double f_meas_room_hz) {
    if (!(r_factor > 0.0)) {
        throw DomainError("frequency_shift_report: r_factor must be positive");
    }
    if (!(f_meas_room_hz > 0.0)) {
        throw DomainError("frequency_shift_report: f_meas_room must be positive");
    }
    const auto scaling =
        txline::resonator_frequency_scaling(f_meas_room_hz, eps_fraction, contraction);

    const ResonatorParams base = loaded_resonance(circuit);

    // The coupling capacitor tracks the substrate dielectric constant.
    LumpedResonator shifted_cc = circuit;
    shifted_cc.c_couple *= (1.0 + eps_fraction);
    const double coupling_hz = loaded_resonance(shifted_cc).f_r - base.f_r;

    LumpedResonator shifted_r = circuit;
    shifted_r.r_int *= r_factor;
    const double resistance_hz = loaded_resonance(shifted_r).f_r - base.f_r;

    ShiftReport report;
    report.dielectric_hz = scaling.dielectric_hz;
    report.coupling_hz = coupling_hz;
    report.resistance_hz = resistance_hz;
    report.contraction_hz = scaling.length_hz;
    report.total_hz =
        report.dielectric_hz + report.coupling_hz + report.resistance_hz + report.contraction_hz;
    report.base = base;
    report.f_meas_room_hz = f_meas_room_hz;
    return report;
}

}  // namespace mwtrap::lumped
