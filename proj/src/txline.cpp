#include "mwtrap/txline.hpp"

#include <cmath>
#include <string>

#include "mwtrap/errors.hpp"

namespace mwtrap::txline {

namespace {

void check_wavelength(double wavelength_m) {
    if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) {
        throw DomainError("wavelength must be positive, got " + std::to_string(wavelength_m));
    }
}

}  // namespace

LineSpec::LineSpec(double z_c_, double eps_eff_, double q_tot_)
    : z_c(z_c_), eps_eff(eps_eff_), q_tot(q_tot_) {
    if (!(z_c > 0.0) || !std::isfinite(z_c)) {
        throw DomainError("LineSpec: characteristic impedance must be positive");
    }
    if (!(eps_eff >= 1.0) || !std::isfinite(eps_eff)) {
        throw DomainError("LineSpec: eps_eff must be >= 1");
    }
    if (!(q_tot > 0.0)) {
        throw DomainError("LineSpec: q_tot must be positive (use constants::lossless_q)");
    }
}

bool LineSpec::is_lossless() const { return std::isinf(q_tot); }

double LineSpec::wavelength_at(double frequency_hz) const {
    return guided_wavelength(frequency_hz, eps_eff);
}

Phasor LineSpec::propagation_at(double frequency_hz) const {
    return propagation_constant(wavelength_at(frequency_hz), q_tot);
}

double guided_wavelength(double frequency_hz, double eps_eff) {
    if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
        throw DomainError("guided_wavelength: frequency must be positive");
    }
    if (!(eps_eff >= 1.0) || !std::isfinite(eps_eff)) {
        throw DomainError("guided_wavelength: eps_eff must be >= 1");
    }
    return constants::c0 / (std::sqrt(eps_eff) * frequency_hz);
}

Phasor propagation_constant(double wavelength_m, double q_tot) {
    check_wavelength(wavelength_m);
    if (!(q_tot > 0.0)) {
        throw DomainError("propagation_constant: q_tot must be positive");
    }
    const double beta = 2.0 * constants::pi / wavelength_m;
    const double alpha = std::isinf(q_tot) ? 0.0 : beta / (2.0 * q_tot);
    return {alpha, beta};
}

Phasor shorted_stub_current(double u_m, Phasor i0, Phasor gamma) {
    const Phasor z = gamma * u_m;
    return i0 * (std::exp(-z) + std::exp(z));
}

StubImpedance open_stub_impedance(double l_m, double wavelength_m, double z_c,
                                  StubConvention convention) {
    check_wavelength(wavelength_m);
    if (!(z_c > 0.0)) {
        throw DomainError("open_stub_impedance: z_c must be positive");
    }
    if (l_m < 0.0) {
        throw DomainError("open_stub_impedance: stub length must be non-negative");
    }
    const double t = std::tan(-2.0 * constants::pi * l_m / wavelength_m);
    if (std::abs(t) < 1e-15) {
        return StubImpedance::open();
    }
    Phasor z{0.0, -z_c / t};
    if (convention == StubConvention::Textbook) {
        z = -z;
    }
    return {z, false};
}

double mismatch_reflection(double z_ref, Phasor z_load) {
    if (!(z_ref > 0.0)) {
        throw DomainError("mismatch_reflection: reference impedance must be positive");
    }
    const Phasor denom = z_ref + z_load;
    if (std::abs(denom) == 0.0) {
        throw DomainError("mismatch_reflection: z_load = -z_ref is singular");
    }
    return std::norm((z_ref - z_load) / denom);
}

double mismatch_reflection(double z_ref, const StubImpedance& z_load) {
    if (z_load.open_circuit) {
        if (!(z_ref > 0.0)) {
            throw DomainError("mismatch_reflection: reference impedance must be positive");
        }
        return 1.0;
    }
    return mismatch_reflection(z_ref, z_load.value);
}

Phasor parallel_rc_load(double z_parallel_ohm, double c_farad, double frequency_hz) {
    if (!(z_parallel_ohm > 0.0) || !(frequency_hz > 0.0) || c_farad < 0.0) {
        throw DomainError("parallel_rc_load: impedance and frequency must be positive");
    }
    const double omega = 2.0 * constants::pi * frequency_hz;
    return 1.0 / Phasor{1.0 / z_parallel_ohm, omega * c_farad};
}

FrequencyShiftComponents resonator_frequency_scaling(double f0_hz, double eps_fraction,
                                                     double length_fraction) {
    if (!(f0_hz > 0.0)) {
        throw DomainError("resonator_frequency_scaling: f0 must be positive");
    }
    if (std::abs(eps_fraction) >= 0.1 || std::abs(length_fraction) >= 0.1) {
        throw DomainError("resonator_frequency_scaling: fractions must satisfy |x| < 0.1");
    }
    // The substrate dielectric constant dominates eps_eff, so the wavelength
    // scales as sqrt(1 + eps_fraction); a positive fractional contraction
    // shortens the resonator and raises the resonance.
    const double eps_factor = 1.0 / std::sqrt(1.0 + eps_fraction);
    const double len_factor = 1.0 / (1.0 - length_fraction);
    return {
        f0_hz * (eps_factor - 1.0),
        f0_hz * (len_factor - 1.0),
        f0_hz * (eps_factor * len_factor - 1.0),
    };
}

}  // namespace mwtrap::txline
