#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mwtrap/lumped.hpp"
#include "mwtrap/phasor.hpp"

namespace mwtrap::fitting {

enum class TraceKind { Complex, DbMagnitude };

/// Sampled reflection vs frequency (one S11 measurement record). The s11
/// phasors always carry the magnitude; for dB-magnitude sources the phase is
/// zero and fits run on 20*log10|s11|.
struct FrequencyTrace {
    TraceKind kind = TraceKind::Complex;
    std::vector<double> frequency_hz;
    std::vector<Phasor> s11;
    std::optional<double> temperature_k;

    std::size_t size() const { return frequency_hz.size(); }
    double magnitude_db(std::size_t i) const;

    /// Checks strictly increasing frequencies and matching array sizes.
    void validate() const;
};

/// Multiplicative background (A + B*omega) absorbing cabling imperfections.
struct AffineBackground {
    double a = 1.0;
    double b = 0.0;  // per (rad/s)
};

/// Device reflection 1 - (2*q_tot/q_ext) / (1 - 2j*q_tot*(omega/omega_r - 1)).
Phasor s11_device(double f_hz, double f_r_hz, double q_tot, double q_ext);

/// Full measured model (A + B*omega) * s11_device.
Phasor s11_model(double f_hz, const lumped::ResonatorParams& params,
                 const AffineBackground& affine);

struct S11FitResult {
    lumped::ResonatorParams params;  // q_int filled from the harmonic identity
    AffineBackground affine;
    double residual_rms = 0.0;
    std::vector<double> stderrs;  // order: f_r, q_tot, q_ext, A, B
    int iterations = 0;
};

struct S11Seeds {
    double f_r_hz;
    double q_tot;
    double q_ext;
    double a = 1.0;
    double b = 0.0;
};

/// Levenberg-Marquardt fit of (f_r, q_tot, q_ext, A, B). Auto-seeding places
/// f_r at the magnitude minimum (which must be interior), q_tot from the
/// -3 dB-equivalent width, A from the off-resonance level, and B = 0.
/// Magnitude-only (dB) traces cannot distinguish under- from over-coupling;
/// the under-coupled branch is reported.
S11FitResult fit_s11(const FrequencyTrace& trace,
                     const std::optional<S11Seeds>& seeds = std::nullopt);

/// Ion-measured |B_par| vs transverse position at a given input power.
struct FieldProfile {
    std::vector<double> x_m;
    std::vector<double> b_par_t;
    double power_watts = 1.0;
    std::optional<double> temperature_k;

    void validate() const;
};

/// Fit of |B_par(x)|^2 = b_min^2 + g^2 (x - x0)^2 after normalizing amplitudes
/// to 1 W by the sqrt(P) law. x0 is defined as the minimum location, which
/// makes the linear cross term vanish; the phase between amplitude and
/// gradient is not identifiable from magnitude data and is not reported.
struct ProfileFitResult {
    double gradient_t_per_m = 0.0;
    double x0_m = 0.0;
    double b_min_t = 0.0;
    double b_par_at_null_t = 0.0;  // model magnitude at x = 0, the RF null
    double residual_rms = 0.0;
    std::vector<double> stderrs;  // order: gradient, x0, b_min
    int iterations = 0;
};

ProfileFitResult fit_field_profile(const FieldProfile& profile);

struct PowerLawFit {
    double beta = 0.0;
    double prefactor = 0.0;  // rate at T = 1 in the input temperature unit
    double beta_stderr = 0.0;
};

/// Ordinary least squares of ln(rate) against ln(T): rate = prefactor * T^beta.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> samples);

struct ResistivityPoint {
    double temperature_k;
    double q_int;
    double rho_ohm_m;
};

struct ResistivitySeries {
    std::vector<ResistivityPoint> entries;
    double anchor_temperature_k;
    double anchor_rho_ohm_m;

    /// Residual resistivity ratio: rho at the warmest over rho at the coldest entry.
    double rrr() const;
};

/// rho(T) = anchor_rho * q_int(anchor)/q_int(T), from Q_int proportional to
/// 1/rho anchored at the bulk room-temperature resistivity.
ResistivitySeries resistivity_from_q(std::span<const std::pair<double, double>> q_series,
                                     double anchor_temperature_k = 300.0,
                                     double anchor_rho_ohm_m = 22e-9);

/// Candidate models linking resonator parameters to the achievable field.
enum class ScalingModel {
    StoredEnergy,  // B ~ sqrt(q_tot * (1 - |S11_dev(omega_r)|^2))
    QTotRatio,     // B ~ q_tot
    SqrtQInt,      // B ~ sqrt(q_int)
};

std::string to_string(ScalingModel model);

struct ScalingEntry {
    double temperature_k;
    double ratio;  // predicted field ratio relative to the warmest entry
};

/// Field-amplitude ratios vs the warmest entry under the chosen model.
/// StoredEnergy and QTotRatio need q_ext set on every entry; SqrtQInt needs q_int.
std::vector<ScalingEntry> gradient_scaling_prediction(
    std::span<const std::pair<double, lumped::ResonatorParams>> params_by_temperature,
    ScalingModel model = ScalingModel::StoredEnergy);

}  // namespace mwtrap::fitting
