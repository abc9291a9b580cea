#include "mwtrap/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwtrap/constants.hpp"
#include "mwtrap/errors.hpp"
#include "mwtrap/levmar.hpp"

namespace mwtrap::fitting {

using constants::pi;

double FrequencyTrace::magnitude_db(std::size_t i) const { return to_db(s11[i]); }

void FrequencyTrace::validate() const {
    if (s11.size() != frequency_hz.size()) {
        throw DomainError("FrequencyTrace: frequency and value arrays differ in size");
    }
    for (std::size_t i = 1; i < frequency_hz.size(); ++i) {
        if (!(frequency_hz[i] > frequency_hz[i - 1])) {
            throw DomainError("FrequencyTrace: frequencies must be strictly increasing");
        }
    }
}

Phasor s11_device(double f_hz, double f_r_hz, double q_tot, double q_ext) {
    const Phasor j{0.0, 1.0};
    return 1.0 - (2.0 * q_tot / q_ext) / (1.0 - 2.0 * j * q_tot * (f_hz / f_r_hz - 1.0));
}

Phasor s11_model(double f_hz, const lumped::ResonatorParams& params,
                 const AffineBackground& affine) {
    if (!params.q_ext) {
        throw DomainError("s11_model: params.q_ext is required");
    }
    const double omega = 2.0 * pi * f_hz;
    return (affine.a + affine.b * omega) * s11_device(f_hz, params.f_r, params.q_tot,
                                                      *params.q_ext);
}

namespace {

S11Seeds auto_seed(const FrequencyTrace& trace) {
    const std::size_t n = trace.size();
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(trace.s11[i]);

    const std::size_t idx =
        std::size_t(std::min_element(mag.begin(), mag.end()) - mag.begin());
    if (idx == 0 || idx == n - 1) {
        throw DomainError("fit_s11: no interior magnitude minimum in the trace");
    }

    const double baseline = 0.5 * (mag.front() + mag.back());
    const double level = baseline * db_to_magnitude(-3.0);

    // -3 dB-equivalent width around the dip; falls back to a quarter
    // of the span for shallow resonances.
    double f_lo = trace.frequency_hz.front(), f_hi = trace.frequency_hz.back();
    bool found_lo = false, found_hi = false;
    for (std::size_t i = idx; i-- > 0;) {
        if (mag[i] >= level) {
            f_lo = trace.frequency_hz[i];
            found_lo = true;
            break;
        }
    }
    for (std::size_t i = idx + 1; i < n; ++i) {
        if (mag[i] >= level) {
            f_hi = trace.frequency_hz[i];
            found_hi = true;
            break;
        }
    }
    double width = f_hi - f_lo;
    if (!found_lo || !found_hi || !(width > 0.0)) {
        width = 0.25 * (trace.frequency_hz.back() - trace.frequency_hz.front());
    }

    S11Seeds s;
    s.f_r_hz = trace.frequency_hz[idx];
    s.q_tot = s.f_r_hz / width;
    const double depth = baseline > 0.0 ? mag[idx] / baseline : 0.0;
    s.q_ext = depth < 1.0 ? 2.0 * s.q_tot / (1.0 - depth) : 4.0 * s.q_tot;
    s.a = baseline;
    s.b = 0.0;
    return s;
}

}  // namespace

S11FitResult fit_s11(const FrequencyTrace& trace, const std::optional<S11Seeds>& seeds) {
    trace.validate();
    if (trace.size() < 16) {
        throw DomainError("fit_s11: at least 16 points are required");
    }

    const S11Seeds s = seeds ? *seeds : auto_seed(trace);
    const double omega_max = 2.0 * pi * trace.frequency_hz.back();
    const bool db = trace.kind == TraceKind::DbMagnitude;

    levmar::ResidualFn residuals = [&trace, db](std::span<const double> p) {
        lumped::ResonatorParams rp;
        rp.f_r = p[0];
        rp.q_tot = p[1];
        rp.q_ext = p[2];
        const AffineBackground affine{p[3], p[4]};
        std::vector<double> r;
        r.reserve(db ? trace.size() : 2 * trace.size());
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const Phasor model = s11_model(trace.frequency_hz[i], rp, affine);
            if (db) {
                r.push_back(to_db(model) - trace.magnitude_db(i));
            } else {
                r.push_back(model.real() - trace.s11[i].real());
                r.push_back(model.imag() - trace.s11[i].imag());
            }
        }
        return r;
    };

    const std::vector<double> initial{s.f_r_hz, s.q_tot, s.q_ext, s.a, s.b};
    const std::vector<double> scales{s.f_r_hz, std::max(s.q_tot, 1.0),
                                     std::max(s.q_ext, 1.0), std::max(std::abs(s.a), 0.1),
                                     1.0 / omega_max};

    const levmar::Result lm = levmar::fit(residuals, initial, scales);

    S11FitResult out;
    out.params.f_r = lm.params[0];
    out.params.q_tot = lm.params[1];
    out.params.q_ext = lm.params[2];
    out.affine = {lm.params[3], lm.params[4]};
    out.residual_rms = lm.rms;
    out.stderrs = lm.stderrs;
    out.iterations = lm.iterations;

    if (!(out.params.q_tot > 0.0) || !(out.params.f_r > 0.0)) {
        throw DomainError("fit_s11: fit converged to unphysical parameters");
    }
    if (out.params.q_tot > *out.params.q_ext) {
        throw DomainError("fit_s11: fitted q_ext below q_tot (inconsistent coupling)");
    }
    const double inv_int = 1.0 / out.params.q_tot - 1.0 / *out.params.q_ext;
    out.params.q_int = inv_int > 0.0 ? 1.0 / inv_int : constants::lossless_q;
    out.params.kappa = 2.0 * pi * out.params.f_r / out.params.q_tot;
    return out;
}

void FieldProfile::validate() const {
    if (b_par_t.size() != x_m.size()) {
        throw DomainError("FieldProfile: position and amplitude arrays differ in size");
    }
    if (!(power_watts > 0.0)) {
        throw DomainError("FieldProfile: input power must be positive");
    }
    for (double b : b_par_t) {
        if (b < 0.0 || !std::isfinite(b)) {
            throw DomainError("FieldProfile: amplitudes must be finite and non-negative");
        }
    }
}

ProfileFitResult fit_field_profile(const FieldProfile& profile) {
    profile.validate();
    const std::size_t n = profile.x_m.size();
    if (n < 5) {
        throw DomainError("fit_field_profile: at least 5 samples are required");
    }

    // Normalize to 1 W: field amplitudes scale as sqrt(P).
    const double norm = std::sqrt(1.0 / profile.power_watts);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = profile.b_par_t[i] * norm;

    const std::size_t idx = std::size_t(std::min_element(b.begin(), b.end()) - b.begin());
    if (idx == 0 || idx == n - 1) {
        throw DomainError("fit_field_profile: samples must span both sides of the minimum");
    }

    const double x0_seed = profile.x_m[idx];
    const double bmin_seed = b[idx];
    const double span = profile.x_m.back() - profile.x_m.front();
    const double b_max = *std::max_element(b.begin(), b.end());

    // Slope seed from the side reaching farther from the minimum.
    const bool use_right =
        std::abs(profile.x_m.back() - x0_seed) >= std::abs(profile.x_m.front() - x0_seed);
    const double x_far = use_right ? profile.x_m.back() : profile.x_m.front();
    const double b_far = use_right ? b.back() : b.front();
    const double g_seed = std::abs(b_far - bmin_seed) / std::max(std::abs(x_far - x0_seed), 1e-30);

    levmar::ResidualFn residuals = [&](std::span<const double> p) {
        const double g = p[0], x0 = p[1], bmin = p[2];
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = profile.x_m[i] - x0;
            r[i] = std::sqrt(bmin * bmin + g * g * dx * dx) - b[i];
        }
        return r;
    };

    const std::vector<double> initial{g_seed, x0_seed, bmin_seed};
    const std::vector<double> scales{std::max(g_seed, b_max / std::max(std::abs(span), 1e-30)),
                                     std::max(std::abs(x0_seed), std::abs(span) / 10.0),
                                     std::max(bmin_seed, b_max / 10.0)};

    const levmar::Result lm = levmar::fit(residuals, initial, scales);

    ProfileFitResult out;
    out.gradient_t_per_m = std::abs(lm.params[0]);  // sign-degenerate in the magnitude model
    out.x0_m = lm.params[1];
    out.b_min_t = std::abs(lm.params[2]);
    out.b_par_at_null_t = std::sqrt(out.b_min_t * out.b_min_t +
                                    out.gradient_t_per_m * out.gradient_t_per_m * out.x0_m *
                                        out.x0_m);
    out.residual_rms = lm.rms;
    out.stderrs = lm.stderrs;
    out.iterations = lm.iterations;
    return out;
}

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> samples) {
    const std::size_t n = samples.size();
    if (n < 2) {
        throw DomainError("fit_power_law: at least 2 samples are required");
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& [t, rate] : samples) {
        if (!(t > 0.0) || !(rate > 0.0)) {
            throw DomainError("fit_power_law: temperatures and rates must be positive");
        }
        sx += std::log(t);
        sy += std::log(rate);
    }
    const double mx = sx / double(n), my = sy / double(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [t, rate] : samples) {
        const double dx = std::log(t) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(rate) - my);
    }
    if (sxx == 0.0) {
        throw DomainError("fit_power_law: all temperatures are identical");
    }

    PowerLawFit out;
    out.beta = sxy / sxx;
    out.prefactor = std::exp(my - out.beta * mx);
    if (n > 2) {
        double ssr = 0.0;
        for (const auto& [t, rate] : samples) {
            const double resid = std::log(rate) - (my + out.beta * (std::log(t) - mx));
            ssr += resid * resid;
        }
        out.beta_stderr = std::sqrt(ssr / double(n - 2) / sxx);
    }
    return out;
}

double ResistivitySeries::rrr() const {
    if (entries.empty()) {
        throw DomainError("ResistivitySeries: empty series");
    }
    const auto [min_it, max_it] = std::minmax_element(
        entries.begin(), entries.end(),
        [](const auto& a, const auto& b) { return a.temperature_k < b.temperature_k; });
    return max_it->rho_ohm_m / min_it->rho_ohm_m;
}

ResistivitySeries resistivity_from_q(std::span<const std::pair<double, double>> q_series,
                                     double anchor_temperature_k, double anchor_rho_ohm_m) {
    if (q_series.empty()) {
        throw DomainError("resistivity_from_q: empty series");
    }
    if (!(anchor_rho_ohm_m > 0.0)) {
        throw DomainError("resistivity_from_q: anchor resistivity must be positive");
    }
    double q_anchor = 0.0;
    bool found = false;
    for (const auto& [t, q] : q_series) {
        if (!(q > 0.0)) {
            throw DomainError("resistivity_from_q: q_int values must be positive");
        }
        if (std::abs(t - anchor_temperature_k) <= 1e-9 * std::max(1.0, anchor_temperature_k)) {
            q_anchor = q;
            found = true;
        }
    }
    if (!found) {
        throw DomainError("resistivity_from_q: anchor temperature not present in the series");
    }

    ResistivitySeries out;
    out.anchor_temperature_k = anchor_temperature_k;
    out.anchor_rho_ohm_m = anchor_rho_ohm_m;
    out.entries.reserve(q_series.size());
    for (const auto& [t, q] : q_series) {
        out.entries.push_back({t, q, anchor_rho_ohm_m * q_anchor / q});
    }
    return out;
}

std::string to_string(ScalingModel model) {
    switch (model) {
        case ScalingModel::StoredEnergy: return "stored-energy";
        case ScalingModel::QTotRatio: return "qtot-ratio";
        case ScalingModel::SqrtQInt: return "sqrt-qint";
    }
    return "unknown";
}

std::vector<ScalingEntry> gradient_scaling_prediction(
    std::span<const std::pair<double, lumped::ResonatorParams>> params_by_temperature,
    ScalingModel model) {
    if (params_by_temperature.size() < 2) {
        throw DomainError("gradient_scaling_prediction: at least 2 entries are required");
    }

    auto metric = [model](const lumped::ResonatorParams& p) {
        switch (model) {
            case ScalingModel::StoredEnergy: {
                if (!p.q_ext) {
                    throw DomainError("gradient_scaling_prediction: q_ext required");
                }
                const Phasor s11 = 1.0 - 2.0 * p.q_tot / *p.q_ext;
                const double coupled = std::max(1.0 - std::norm(s11), 0.0);
                return std::sqrt(p.q_tot * coupled);
            }
            case ScalingModel::QTotRatio:
                return p.q_tot;
            case ScalingModel::SqrtQInt:
                if (!p.q_int) {
                    throw DomainError("gradient_scaling_prediction: q_int required");
                }
                return std::sqrt(*p.q_int);
        }
        return 0.0;
    };

    const auto warmest = std::max_element(
        params_by_temperature.begin(), params_by_temperature.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    const double reference = metric(warmest->second);
    if (!(reference > 0.0)) {
        throw DomainError("gradient_scaling_prediction: reference metric is not positive");
    }

    std::vector<ScalingEntry> out;
    out.reserve(params_by_temperature.size());
    for (const auto& [t, p] : params_by_temperature) {
        out.push_back({t, metric(p) / reference});
    }
    return out;
}

}  // namespace mwtrap::fitting
