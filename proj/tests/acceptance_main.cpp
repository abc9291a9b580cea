// Acceptance suite: prints one PASS/FAIL line per criterion and exits with
// the number of failures.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mwtrap/cli.hpp"
#include "mwtrap/constants.hpp"
#include "mwtrap/fields.hpp"
#include "mwtrap/fitting.hpp"
#include "mwtrap/lumped.hpp"
#include "mwtrap/txline.hpp"
#include "oracles.hpp"
#include "trials.hpp"

using namespace mwtrap;
using constants::pi;

namespace {

int failures = 0;

void report(int index, bool ok, const std::string& text) {
    std::printf("%s [%2d] %s\n", ok ? "PASS" : "FAIL", index, text.c_str());
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

lumped::LumpedResonator paper_circuit() {
    return lumped::LumpedResonator::from_quarter_wave(3.7e9, 60.0, 1.4e3, 400e-15, 50.0);
}

// 1. Guided wavelength at the clock qubit frequency.
void criterion_1() {
    const double lambda = txline::guided_wavelength(3.12e9, 5.5);
    const bool ok = std::abs(lambda - 0.04) / 0.04 <= 0.03;
    report(1, ok, fmt("guided wavelength: 3.12 GHz, eps_eff 5.5 -> %.4f cm (4 cm +- 3%%)",
                      lambda * 100.0));
}

// 2. Power reflection of the mismatched RF line.
void criterion_2() {
    const Phasor z_load = txline::parallel_rc_load(200.0, 1.5e-12, 3.1e9);
    const double g2 = txline::mismatch_reflection(50.0, z_load);
    const bool ok = g2 >= 0.68 && g2 <= 0.76;
    report(2, ok, fmt("mismatch reflection: 200 ohm || 1.5 pF at 3.1 GHz -> |Gamma|^2 = %.4f "
                      "(in [0.68, 0.76])",
                      g2));
}

// 3. Lamb-Dicke parameter from the measured and simulated field tables.
void criterion_3() {
    const double mass = 43.0 * constants::amu;
    const double eta_measured = fields::lamb_dicke(39.4, 223.4e-6, mass, 5.5e6);
    const double eta_design = fields::lamb_dicke(72.0, 108e-6, mass, 5.5e6);
    const bool ok = eta_measured >= 7.5e-4 && eta_measured <= 8.7e-4 && eta_design >= 2.8e-3 &&
                    eta_design <= 3.4e-3;
    report(3, ok, fmt("lamb-dicke: measured %.3e (in [7.5, 8.7]e-4), simulated %.3e "
                      "(in [2.8, 3.4]e-3)",
                      eta_measured, eta_design));
}

// 4. Heating-rate power-law exponent for the single-ion data.
void criterion_4() {
    const std::pair<double, double> data[] = {{300.0, 350.0}, {77.0, 230.0}, {21.0, 200.0}};
    const auto fit = fitting::fit_power_law(data);
    const bool ok = std::abs(fit.beta - 0.21) <= 0.05;
    report(4, ok, fmt("heating exponent: beta = %.4f (0.21 +- 0.05)", fit.beta));
}

// 5. Frequency-shift budget of the published circuit, with the pole finder
//    checked against the grid-search oracle at 10 kHz resolution.
void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto circuit = paper_circuit();
    const auto shift = lumped::frequency_shift_report(circuit, -0.015, 5.0, 3e-3, 3.16e9);
    const double solve_seconds = seconds_since(t0);

    const double df = 10e3;
    const auto zero = oracles::complex_zero_grid_search(circuit, 2e9, 4e9, df);
    const double oracle_gap = std::abs(shift.base.f_r - zero.real() / (2.0 * pi));

    const bool components_ok = std::abs(shift.coupling_hz) >= 5e6 &&
                               std::abs(shift.coupling_hz) <= 11e6 &&
                               shift.resistance_hz >= 7e6 && shift.resistance_hz <= 15e6 &&
                               shift.dielectric_hz >= 22e6 && shift.dielectric_hz <= 28e6 &&
                               shift.contraction_hz <= 10e6 && shift.total_hz >= 39e6 &&
                               shift.total_hz <= 69e6;
    const bool ok = components_ok && oracle_gap <= df && solve_seconds < 1.0;
    report(5, ok,
           fmt("shift budget (MHz): C_c %.1f (8+-3), R %.1f (11+-4), dielectric %.1f (25+-3), "
               "contraction %.1f (<=10), total %.1f (54+-15); oracle gap %.1f kHz (<=10), "
               "%.2f s",
               shift.coupling_hz / 1e6, shift.resistance_hz / 1e6, shift.dielectric_hz / 1e6,
               shift.contraction_hz / 1e6, shift.total_hz / 1e6, oracle_gap / 1e3,
               solve_seconds));
}

// 6. Loaded resonance of the published circuit.
void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto params = lumped::loaded_resonance(paper_circuit());
    const double solve_seconds = seconds_since(t0);
    const auto zero = oracles::complex_zero_grid_search(paper_circuit(), 2e9, 4e9, 10e3);
    const double oracle_gap = std::abs(params.f_r - zero.real() / (2.0 * pi));
    const bool ok = params.f_r >= 2.75e9 && params.f_r <= 2.95e9 && oracle_gap <= 10e3 &&
                    solve_seconds < 1.0;
    report(6, ok, fmt("loaded resonance: f_r = %.4f GHz (in [2.75, 2.95]), oracle gap %.1f kHz, "
                      "%.3f s",
                      params.f_r / 1e9, oracle_gap / 1e3, solve_seconds));
}

// 7. Two-wire null shift: a true displaced null when lossless, a broadened
//    minimum at the same location at Q = 10.
void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto lossless = fields::TwoWireModel::paper_defaults();
    auto lossy = lossless;
    lossy.q_tot = 10.0;

    const auto mag = fields::two_wire_magnitude(lossless);
    double peak = 0.0;
    for (double x = -5e-6; x <= 10e-6; x += 1e-9) peak = std::max(peak, mag(x));

    const auto scan_ll =
        oracles::scan_minimum(mag, -5e-6, 10e-6, 1e-9);
    const double x_null = oracles::bisect_root(
        [&](double x) { return fields::two_wire_field(lossless, x).real(); }, scan_ll.x - 2e-9,
        scan_ll.x + 2e-9);
    const double null_depth = mag(x_null);

    const auto scan_lossy =
        oracles::scan_minimum(fields::two_wire_magnitude(lossy), -5e-6, 10e-6, 1e-9);
    const double shift = std::abs(scan_lossy.x - x_null);
    const double elapsed = seconds_since(t0);

    const bool ok = x_null > 0.0 && std::abs(x_null - 1.7e-6) < 0.1e-6 &&
                    null_depth < 1e-12 * peak && scan_lossy.value > 0.0 && shift < 0.3e-6 &&
                    elapsed < 1.0;
    report(7, ok,
           fmt("two-wire null: x0 = %.4f um (≈1.7), |B(x0)|/peak = %.1e (<1e-12); Q=10 min "
               "%.2e T at shift %.3f um (<0.3), %.2f s",
               x_null * 1e6, null_depth / peak, scan_lossy.value, shift * 1e6, elapsed));
}

// 8. Generator -> fit roundtrips for the S11 and profile fits.
void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();

    const auto s11_clean = fitting::fit_s11(trials::make_s11_trace(trials::Truth{}, 0.0, 1));
    const double s11_exact =
        std::max({std::abs(s11_clean.params.f_r / 2.9e9 - 1.0),
                  std::abs(s11_clean.params.q_tot / 8.0 - 1.0),
                  std::abs(*s11_clean.params.q_ext / 17.0 - 1.0)});

    const auto prof_clean =
        fitting::fit_field_profile(trials::make_profile(trials::ProfileTruth{}, 0.0, 1));
    const double prof_exact = std::max({std::abs(prof_clean.gradient_t_per_m / 39.4 - 1.0),
                                        std::abs(prof_clean.x0_m / 3e-6 - 1.0),
                                        std::abs(prof_clean.b_min_t / 150e-6 - 1.0)});

    const auto s11_stats = trials::run_s11_trials(200, 0.005);
    const auto prof_stats = trials::run_profile_trials(200, 0.01);
    const double elapsed = seconds_since(t0);

    const bool ok = s11_exact < 1e-6 && prof_exact < 1e-6 && s11_stats.worst_param_rel < 0.03 &&
                    s11_stats.worst_affine_rel < 0.05 && prof_stats.worst_param_rel < 0.03 &&
                    s11_stats.all_within_3sigma >= 190 && prof_stats.all_within_3sigma >= 190 &&
                    elapsed < 30.0;
    report(8, ok,
           fmt("fit roundtrips: noiseless %.1e / %.1e (<1e-6); 200-trial worst %.2f%% / %.2f%% "
               "(<3%%), affine %.2f%% (<5%%); 3-sigma %d / %d of 200 (>=190); %.1f s (<30)",
               s11_exact, prof_exact, 100.0 * s11_stats.worst_param_rel,
               100.0 * prof_stats.worst_param_rel, 100.0 * s11_stats.worst_affine_rel,
               s11_stats.all_within_3sigma, prof_stats.all_within_3sigma, elapsed));
}

// 9. Resistivity chain and the gradient-scaling prediction.
void criterion_9() {
    const std::pair<double, double> q_series[] = {
        {300.0, 8.0}, {80.0, 8.0 * 22.0 / 13.0}, {20.0, 8.0 * 22.0 / 6.5}};
    const auto rho = fitting::resistivity_from_q(q_series, 300.0, 22e-9);
    const bool rho_ok = std::abs(rho.entries[1].rho_ohm_m - 13e-9) < 1e-20 &&
                        std::abs(rho.entries[2].rho_ohm_m - 6.5e-9) < 1e-20;

    std::vector<std::pair<double, lumped::ResonatorParams>> series;
    for (const auto& [t, qi] : q_series) {
        lumped::ResonatorParams p;
        p.q_int = qi;
        p.q_ext = 17.0;
        p.q_tot = 1.0 / (1.0 / qi + 1.0 / 17.0);
        p.f_r = 3.0e9;
        p.kappa = 2.0 * pi * p.f_r / p.q_tot;
        series.emplace_back(t, p);
    }
    bool monotone = true;
    std::string comparison;
    for (const auto model : {fitting::ScalingModel::StoredEnergy,
                             fitting::ScalingModel::QTotRatio,
                             fitting::ScalingModel::SqrtQInt}) {
        const auto r = fitting::gradient_scaling_prediction(series, model);
        monotone = monotone && r[1].ratio > r[0].ratio && r[2].ratio > r[1].ratio;
        comparison += fmt("%s %.2f/%.2f ", fitting::to_string(model).c_str(), r[1].ratio,
                          r[2].ratio);
    }
    const bool ok = rho_ok && monotone;
    report(9, ok,
           fmt("resistivity chain: rho = 22/13/6.5 nOhm.m exact; model ratios vs paper "
               "1.45/1.95: %s(model choice reported, not gated)",
               comparison.c_str()));
}

// 10. Biot-Savart engine: limits, symmetry, linearity, and throughput.
void criterion_10() {
    const double r = 1e-3;
    fields::WireLayout wire;
    wire.name = "limit";
    wire.segments = {{{0, 0, -1e4 * r}, {0, 0, 1e4 * r}, {1.0, 0.0}}};
    const fields::Vec3 probe{r, 0.0, 0.0};
    const double b = std::abs(fields::bfield_at(wire, std::span(&probe, 1))[0].b.y);
    const double limit_err = std::abs(b / (constants::mu0 / (2.0 * pi * r)) - 1.0);

    auto sym_model = fields::TwoWireModel::paper_defaults();
    sym_model.u2_frac = sym_model.u1_frac;
    fields::WireLayout sym;
    sym.name = "sym";
    sym.segments = {{{-15e-6, 0, 0.5}, {-15e-6, 0, -0.5}, sym_model.current_1()},
                    {{15e-6, 0, -0.5}, {15e-6, 0, 0.5}, sym_model.current_2()}};
    const fields::Vec3 center{0.0, 40e-6, 0.0};
    const double null_bpar = std::abs(fields::bfield_at(sym, std::span(&center, 1))[0].b_par());

    const fields::Vec3 off{3e-6, 40e-6, 0.0};
    const auto base = fields::bfield_at(sym, std::span(&off, 1))[0].b;
    auto scaled = sym;
    const Phasor alpha{2.0, -1.0};
    for (auto& s : scaled.segments) s.current *= alpha;
    const auto big = fields::bfield_at(scaled, std::span(&off, 1))[0].b;
    const double lin_err = std::abs(big.x - alpha * base.x) / std::abs(big.x);

    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = fields::grid_points(-50e-6, 50e-6, 1000, 20e-6, 120e-6, 1000, 0.0);
    const auto samples = fields::bfield_at(sym, grid);
    const double map_seconds = seconds_since(t0);

    const bool ok = limit_err < 1e-7 && null_bpar <= 1e-12 * std::abs(base.x) &&
                    lin_err < 1e-13 && samples.size() == 1000000 && map_seconds < 5.0;
    report(10, ok,
           fmt("biot-savart: infinite-wire err %.1e (<1e-7), symmetry null %.1e, linearity err "
               "%.1e, 1e6-point map %.2f s (<5)",
               limit_err, null_bpar, lin_err, map_seconds));
}

}  // namespace

int main() {
    std::printf("acceptance criteria\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures;
}
