#include "mwtrap/cli.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mwtrap/constants.hpp"
#include "mwtrap/errors.hpp"
#include "mwtrap/fitting.hpp"
#include "mwtrap/io.hpp"
#include "mwtrap/lumped.hpp"
#include "mwtrap/report.hpp"
#include "mwtrap/txline.hpp"

namespace mwtrap::cli {

namespace {

using report::Json;

struct Context {
    Json report;
    std::string out_path;

    void add_input(const std::string& path) {
        report["inputs"][path] = report::file_digest(path);
    }

    void finish() const {
        const std::string text = report::dump(report);
        if (!out_path.empty()) {
            io::write_text_file(out_path, text);
        }
        std::cout << text;
    }
};

Json phasor_json(const Phasor& p) {
    return Json{{"re", p.real()}, {"im", p.imag()}};
}

// ---------------------------------------------------------------------------
// Config file support: a JSON object of long-option names (without dashes)
// whose values override command-line flags.

std::string value_to_arg(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
        return buf;
    }
    throw ParseError("config: unsupported value type");
}

std::vector<std::string> apply_config(CLI::App& app, const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        }
    }
    if (config_path.empty()) return args;
    if (args.empty()) return args;

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text_file(config_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config '" + config_path + "': " + e.what());
    }
    if (!j.is_object()) {
        throw ParseError("config '" + config_path + "': expected a JSON object");
    }

    CLI::App* sub = nullptr;
    for (const auto& a : args) {
        if (!a.empty() && a[0] != '-') {
            try {
                sub = app.get_subcommand(a);
            } catch (const CLI::OptionNotFound&) {
                sub = nullptr;
            }
            break;
        }
    }
    if (sub == nullptr) {
        throw ParseError("config: no subcommand to apply the config to");
    }

    std::vector<std::string> augmented = args;
    for (const auto& [key, value] : j.items()) {
        if (key == "schema_version") {
            if (!value.is_number_integer() || value.get<int>() != 1) {
                throw ParseError("config: unsupported schema_version");
            }
            continue;
        }
        try {
            sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw ParseError("config: unknown key '" + key + "'");
        }
        if (value.is_array()) {
            for (const auto& item : value) {
                augmented.push_back("--" + key);
                augmented.push_back(value_to_arg(item));
            }
        } else {
            augmented.push_back("--" + key);
            augmented.push_back(value_to_arg(value));
        }
    }
    return augmented;
}

// ---------------------------------------------------------------------------
// Shared option bundles

struct TwoWireFlags {
    double half_sep_um = 15.0;
    double height_um = 40.0;
    double u1_frac = -0.019;
    double u2_frac = -0.056;
    double q_tot = 0.0;  // 0 selects the lossless sentinel
    double freq_ghz = 3.12;
    double eps_eff = 5.5;
    double current_a = 1.0;

    void add_to(CLI::App* sub) {
        sub->add_option("--half-sep-um", half_sep_um, "Wire half-separation L (um)");
        sub->add_option("--height-um", height_um, "Ion height d above the wires (um)");
        sub->add_option("--u1-frac", u1_frac, "Electrode position u1 (fraction of lambda, <= 0)");
        sub->add_option("--u2-frac", u2_frac, "Electrode position u2 (fraction of lambda, <= 0)");
        sub->add_option("--q-tot", q_tot, "Resonator quality factor (0 = lossless)");
        sub->add_option("--freq-ghz", freq_ghz, "Drive frequency (GHz)");
        sub->add_option("--eps-eff", eps_eff, "Effective dielectric constant");
        sub->add_option("--current-a", current_a, "Drive current i(0) (A)");
    }

    fields::TwoWireModel model() const {
        fields::TwoWireModel m;
        m.half_separation = half_sep_um * 1e-6;
        m.ion_height = height_um * 1e-6;
        m.u1_frac = u1_frac;
        m.u2_frac = u2_frac;
        m.q_tot = q_tot == 0.0 ? constants::lossless_q : q_tot;
        m.wavelength = txline::guided_wavelength(freq_ghz * 1e9, eps_eff);
        m.drive_current = {current_a, 0.0};
        return m;
    }

    void echo(Json& params) const {
        params["half-sep-um"] = half_sep_um;
        params["height-um"] = height_um;
        params["u1-frac"] = u1_frac;
        params["u2-frac"] = u2_frac;
        params["q-tot"] = q_tot;
        params["freq-ghz"] = freq_ghz;
        params["eps-eff"] = eps_eff;
        params["current-a"] = current_a;
    }
};

struct CircuitFlags {
    double f0_ghz = 3.7;
    double z0_ohm = 60.0;
    double r_kohm = 1.4;
    double cc_ff = 400.0;
    double zfeed_ohm = 50.0;

    void add_to(CLI::App* sub) {
        sub->add_option("--f0-ghz", f0_ghz, "Unloaded resonance of the quarter-wave line (GHz)");
        sub->add_option("--z0-ohm", z0_ohm, "Characteristic impedance (ohm)");
        sub->add_option("--r-kohm", r_kohm, "Internal loss resistance (kOhm)");
        sub->add_option("--cc-ff", cc_ff, "Coupling capacitance (fF)");
        sub->add_option("--zfeed-ohm", zfeed_ohm, "Feedline impedance (ohm)");
    }

    lumped::LumpedResonator circuit() const {
        return lumped::LumpedResonator::from_quarter_wave(f0_ghz * 1e9, z0_ohm, r_kohm * 1e3,
                                                          cc_ff * 1e-15, zfeed_ohm);
    }

    void echo(Json& params) const {
        params["f0-ghz"] = f0_ghz;
        params["z0-ohm"] = z0_ohm;
        params["r-kohm"] = r_kohm;
        params["cc-ff"] = cc_ff;
        params["zfeed-ohm"] = zfeed_ohm;
    }
};

Json resonator_params_json(const lumped::ResonatorParams& p) {
    Json j;
    j["f_r_hz"] = p.f_r;
    j["kappa_rad_per_s"] = p.kappa;
    j["q_tot"] = p.q_tot;
    if (p.q_int) j["q_int"] = *p.q_int;
    if (p.q_ext) j["q_ext"] = *p.q_ext;
    return j;
}

fitting::FrequencyTrace load_trace(const std::string& path, const std::string& format) {
    std::string kind = format;
    if (kind == "auto") {
        const auto ext = std::filesystem::path(path).extension().string();
        kind = (ext == ".s1p" || ext == ".S1P") ? "s1p" : "csv";
    }
    if (kind == "s1p") return io::read_touchstone_s1p(path);
    if (kind == "csv") return io::read_s11_csv(path);
    throw DomainError("unknown trace format '" + format + "'");
}

std::pair<std::string, std::pair<double, double>> parse_vary(const std::string& spec) {
    const auto eq = spec.find('=');
    const auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos || colon < eq) {
        throw DomainError("--vary expects name=lo:hi, got '" + spec + "'");
    }
    const std::string name = spec.substr(0, eq);
    try {
        const double lo = std::stod(spec.substr(eq + 1, colon - eq - 1));
        const double hi = std::stod(spec.substr(colon + 1));
        return {name, {lo, hi}};
    } catch (const std::exception&) {
        throw DomainError("--vary expects numeric bounds, got '" + spec + "'");
    }
}

}  // namespace

DefaultLayout default_layout() {
    DefaultLayout d;
    d.model = fields::TwoWireModel::paper_defaults();

    const double l = d.model.half_separation;
    const double half_length = 0.5;  // m; long enough to look infinite from 40 um away
    d.layout.name = "two-wire-default";
    d.layout.power_watts = 1.0;
    // Wire 1 carries its current in -z, wire 2 in +z, matching the sign of the
    // analytic two-wire field.
    d.layout.segments = {
        {{-l, 0.0, half_length}, {-l, 0.0, -half_length}, d.model.current_1()},
        {{l, 0.0, -half_length}, {l, 0.0, half_length}, d.model.current_2()},
    };

    d.electrode_widths = {
        {"dielectric gap", 4.5, 5.2},   {"microwave electrode", 8.5, 7.8},
        {"rf electrode", 18.8, 18.4},   {"wide dc electrode", 85.5, 85.3},
        {"narrow dc electrode", 25.5, 25.0}, {"inner ground", 9.5, 8.8},
        {"outer ground", 5.5, 4.8},
    };
    return d;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("mwtrap");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Near-field microwave resonator modeling for surface-electrode ion traps"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::function<void(Context&)> action;
    std::string out_path;
    std::string config_path;
    long seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "Write the JSON report to this path");
        sub->add_option("--config", config_path, "JSON config overriding flags");
        sub->add_option("--seed", seed, "Seed for randomized trials (reserved; all current "
                                        "subcommands are deterministic)");
    };

    // -- wavelength ----------------------------------------------------------
    {
        auto* sub = app.add_subcommand("wavelength", "Guided wavelength on the resonator line");
        auto freq_ghz = std::make_shared<double>(3.12);
        auto eps_eff = std::make_shared<double>(5.5);
        sub->add_option("--freq-ghz", *freq_ghz, "Frequency (GHz)")->required();
        sub->add_option("--eps-eff", *eps_eff, "Effective dielectric constant")->required();
        add_common(sub);
        sub->callback([&action, freq_ghz, eps_eff] {
            action = [freq_ghz, eps_eff](Context& ctx) {
                ctx.report["params"]["freq-ghz"] = *freq_ghz;
                ctx.report["params"]["eps-eff"] = *eps_eff;
                ctx.report["results"]["wavelength_m"] =
                    txline::guided_wavelength(*freq_ghz * 1e9, *eps_eff);
            };
        });
    }

    // -- stub ----------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("stub", "Open-stub input impedance");
        auto length_mm = std::make_shared<double>(0.0);
        auto wavelength_mm = std::make_shared<double>(40.0);
        auto zc = std::make_shared<double>(50.0);
        auto convention = std::make_shared<std::string>("paper");
        sub->add_option("--length-mm", *length_mm, "Stub length (mm)")->required();
        sub->add_option("--wavelength-mm", *wavelength_mm, "Guided wavelength (mm)");
        sub->add_option("--zc-ohm", *zc, "Characteristic impedance (ohm)");
        sub->add_option("--convention", *convention, "Sign convention: paper | textbook")
            ->check(CLI::IsMember({"paper", "textbook"}));
        add_common(sub);
        sub->callback([&action, length_mm, wavelength_mm, zc, convention] {
            action = [length_mm, wavelength_mm, zc, convention](Context& ctx) {
                ctx.report["params"]["length-mm"] = *length_mm;
                ctx.report["params"]["wavelength-mm"] = *wavelength_mm;
                ctx.report["params"]["zc-ohm"] = *zc;
                ctx.report["params"]["convention"] = *convention;
                const auto z = txline::open_stub_impedance(
                    *length_mm * 1e-3, *wavelength_mm * 1e-3, *zc,
                    *convention == "paper" ? txline::StubConvention::Paper
                                           : txline::StubConvention::Textbook);
                ctx.report["results"]["open_circuit"] = z.open_circuit;
                if (!z.open_circuit) {
                    ctx.report["results"]["impedance_ohm"] = phasor_json(z.value);
                }
            };
        });
    }

    // -- mismatch --------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("mismatch", "Impedance-mismatch power reflection");
        auto zref = std::make_shared<double>(50.0);
        auto zrf = std::make_shared<double>(200.0);
        auto cpad_pf = std::make_shared<double>(1.5);
        auto freq_ghz = std::make_shared<double>(3.1);
        auto zload_re = std::make_shared<double>(NAN);
        auto zload_im = std::make_shared<double>(0.0);
        sub->add_option("--zref-ohm", *zref, "Reference impedance (ohm)");
        sub->add_option("--zrf-ohm", *zrf, "Parallel resistive load (ohm)");
        sub->add_option("--cpad-pf", *cpad_pf, "Parallel pad capacitance (pF)");
        sub->add_option("--freq-ghz", *freq_ghz, "Frequency (GHz)");
        sub->add_option("--zload-re", *zload_re, "Load impedance, real part (ohm; bypasses RC)");
        sub->add_option("--zload-im", *zload_im, "Load impedance, imaginary part (ohm)");
        add_common(sub);
        sub->callback([&action, zref, zrf, cpad_pf, freq_ghz, zload_re, zload_im] {
            action = [zref, zrf, cpad_pf, freq_ghz, zload_re, zload_im](Context& ctx) {
                Phasor zl;
                if (std::isnan(*zload_re)) {
                    zl = txline::parallel_rc_load(*zrf, *cpad_pf * 1e-12, *freq_ghz * 1e9);
                    ctx.report["params"]["zrf-ohm"] = *zrf;
                    ctx.report["params"]["cpad-pf"] = *cpad_pf;
                    ctx.report["params"]["freq-ghz"] = *freq_ghz;
                } else {
                    zl = {*zload_re, *zload_im};
                    ctx.report["params"]["zload-re"] = *zload_re;
                    ctx.report["params"]["zload-im"] = *zload_im;
                }
                ctx.report["params"]["zref-ohm"] = *zref;
                ctx.report["results"]["z_load_ohm"] = phasor_json(zl);
                ctx.report["results"]["gamma_squared"] = txline::mismatch_reflection(*zref, zl);
            };
        });
    }

    // -- eta -------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("eta", "Lamb-Dicke parameter from gradient and amplitude");
        auto grad = std::make_shared<double>(0.0);
        auto amp_ut = std::make_shared<double>(0.0);
        auto mass_amu = std::make_shared<double>(43.0);
        auto freq_mhz = std::make_shared<double>(5.5);
        sub->add_option("--grad", *grad, "Field gradient (T/m)")->required();
        sub->add_option("--amp-ut", *amp_ut, "Field amplitude (uT)")->required();
        sub->add_option("--mass-amu", *mass_amu, "Ion mass (amu)");
        sub->add_option("--freq-mhz", *freq_mhz, "Motional mode frequency (MHz)");
        add_common(sub);
        sub->callback([&action, grad, amp_ut, mass_amu, freq_mhz] {
            action = [grad, amp_ut, mass_amu, freq_mhz](Context& ctx) {
                ctx.report["params"]["grad"] = *grad;
                ctx.report["params"]["amp-ut"] = *amp_ut;
                ctx.report["params"]["mass-amu"] = *mass_amu;
                ctx.report["params"]["freq-mhz"] = *freq_mhz;
                const double mass = *mass_amu * constants::amu;
                const double f = *freq_mhz * 1e6;
                ctx.report["results"]["eta"] =
                    fields::lamb_dicke(*grad, *amp_ut * 1e-6, mass, f);
                ctx.report["results"]["q0_m"] =
                    std::sqrt(constants::hbar / (2.0 * mass * 2.0 * constants::pi * f));
            };
        });
    }

    // -- field-map ---------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("field-map", "Field map of a wire layout on a grid");
        auto layout_path = std::make_shared<std::string>();
        auto out_csv = std::make_shared<std::string>();
        auto x_min_um = std::make_shared<double>(-50.0);
        auto x_max_um = std::make_shared<double>(50.0);
        auto nx = std::make_shared<std::size_t>(101);
        auto y_min_um = std::make_shared<double>(40.0);
        auto y_max_um = std::make_shared<double>(40.0);
        auto ny = std::make_shared<std::size_t>(1);
        auto z_um = std::make_shared<double>(0.0);
        sub->add_option("--layout", *layout_path, "Wire layout JSON")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out-csv", *out_csv, "Output CSV path")->required();
        sub->add_option("--x-min-um", *x_min_um, "Grid x start (um)");
        sub->add_option("--x-max-um", *x_max_um, "Grid x end (um)");
        sub->add_option("--nx", *nx, "Grid points along x");
        sub->add_option("--y-min-um", *y_min_um, "Grid y start (um)");
        sub->add_option("--y-max-um", *y_max_um, "Grid y end (um)");
        sub->add_option("--ny", *ny, "Grid points along y (1 = transect)");
        sub->add_option("--z-um", *z_um, "Grid z position (um)");
        add_common(sub);
        sub->callback([&action, layout_path, out_csv, x_min_um, x_max_um, nx, y_min_um,
                       y_max_um, ny, z_um] {
            action = [=](Context& ctx) {
                ctx.add_input(*layout_path);
                const auto layout = io::read_layout_json(*layout_path);
                ctx.report["params"]["x-min-um"] = *x_min_um;
                ctx.report["params"]["x-max-um"] = *x_max_um;
                ctx.report["params"]["nx"] = *nx;
                ctx.report["params"]["y-min-um"] = *y_min_um;
                ctx.report["params"]["y-max-um"] = *y_max_um;
                ctx.report["params"]["ny"] = *ny;
                ctx.report["params"]["z-um"] = *z_um;
                const auto grid =
                    fields::grid_points(*x_min_um * 1e-6, *x_max_um * 1e-6, *nx,
                                        *y_min_um * 1e-6, *y_max_um * 1e-6, *ny, *z_um * 1e-6);
                const auto samples = fields::bfield_at(layout, grid);
                io::write_field_map_csv(*out_csv, samples);
                ctx.report["results"]["points"] = samples.size();
                ctx.report["results"]["csv"] = *out_csv;
            };
        });
    }

    // -- find-min ------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("find-min", "Locate the field minimum along x");
        auto two_wire = std::make_shared<TwoWireFlags>();
        auto layout_path = std::make_shared<std::string>();
        auto y_um = std::make_shared<double>(40.0);
        auto x_min_um = std::make_shared<double>(-5.0);
        auto x_max_um = std::make_shared<double>(10.0);
        auto emit_profile = std::make_shared<std::string>();
        auto profile_points = std::make_shared<std::size_t>(201);
        two_wire->add_to(sub);
        sub->add_option("--layout", *layout_path, "Wire layout JSON instead of the two-wire model")
            ->check(CLI::ExistingFile);
        sub->add_option("--y-um", *y_um, "Height of the search transect for layouts (um)");
        sub->add_option("--x-min-um", *x_min_um, "Search interval start (um)");
        sub->add_option("--x-max-um", *x_max_um, "Search interval end (um)");
        sub->add_option("--emit-profile", *emit_profile, "Write the |B_par(x)| profile CSV here");
        sub->add_option("--profile-points", *profile_points, "Samples in the emitted profile");
        add_common(sub);
        sub->callback([&action, two_wire, layout_path, y_um, x_min_um, x_max_um, emit_profile,
                       profile_points] {
            action = [=](Context& ctx) {
                std::function<Phasor(double)> field;
                if (layout_path->empty()) {
                    const auto model = two_wire->model();
                    two_wire->echo(ctx.report["params"]);
                    field = [model](double x) { return fields::two_wire_field(model, x); };
                } else {
                    ctx.add_input(*layout_path);
                    const auto layout = io::read_layout_json(*layout_path);
                    const double y = *y_um * 1e-6;
                    ctx.report["params"]["y-um"] = *y_um;
                    field = [layout, y](double x) {
                        const fields::Vec3 p{x, y, 0.0};
                        return fields::bfield_at(layout, std::span(&p, 1))[0].b_par();
                    };
                }
                ctx.report["params"]["x-min-um"] = *x_min_um;
                ctx.report["params"]["x-max-um"] = *x_max_um;
                const double lo = *x_min_um * 1e-6, hi = *x_max_um * 1e-6;
                const auto min = fields::find_field_minimum(
                    [&](double x) { return std::abs(field(x)); }, lo, hi);
                ctx.report["results"]["x0_m"] = min.x0;
                ctx.report["results"]["b_min_t"] = min.b_min;
                ctx.report["results"]["gradient_t_per_m"] =
                    std::abs(fields::field_gradient(field, min.x0));
                if (min.unimodal_warning) {
                    ctx.report["warnings"].push_back(
                        "field magnitude does not look unimodal on the search interval");
                }
                if (!emit_profile->empty()) {
                    fitting::FieldProfile profile;
                    profile.power_watts = 1.0;
                    const std::size_t n = std::max<std::size_t>(*profile_points, 2);
                    for (std::size_t i = 0; i < n; ++i) {
                        const double x = lo + (hi - lo) * double(i) / double(n - 1);
                        profile.x_m.push_back(x);
                        profile.b_par_t.push_back(std::abs(field(x)));
                    }
                    io::write_profile_csv(*emit_profile, profile);
                    ctx.report["results"]["profile_csv"] = *emit_profile;
                }
            };
        });
    }

    // -- optimize --------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("optimize", "Optimize two-wire geometry parameters");
        auto two_wire = std::make_shared<TwoWireFlags>();
        auto objective = std::make_shared<std::string>("max-gradient");
        auto vary = std::make_shared<std::vector<std::string>>();
        auto eval_x_um = std::make_shared<double>(0.0);
        two_wire->add_to(sub);
        sub->add_option("--objective", *objective, "max-gradient | min-amplitude | max-ratio")
            ->check(CLI::IsMember({"max-gradient", "min-amplitude", "max-ratio"}));
        sub->add_option("--vary", *vary,
                        "Free parameter as name=lo:hi (um for lengths); repeatable. Names: "
                        "half-sep-um, height-um, u1-frac, u2-frac, q-tot")
            ->required()
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        sub->add_option("--eval-x-um", *eval_x_um, "Objective evaluation point (um)");
        add_common(sub);
        sub->callback([&action, two_wire, objective, vary, eval_x_um] {
            action = [=](Context& ctx) {
                two_wire->echo(ctx.report["params"]);
                ctx.report["params"]["objective"] = *objective;
                ctx.report["params"]["eval-x-um"] = *eval_x_um;

                std::vector<std::string> names;
                std::vector<fields::ParameterBounds> bounds;
                Json vary_echo = Json::array();
                for (const auto& spec : *vary) {
                    auto [flag, range] = parse_vary(spec);
                    vary_echo.push_back(spec);
                    double scale = 1.0;
                    std::string field_name;
                    if (flag == "half-sep-um") { field_name = "half_separation"; scale = 1e-6; }
                    else if (flag == "height-um") { field_name = "ion_height"; scale = 1e-6; }
                    else if (flag == "u1-frac") field_name = "u1";
                    else if (flag == "u2-frac") field_name = "u2";
                    else if (flag == "q-tot") field_name = "q_tot";
                    else throw DomainError("optimize: unknown parameter '" + flag + "'");
                    names.push_back(field_name);
                    bounds.push_back({flag, range.first * scale, range.second * scale});
                }
                ctx.report["params"]["vary"] = vary_echo;

                const auto factory = fields::two_wire_parameter_factory(two_wire->model(), names);
                const auto obj = *objective == "max-gradient"
                                     ? fields::GeometryObjective::MaximizeGradient
                                 : *objective == "min-amplitude"
                                     ? fields::GeometryObjective::MinimizeAmplitude
                                     : fields::GeometryObjective::MaximizeGradientToAmplitude;
                const auto result =
                    fields::optimize_geometry(factory, obj, bounds, *eval_x_um * 1e-6);

                Json best = Json::object();
                for (std::size_t i = 0; i < bounds.size(); ++i) {
                    best[bounds[i].name] =
                        result.params[i] / (bounds[i].name.ends_with("-um") ? 1e-6 : 1.0);
                }
                ctx.report["results"]["best"] = best;
                ctx.report["results"]["objective_value"] = result.value;
                ctx.report["results"]["bound_limited"] = result.bound_limited;
                ctx.report["results"]["unbounded"] = result.unbounded;
                ctx.report["results"]["evaluations"] = result.trace.size();
                if (result.unbounded) {
                    ctx.report["warnings"].push_back(
                        "objective improves without bound; result is bound-limited");
                }
            };
        });
    }

    // -- lumped -----------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("lumped", "Loaded resonance and Q decomposition");
        auto circuit = std::make_shared<CircuitFlags>();
        circuit->add_to(sub);
        add_common(sub);
        sub->callback([&action, circuit] {
            action = [circuit](Context& ctx) {
                circuit->echo(ctx.report["params"]);
                const auto c = circuit->circuit();
                const auto params = lumped::quality_factor_decomposition(c);
                ctx.report["results"]["l_h"] = c.l_ind;
                ctx.report["results"]["c_f"] = c.c_cap;
                ctx.report["results"]["resonance"] = resonator_params_json(params);
                ctx.report["results"]["harmonic_residual"] = params.harmonic_residual();
            };
        });
    }

    // -- shift-report --------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("shift-report",
                                       "Temperature-driven frequency-shift budget");
        auto circuit = std::make_shared<CircuitFlags>();
        auto eps_fraction = std::make_shared<double>(-0.015);
        auto r_factor = std::make_shared<double>(5.0);
        auto contraction = std::make_shared<double>(3e-3);
        auto f_room_ghz = std::make_shared<double>(3.16);
        circuit->add_to(sub);
        sub->add_option("--eps-fraction", *eps_fraction,
                        "Relative change of the substrate dielectric constant");
        sub->add_option("--r-factor", *r_factor, "Internal resistance multiplier");
        sub->add_option("--contraction", *contraction, "Fractional length contraction");
        sub->add_option("--f-room-ghz", *f_room_ghz,
                        "Measured room-temperature resonance (GHz)");
        add_common(sub);
        sub->callback([&action, circuit, eps_fraction, r_factor, contraction, f_room_ghz] {
            action = [=](Context& ctx) {
                circuit->echo(ctx.report["params"]);
                ctx.report["params"]["eps-fraction"] = *eps_fraction;
                ctx.report["params"]["r-factor"] = *r_factor;
                ctx.report["params"]["contraction"] = *contraction;
                ctx.report["params"]["f-room-ghz"] = *f_room_ghz;
                const auto shift = lumped::frequency_shift_report(
                    circuit->circuit(), *eps_fraction, *r_factor, *contraction,
                    *f_room_ghz * 1e9);
                ctx.report["results"]["dielectric_hz"] = shift.dielectric_hz;
                ctx.report["results"]["coupling_hz"] = shift.coupling_hz;
                ctx.report["results"]["resistance_hz"] = shift.resistance_hz;
                ctx.report["results"]["contraction_hz"] = shift.contraction_hz;
                ctx.report["results"]["total_hz"] = shift.total_hz;
                ctx.report["results"]["base"] = resonator_params_json(shift.base);
            };
        });
    }

    // -- fit-s11 -----------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("fit-s11", "Fit a reflection trace");
        auto input = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("auto");
        auto temp_k = std::make_shared<double>(NAN);
        sub->add_option("--input", *input, "Touchstone .s1p or CSV freq_hz,s11_db")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--format", *format, "auto | s1p | csv")
            ->check(CLI::IsMember({"auto", "s1p", "csv"}));
        sub->add_option("--temp-k", *temp_k, "Temperature label (K)");
        add_common(sub);
        sub->callback([&action, input, format, temp_k] {
            action = [=](Context& ctx) {
                ctx.add_input(*input);
                ctx.report["params"]["input"] = *input;
                ctx.report["params"]["format"] = *format;
                auto trace = load_trace(*input, *format);
                if (!std::isnan(*temp_k)) {
                    trace.temperature_k = *temp_k;
                    ctx.report["params"]["temp-k"] = *temp_k;
                }
                const auto fit = fitting::fit_s11(trace);
                ctx.report["results"]["resonance"] = resonator_params_json(fit.params);
                ctx.report["results"]["affine_a"] = fit.affine.a;
                ctx.report["results"]["affine_b_per_rad_s"] = fit.affine.b;
                ctx.report["results"]["residual_rms"] = fit.residual_rms;
                ctx.report["results"]["stderr"] =
                    Json{{"f_r_hz", fit.stderrs[0]}, {"q_tot", fit.stderrs[1]},
                         {"q_ext", fit.stderrs[2]}, {"a", fit.stderrs[3]},
                         {"b_per_rad_s", fit.stderrs[4]}};
                ctx.report["results"]["iterations"] = fit.iterations;
            };
        });
    }

    // -- fit-profile --------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("fit-profile", "Fit an ion-measured field profile");
        auto input = std::make_shared<std::string>();
        sub->add_option("--input", *input, "CSV x_um,bpar_uT,power_w")
            ->required()
            ->check(CLI::ExistingFile);
        add_common(sub);
        sub->callback([&action, input] {
            action = [input](Context& ctx) {
                ctx.add_input(*input);
                ctx.report["params"]["input"] = *input;
                const auto fit = fitting::fit_field_profile(io::read_profile_csv(*input));
                ctx.report["results"]["gradient_t_per_m"] = fit.gradient_t_per_m;
                ctx.report["results"]["x0_m"] = fit.x0_m;
                ctx.report["results"]["b_min_t"] = fit.b_min_t;
                ctx.report["results"]["b_par_at_null_t"] = fit.b_par_at_null_t;
                ctx.report["results"]["phi_rad"] = nullptr;
                ctx.report["warnings"].push_back(
                    "phi is not identifiable from magnitude-only profiles; its effect is "
                    "absorbed into b_min");
                ctx.report["results"]["residual_rms"] = fit.residual_rms;
                ctx.report["results"]["stderr"] =
                    Json{{"gradient_t_per_m", fit.stderrs[0]}, {"x0_m", fit.stderrs[1]},
                         {"b_min_t", fit.stderrs[2]}};
                ctx.report["results"]["iterations"] = fit.iterations;
            };
        });
    }

    // -- fit-heating --------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("fit-heating", "Heating-rate power-law exponent");
        auto input = std::make_shared<std::string>();
        sub->add_option("--input", *input, "CSV temp_k,rate_q_per_s")
            ->required()
            ->check(CLI::ExistingFile);
        add_common(sub);
        sub->callback([&action, input] {
            action = [input](Context& ctx) {
                ctx.add_input(*input);
                ctx.report["params"]["input"] = *input;
                const auto samples = io::read_heating_csv(*input);
                const auto fit = fitting::fit_power_law(samples);
                ctx.report["results"]["beta"] = fit.beta;
                ctx.report["results"]["prefactor"] = fit.prefactor;
                ctx.report["results"]["beta_stderr"] = fit.beta_stderr;
            };
        });
    }

    // -- resistivity -----------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("resistivity", "Resistivity series from Q_int");
        auto input = std::make_shared<std::string>();
        auto anchor_t = std::make_shared<double>(300.0);
        auto anchor_rho = std::make_shared<double>(22.0);
        sub->add_option("--input", *input, "CSV temp_k,q_int")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--anchor-t-k", *anchor_t, "Anchor temperature (K)");
        sub->add_option("--anchor-rho-nohm-m", *anchor_rho, "Anchor resistivity (nOhm.m)");
        add_common(sub);
        sub->callback([&action, input, anchor_t, anchor_rho] {
            action = [=](Context& ctx) {
                ctx.add_input(*input);
                ctx.report["params"]["input"] = *input;
                ctx.report["params"]["anchor-t-k"] = *anchor_t;
                ctx.report["params"]["anchor-rho-nohm-m"] = *anchor_rho;
                const auto series = fitting::resistivity_from_q(io::read_qint_csv(*input),
                                                                *anchor_t, *anchor_rho * 1e-9);
                Json entries = Json::array();
                for (const auto& e : series.entries) {
                    entries.push_back(Json{{"temp_k", e.temperature_k},
                                           {"q_int", e.q_int},
                                           {"rho_nohm_m", e.rho_ohm_m * 1e9}});
                }
                ctx.report["results"]["entries"] = entries;
                ctx.report["results"]["rrr"] = series.rrr();
            };
        });
    }

    // -- gradient-scaling ---------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("gradient-scaling",
                                       "Predicted field ratios vs the warmest entry");
        auto input = std::make_shared<std::string>();
        auto model = std::make_shared<std::string>("all");
        sub->add_option("--input", *input, "CSV temp_k,q_tot,q_ext,q_int")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--model", *model, "all | stored-energy | qtot-ratio | sqrt-qint")
            ->check(CLI::IsMember({"all", "stored-energy", "qtot-ratio", "sqrt-qint"}));
        add_common(sub);
        sub->callback([&action, input, model] {
            action = [=](Context& ctx) {
                ctx.add_input(*input);
                ctx.report["params"]["input"] = *input;
                ctx.report["params"]["model"] = *model;
                const auto params = io::read_params_csv(*input);
                std::vector<fitting::ScalingModel> models;
                if (*model == "all") {
                    models = {fitting::ScalingModel::StoredEnergy,
                              fitting::ScalingModel::QTotRatio,
                              fitting::ScalingModel::SqrtQInt};
                } else if (*model == "stored-energy") {
                    models = {fitting::ScalingModel::StoredEnergy};
                } else if (*model == "qtot-ratio") {
                    models = {fitting::ScalingModel::QTotRatio};
                } else {
                    models = {fitting::ScalingModel::SqrtQInt};
                }
                Json out = Json::object();
                for (const auto m : models) {
                    Json list = Json::array();
                    for (const auto& e : fitting::gradient_scaling_prediction(params, m)) {
                        list.push_back(Json{{"temp_k", e.temperature_k}, {"ratio", e.ratio}});
                    }
                    out[fitting::to_string(m)] = list;
                }
                ctx.report["results"]["models"] = out;
            };
        });
    }

    // -- default-layout ---------------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("default-layout",
                                       "Paper-default two-wire model and electrode widths");
        auto out_layout = std::make_shared<std::string>();
        sub->add_option("--out-layout", *out_layout, "Write the wire layout JSON here");
        add_common(sub);
        sub->callback([&action, out_layout] {
            action = [out_layout](Context& ctx) {
                const auto d = default_layout();
                ctx.report["results"]["half_separation_m"] = d.model.half_separation;
                ctx.report["results"]["ion_height_m"] = d.model.ion_height;
                ctx.report["results"]["u1_frac"] = d.model.u1_frac;
                ctx.report["results"]["u2_frac"] = d.model.u2_frac;
                ctx.report["results"]["wavelength_m"] = d.model.wavelength;
                ctx.report["results"]["lossless"] = std::isinf(d.model.q_tot);
                Json widths = Json::array();
                for (const auto& w : d.electrode_widths) {
                    widths.push_back(Json{{"electrode", w.name},
                                          {"design_um", w.design_um},
                                          {"measured_um", w.measured_um}});
                }
                ctx.report["results"]["electrode_widths"] = widths;
                if (!out_layout->empty()) {
                    io::write_layout_json(*out_layout, d.layout);
                    ctx.report["results"]["layout_json"] = *out_layout;
                }
            };
        });
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config(app, args);
        std::vector<const char*> cargs;
        cargs.push_back("mwtrap");
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());

        Context ctx;
        ctx.report = report::make_report(app.get_subcommands().front()->get_name());
        ctx.out_path = out_path;
        action(ctx);
        ctx.finish();
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mwtrap::cli
