#include <doctest.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mwtrap/cli.hpp"
#include "mwtrap/fitting.hpp"
#include "mwtrap/io.hpp"
#include "mwtrap/txline.hpp"
#include "trials.hpp"

using namespace mwtrap;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int rc;
    std::string out;
    std::string err;
    json report;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int rc = cli::run(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    CliResult r{rc, out.str(), err.str(), json()};
    if (rc == 0 && !r.out.empty() && r.out.front() == '{') {
        r.report = json::parse(r.out);
    }
    return r;
}

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "mwtrap_cli_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("eta subcommand reproduces the measured Lamb-Dicke parameter") {
    const auto r = run_cli({"eta", "--grad", "39.4", "--amp-ut", "223.4", "--mass-amu", "43",
                            "--freq-mhz", "5.5"});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["eta"].get<double>() == doctest::Approx(8.15e-4).epsilon(1e-2));
}

TEST_CASE("wavelength subcommand") {
    const auto r = run_cli({"wavelength", "--freq-ghz", "3.12", "--eps-eff", "5.5"});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["wavelength_m"].get<double>() ==
          doctest::Approx(0.0410).epsilon(3e-3));
}

TEST_CASE("identical inputs produce byte-identical reports") {
    const auto p1 = temp_dir() / "w1.json";
    const auto p2 = temp_dir() / "w2.json";
    for (const auto& p : {p1, p2}) {
        const auto r = run_cli({"wavelength", "--freq-ghz", "3.12", "--eps-eff", "5.5", "--out",
                                p.string()});
        REQUIRE(r.rc == 0);
    }
    CHECK(io::read_text_file(p1) == io::read_text_file(p2));
}

TEST_CASE("mismatch subcommand defaults to the damaged RF line") {
    const auto r = run_cli({"mismatch"});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["gamma_squared"].get<double>() ==
          doctest::Approx(0.7295).epsilon(1e-3));
}

TEST_CASE("stub subcommand reports the open-circuit sentinel") {
    const auto open = run_cli({"stub", "--length-mm", "0"});
    REQUIRE(open.rc == 0);
    CHECK(open.report["results"]["open_circuit"].get<bool>());

    const auto eighth = run_cli({"stub", "--length-mm", "5", "--wavelength-mm", "40",
                                 "--zc-ohm", "50"});
    REQUIRE(eighth.rc == 0);
    CHECK(eighth.report["results"]["impedance_ohm"]["im"].get<double>() ==
          doctest::Approx(50.0).epsilon(1e-9));

    const auto textbook = run_cli({"stub", "--length-mm", "5", "--wavelength-mm", "40",
                                   "--zc-ohm", "50", "--convention", "textbook"});
    REQUIRE(textbook.rc == 0);
    CHECK(textbook.report["results"]["impedance_ohm"]["im"].get<double>() ==
          doctest::Approx(-50.0).epsilon(1e-9));
}

TEST_CASE("lumped subcommand solves the paper circuit") {
    const auto r = run_cli({"lumped"});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["resonance"]["f_r_hz"].get<double>() ==
          doctest::Approx(2.8518e9).epsilon(1e-4));
    CHECK(r.report["results"]["resonance"]["q_int"].get<double>() ==
          doctest::Approx(18.32).epsilon(1e-3));
}

TEST_CASE("shift-report subcommand emits the four components") {
    const auto r = run_cli({"shift-report"});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["dielectric_hz"].get<double>() ==
          doctest::Approx(23.97e6).epsilon(1e-3));
    CHECK(r.report["results"]["coupling_hz"].get<double>() ==
          doctest::Approx(8.28e6).epsilon(1e-2));
    CHECK(r.report["results"]["resistance_hz"].get<double>() ==
          doctest::Approx(11.08e6).epsilon(1e-2));
    CHECK(r.report["results"]["total_hz"].get<double>() ==
          doctest::Approx(52.8e6).epsilon(1e-2));
}

TEST_CASE("fit-s11 subcommand reads touchstone fixtures") {
    const auto fixture = temp_dir() / "trace.s1p";
    const auto trace = trials::make_s11_trace(trials::Truth{}, 0.0, 1);
    io::write_touchstone_s1p(fixture, trace, io::TouchstoneFormat::DB);

    const auto r = run_cli({"fit-s11", "--input", fixture.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["resonance"]["q_tot"].get<double>() ==
          doctest::Approx(8.0).epsilon(1e-4));
    CHECK(r.report["results"]["resonance"]["f_r_hz"].get<double>() ==
          doctest::Approx(2.9e9).epsilon(1e-6));
    CHECK(r.report["inputs"].size() == 1);
}

TEST_CASE("fit-profile subcommand") {
    const auto fixture = temp_dir() / "profile.csv";
    io::write_profile_csv(fixture, trials::make_profile(trials::ProfileTruth{}, 0.0, 3));
    const auto r = run_cli({"fit-profile", "--input", fixture.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["gradient_t_per_m"].get<double>() ==
          doctest::Approx(39.4).epsilon(1e-6));
    CHECK(r.report["results"]["x0_m"].get<double>() == doctest::Approx(3e-6).epsilon(1e-6));
}

TEST_CASE("fit-heating subcommand on the measured single-ion rates") {
    const auto fixture = temp_dir() / "heating.csv";
    io::write_text_file(fixture.string(), "temp_k,rate_q_per_s\n300,350\n77,230\n21,200\n");
    const auto r = run_cli({"fit-heating", "--input", fixture.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["beta"].get<double>() == doctest::Approx(0.211).epsilon(1e-2));
}

TEST_CASE("resistivity subcommand") {
    const auto fixture = temp_dir() / "qint.csv";
    io::write_text_file(fixture.string(),
                        "temp_k,q_int\n300,8\n80,13.538461538461538\n20,27.076923076923077\n");
    const auto r = run_cli({"resistivity", "--input", fixture.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["entries"][1]["rho_nohm_m"].get<double>() ==
          doctest::Approx(13.0).epsilon(1e-9));
    CHECK(r.report["results"]["rrr"].get<double>() ==
          doctest::Approx(22.0 / 6.5).epsilon(1e-9));
}

TEST_CASE("gradient-scaling subcommand reports models side by side") {
    const auto fixture = temp_dir() / "params.csv";
    io::write_text_file(fixture.string(),
                        "temp_k,q_tot,q_ext,q_int\n"
                        "300,5.44,17,8\n"
                        "80,7.5365239294710324,17,13.538461538461538\n"
                        "20,10.44328097731239,17,27.076923076923077\n");
    const auto r = run_cli({"gradient-scaling", "--input", fixture.string(), "--model", "all"});
    REQUIRE(r.rc == 0);
    const auto& models = r.report["results"]["models"];
    REQUIRE(models.contains("stored-energy"));
    REQUIRE(models.contains("qtot-ratio"));
    REQUIRE(models.contains("sqrt-qint"));
    CHECK(models["qtot-ratio"][1]["ratio"].get<double>() ==
          doctest::Approx(1.3854).epsilon(1e-3));
    CHECK(models["qtot-ratio"][2]["ratio"].get<double>() ==
          doctest::Approx(1.9197).epsilon(1e-3));
}

TEST_CASE("find-min subcommand locates the two-wire null and emits a profile") {
    const auto profile_csv = temp_dir() / "scan_profile.csv";
    const auto r = run_cli({"find-min", "--emit-profile", profile_csv.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["x0_m"].get<double>() == doctest::Approx(1.708e-6).epsilon(1e-3));

    // the emitted profile round-trips through the ingestion parser
    const auto profile = io::read_profile_csv(profile_csv);
    CHECK(profile.x_m.size() == 201);
    CHECK(profile.power_watts == 1.0);
}

TEST_CASE("default-layout and field-map work together") {
    const auto layout_json = temp_dir() / "layout.json";
    const auto d = run_cli({"default-layout", "--out-layout", layout_json.string()});
    REQUIRE(d.rc == 0);
    CHECK(d.report["results"]["half_separation_m"].get<double>() == 15e-6);
    CHECK(d.report["results"]["ion_height_m"].get<double>() == 40e-6);
    CHECK(d.report["results"]["wavelength_m"].get<double>() ==
          doctest::Approx(txline::guided_wavelength(3.12e9, 5.5)).epsilon(1e-12));
    bool found_microwave = false;
    for (const auto& w : d.report["results"]["electrode_widths"]) {
        if (w["electrode"] == "microwave electrode") {
            found_microwave = true;
            CHECK(w["design_um"].get<double>() == 8.5);
            CHECK(w["measured_um"].get<double>() == 7.8);
        }
    }
    CHECK(found_microwave);

    const auto map_csv = temp_dir() / "map.csv";
    const auto m = run_cli({"field-map", "--layout", layout_json.string(), "--out-csv",
                            map_csv.string(), "--x-min-um", "-5", "--x-max-um", "10", "--nx",
                            "16", "--y-min-um", "40", "--y-max-um", "40", "--ny", "1"});
    REQUIRE(m.rc == 0);
    CHECK(m.report["results"]["points"].get<int>() == 16);
    const auto samples = io::read_field_map_csv(map_csv);
    REQUIRE(samples.size() == 16);
    CHECK(samples[0].position.x == doctest::Approx(-5e-6));
    CHECK(samples[15].position.x == doctest::Approx(10e-6));
}

TEST_CASE("optimize subcommand pushes the height to its lower bound") {
    const auto r = run_cli({"optimize", "--objective", "max-gradient", "--vary",
                            "height-um=20:80"});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["best"]["height-um"].get<double>() ==
          doctest::Approx(20.0).epsilon(1e-3));
    CHECK(r.report["results"]["bound_limited"].get<bool>());
}

TEST_CASE("find-min works on a wire layout along a transect") {
    const auto layout_json = temp_dir() / "findmin_layout.json";
    REQUIRE(run_cli({"default-layout", "--out-layout", layout_json.string()}).rc == 0);
    const auto r = run_cli({"find-min", "--layout", layout_json.string(), "--y-um", "40",
                            "--x-min-um", "-5", "--x-max-um", "10"});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["x0_m"].get<double>() == doctest::Approx(1.708e-6).epsilon(1e-3));
}

TEST_CASE("lumped circuit can be specified entirely through a config file") {
    const auto config = temp_dir() / "circuit.json";
    io::write_text_file(config.string(),
                        R"({"f0-ghz": 3.7, "z0-ohm": 60, "r-kohm": 1.4, "cc-ff": 400,)"
                        R"( "zfeed-ohm": 50})");
    const auto r = run_cli({"lumped", "--config", config.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["resonance"]["f_r_hz"].get<double>() ==
          doctest::Approx(2.8518e9).epsilon(1e-4));
}

TEST_CASE("fit-profile reports phi as unidentifiable") {
    const auto fixture = temp_dir() / "profile_phi.csv";
    io::write_profile_csv(fixture, trials::make_profile(trials::ProfileTruth{}, 0.0, 3));
    const auto r = run_cli({"fit-profile", "--input", fixture.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["results"]["phi_rad"].is_null());
    CHECK_FALSE(r.report["warnings"].empty());
}

TEST_CASE("config file overrides command-line flags") {
    const auto config = temp_dir() / "config.json";
    io::write_text_file(config.string(), R"({"schema_version": 1, "freq-ghz": 6.24})");
    const auto r = run_cli({"wavelength", "--freq-ghz", "3.12", "--eps-eff", "5.5", "--config",
                            config.string()});
    REQUIRE(r.rc == 0);
    CHECK(r.report["params"]["freq-ghz"].get<double>() == 6.24);
    CHECK(r.report["results"]["wavelength_m"].get<double>() ==
          doctest::Approx(txline::guided_wavelength(6.24e9, 5.5)).epsilon(1e-12));

    io::write_text_file(config.string(), R"({"nonsense-key": 1})");
    const auto bad = run_cli({"wavelength", "--freq-ghz", "3.12", "--eps-eff", "5.5",
                              "--config", config.string()});
    CHECK(bad.rc == 2);
    CHECK(bad.err.find("nonsense-key") != std::string::npos);
}

TEST_CASE("exit codes distinguish domain, parse, and usage errors") {
    CHECK(run_cli({"no-such-command"}).rc == 2);
    CHECK(run_cli({"wavelength", "--freq-ghz", "-1", "--eps-eff", "5.5"}).rc == 1);
    CHECK(run_cli({"fit-heating", "--input", (temp_dir() / "nope.csv").string()}).rc == 2);

    const auto bad_csv = temp_dir() / "bad.csv";
    io::write_text_file(bad_csv.string(), "temp_k,rate_q_per_s\n300,oops\n");
    const auto r = run_cli({"fit-heating", "--input", bad_csv.string()});
    CHECK(r.rc == 2);
    CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_SUITE_END();
