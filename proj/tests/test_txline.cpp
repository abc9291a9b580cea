#include <doctest.h>

#include <cmath>
#include <random>

#include "mwtrap/constants.hpp"
#include "mwtrap/errors.hpp"
#include "mwtrap/txline.hpp"

using namespace mwtrap;
using namespace mwtrap::txline;
using constants::c0;
using constants::lossless_q;
using constants::pi;

TEST_SUITE_BEGIN("txline");

TEST_CASE("guided wavelength at the clock qubit frequency") {
    const double lambda = guided_wavelength(3.12e9, 5.5);
    CHECK(lambda == doctest::Approx(0.040971773592).epsilon(1e-9));
    // within 3 % of the quoted 4 cm
    CHECK(std::abs(lambda - 0.04) / 0.04 < 0.03);
}

TEST_CASE("guided wavelength vacuum identities") {
    CHECK(guided_wavelength(c0 / 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    const double f = 2.4e9;
    CHECK(guided_wavelength(f, 4.0) ==
          doctest::Approx(0.5 * guided_wavelength(f, 1.0)).epsilon(1e-15));
}

TEST_CASE("guided wavelength satisfies lambda*f*sqrt(eps) = c") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> log_f(6.0, 11.0), eps(1.0, 12.0);
    for (int i = 0; i < 200; ++i) {
        const double f = std::pow(10.0, log_f(rng));
        const double e = eps(rng);
        CHECK(guided_wavelength(f, e) * f * std::sqrt(e) == doctest::Approx(c0).epsilon(1e-14));
    }
}

TEST_CASE("guided wavelength domain errors") {
    CHECK_THROWS_AS(guided_wavelength(0.0, 2.0), DomainError);
    CHECK_THROWS_AS(guided_wavelength(-1e9, 2.0), DomainError);
    CHECK_THROWS_AS(guided_wavelength(1e9, 0.99), DomainError);
}

TEST_CASE("propagation constant lossless and lossy") {
    const Phasor g_lossless = propagation_constant(0.04, lossless_q);
    CHECK(g_lossless.real() == 0.0);
    CHECK(g_lossless.imag() == doctest::Approx(157.07963267949).epsilon(1e-12));

    const Phasor g10 = propagation_constant(0.04, 10.0);
    CHECK(g10.real() == doctest::Approx(7.853981633974).epsilon(1e-12));
    CHECK(g10.imag() == doctest::Approx(157.07963267949).epsilon(1e-12));

    // doubling the wavelength halves both components exactly
    const Phasor g_half = propagation_constant(0.08, 10.0);
    CHECK(g_half.real() == g10.real() / 2.0);
    CHECK(g_half.imag() == g10.imag() / 2.0);

    CHECK_THROWS_AS(propagation_constant(0.04, 0.0), DomainError);
    CHECK_THROWS_AS(propagation_constant(-0.04, 10.0), DomainError);
}

TEST_CASE("shorted stub current doubling and node") {
    const Phasor gamma = propagation_constant(0.04, lossless_q);
    const Phasor i0{0.7, 0.0};

    CHECK(shorted_stub_current(0.0, i0, gamma) == Phasor{1.4, 0.0});

    const Phasor node = shorted_stub_current(-0.01, i0, gamma);  // quarter wave from the short
    CHECK(std::abs(node) < 1e-14);
}

TEST_CASE("shorted stub currents at the ion-adjacent electrode positions") {
    const double lambda = 0.04;
    const Phasor gamma = propagation_constant(lambda, lossless_q);
    const Phasor i1 = shorted_stub_current(-0.019 * lambda, {1.0, 0.0}, gamma);
    const Phasor i2 = shorted_stub_current(-0.056 * lambda, {1.0, 0.0}, gamma);
    CHECK(i1.real() == doctest::Approx(1.9857650).epsilon(1e-6));
    CHECK(i2.real() == doctest::Approx(1.8774679).epsilon(1e-6));
    // lossless currents match the 2*cos(2*pi*u/lambda) form
    CHECK(i1.real() == doctest::Approx(2.0 * std::cos(2.0 * pi * 0.019)).epsilon(1e-15));
    CHECK(i2.real() == doctest::Approx(2.0 * std::cos(2.0 * pi * 0.056)).epsilon(1e-15));
}

TEST_CASE("lossless stub current is purely real along the line") {
    const double lambda = 0.04;
    const Phasor gamma = propagation_constant(lambda, lossless_q);
    for (int i = 0; i <= 100; ++i) {
        const double u = -0.4 * lambda * double(i) / 100.0;
        const Phasor cur = shorted_stub_current(u, {1.0, 0.0}, gamma);
        CHECK(cur.imag() == 0.0);
    }
}

TEST_CASE("lossy stub current phase grows monotonically toward the open end") {
    const double lambda = 0.04;
    const Phasor gamma = propagation_constant(lambda, 10.0);
    double previous = 0.0;
    for (int i = 1; i < 100; ++i) {
        const double u = -0.25 * lambda * double(i) / 100.0;
        const double a = std::arg(shorted_stub_current(u, {1.0, 0.0}, gamma));
        CHECK(a > previous);
        previous = a;
    }
}

TEST_CASE("open stub impedance singularities and landmarks") {
    const double lambda = 0.04;

    const StubImpedance at_zero = open_stub_impedance(0.0, lambda, 50.0);
    CHECK(at_zero.open_circuit);

    const StubImpedance quarter = open_stub_impedance(lambda / 4.0, lambda, 50.0);
    CHECK_FALSE(quarter.open_circuit);
    CHECK(std::abs(quarter.value) < 1e-12);

    // l = lambda/8 gives +j*z_c under the paper's sign convention
    const StubImpedance eighth = open_stub_impedance(lambda / 8.0, lambda, 50.0);
    CHECK(eighth.value.real() == doctest::Approx(0.0));
    CHECK(eighth.value.imag() == doctest::Approx(50.0).epsilon(1e-12));

    const StubImpedance textbook =
        open_stub_impedance(lambda / 8.0, lambda, 50.0, StubConvention::Textbook);
    CHECK(textbook.value.imag() == doctest::Approx(-50.0).epsilon(1e-12));

    CHECK_THROWS_AS(open_stub_impedance(-1e-3, lambda, 50.0), DomainError);
}

TEST_CASE("open stub impedance is periodic in lambda/2") {
    const double lambda = 0.04;
    for (double frac : {0.05, 0.1, 0.2, 0.35, 0.45}) {
        const auto z1 = open_stub_impedance(frac * lambda, lambda, 50.0);
        const auto z2 = open_stub_impedance(frac * lambda + lambda / 2.0, lambda, 50.0);
        REQUIRE_FALSE(z1.open_circuit);
        REQUIRE_FALSE(z2.open_circuit);
        CHECK(z2.value.imag() == doctest::Approx(z1.value.imag()).epsilon(1e-9));
    }
}

TEST_CASE("mismatch reflection of the damaged RF line") {
    const Phasor z_load = parallel_rc_load(200.0, 1.5e-12, 3.1e9);
    CHECK(z_load.real() == doctest::Approx(5.690728798).epsilon(1e-8));
    CHECK(z_load.imag() == doctest::Approx(-33.252990323).epsilon(1e-8));

    const double g2 = mismatch_reflection(50.0, z_load);
    CHECK(g2 == doctest::Approx(0.7294778672).epsilon(1e-8));
    CHECK(g2 > 0.68);
    CHECK(g2 < 0.76);
}

TEST_CASE("mismatch reflection limits") {
    CHECK(mismatch_reflection(50.0, Phasor{50.0, 0.0}) == 0.0);
    CHECK(mismatch_reflection(50.0, StubImpedance::open()) == 1.0);
    CHECK_THROWS_AS(mismatch_reflection(50.0, Phasor{-50.0, 0.0}), DomainError);
    CHECK_THROWS_AS(mismatch_reflection(0.0, Phasor{50.0, 0.0}), DomainError);
}

TEST_CASE("mismatch reflection of passive loads stays within [0, 1]") {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> re(0.0, 500.0), im(-500.0, 500.0);
    for (int i = 0; i < 500; ++i) {
        const Phasor z{re(rng), im(rng)};
        const double g2 = mismatch_reflection(50.0, z);
        CHECK(g2 >= 0.0);
        CHECK(g2 <= 1.0 + 1e-12);
        if (z != Phasor{50.0, 0.0}) CHECK(g2 > 0.0);
    }
}

TEST_CASE("resonator frequency scaling reproduces the cryogenic budget terms") {
    // -1.5 % dielectric change at ~3.1 GHz: the 23-25 MHz increase
    const auto d = resonator_frequency_scaling(3.1e9, -0.015, 0.0);
    CHECK(d.dielectric_hz > 23e6);
    CHECK(d.dielectric_hz < 25e6);
    CHECK(d.length_hz == 0.0);

    // 3e-3 contraction at ~3.0 GHz: about +9 MHz, at most 10 MHz
    const auto l = resonator_frequency_scaling(3.0e9, 0.0, 3e-3);
    CHECK(l.length_hz == doctest::Approx(9.03e6).epsilon(0.01));
    CHECK(l.length_hz <= 10e6);
    CHECK(l.dielectric_hz == 0.0);

    const auto zero = resonator_frequency_scaling(3.1e9, 0.0, 0.0);
    CHECK(zero.dielectric_hz == 0.0);
    CHECK(zero.length_hz == 0.0);
    CHECK(zero.combined_hz == 0.0);
}

TEST_CASE("resonator frequency scaling components are sign-definite") {
    for (double frac : {1e-3, 5e-3, 2e-2, 9e-2}) {
        CHECK(resonator_frequency_scaling(3e9, -frac, 0.0).dielectric_hz > 0.0);
        CHECK(resonator_frequency_scaling(3e9, frac, 0.0).dielectric_hz < 0.0);
        CHECK(resonator_frequency_scaling(3e9, 0.0, frac).length_hz > 0.0);
        CHECK(resonator_frequency_scaling(3e9, 0.0, -frac).length_hz < 0.0);
    }
}

TEST_CASE("resonator frequency scaling composes additively to first order") {
    const double f0 = 3.1e9;
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> frac(-1e-2, 1e-2);
    for (int i = 0; i < 200; ++i) {
        const double e = frac(rng), c = frac(rng);
        const auto s = resonator_frequency_scaling(f0, e, c);
        const double sum = s.dielectric_hz + s.length_hz;
        // the departure from additivity is second order in the fractions:
        // exactly d*l/f0 ~ f0*e*c/2, below 1e-3 of f0 for fractions under 1e-2
        CHECK(std::abs(s.combined_hz - sum) < 0.75 * f0 * std::abs(e * c) + 1e-6);
        CHECK(std::abs(s.combined_hz - sum) < 1e-3 * f0);
        CHECK(s.combined_hz - sum ==
              doctest::Approx(s.dielectric_hz * s.length_hz / f0).epsilon(1e-6));
    }
}

TEST_CASE("resonator frequency scaling rejects large fractions") {
    CHECK_THROWS_AS(resonator_frequency_scaling(3e9, 0.2, 0.0), DomainError);
    CHECK_THROWS_AS(resonator_frequency_scaling(3e9, 0.0, -0.15), DomainError);
}

TEST_CASE("line spec invariants") {
    const LineSpec line(60.0, 5.5);
    CHECK(line.is_lossless());
    CHECK(line.wavelength_at(3.12e9) == guided_wavelength(3.12e9, 5.5));
    CHECK(line.propagation_at(3.12e9).real() == 0.0);

    const LineSpec lossy(50.0, 5.5, 10.0);
    CHECK_FALSE(lossy.is_lossless());

    CHECK_THROWS_AS(LineSpec(0.0, 5.5), DomainError);
    CHECK_THROWS_AS(LineSpec(50.0, 0.5), DomainError);
    CHECK_THROWS_AS(LineSpec(50.0, 5.5, -1.0), DomainError);
}

TEST_SUITE_END();
