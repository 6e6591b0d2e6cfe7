#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "superatom/spectra.hpp"

using namespace superatom;
using spectra::ProbeCondition;
namespace fz = oracle::frozen;

TEST_SUITE("spectra") {

TEST_CASE("resonant values match the frozen reference") {
    const auto p = reference_defaults();
    CHECK(spectra::transmission(p, ProbeCondition::co_swept(0.0)) == doctest::Approx(fz::transmission_eit_0).epsilon(1e-12));
    CHECK(spectra::transmission(p, ProbeCondition::blocked(0.0)) ==
          doctest::Approx(fz::transmission_blocked_0).epsilon(1e-12));
    const auto rg = spectra::reflection_amplitude(p, ProbeCondition::co_swept(0.0));
    const auto rr = spectra::reflection_amplitude(p, ProbeCondition::blocked(0.0));
    CHECK(rg.real() == doctest::Approx(fz::refl_amplitude_g).epsilon(1e-12));
    CHECK(rr.real() == doctest::Approx(fz::refl_amplitude_r).epsilon(1e-12));
    CHECK(std::abs(rg.imag()) < 1e-12);
    CHECK(spectra::reflection(p, ProbeCondition::co_swept(0.0)).reflectivity ==
          doctest::Approx(fz::reflectivity_g).epsilon(1e-12));
}

TEST_CASE("closed form agrees with the independent oracle off resonance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-60.0, 60.0);
    const auto p = reference_defaults();
    const auto c = oracle::reference_cavity();
    for (int i = 0; i < 200; ++i) {
        const double d = u(rng);
        CHECK(spectra::transmission(p, ProbeCondition::co_swept(d)) ==
              doctest::Approx(oracle::transmission(c, d, c.omega_c)).epsilon(1e-11));
        const auto r = spectra::reflection_amplitude(p, ProbeCondition::blocked(d));
        const auto ro = oracle::reflection(c, d, 0.0);
        CHECK(std::abs(r - ro) < 1e-12);
    }
}

TEST_CASE("properties: symmetry, passivity, phase flip") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        auto p = reference_defaults();
        p.g = oracle::two_pi * (1.0 + 20.0 * u(rng));
        p.kappa = oracle::two_pi * (0.5 + 5.0 * u(rng));
        p.kappa0 = p.kappa * u(rng);
        p.gamma = oracle::two_pi * (0.5 + 5.0 * u(rng));
        p.omega_c = oracle::two_pi * 30.0 * u(rng);
        const double d = oracle::two_pi * 40.0 * (u(rng) - 0.5);
        for (bool blocked : {false, true}) {
            auto at = [&](double x) { return blocked ? ProbeCondition::blocked(x) : ProbeCondition::co_swept(x); };
            CHECK(spectra::transmission(p, at(d)) == doctest::Approx(spectra::transmission(p, at(-d))).epsilon(1e-10));
            CHECK(spectra::transmission(p, at(d)) <= 1.0 + 1e-12);
            CHECK(spectra::reflection(p, at(d)).reflectivity <= 1.0 + 1e-12);
        }
    }
    // Overcoupled blocked cavity versus undercoupled EIT cavity: reflection
    // amplitudes on resonance are real with opposite signs.
    const auto p = reference_defaults();
    const double dphi = spectra::reflection(p, ProbeCondition::co_swept(0.0)).phase -
                        spectra::reflection(p, ProbeCondition::blocked(0.0)).phase;
    CHECK(std::abs(std::abs(spectra::wrap_phase(dphi)) - oracle::two_pi / 2.0) < 1e-9);
}

TEST_CASE("limits") {
    auto p = reference_defaults();
    p.g = 0.0;
    // Empty cavity: Lorentzian of half width kappa.
    CHECK(spectra::transmission(p, ProbeCondition::co_swept(p.kappa)) == doctest::Approx(0.5));
    p = reference_defaults();
    p.gamma_r = 0.0;
    CHECK(spectra::transmission(p, ProbeCondition::co_swept(0.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(spectra::wrap_phase(3.0 * oracle::two_pi / 2.0) == doctest::Approx(oracle::two_pi / 2.0));
    CHECK(spectra::wrap_phase(5.0) == doctest::Approx(5.0 - oracle::two_pi));
    CHECK(spectra::wrap_phase(-oracle::two_pi / 2.0) == doctest::Approx(oracle::two_pi / 2.0));
}

TEST_CASE("sweep and peak finding") {
    const auto p = reference_defaults();
    const std::vector<double> grid{3.0, -1.0, 0.0, 2.0};
    const auto table = spectra::sweep(p, grid, false);
    REQUIRE(table.size() == 4);
    CHECK(table.front().delta == -1.0);
    CHECK(table.back().delta == 3.0);
    CHECK_THROWS_AS(spectra::sweep(p, std::vector<double>{}, true), std::invalid_argument);

    const auto wide = spectra::sweep(p, spectra::linear_grid(-100.0, 100.0, 2001), false);
    const auto peaks = spectra::transmission_peaks(wide);
    REQUIRE(peaks.size() == 3);  // two polaritons and the EIT window
    CHECK(wide[peaks[1]].delta == doctest::Approx(0.0));
}

TEST_CASE("polariton lifetime from the EIT half width") {
    const auto lt = spectra::polariton_lifetime(reference_defaults());
    CHECK(lt.hwhm == doctest::Approx(fz::eit_hwhm).epsilon(1e-9));
    CHECK(lt.tau_p == doctest::Approx(fz::tau_p).epsilon(1e-9));
    CHECK(lt.saturation_flux == doctest::Approx(1.0 / (2.0 * fz::tau_p)));
    const auto p = reference_defaults();
    CHECK(spectra::transmission(p, ProbeCondition::co_swept(lt.hwhm)) == doctest::Approx(0.5 * lt.peak_transmission));

    auto off = reference_defaults();
    off.omega_c = 0.0;
    CHECK_THROWS_AS(spectra::polariton_lifetime(off), spectra::NoEitPeak);
}

}
