#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "superatom/fitting.hpp"
#include "superatom/spectra.hpp"

using namespace superatom;
using fitting::TracePoint;

namespace {

std::vector<TracePoint> rabi_trace(double omega, double tau, double amp, double off, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    std::vector<TracePoint> pts;
    for (int i = 0; i <= 30; ++i) {
        const double t = 0.1 * i;
        const double y = off + amp * 0.5 * (1.0 - std::cos(omega * t) * std::exp(-t * t / (tau * tau)));
        pts.push_back({t, y + (sigma > 0.0 ? n(rng) : 0.0), sigma > 0.0 ? sigma : 0.01});
    }
    return pts;
}

}  // namespace

TEST_SUITE("fitting") {

TEST_CASE("Rabi fit recovers a noiseless trace") {
    const auto fit = fitting::fit_rabi(rabi_trace(oracle::two_pi * 1.5, 2.8, 0.9, 0.05, 0.0, 1));
    CHECK(fit.converged);
    CHECK(fit.value("omega") == doctest::Approx(oracle::two_pi * 1.5).epsilon(1e-5));
    CHECK(fit.value("tau_d") == doctest::Approx(2.8).epsilon(1e-4));
    CHECK(fit.value("amplitude") == doctest::Approx(0.9).epsilon(1e-5));
    CHECK(fit.objective < 1e-6);
    CHECK(fit.gradient_norm <= fit.gradient_tolerance);
    CHECK_THROWS_AS(fit["nope"], std::out_of_range);
}

TEST_CASE("Rabi fit rejects signal-free data") {
    std::vector<TracePoint> flat;
    for (int i = 0; i < 20; ++i) flat.push_back({0.1 * i, 0.5, 0.1});
    CHECK_THROWS_AS(fitting::fit_rabi(flat), fitting::DegenerateData);
}

TEST_CASE("errors scale with the noise and bootstrap is seeded") {
    const auto pts = rabi_trace(oracle::two_pi * 1.5, 2.8, 0.9, 0.05, 0.03, 7);
    fitting::FitOptions opt;
    opt.bootstrap_resamples = 40;
    opt.bootstrap_seed = 99;
    const auto a = fitting::fit_rabi(pts, opt);
    const auto b = fitting::fit_rabi(pts, opt);
    CHECK(a.error("omega") > 0.0);
    CHECK(a["omega"].bootstrap_error > 0.0);
    CHECK(a["omega"].bootstrap_error == b["omega"].bootstrap_error);
    CHECK(a["omega"].bootstrap_error == doctest::Approx(a.error("omega")).epsilon(0.6));
    CHECK(fitting::default_bootstrap_resamples == 200);
}

TEST_CASE("lifetime fits") {
    std::vector<TracePoint> surv, rec;
    for (int i = 0; i <= 30; ++i) {
        const double t = 4.0 * i;
        surv.push_back({t, 0.8 * std::exp(-t / 42.0), 0.01});
        rec.push_back({t, 0.05 + 0.6 * (1.0 - std::exp(-t / 42.0)), 0.01});
    }
    const auto s = fitting::fit_lifetime(surv, fitting::LifetimeModel::survival);
    CHECK(s.value("tau_r") == doctest::Approx(42.0).epsilon(1e-4));
    CHECK(s["floor"].fixed);
    const auto r = fitting::fit_lifetime(rec, fitting::LifetimeModel::recovery);
    CHECK(r.value("tau_r") == doctest::Approx(42.0).epsilon(1e-4));
    CHECK(r.value("floor") == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("count histogram fit and bound handling") {
    // Expected counts of a large sample: the maximum sits at the truth.
    fitting::CountHistogram hist;
    const double phi_r = 0.045 * 0.725;
    for (int n = 0; n < 40; ++n) {
        const double p = oracle::count_mixture(n, 12.0, 0.725, phi_r, 42.0, 0.8);
        hist[n] = static_cast<std::size_t>(std::llround(1e6 * p));
    }
    const auto fit = fitting::fit_count_histogram(hist, 12.0, 0.725, 42.0);
    CHECK(fit.converged);
    CHECK(fit.value("phi_r") == doctest::Approx(phi_r).epsilon(0.01));
    CHECK(fit.value("eta_r") == doctest::Approx(0.8).epsilon(0.005));

    fitting::CountHistogram tiny{{0, 10}, {3, 20}};
    CHECK_THROWS_AS(fitting::fit_count_histogram(tiny, 12.0, 0.725, 42.0), std::invalid_argument);

    // Perfect preparation: eta_r sits on its upper bound with a one-sided error.
    fitting::CountHistogram pure;
    for (int n = 0; n < 40; ++n)
        pure[n] = static_cast<std::size_t>(std::llround(1e6 * oracle::count_rydberg(n, 12.0, 0.725, phi_r, 42.0)));
    const auto r = fitting::fit_count_histogram(pure, 12.0, 0.725, 42.0);
    CHECK(r["eta_r"].at_bound);
    CHECK(r["eta_r"].error_upper == 0.0);
    CHECK(r["eta_r"].error_lower > 0.0);
    CHECK(std::isfinite(r["eta_r"].error_lower));

    // Ground-only counts leave phi_r unidentifiable; the fit must say so.
    fitting::CountHistogram ground;
    for (int n = 0; n < 30; ++n)
        ground[n] = static_cast<std::size_t>(std::llround(1e5 * oracle::count_ground(n, 12.0, 0.725)));
    const auto g = fitting::fit_count_histogram(ground, 12.0, 0.725, 42.0);
    CHECK(g.value("eta_r") < 1e-3);
    CHECK_FALSE(g.warnings.empty());
}

TEST_CASE("quadrature histogram fit") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> jump(1.0 / 38.0);
    const double ag = -std::sqrt(2.0 * 0.58 * 0.07 / 10.0), ar = std::sqrt(2.0 * 0.58 * 0.51 / 10.0);
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i) {
        double mean = 10.0 * ag;
        if (u(rng) < 0.9) {
            const double tj = std::min(jump(rng), 10.0);
            mean = ag * (10.0 - tj) + ar * tj;
        }
        xs.push_back(mean + noise(rng));
    }
    const auto fit = fitting::fit_quadrature_histogram(xs, 10.0, 0.58, 0.07, 38.0);
    CHECK(fit.converged);
    CHECK(std::abs(fit.value("refl_r") - 0.51) < 3.0 * fit.error("refl_r"));
    CHECK(std::abs(fit.value("eta_r") - 0.9) < 3.0 * fit.error("eta_r"));

    const auto edges = fitting::freedman_diaconis_edges(xs);
    CHECK(edges.front() == doctest::Approx(*std::min_element(xs.begin(), xs.end())));
    CHECK(edges.back() == doctest::Approx(*std::max_element(xs.begin(), xs.end())));
    for (std::size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);
}

TEST_CASE("spectrum fit recovers coupling and control from transmission") {
    auto truth = reference_defaults();
    truth.g = oracle::two_pi * 9.0;
    truth.omega_c = oracle::two_pi * 11.0;
    std::vector<TracePoint> pts;
    for (double d : spectra::linear_grid(-oracle::two_pi * 20.0, oracle::two_pi * 20.0, 161))
        pts.push_back({d, spectra::transmission(truth, spectra::ProbeCondition::co_swept(d)), 0.005});
    const std::vector<std::string> free{"g", "omega_c"};
    const auto fit = fitting::fit_spectrum(pts, fitting::SpectrumMode::transmission, free, reference_defaults());
    CHECK(fit.converged);
    CHECK(fit.value("g") == doctest::Approx(truth.g).epsilon(1e-5));
    CHECK(fit.value("omega_c") == doctest::Approx(truth.omega_c).epsilon(1e-5));
    CHECK(fit.parameters.size() == 2);

    const std::vector<std::string> bogus{"zeta"};
    CHECK_THROWS(fitting::fit_spectrum(pts, fitting::SpectrumMode::transmission, bogus, reference_defaults()));
}

}
