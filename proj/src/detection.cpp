#include "superatom/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "superatom/parallel.hpp"

namespace superatom::detection {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

double no_jump_probability(double t_i, double tau_r) { return std::exp(-t_i / tau_r); }

double jump_density(double t, double tau_r) { return std::exp(-t / tau_r) / tau_r; }

// Sum of Poisson pmfs below k.
double poisson_cdf_below(int k, double mean) {
    double sum = 0.0;
    for (int n = 0; n < k; ++n) sum += poisson_pmf(n, mean);
    return std::min(sum, 1.0);
}

// P_R(n < n_t) without the ground-state admixture.
double rydberg_count_cdf_below(const CountModel& m, int n_t) {
    if (n_t <= 0) return 0.0;
    const double no_jump = poisson_cdf_below(n_t, m.t_i * m.phi_r) * no_jump_probability(m.t_i, m.tau_r);
    const double jumps = quadrature::integrate(
        [&](double t) {
            const double mean = t * m.phi_r + (m.t_i - t) * m.phi_g;
            return poisson_cdf_below(n_t, mean) * jump_density(t, m.tau_r);
        },
        0.0, m.t_i, jump_integral_options);
    return std::min(no_jump + jumps, 1.0);
}

bool better(const SurfacePoint& a, const SurfacePoint& b) {
    if (a.rates.fidelity != b.rates.fidelity) return a.rates.fidelity > b.rates.fidelity;
    if (a.t_i != b.t_i) return a.t_i < b.t_i;
    if (a.threshold != b.threshold) return a.threshold < b.threshold;
    return a.flux < b.flux;
}

double scaled_lifetime(double tau_ref, double flux_ref, double flux, LifetimeScaling scaling) {
    if (scaling == LifetimeScaling::fixed || flux_ref <= 0.0 || flux <= 0.0) return tau_ref;
    return tau_ref * flux_ref / flux;
}

}  // namespace

void check(const CountModel& m) {
    require(std::isfinite(m.t_i) && m.t_i > 0.0, "CountModel: t_i must be > 0");
    require(std::isfinite(m.phi_g) && m.phi_g >= 0.0, "CountModel: phi_g must be >= 0");
    require(std::isfinite(m.phi_r) && m.phi_r >= 0.0, "CountModel: phi_r must be >= 0");
    require(m.phi_r <= m.phi_g, "CountModel: phi_r must not exceed phi_g");
    require(m.tau_r > 0.0, "CountModel: tau_r must be > 0");
    require(m.eta_r >= 0.0 && m.eta_r <= 1.0, "CountModel: eta_r must lie in [0, 1]");
}

void check(const QuadratureModel& m) {
    require(std::isfinite(m.t_i) && m.t_i > 0.0, "QuadratureModel: t_i must be > 0");
    require(std::isfinite(m.phi) && m.phi >= 0.0, "QuadratureModel: phi must be >= 0");
    require(m.refl_g >= 0.0 && m.refl_g <= 1.0, "QuadratureModel: refl_g must lie in [0, 1]");
    require(m.refl_r >= 0.0 && m.refl_r <= 1.0, "QuadratureModel: refl_r must lie in [0, 1]");
    require(m.tau_r > 0.0, "QuadratureModel: tau_r must be > 0");
    require(m.eta_r >= 0.0 && m.eta_r <= 1.0, "QuadratureModel: eta_r must lie in [0, 1]");
}

ErrorRates make_error_rates(double eps_g, double eps_r) {
    eps_g = std::clamp(eps_g, 0.0, 1.0);
    eps_r = std::clamp(eps_r, 0.0, 1.0);
    return {eps_g, eps_r, 1.0 - std::max(eps_g, eps_r)};
}

double poisson_pmf(int n, double mean) {
    if (n < 0) return 0.0;
    if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

double count_pmf_ground(const CountModel& m, int n) { return poisson_pmf(n, m.t_i * m.phi_g); }

double count_pmf_rydberg_pure(const CountModel& m, int n) {
    if (n < 0) return 0.0;
    const double no_jump = poisson_pmf(n, m.t_i * m.phi_r) * no_jump_probability(m.t_i, m.tau_r);
    const double jumps = quadrature::integrate(
        [&](double t) { return poisson_pmf(n, t * m.phi_r + (m.t_i - t) * m.phi_g) * jump_density(t, m.tau_r); },
        0.0, m.t_i, jump_integral_options);
    return no_jump + jumps;
}

double count_pmf_rydberg(const CountModel& m, int n) {
    double p = 0.0;
    if (m.eta_r > 0.0) p += m.eta_r * count_pmf_rydberg_pure(m, n);
    if (m.eta_r < 1.0) p += (1.0 - m.eta_r) * count_pmf_ground(m, n);
    return p;
}

double quadrature_density(double x, double mean) {
    const double d = x - mean;
    return std::exp(-d * d) / std::sqrt(std::numbers::pi);
}

double quadrature_cdf(double x, double mean) { return 0.5 * std::erfc(mean - x); }

double ground_mean(const QuadratureModel& m) { return -std::sqrt(2.0 * m.t_i * m.phi * m.refl_g); }

double rydberg_mean(const QuadratureModel& m) { return std::sqrt(2.0 * m.t_i * m.phi * m.refl_r); }

double jump_mean(const QuadratureModel& m, double t) {
    return -(m.t_i - t) * std::sqrt(2.0 * m.phi * m.refl_g / m.t_i) + t * std::sqrt(2.0 * m.phi * m.refl_r / m.t_i);
}

double quad_pdf_ground(const QuadratureModel& m, double x) { return quadrature_density(x, ground_mean(m)); }

double quad_pdf_rydberg_pure(const QuadratureModel& m, double x) {
    const double no_jump = quadrature_density(x, rydberg_mean(m)) * no_jump_probability(m.t_i, m.tau_r);
    const double jumps = quadrature::integrate(
        [&](double t) { return quadrature_density(x, jump_mean(m, t)) * jump_density(t, m.tau_r); }, 0.0, m.t_i,
        jump_integral_options);
    return no_jump + jumps;
}

double quad_pdf_rydberg(const QuadratureModel& m, double x) {
    double p = 0.0;
    if (m.eta_r > 0.0) p += m.eta_r * quad_pdf_rydberg_pure(m, x);
    if (m.eta_r < 1.0) p += (1.0 - m.eta_r) * quad_pdf_ground(m, x);
    return p;
}

double quad_cdf_ground(const QuadratureModel& m, double x) { return quadrature_cdf(x, ground_mean(m)); }

double quad_cdf_rydberg(const QuadratureModel& m, double x) {
    double p = 0.0;
    if (m.eta_r > 0.0) {
        if (std::isinf(x)) {
            p += m.eta_r * (x > 0 ? 1.0 : 0.0);
        } else {
            const double no_jump = quadrature_cdf(x, rydberg_mean(m)) * no_jump_probability(m.t_i, m.tau_r);
            const double jumps = quadrature::integrate(
                [&](double t) { return quadrature_cdf(x, jump_mean(m, t)) * jump_density(t, m.tau_r); }, 0.0,
                m.t_i, jump_integral_options);
            p += m.eta_r * std::min(no_jump + jumps, 1.0);
        }
    }
    if (m.eta_r < 1.0) p += (1.0 - m.eta_r) * quad_cdf_ground(m, x);
    return p;
}

ErrorRates error_rates_counting(const CountModel& m, int n_t) {
    check(m);
    require(n_t >= 0, "error_rates_counting: threshold must be >= 0");
    const double eps_g = poisson_cdf_below(n_t, m.t_i * m.phi_g);
    double below_mix = 0.0;
    if (m.eta_r > 0.0) below_mix += m.eta_r * rydberg_count_cdf_below(m, n_t);
    if (m.eta_r < 1.0) below_mix += (1.0 - m.eta_r) * eps_g;
    return make_error_rates(eps_g, 1.0 - below_mix);
}

ErrorRates error_rates_homodyne(const QuadratureModel& m, double x_t) {
    check(m);
    require(!std::isnan(x_t), "error_rates_homodyne: threshold is NaN");
    const double eps_g = 1.0 - quad_cdf_ground(m, x_t);
    const double eps_r = quad_cdf_rydberg(m, x_t);
    return make_error_rates(eps_g, eps_r);
}

Optimum optimize_detection(const CountingSearch& s) {
    require(!s.t_grid.empty() && !s.threshold_grid.empty(), "optimize_detection: empty grid");
    check(s.base);
    const std::vector<double> fluxes = s.flux_grid.empty() ? std::vector<double>{s.base.phi_g} : s.flux_grid;
    const double ratio = s.base.phi_g > 0.0 ? s.base.phi_r / s.base.phi_g : 0.0;
    const int max_threshold = *std::max_element(s.threshold_grid.begin(), s.threshold_grid.end());
    for (int n_t : s.threshold_grid) require(n_t >= 0, "optimize_detection: negative threshold");

    const std::size_t n_t_count = s.threshold_grid.size();
    Optimum out;
    out.surface.resize(fluxes.size() * s.t_grid.size() * n_t_count);

    parallel_for(fluxes.size() * s.t_grid.size(), [&](std::size_t cell) {
        const double flux = fluxes[cell / s.t_grid.size()];
        CountModel m = s.base;
        m.t_i = s.t_grid[cell % s.t_grid.size()];
        m.phi_g = flux;
        m.phi_r = ratio * flux;
        m.tau_r = scaled_lifetime(s.base.tau_r, s.base.phi_g, flux, s.lifetime);
        check(m);

        // Cumulative P_G and P_mix below each threshold.
        std::vector<double> below_g(static_cast<std::size_t>(max_threshold) + 1, 0.0);
        std::vector<double> below_mix(below_g.size(), 0.0);
        for (int n = 0; n < max_threshold; ++n) {
            below_g[n + 1] = below_g[n] + count_pmf_ground(m, n);
            below_mix[n + 1] = below_mix[n] + count_pmf_rydberg(m, n);
        }
        for (std::size_t k = 0; k < n_t_count; ++k) {
            const int n_t = s.threshold_grid[k];
            auto& pt = out.surface[cell * n_t_count + k];
            pt.t_i = m.t_i;
            pt.threshold = n_t;
            pt.flux = flux;
            pt.rates = make_error_rates(below_g[n_t], 1.0 - below_mix[n_t]);
        }
    });

    out.best = out.surface.front();
    for (const auto& pt : out.surface)
        if (better(pt, out.best)) out.best = pt;
    return out;
}

Optimum optimize_detection(const HomodyneSearch& s) {
    require(!s.t_grid.empty() && !s.threshold_grid.empty(), "optimize_detection: empty grid");
    check(s.base);
    const std::vector<double> fluxes = s.flux_grid.empty() ? std::vector<double>{s.base.phi} : s.flux_grid;
    const std::size_t n_x = s.threshold_grid.size();
    Optimum out;
    out.surface.resize(fluxes.size() * s.t_grid.size() * n_x);

    parallel_for(out.surface.size(), [&](std::size_t idx) {
        const std::size_t cell = idx / n_x;
        const double flux = fluxes[cell / s.t_grid.size()];
        QuadratureModel m = s.base;
        m.t_i = s.t_grid[cell % s.t_grid.size()];
        m.phi = flux;
        m.tau_r = scaled_lifetime(s.base.tau_r, s.base.phi, flux, s.lifetime);
        const double x_t = s.threshold_grid[idx % n_x];
        out.surface[idx] = {m.t_i, x_t, flux, error_rates_homodyne(m, x_t)};
    });

    out.best = out.surface.front();
    for (const auto& pt : out.surface)
        if (better(pt, out.best)) out.best = pt;
    return out;
}

}  // namespace superatom::detection
