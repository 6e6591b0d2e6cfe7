#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "superatom/quadrature.hpp"

// Closed-form single-shot detection statistics for a superatom that can decay
// once, R -> G, during the probe window [0, t_i].
//
// Counting:  P_G(n) = Poisson(n; t_i phi_G)
//            P_R(n) = Poisson(n; t_i phi_R) e^{-t_i/tau_R}
//                     + int_0^{t_i} Poisson(n; t phi_R + (t_i - t) phi_G) e^{-t/tau_R} / tau_R dt
// Homodyne:  G_G(X) = Normal(X; -sqrt(2 t_i phi R_G), 1/2)
//            G_R(X) = Normal(X; +sqrt(2 t_i phi R_R), 1/2) e^{-t_i/tau_R}
//                     + int_0^{t_i} Normal(X; X_J(t), 1/2) e^{-t/tau_R} / tau_R dt
// with the prepared-R distribution mixed as eta_R P_R + (1 - eta_R) P_G.
//
// Sign convention: the G branch reflects with phase pi and sits at negative X,
// the R branch at positive X. Classification is R for X > x_t, and G for n >= n_t.
namespace superatom::detection {

struct CountModel {
    double t_i = 1.0;    // us
    double phi_g = 0.0;  // detected photons / us
    double phi_r = 0.0;
    double tau_r = 1.0;  // us
    double eta_r = 1.0;
};

struct QuadratureModel {
    double t_i = 1.0;   // us
    double phi = 0.0;   // photons / us at the cavity input
    double refl_g = 0.0;
    double refl_r = 0.0;
    double tau_r = 1.0;  // us
    double eta_r = 1.0;
};

/// Throws std::invalid_argument naming the first violated invariant.
void check(const CountModel& m);
void check(const QuadratureModel& m);

struct ErrorRates {
    double eps_g = 0.0;  // false positive: G classified as R
    double eps_r = 0.0;  // false negative: prepared R classified as G
    double fidelity = 0.0;
};

ErrorRates make_error_rates(double eps_g, double eps_r);

/// Quadrature settings for the jump integrals.
inline constexpr quadrature::Options jump_integral_options{1e-8, 1e-16, 2000};

/// Poisson pmf evaluated in log space; mean 0 gives a point mass at 0.
double poisson_pmf(int n, double mean);

double count_pmf_ground(const CountModel& m, int n);
/// Prepared-R branch without the (1 - eta_R) admixture.
double count_pmf_rydberg_pure(const CountModel& m, int n);
/// eta_R P_R(n) + (1 - eta_R) P_G(n).
double count_pmf_rydberg(const CountModel& m, int n);

/// Vacuum-normalized Gaussian density with variance 1/2.
double quadrature_density(double x, double mean);
/// Its cumulative distribution.
double quadrature_cdf(double x, double mean);

double ground_mean(const QuadratureModel& m);
double rydberg_mean(const QuadratureModel& m);
/// Mean integrated quadrature for a jump at time t in [0, t_i].
double jump_mean(const QuadratureModel& m, double t);

double quad_pdf_ground(const QuadratureModel& m, double x);
double quad_pdf_rydberg_pure(const QuadratureModel& m, double x);
double quad_pdf_rydberg(const QuadratureModel& m, double x);

double quad_cdf_ground(const QuadratureModel& m, double x);
double quad_cdf_rydberg(const QuadratureModel& m, double x);

/// eps_G = P_G(n < n_t), eps_R = P_mix(n >= n_t).
ErrorRates error_rates_counting(const CountModel& m, int n_t);

/// eps_G = G_G(X > x_t), eps_R = G_mix(X <= x_t). Infinite thresholds allowed.
ErrorRates error_rates_homodyne(const QuadratureModel& m, double x_t);

/// How the Rydberg lifetime follows the probe flux across a flux grid.
enum class LifetimeScaling {
    fixed,
    /// tau_R(phi) = tau_R,ref * phi_ref / phi
    inverse_flux,
};

struct CountingSearch {
    CountModel base;  // reference flux and lifetime; t_i is replaced by the grid
    std::vector<double> t_grid;
    std::vector<int> threshold_grid;
    /// Ground-state flux values to scan; empty means base.phi_g only. phi_R
    /// keeps its ratio to phi_G.
    std::vector<double> flux_grid;
    LifetimeScaling lifetime = LifetimeScaling::fixed;
};

struct HomodyneSearch {
    QuadratureModel base;
    std::vector<double> t_grid;
    std::vector<double> threshold_grid;
    std::vector<double> flux_grid;
    LifetimeScaling lifetime = LifetimeScaling::fixed;
};

struct SurfacePoint {
    double t_i = 0.0;
    double threshold = 0.0;
    double flux = 0.0;
    ErrorRates rates;
};

struct Optimum {
    SurfacePoint best;
    std::vector<SurfacePoint> surface;  // flux-major, then t_i, then threshold
};

/// Exhaustive grid search for the maximum fidelity. Ties go to the smaller
/// t_i, then the smaller threshold, then the smaller flux.
/// Throws std::invalid_argument on an empty grid.
Optimum optimize_detection(const CountingSearch& search);
Optimum optimize_detection(const HomodyneSearch& search);

}  // namespace superatom::detection
