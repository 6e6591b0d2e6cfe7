#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "superatom/params.hpp"

namespace superatom::fitting {

struct FitParameter {
    std::string name;
    double value = 0.0;
    /// Inverse-curvature standard error; +inf when the curvature is singular.
    double error = 0.0;
    /// One-sided at a bound: the error pointing out of the box is zero.
    double error_lower = 0.0;
    double error_upper = 0.0;
    bool at_bound = false;
    bool fixed = false;
    /// Standard deviation over bootstrap refits; 0 when no bootstrap was run.
    double bootstrap_error = 0.0;
};

struct FitResult {
    std::vector<FitParameter> parameters;
    double objective = 0.0;  // chi^2 or negative log-likelihood
    int iterations = 0;
    bool converged = false;
    /// Projected gradient norm at the optimum, in scaled coordinates.
    double gradient_norm = 0.0;
    double gradient_tolerance = 0.0;
    std::vector<std::string> warnings;
    /// Best objective after each optimizer iteration of the selected start.
    std::vector<double> objective_history;

    const FitParameter& operator[](std::string_view name) const;
    double value(std::string_view name) const { return (*this)[name].value; }
    double error(std::string_view name) const { return (*this)[name].error; }
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data carry no signal beyond their noise.
class DegenerateData : public FitError {
public:
    using FitError::FitError;
};

struct TracePoint {
    double t = 0.0;
    double value = 0.0;
    double sigma = 1.0;
};

struct FitOptions {
    /// Bootstrap resamples for bootstrap_error (200 is the documented default
    /// when bootstrapping is requested); 0 disables.
    std::size_t bootstrap_resamples = 0;
    std::uint64_t bootstrap_seed = 0;
};

inline constexpr std::size_t default_bootstrap_resamples = 200;

/// Weighted least squares of P(t) = offset + amplitude [1 - cos(omega t) e^{-t^2/tau_d^2}] / 2.
/// Parameters: omega, tau_d, amplitude, offset.
FitResult fit_rabi(std::span<const TracePoint> trace, const FitOptions& opt = {});

enum class LifetimeModel {
    /// floor + rate0 (1 - e^{-t/tau_r}): recovery of the probe rate after jumps
    recovery,
    /// rate0 e^{-t/tau_r}: survival probability (floor fixed at 0)
    survival,
};

/// Parameters: rate0, tau_r, floor.
FitResult fit_lifetime(std::span<const TracePoint> trace, LifetimeModel model, const FitOptions& opt = {});

using CountHistogram = std::map<int, std::size_t>;

/// Maximum likelihood over (phi_r, eta_r) of eta_r P_R + (1 - eta_r) P_G with
/// t_i, phi_g, tau_r fixed. Parameters: phi_r in [0, phi_g], eta_r in [0, 1].
FitResult fit_count_histogram(const CountHistogram& hist, double t_i, double phi_g, double tau_r,
                              const FitOptions& opt = {});

/// Freedman-Diaconis bin edges for the samples (outer edges at the extremes).
std::vector<double> freedman_diaconis_edges(std::span<const double> samples);

/// Binned multinomial maximum likelihood over (refl_r, eta_r) of the
/// homodyne mixture with t_i, phi, refl_g, tau_r fixed.
FitResult fit_quadrature_histogram(std::span<const double> samples, double t_i, double phi, double refl_g,
                                   double tau_r, const FitOptions& opt = {});

enum class SpectrumMode { transmission, reflectivity };

/// Names accepted in `free`: g, kappa, kappa0, gamma, gamma_r, omega_c.
/// Fixed parameters come from `base`; points are co-swept detunings (rad/us).
FitResult fit_spectrum(std::span<const TracePoint> points, SpectrumMode mode, std::span<const std::string> free,
                       const SystemParams& base, const FitOptions& opt = {});

}  // namespace superatom::fitting
