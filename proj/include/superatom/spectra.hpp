#pragma once

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "superatom/params.hpp"

// Weak-probe steady state of the cavity + three-level ensemble + EIT control.
// Everything reduces to the effective complex detuning
//
//   D = Delta_a - g^2 / (Delta_e - Omega_c^2 / (4 Delta_r)),
//   Delta_a = delta_a + i kappa, Delta_e = delta_e + i gamma, Delta_r = delta_r + i gamma_r,
//
// from which T = |kappa / D|^2 (normalized to the bare cavity) and
// r = 1 - 2 i kappa0 / D.
namespace superatom::spectra {

struct ProbeCondition {
    double delta_a = 0.0;  // probe - cavity
    double delta_e = 0.0;  // probe - atomic transition
    double delta_r = 0.0;  // two-photon detuning
    /// Replaces SystemParams::omega_c when set; 0 models full blockade.
    std::optional<double> omega_c_override;
    /// Interaction shift of the Rydberg level, added to delta_r. Partial-blockade studies only.
    double rydberg_shift = 0.0;

    /// Probe swept with the control held on two-photon resonance.
    static ProbeCondition co_swept(double delta) { return {delta, delta, delta, std::nullopt, 0.0}; }
    static ProbeCondition blocked(double delta) { return {delta, delta, delta, 0.0, 0.0}; }
};

std::complex<double> effective_detuning(const SystemParams& p, const ProbeCondition& c);

double transmission(const SystemParams& p, const ProbeCondition& c);

std::complex<double> reflection_amplitude(const SystemParams& p, const ProbeCondition& c);

struct Reflection {
    std::complex<double> amplitude;
    double reflectivity = 0.0;  // |amplitude|^2
    double phase = 0.0;         // arg(amplitude), in (-pi, pi]
};

Reflection reflection(const SystemParams& p, const ProbeCondition& c);

/// Maps an angle onto (-pi, pi].
double wrap_phase(double phase);

struct SpectrumRow {
    double delta = 0.0;  // rad/us
    double transmission = 0.0;
    double reflectivity = 0.0;
    double phase = 0.0;
};

using SpectrumTable = std::vector<SpectrumRow>;

/// Co-swept probe spectrum (delta_a = delta_e = delta_r = delta); rows sorted by
/// delta. `blocked` sets Omega_c = 0. Throws std::invalid_argument on an empty grid.
SpectrumTable sweep(const SystemParams& p, std::span<const double> deltas, bool blocked);

/// n points evenly spaced over [lo, hi] inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

/// Grid indices of the local maxima of the transmission column.
std::vector<std::size_t> transmission_peaks(const SpectrumTable& table);

class NoEitPeak : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PolaritonLifetime {
    double hwhm = 0.0;             // rad/us
    double tau_p = 0.0;            // us, 1 / (2 hwhm)
    double saturation_flux = 0.0;  // photons/us, 1 / (2 tau_p)
    double peak_transmission = 0.0;
};

/// Half width at half maximum of the resonant EIT window, located by bisection
/// on the closed-form co-swept spectrum. Throws NoEitPeak when the control is
/// too weak to open a window.
PolaritonLifetime polariton_lifetime(const SystemParams& p);

}  // namespace superatom::spectra
