#include "superatom/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace superatom::spectra {

std::complex<double> effective_detuning(const SystemParams& p, const ProbeCondition& c) {
    using cd = std::complex<double>;
    const double omega_c = c.omega_c_override.value_or(p.omega_c);
    const cd delta_a{c.delta_a, p.kappa};
    const cd delta_e{c.delta_e, p.gamma};
    const cd delta_r{c.delta_r + c.rydberg_shift, p.gamma_r};

    if (p.g == 0.0) return delta_a;
    // Lossless two-photon resonance: the control term diverges and the
    // atoms decouple from the cavity.
    if (omega_c != 0.0 && delta_r == cd{}) return delta_a;
    cd atomic = delta_e;
    if (omega_c != 0.0) atomic -= omega_c * omega_c / (4.0 * delta_r);
    return delta_a - p.g * p.g / atomic;
}

double transmission(const SystemParams& p, const ProbeCondition& c) {
    return std::norm(p.kappa / effective_detuning(p, c));
}

std::complex<double> reflection_amplitude(const SystemParams& p, const ProbeCondition& c) {
    return 1.0 - std::complex<double>(0.0, 2.0 * p.kappa0) / effective_detuning(p, c);
}

double wrap_phase(double phase) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(phase, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

Reflection reflection(const SystemParams& p, const ProbeCondition& c) {
    Reflection r;
    r.amplitude = reflection_amplitude(p, c);
    r.reflectivity = std::norm(r.amplitude);
    r.phase = wrap_phase(std::arg(r.amplitude));
    return r;
}

SpectrumTable sweep(const SystemParams& p, std::span<const double> deltas, bool blocked) {
    if (deltas.empty()) throw std::invalid_argument("sweep: empty detuning grid");
    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end());

    SpectrumTable table;
    table.reserve(sorted.size());
    for (double d : sorted) {
        const auto cond = blocked ? ProbeCondition::blocked(d) : ProbeCondition::co_swept(d);
        const auto refl = reflection(p, cond);
        table.push_back({d, transmission(p, cond), refl.reflectivity, refl.phase});
    }
    return table;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

std::vector<std::size_t> transmission_peaks(const SpectrumTable& table) {
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < table.size(); ++i) {
        const double t = table[i].transmission;
        if (t > table[i - 1].transmission && t >= table[i + 1].transmission) peaks.push_back(i);
    }
    return peaks;
}

PolaritonLifetime polariton_lifetime(const SystemParams& p) {
    if (!(p.omega_c > 0.0)) throw NoEitPeak("polariton_lifetime: control Rabi frequency must be > 0");
    auto t_at = [&p](double d) { return transmission(p, ProbeCondition::co_swept(d)); };

    const double peak = t_at(0.0);
    const double half = 0.5 * peak;

    // Walk outward until the window has closed below half maximum. The step is
    // fine compared to the narrowest scale (gamma_r) and to the window itself.
    const double scale = std::max({p.gamma_r, 1e-6 * (p.kappa + p.gamma + p.g)});
    double step = 0.05 * scale;
    double lo = 0.0;
    double prev = peak;
    double hi = 0.0;
    const double limit = 10.0 * (p.g + p.kappa + p.gamma + p.omega_c + p.gamma_r);
    for (;;) {
        const double d = lo + step;
        if (d > limit) throw NoEitPeak("polariton_lifetime: no half-maximum crossing of the EIT window");
        const double t = t_at(d);
        if (t > prev) throw NoEitPeak("polariton_lifetime: transmission at resonance is not a local maximum");
        if (t < half) {
            hi = d;
            break;
        }
        prev = t;
        lo = d;
        step *= 1.1;
    }

    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (t_at(mid) >= half ? lo : hi) = mid;
    }
    PolaritonLifetime out;
    out.hwhm = 0.5 * (lo + hi);
    out.tau_p = 1.0 / (2.0 * out.hwhm);
    out.saturation_flux = 1.0 / (2.0 * out.tau_p);
    out.peak_transmission = peak;
    return out;
}

}  // namespace superatom::spectra
