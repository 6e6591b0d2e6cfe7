#include "superatom/ensemble.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "superatom/random.hpp"
#include "superatom/units.hpp"

namespace superatom::ensemble {

CloudSample sample_cloud(const SystemParams& p, std::uint64_t seed) {
    CloudSample cloud;
    cloud.seed = seed;
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, p.sigma_a);
    cloud.positions.resize(static_cast<std::size_t>(std::max(p.n_atoms, 1)));
    for (auto& r : cloud.positions)
        for (auto& x : r) x = normal(rng);
    return cloud;
}

BlockadeStats blockade_stats(const CloudSample& cloud, double c6, double r_ref, double shift_threshold) {
    if (!(c6 > 0.0)) throw std::invalid_argument("blockade_stats: c6 must be > 0");
    if (!(r_ref > 0.0)) throw std::invalid_argument("blockade_stats: r_ref must be > 0");

    BlockadeStats stats;
    stats.shift_at_ref = c6 / std::pow(r_ref, 6);

    // shift > threshold  <=>  r^2 < (c6 / threshold)^(1/3)
    const double r2_block = shift_threshold > 0.0 ? std::cbrt(c6 / shift_threshold)
                                                   : std::numeric_limits<double>::infinity();
    const double r2_ref = r_ref * r_ref;

    const auto& pos = cloud.positions;
    const std::size_t n = pos.size();
    std::size_t blocked = 0;
    std::size_t close = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = pos[i][0] - pos[j][0];
            const double dy = pos[i][1] - pos[j][1];
            const double dz = pos[i][2] - pos[j][2];
            const double r2 = dx * dx + dy * dy + dz * dz;
            blocked += r2 < r2_block;
            close += r2 < r2_ref;
        }
    }
    stats.pair_count = n * (n - 1) / 2;
    if (stats.pair_count > 0)
        stats.fraction_blockaded = static_cast<double>(blocked) / static_cast<double>(stats.pair_count);
    // Each close pair is a neighbour of both of its atoms.
    stats.mean_neighbors_within = n > 0 ? 2.0 * static_cast<double>(close) / static_cast<double>(n) : 0.0;
    return stats;
}

double collective_rabi(const SystemParams& p) {
    if (p.delta_int == 0.0) throw std::invalid_argument("collective_rabi: intermediate detuning is zero");
    return std::sqrt(static_cast<double>(p.n_atoms)) * p.omega_d2 * p.omega_109s / (2.0 * std::abs(p.delta_int));
}

double collective_coupling(std::span<const double> g_n) {
    if (g_n.empty()) throw std::invalid_argument("collective_coupling: empty coupling list");
    double sum = 0.0;
    for (double g : g_n) {
        if (!(g >= 0.0)) throw std::invalid_argument("collective_coupling: couplings must be >= 0");
        sum += g * g;
    }
    return std::sqrt(sum);
}

double drive_wavevector(const SystemParams& p) {
    const double k1 = p.k_d2;
    const double k2 = p.k_109s;
    const double sq = k1 * k1 + k2 * k2 + 2.0 * k1 * k2 * std::cos(p.drive_angle);
    return std::sqrt(std::max(sq, 0.0));
}

double motional_dephasing_time(const SystemParams& p) {
    if (!(p.temperature > 0.0)) throw std::invalid_argument("motional_dephasing_time: temperature must be > 0");
    // sqrt(m / kB T) in s/m, numerically equal to us/um.
    const double inv_velocity = std::sqrt(p.atom_mass / (units::boltzmann * p.temperature * 1e-6));
    return inv_velocity / drive_wavevector(p);
}

double combined_dephasing(std::span<const double> times) {
    if (times.empty()) throw std::invalid_argument("combined_dephasing: empty list");
    double rate2 = 0.0;
    for (double t : times) {
        if (!(t > 0.0) || !std::isfinite(t))
            throw std::invalid_argument("combined_dephasing: times must be finite and > 0");
        rate2 += 1.0 / (t * t);
    }
    return 1.0 / std::sqrt(rate2);
}

double rabi_spread_dephasing(double omega, double rel_rms) {
    if (!(omega > 0.0)) throw std::invalid_argument("rabi_spread_dephasing: omega must be > 0");
    if (!(rel_rms >= 1e-6)) throw std::invalid_argument("rabi_spread_dephasing: relative rms below 1e-6");
    return std::sqrt(2.0) / (rel_rms * omega);
}

}  // namespace superatom::ensemble
