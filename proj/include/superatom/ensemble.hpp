#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "superatom/params.hpp"

namespace superatom::ensemble {

using Vec3 = std::array<double, 3>;

struct CloudSample {
    std::vector<Vec3> positions;  // um
    std::uint64_t seed = 0;
};

/// Positions drawn i.i.d. from an isotropic Gaussian with per-axis standard
/// deviation sigma_a; reproducible from the seed.
CloudSample sample_cloud(const SystemParams& p, std::uint64_t seed);

struct BlockadeStats {
    /// Fraction of atom pairs whose C6/r^6 shift exceeds the threshold; empty
    /// when the cloud has fewer than two atoms.
    std::optional<double> fraction_blockaded;
    double shift_at_ref = 0.0;  // MHz, c6 / r_ref^6
    /// Mean number of other atoms closer than r_ref, per atom.
    double mean_neighbors_within = 0.0;
    std::size_t pair_count = 0;
};

/// c6 in MHz um^6, r_ref in um, shift_threshold in MHz.
/// Throws std::invalid_argument when c6 <= 0 or r_ref <= 0.
BlockadeStats blockade_stats(const CloudSample& cloud, double c6, double r_ref, double shift_threshold);

/// sqrt(N) Omega_D2 Omega_109S / (2 |Delta|). Throws std::invalid_argument on Delta = 0.
double collective_rabi(const SystemParams& p);

/// Root-sum-square of single-atom couplings.
double collective_coupling(std::span<const double> g_n);

/// Magnitude of the summed drive wavevector |k_D2 + k_109S| (rad/um).
double drive_wavevector(const SystemParams& p);

/// Gaussian e^-1 time (us) of the coherence loss from thermal motion,
/// sqrt(m / kB T) / |k_GR|.
double motional_dephasing_time(const SystemParams& p);

/// Independent Gaussian decay channels: (sum tau_i^-2)^(-1/2).
double combined_dephasing(std::span<const double> times);

/// e^-1 time of the ensemble-averaged oscillation under a Gaussian spread of
/// the Rabi frequency with relative rms `rel_rms`: sqrt(2) / (rel_rms omega).
double rabi_spread_dephasing(double omega, double rel_rms);

}  // namespace superatom::ensemble
