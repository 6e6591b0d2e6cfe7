#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "superatom/params.hpp"

// Single-shot records: a drive pulse prepares |R> with probability eta_R, the
// superatom may then jump once to |G> (absorbing) during the probe window, and
// the probe produces time-binned photon counts or homodyne quadrature samples.
namespace superatom::dynamics {

enum class State { ground, rydberg };
enum class DetectionMode { counting, homodyne };

struct Bin {
    double start = 0.0;  // us
    double value = 0.0;  // photon count or quadrature sample
};

struct ShotRecord {
    State prepared = State::ground;
    std::optional<double> jump_time;  // us, within [0, t_i)
    std::vector<Bin> bins;
};

struct Protocol {
    double drive_duration = 0.0;  // t_d, us
    double probe_duration = 1.0;  // t_i, us
    double bin_width = 1.0;       // us
    DetectionMode mode = DetectionMode::counting;
    // counting: detected photon rates per us
    double phi_g = 0.0;
    double phi_r = 0.0;
    // homodyne: input photon rate per us and the two reflectivities
    double phi = 0.0;
    double refl_g = 0.0;
    double refl_r = 0.0;
    double tau_r = 1.0;          // us
    double dephasing_time = 1.0; // tau_d of the drive, us
    std::optional<double> eta_r;
};

/// Throws std::invalid_argument naming the first violated invariant.
void check(const Protocol& proto);

std::size_t bin_count(const Protocol& proto);

/// 1/2 [1 - cos(omega t_d) exp(-t_d^2 / tau_d^2)]
double rabi_population(double t_d, double omega, double tau_d);

/// Duration pi / omega of a pi pulse.
double pi_pulse_duration(double omega);

/// eta_R used by simulate_shot: the explicit override, else
/// rabi_population(drive_duration, collective Rabi frequency, dephasing_time).
double preparation_efficiency(const Protocol& proto, const SystemParams& params);

ShotRecord simulate_shot(const Protocol& proto, bool prepare_pi, const SystemParams& params, std::uint64_t seed);

/// Shots with per-shot seeds derive_seed(seed, index); output order is the
/// shot index whatever the scheduling.
std::vector<ShotRecord> batch(const Protocol& proto, bool prepare_pi, std::size_t n_shots,
                              const SystemParams& params, std::uint64_t seed);

/// Window-integrated measurement: total counts, or the quadrature
/// sum_b x_b sqrt(dt_b / t_i), which has variance 1/2.
double integrated_value(const ShotRecord& record, const Protocol& proto);

/// Per-bin mean over records (counts per bin or quadrature samples).
std::vector<double> mean_trace(const std::vector<ShotRecord>& records);

}  // namespace superatom::dynamics
