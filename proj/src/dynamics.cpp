#include "superatom/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "superatom/ensemble.hpp"
#include "superatom/parallel.hpp"
#include "superatom/random.hpp"

namespace superatom::dynamics {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

}  // namespace

void check(const Protocol& p) {
    require(std::isfinite(p.drive_duration) && p.drive_duration >= 0.0, "Protocol: drive_duration must be >= 0");
    require(std::isfinite(p.probe_duration) && p.probe_duration > 0.0, "Protocol: probe_duration must be > 0");
    require(std::isfinite(p.bin_width) && p.bin_width > 0.0, "Protocol: bin_width must be > 0");
    const double bins = p.probe_duration / p.bin_width;
    require(std::abs(bins - std::round(bins)) <= 1e-9 * std::max(1.0, bins) && std::round(bins) >= 1.0,
            "Protocol: bin_width must divide probe_duration");
    require(p.tau_r > 0.0, "Protocol: tau_r must be > 0");
    require(p.dephasing_time > 0.0, "Protocol: dephasing_time must be > 0");
    if (p.eta_r) require(*p.eta_r >= 0.0 && *p.eta_r <= 1.0, "Protocol: eta_r must lie in [0, 1]");
    if (p.mode == DetectionMode::counting) {
        require(std::isfinite(p.phi_g) && p.phi_g >= 0.0, "Protocol: phi_g must be >= 0");
        require(std::isfinite(p.phi_r) && p.phi_r >= 0.0, "Protocol: phi_r must be >= 0");
    } else {
        require(std::isfinite(p.phi) && p.phi >= 0.0, "Protocol: phi must be >= 0");
        require(p.refl_g >= 0.0 && p.refl_g <= 1.0, "Protocol: refl_g must lie in [0, 1]");
        require(p.refl_r >= 0.0 && p.refl_r <= 1.0, "Protocol: refl_r must lie in [0, 1]");
    }
}

std::size_t bin_count(const Protocol& proto) {
    return static_cast<std::size_t>(std::llround(proto.probe_duration / proto.bin_width));
}

double rabi_population(double t_d, double omega, double tau_d) {
    return 0.5 * (1.0 - std::cos(omega * t_d) * std::exp(-(t_d * t_d) / (tau_d * tau_d)));
}

double pi_pulse_duration(double omega) { return std::numbers::pi / omega; }

double preparation_efficiency(const Protocol& proto, const SystemParams& params) {
    if (proto.eta_r) return *proto.eta_r;
    return rabi_population(proto.drive_duration, ensemble::collective_rabi(params), proto.dephasing_time);
}

ShotRecord simulate_shot(const Protocol& proto, bool prepare_pi, const SystemParams& params, std::uint64_t seed) {
    check(proto);
    Rng rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::exponential_distribution<double> lifetime(1.0 / proto.tau_r);

    // Draws happen in a fixed order whatever the branch taken.
    const double u_prepare = uniform(rng);
    const double t_jump = lifetime(rng);

    ShotRecord rec;
    const double eta = prepare_pi ? preparation_efficiency(proto, params) : 0.0;
    rec.prepared = (prepare_pi && u_prepare < eta) ? State::rydberg : State::ground;

    const double t_i = proto.probe_duration;
    // Time up to which the superatom is in |R>.
    double r_until = 0.0;
    if (rec.prepared == State::rydberg) {
        if (t_jump < t_i) {
            rec.jump_time = t_jump;
            r_until = t_jump;
        } else {
            r_until = std::numeric_limits<double>::infinity();
        }
    }

    const std::size_t n_bins = bin_count(proto);
    rec.bins.resize(n_bins);
    std::normal_distribution<double> vacuum(0.0, std::sqrt(0.5));
    const double amp_g = -std::sqrt(2.0 * proto.phi * proto.refl_g);
    const double amp_r = std::sqrt(2.0 * proto.phi * proto.refl_r);

    for (std::size_t b = 0; b < n_bins; ++b) {
        const double start = static_cast<double>(b) * proto.bin_width;
        const double end = b + 1 == n_bins ? t_i : start + proto.bin_width;
        const double in_r = overlap(start, end, 0.0, r_until);
        const double in_g = (end - start) - in_r;
        rec.bins[b].start = start;
        if (proto.mode == DetectionMode::counting) {
            const double mean = proto.phi_r * in_r + proto.phi_g * in_g;
            long count = 0;
            if (mean > 0.0) count = std::poisson_distribution<long>(mean)(rng);
            rec.bins[b].value = static_cast<double>(count);
        } else {
            const double mean = (amp_r * in_r + amp_g * in_g) / std::sqrt(end - start);
            rec.bins[b].value = mean + vacuum(rng);
        }
    }
    return rec;
}

std::vector<ShotRecord> batch(const Protocol& proto, bool prepare_pi, std::size_t n_shots,
                              const SystemParams& params, std::uint64_t seed) {
    check(proto);
    require(n_shots >= 1, "batch: n_shots must be >= 1");
    std::vector<ShotRecord> out(n_shots);
    parallel_for(n_shots, [&](std::size_t i) { out[i] = simulate_shot(proto, prepare_pi, params, derive_seed(seed, i)); });
    return out;
}

double integrated_value(const ShotRecord& record, const Protocol& proto) {
    double sum = 0.0;
    const double t_i = proto.probe_duration;
    for (std::size_t b = 0; b < record.bins.size(); ++b) {
        if (proto.mode == DetectionMode::counting) {
            sum += record.bins[b].value;
        } else {
            const double end = b + 1 == record.bins.size() ? t_i : record.bins[b + 1].start;
            sum += record.bins[b].value * std::sqrt((end - record.bins[b].start) / t_i);
        }
    }
    return sum;
}

std::vector<double> mean_trace(const std::vector<ShotRecord>& records) {
    if (records.empty()) return {};
    std::vector<double> mean(records.front().bins.size(), 0.0);
    for (const auto& r : records)
        for (std::size_t b = 0; b < mean.size() && b < r.bins.size(); ++b) mean[b] += r.bins[b].value;
    for (auto& m : mean) m /= static_cast<double>(records.size());
    return mean;
}

}  // namespace superatom::dynamics
