// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails. `acceptance N` runs criterion N only.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "oracles.hpp"
#include "superatom/cli.hpp"
#include "superatom/detection.hpp"
#include "superatom/dynamics.hpp"
#include "superatom/ensemble.hpp"
#include "superatom/fitting.hpp"
#include "superatom/params.hpp"
#include "superatom/random.hpp"
#include "superatom/spectra.hpp"
#include "superatom/units.hpp"

namespace {

using namespace superatom;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

// ------------------------------------------------------------------ 1
Outcome vacuum_rabi_splitting() {
    auto p = reference_defaults();
    p.omega_c = 0.0;
    const auto deltas = spectra::linear_grid(-two_pi * 20.0, two_pi * 20.0, 801);
    const auto table = spectra::sweep(p, deltas, false);
    auto peaks = spectra::transmission_peaks(table);
    std::sort(peaks.begin(), peaks.end(),
              [&](auto a, auto b) { return table[a].transmission > table[b].transmission; });
    if (peaks.size() < 2) return {false, fmt("found %zu maxima", peaks.size())};
    double lo = units::mhz_from_angular(table[peaks[0]].delta);
    double hi = units::mhz_from_angular(table[peaks[1]].delta);
    if (lo > hi) std::swap(lo, hi);
    const double step = 40.0 / 800.0;
    const bool ok = within(lo, -10.0, step) && within(hi, 10.0, step);
    // Same sweep without cavity and atomic losses, where the maxima sit exactly at +-g.
    auto lossless = p;
    lossless.kappa = lossless.kappa0 = lossless.gamma = 0.0;
    double edge = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (double d : deltas) {
        if (d <= 0.0) continue;
        const double mag = std::abs(spectra::effective_detuning(lossless, spectra::ProbeCondition::co_swept(d)));
        if (mag < smallest) {
            smallest = mag;
            edge = d;
        }
    }
    return {ok, fmt("maxima at %+.3f / %+.3f MHz, target +-10 MHz within %.3f MHz; the loss terms "
                    "(kappa, gamma) push the maxima outward, the lossless splitting peaks at +-%.3f MHz",
                    lo, hi, step, units::mhz_from_angular(edge))};
}

// ------------------------------------------------------------------ 2
Outcome eit_transparency() {
    auto p = reference_defaults();
    const double t0 = spectra::transmission(p, spectra::ProbeCondition::co_swept(0.0));
    const double t_oracle = oracle::transmission(oracle::reference_cavity(), 0.0, two_pi * 13.0);
    p.gamma_r = 0.0;
    p.omega_c = two_pi * 1e6;
    const double t_limit = spectra::transmission(p, spectra::ProbeCondition::co_swept(0.0));
    auto q = reference_defaults();
    q.gamma_r = two_pi * 1e-9;
    q.omega_c = two_pi * 1e5;
    const double t_near = spectra::transmission(q, spectra::ProbeCondition::co_swept(0.0));
    const bool ok = t0 >= 0.80 && t0 <= 0.95 && within(t0, t_oracle, 1e-12) && within(t_limit, 1.0, 1e-6) &&
                    within(t_near, 1.0, 1e-6);
    return {ok, fmt("T(0) = %.4f in [0.80, 0.95] (oracle %.4f); lossless strong-control limit T(0) = %.9f, "
                    "near-limit %.9f",
                    t0, t_oracle, t_limit, t_near)};
}

// ------------------------------------------------------------------ 3
Outcome reflectivity_and_phase() {
    const auto p = reference_defaults();
    const auto g = spectra::reflection(p, spectra::ProbeCondition::co_swept(0.0));
    const auto r = spectra::reflection(p, spectra::ProbeCondition::blocked(0.0));
    const auto c = oracle::reference_cavity();
    const double oracle_refl = std::norm(oracle::reflection(c, 0.0, c.omega_c));
    const double dphi = std::abs(spectra::wrap_phase(g.phase - r.phase));
    const bool ok = within(g.reflectivity, oracle_refl, 0.01) && within(g.reflectivity, 0.410, 0.01) &&
                    within(dphi, pi, 1e-9);
    return {ok, fmt("R_G(0) = %.4f (oracle %.4f, measured 0.43 +- 0.03); |phase_G - phase_R| - pi = %.2e "
                    "(measured pi x 0.96 +- 0.03)",
                    g.reflectivity, oracle_refl, dphi - pi)};
}

// ------------------------------------------------------------------ 4
Outcome polariton_lifetime() {
    const auto lt = spectra::polariton_lifetime(reference_defaults());
    const double tau_ns = lt.tau_p * 1e3;
    const bool ok = std::abs(tau_ns / 85.0 - 1.0) <= 0.05 && lt.saturation_flux >= 5.6 &&
                    lt.saturation_flux <= 6.2 && within(lt.tau_p, oracle::frozen::tau_p, 1e-9);
    return {ok, fmt("tau_p = %.2f ns (target 85 ns +- 5%%, deviation %+.1f%%); saturation flux %.3f MHz in "
                    "[5.6, 6.2]",
                    tau_ns, 100.0 * (tau_ns / 85.0 - 1.0), lt.saturation_flux)};
}

// ------------------------------------------------------------------ 5
Outcome collective_rabi() {
    const double omega = units::mhz_from_angular(ensemble::collective_rabi(reference_defaults()));
    const double oracle_mhz = std::sqrt(800.0) * 6.0 * 10.0 / (2.0 * 545.0);
    const bool ok = within(omega, oracle_mhz, 1e-9) && std::abs(omega / 1.5 - 1.0) <= 0.05;
    return {ok, fmt("Omega/2pi = %.4f MHz (oracle %.4f), %+.1f%% from measured 1.5 MHz", omega, oracle_mhz,
                    100.0 * (omega / 1.5 - 1.0))};
}

// ------------------------------------------------------------------ 6
Outcome dephasing_chain() {
    const auto p = reference_defaults();
    const double motional = ensemble::motional_dephasing_time(p);
    // Independent motional oracle: sqrt(m / kB T) / |k1 + k2| with perpendicular beams.
    const double m = 86.909180527 * 1.66053906660e-27;
    const double v_rms = std::sqrt(1.380649e-23 * 3e-6 / m);  // m/s == um/us
    const double k1 = two_pi / 0.780, k2 = two_pi / 0.480;  // rad/um
    const double motional_oracle = 1.0 / (v_rms * std::hypot(k1, k2));
    const double spread = ensemble::rabi_spread_dephasing(two_pi * 1.5, 0.04);
    const double spread_oracle = std::sqrt(2.0) / (0.04 * two_pi * 1.5);
    const std::vector<double> pair{motional, spread};
    const double combined = ensemble::combined_dephasing(pair);
    const double combined_oracle = 1.0 / std::sqrt(1.0 / (motional_oracle * motional_oracle) +
                                                   1.0 / (spread_oracle * spread_oracle));
    auto rel = [](double a, double b) { return std::abs(a / b - 1.0); };
    const bool ok = rel(motional, motional_oracle) <= 0.03 && rel(spread, spread_oracle) <= 0.03 &&
                    rel(combined, combined_oracle) <= 0.03 && rel(combined, 2.65) <= 0.03;
    return {ok, fmt("motional %.3f us (oracle %.3f), Omega-spread %.3f us (oracle %.3f), combined %.3f us "
                    "(oracle %.3f, 2.65 from rounded inputs); measured tau_d = 2.8 us",
                    motional, motional_oracle, spread, spread_oracle, combined, combined_oracle)};
}

// ------------------------------------------------------------------ 7
Outcome blockade_statistics() {
    const auto p = reference_defaults();
    const double threshold = p.c_rr / std::pow(4.0 * p.sigma_a, 6);
    constexpr int seeds = 1000;
    std::vector<double> fractions;
    double neighbors = 0.0;
    double shift = 0.0;
    for (int s = 0; s < seeds; ++s) {
        const auto cloud = ensemble::sample_cloud(p, derive_seed(7, static_cast<std::uint64_t>(s)));
        const auto stats = ensemble::blockade_stats(cloud, p.c_rr, 2.8, threshold);
        fractions.push_back(*stats.fraction_blockaded);
        neighbors += stats.mean_neighbors_within;
        if (s == 0) shift = ensemble::blockade_stats(cloud, p.c_rr, 20.0, threshold).shift_at_ref;
    }
    neighbors /= seeds;
    double mean = 0.0;
    for (double f : fractions) mean += f;
    mean /= seeds;
    double var = 0.0;
    for (double f : fractions) var += (f - mean) * (f - mean);
    const double se = std::sqrt(var / (seeds - 1) / seeds);
    const double oracle_fraction = oracle::chi2_3_cdf(8.0);
    const bool ok = std::abs(mean - oracle_fraction) <= 3.0 * se && within(shift, 2.41, 1e-3) &&
                    within(neighbors, 13.0, 1.0);
    return {ok, fmt("fraction %.5f +- %.5f vs chi2_3 oracle %.5f (%.2f SE); shift at 20 um %.5f MHz vs "
                    "2.41 +- 0.001 (exact 154e6 / 20^6 = 2.40625); neighbours within 2.8 um %.3f (13 +- 1)",
                    mean, se, oracle_fraction, (mean - oracle_fraction) / se, shift, neighbors)};
}

// ------------------------------------------------------------------ 8
Outcome pi_pulse_preparation() {
    const double omega = two_pi * 1.5;
    const double t_pi = dynamics::pi_pulse_duration(omega);
    const double pop = dynamics::rabi_population(t_pi, omega, 2.8);
    const double envelope = std::exp(-t_pi * t_pi / (2.8 * 2.8));
    return {within(pop, 0.986, 0.002),
            fmt("rabi_population(t_pi = %.4f us) = %.5f, target 0.986 +- 0.002; the target equals the bare "
                "envelope exp(-t_pi^2/tau_d^2) = %.5f, whereas the population (1 - cos e^{-t^2/tau^2})/2 "
                "at t_pi is (1 + envelope)/2",
                t_pi, pop, envelope)};
}

// ------------------------------------------------------------------ 9
Outcome counting_oracle_equivalence() {
    const auto p = reference_defaults();
    dynamics::Protocol proto;
    proto.mode = dynamics::DetectionMode::counting;
    proto.probe_duration = 12.0;
    proto.bin_width = 2.0;
    proto.phi_g = 0.725;
    proto.phi_r = 0.045 * 0.725;
    proto.tau_r = 42.0;
    proto.eta_r = 1.0;
    constexpr std::size_t shots = 100000;
    const auto ground = dynamics::batch(proto, false, shots, p, 901);
    const auto excited = dynamics::batch(proto, true, shots, p, 902);

    auto tvd = [&](const std::vector<dynamics::ShotRecord>& recs, auto pmf) {
        std::map<int, double> hist;
        for (const auto& r : recs) hist[static_cast<int>(dynamics::integrated_value(r, proto))] += 1.0 / shots;
        const int top = std::max(hist.rbegin()->first, 60);
        double d = 0.0;
        double model_mass = 0.0;
        for (int n = 0; n <= top; ++n) {
            const double m = pmf(n);
            model_mass += m;
            d += std::abs((hist.contains(n) ? hist[n] : 0.0) - m);
        }
        return 0.5 * (d + (1.0 - model_mass));
    };
    const double tvd_g = tvd(ground, [](int n) { return oracle::count_ground(n, 12.0, 0.725); });
    const double tvd_r =
        tvd(excited, [](int n) { return oracle::count_rydberg(n, 12.0, 0.725, 0.045 * 0.725, 42.0); });
    std::size_t jumps = 0;
    for (const auto& r : excited) jumps += r.jump_time.has_value();
    const double jf = static_cast<double>(jumps) / shots;
    const double jf_model = 1.0 - std::exp(-12.0 / 42.0);
    const bool ok = tvd_g < 0.01 && tvd_r < 0.01 && within(jf, 0.249, 0.005) && within(jf_model, 0.249, 0.005);
    return {ok, fmt("TVD ground %.4f, Rydberg %.4f (< 0.01, 1e5 shots each); jump fraction %.4f simulated, "
                    "%.4f model (0.249 +- 0.005)",
                    tvd_g, tvd_r, jf, jf_model)};
}

// ------------------------------------------------------------------ 10
Outcome homodyne_fidelity() {
    const detection::QuadratureModel m{10.0, 0.58, 0.07, 0.51, 38.0, 0.99};
    const auto r = detection::error_rates_homodyne(m, 0.27);
    const bool ok = r.fidelity >= 0.88 && r.fidelity <= 0.93 && r.eps_g >= 0.04 && r.eps_g <= 0.08 &&
                    within(r.fidelity, oracle::frozen::hd_fidelity, 1e-7);
    return {ok, fmt("fidelity %.4f in [0.88, 0.93] (measured 0.899 +- 0.015); eps_G %.4f in [0.04, 0.08] "
                    "(measured 0.069 +- 0.013); eps_R %.4f",
                    r.fidelity, r.eps_g, r.eps_r)};
}

// ------------------------------------------------------------------ 11
Outcome counting_model_honesty() {
    const detection::CountModel m{12.0, 0.725, 0.045 * 0.725, 42.0, 1.0};
    const auto r = detection::error_rates_counting(m, 5);
    const double eg_oracle = oracle::poisson_cdf_below(5, 12.0 * 0.725);
    double below = 0.0;
    for (int n = 0; n < 5; ++n) below += oracle::count_rydberg(n, 12.0, 0.725, 0.045 * 0.725, 42.0);
    const double er_oracle = 1.0 - below;
    const bool ok = within(r.eps_g, eg_oracle, 1e-9) && within(r.eps_g, 0.066, 0.002) &&
                    within(r.eps_r, er_oracle, 1e-6) && within(r.eps_r, 0.12, 0.01);
    return {ok, fmt("model eps_G %.4f (Poisson oracle %.4f), eps_R %.4f (quadrature oracle %.4f); measured "
                    "0.053 / 0.048 lie outside this Poisson model",
                    r.eps_g, eg_oracle, r.eps_r, er_oracle)};
}

// ------------------------------------------------------------------ 12
// Synthetic data come from a generator independent of the library.

double rabi_model(double t, double omega, double tau, double amp, double off) {
    return off + amp * 0.5 * (1.0 - std::cos(omega * t) * std::exp(-t * t / (tau * tau)));
}

bool recovered(const fitting::FitResult& fit, const std::map<std::string, double>& truth) {
    for (const auto& par : fit.parameters) {
        if (par.fixed) continue;
        const double diff = par.value - truth.at(par.name);
        const double err = diff > 0.0 ? par.error_lower : par.error_upper;
        if (!(std::abs(diff) <= 3.0 * err)) return false;
    }
    return true;
}

Outcome fit_round_trips() {
    constexpr int trials = 50;
    std::map<std::string, int> hits;
    const std::vector<std::string> names{"rabi", "lifetime", "count_histogram", "quadrature_histogram"};
    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(0xACCE55 + trial);
        std::normal_distribution<double> noise(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto attempt = [&](const std::string& name, auto&& fn) {
            try {
                hits[name] += fn() ? 1 : 0;
            } catch (const std::exception&) {
            }
        };

        attempt("rabi", [&] {
            const double omega = two_pi * 1.5, tau = 2.8, amp = 0.95, off = 0.02, sigma = 0.03;
            std::vector<fitting::TracePoint> pts;
            for (int i = 0; i <= 30; ++i) {
                const double t = 0.1 * i;
                pts.push_back({t, rabi_model(t, omega, tau, amp, off) + sigma * noise(rng), sigma});
            }
            const auto fit = fitting::fit_rabi(pts);
            return fit.converged && recovered(fit, {{"omega", omega}, {"tau_d", tau}, {"amplitude", amp}, {"offset", off}});
        });

        attempt("lifetime", [&] {
            const double rate0 = 0.7, tau = 42.0, floor = 0.03, sigma = 0.01;
            std::vector<fitting::TracePoint> pts;
            for (int i = 0; i <= 40; ++i) {
                const double t = 3.0 * i;
                pts.push_back({t, floor + rate0 * (1.0 - std::exp(-t / tau)) + sigma * noise(rng), sigma});
            }
            const auto fit = fitting::fit_lifetime(pts, fitting::LifetimeModel::recovery);
            return fit.converged && recovered(fit, {{"rate0", rate0}, {"tau_r", tau}, {"floor", floor}});
        });

        attempt("count_histogram", [&] {
            const double t_i = 12.0, phi_g = 0.725, phi_r = 0.045 * 0.725, tau = 42.0, eta = 0.9;
            fitting::CountHistogram hist;
            std::exponential_distribution<double> jump(1.0 / tau);
            for (int s = 0; s < 3000; ++s) {
                double mean = t_i * phi_g;
                if (unif(rng) < eta) {
                    const double tj = jump(rng);
                    mean = tj < t_i ? tj * phi_r + (t_i - tj) * phi_g : t_i * phi_r;
                }
                ++hist[std::poisson_distribution<int>(mean)(rng)];
            }
            const auto fit = fitting::fit_count_histogram(hist, t_i, phi_g, tau);
            return fit.converged && recovered(fit, {{"phi_r", phi_r}, {"eta_r", eta}});
        });

        attempt("quadrature_histogram", [&] {
            const double t_i = 10.0, phi = 0.58, rg = 0.07, rr = 0.51, tau = 38.0, eta = 0.95;
            std::exponential_distribution<double> jump(1.0 / tau);
            std::vector<double> xs;
            const double a_g = -std::sqrt(2.0 * phi * rg / t_i), a_r = std::sqrt(2.0 * phi * rr / t_i);
            for (int s = 0; s < 3000; ++s) {
                double mean = a_g * t_i;
                if (unif(rng) < eta) {
                    const double tj = std::min(jump(rng), t_i);
                    mean = a_g * (t_i - tj) + a_r * tj;
                }
                xs.push_back(mean + std::sqrt(0.5) * noise(rng));
            }
            const auto fit = fitting::fit_quadrature_histogram(xs, t_i, phi, rg, tau);
            return fit.converged && recovered(fit, {{"refl_r", rr}, {"eta_r", eta}});
        });
    }
    bool ok = true;
    std::string detail;
    for (const auto& n : names) {
        const int k = hits[n];
        ok = ok && k >= 48;  // >= 95% of 50
        detail += fmt("%s%s %d/%d", detail.empty() ? "" : ", ", n.c_str(), k, trials);
    }
    return {ok, detail + " within 3 reported standard errors (need >= 48/50 each)"};
}

// ------------------------------------------------------------------ 13
std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

Outcome manifest_determinism() {
    const fs::path root = fs::temp_directory_path() / fmt("superatom-acceptance-%d", static_cast<int>(::getpid()));
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> commands{
        {"spectra", "--seed", "3"},
        {"spectra", "--blocked", "--points", "201"},
        {"rabi", "--seed", "11", "--shots", "60", "--td-points", "13"},
        {"detect", "--mode", "counting", "--shots", "300", "--seed", "5"},
        {"detect", "--mode", "homodyne", "--shots", "300", "--seed", "5"},
        {"optimize", "--mode", "counting"},
        {"optimize", "--mode", "homodyne", "--lifetime", "inverse-flux", "--flux", "0.4", "--flux", "0.58"},
        {"ensemble", "--seed", "9", "--clouds", "3"},
    };
    int identical = 0;
    std::string failures;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const auto first = root / fmt("run%zu", i);
        const auto again = root / fmt("replay%zu", i);
        std::vector<std::string> args{"superatom-lab"};
        args.insert(args.end(), commands[i].begin(), commands[i].end());
        args.insert(args.end(), {"--out", first.string()});
        ::setenv("SUPERATOM_THREADS", "1", 1);
        const int rc1 = cli::run(args);
        ::setenv("SUPERATOM_THREADS", "4", 1);
        const int rc2 =
            cli::run({"superatom-lab", "replay", "--manifest", (first / "manifest.json").string(), "--out", again.string()});
        ::unsetenv("SUPERATOM_THREADS");
        bool same = rc1 == 0 && rc2 == 0;
        if (same) {
            auto a = read_dir(first), b = read_dir(again);
            auto ma = nlohmann::json::parse(a["manifest.json"]), mb = nlohmann::json::parse(b["manifest.json"]);
            ma.erase("wall_clock_seconds");
            mb.erase("wall_clock_seconds");
            a.erase("manifest.json");
            b.erase("manifest.json");
            same = a == b && ma == mb && !a.empty();
        }
        identical += same;
        if (!same) failures += " " + commands[i][0];
    }
    fs::remove_all(root);
    const bool ok = identical == static_cast<int>(commands.size());
    return {ok, fmt("%d/%zu subcommand runs replayed byte-identically from their manifests (1 vs 4 worker "
                    "threads; manifest timing field excluded)%s%s",
                    identical, commands.size(), failures.empty() ? "" : "; differing:", failures.c_str())};
}

struct Criterion {
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"vacuum Rabi splitting", vacuum_rabi_splitting},
        {"EIT transparency", eit_transparency},
        {"linear reflectivity and phase", reflectivity_and_phase},
        {"polariton lifetime", polariton_lifetime},
        {"collective Rabi frequency", collective_rabi},
        {"dephasing chain", dephasing_chain},
        {"blockade statistics", blockade_statistics},
        {"pi-pulse preparation", pi_pulse_preparation},
        {"counting oracle equivalence", counting_oracle_equivalence},
        {"homodyne fidelity", homodyne_fidelity},
        {"counting model honesty check", counting_model_honesty},
        {"fit round trips", fit_round_trips},
        {"manifest determinism", manifest_determinism},
    };
    std::size_t only = 0;
    if (argc > 1) only = static_cast<std::size_t>(std::strtoul(argv[1], nullptr, 10));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && only != i + 1) continue;
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %2zu %-30s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].title, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criterion(s) failed\n", failed);
    return failed ? 1 : 0;
}
