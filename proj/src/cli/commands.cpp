#include "superatom/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "default_config.hpp"

#include "superatom/detection.hpp"
#include "superatom/dynamics.hpp"
#include "superatom/ensemble.hpp"
#include "superatom/fitting.hpp"
#include "superatom/io.hpp"
#include "superatom/params.hpp"
#include "superatom/random.hpp"
#include "superatom/spectra.hpp"
#include "superatom/units.hpp"

namespace superatom::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::optional<std::string> config_path;
    std::uint64_t seed = 1;
    std::string out;
};

// Files produced by a subcommand; written together once the run succeeded.
using Outputs = std::map<std::string, std::string>;

struct Run {
    std::string subcommand;
    std::vector<std::string> replay_args;
    std::string config_text;
    Config config;
    Common common;
};

double run_value(const Config& cfg, std::string_view key, double fallback) {
    auto it = cfg.run.find(key);
    return it == cfg.run.end() ? fallback : it->second;
}

std::optional<double> run_optional(const Config& cfg, std::string_view key) {
    auto it = cfg.run.find(key);
    if (it == cfg.run.end()) return std::nullopt;
    return it->second;
}

void require_run_keys(const Config& cfg, const std::vector<std::string>& keys, const std::string& purpose) {
    std::string missing;
    for (const auto& k : keys)
        if (!cfg.run.contains(k)) missing += (missing.empty() ? "" : ", ") + k;
    if (!missing.empty()) throw ConfigError(missing, purpose + " requires config keys: " + missing);
}

double drive_dephasing_time(const Config& cfg) {
    const auto& p = cfg.system;
    const double omega = ensemble::collective_rabi(p);
    const double rel = run_value(cfg, "omega_rel_rms", 0.04);
    std::vector<double> channels{ensemble::motional_dephasing_time(p)};
    if (rel > 0.0) channels.push_back(ensemble::rabi_spread_dephasing(omega, rel));
    return ensemble::combined_dephasing(channels);
}

dynamics::Protocol counting_protocol(const Config& cfg) {
    require_run_keys(cfg, {"count_t_i_us", "count_phi_g_per_us", "count_phi_r_per_us", "count_threshold"},
                     "counting detection");
    dynamics::Protocol proto;
    proto.mode = dynamics::DetectionMode::counting;
    proto.probe_duration = cfg.run.at("count_t_i_us");
    proto.bin_width = run_value(cfg, "count_bin_us", proto.probe_duration);
    proto.phi_g = cfg.run.at("count_phi_g_per_us");
    proto.phi_r = cfg.run.at("count_phi_r_per_us");
    proto.tau_r = run_value(cfg, "count_tau_r_us", cfg.system.tau_r);
    proto.eta_r = run_optional(cfg, "count_eta_r");
    proto.dephasing_time = drive_dephasing_time(cfg);
    proto.drive_duration =
        run_value(cfg, "drive_duration_us", dynamics::pi_pulse_duration(ensemble::collective_rabi(cfg.system)));
    return proto;
}

dynamics::Protocol homodyne_protocol(const Config& cfg) {
    require_run_keys(cfg, {"hd_t_i_us", "hd_phi_per_us", "hd_refl_g", "hd_refl_r", "hd_threshold"},
                     "homodyne detection");
    dynamics::Protocol proto;
    proto.mode = dynamics::DetectionMode::homodyne;
    proto.probe_duration = cfg.run.at("hd_t_i_us");
    proto.bin_width = run_value(cfg, "hd_bin_us", proto.probe_duration);
    proto.phi = cfg.run.at("hd_phi_per_us");
    proto.refl_g = cfg.run.at("hd_refl_g");
    proto.refl_r = cfg.run.at("hd_refl_r");
    proto.tau_r = run_value(cfg, "hd_tau_r_us", cfg.system.tau_r);
    proto.eta_r = run_optional(cfg, "hd_eta_r");
    proto.dephasing_time = drive_dephasing_time(cfg);
    proto.drive_duration =
        run_value(cfg, "drive_duration_us", dynamics::pi_pulse_duration(ensemble::collective_rabi(cfg.system)));
    return proto;
}

int integer_threshold(double v, const char* key) {
    if (v != std::floor(v) || v < 0.0) throw ConfigError(key, std::string(key) + " must be a non-negative integer");
    return static_cast<int>(v);
}

detection::CountModel count_model(const dynamics::Protocol& proto, const SystemParams& p) {
    return {proto.probe_duration, proto.phi_g, proto.phi_r, proto.tau_r, dynamics::preparation_efficiency(proto, p)};
}

detection::QuadratureModel quadrature_model(const dynamics::Protocol& proto, const SystemParams& p) {
    return {proto.probe_duration, proto.phi,  proto.refl_g,
            proto.refl_r,         proto.tau_r, dynamics::preparation_efficiency(proto, p)};
}

std::vector<double> grid(double lo, double hi, int points, const char* what) {
    if (points < 1) throw UsageError(std::string(what) + ": grid needs at least one point");
    if (!(lo <= hi)) throw UsageError(std::string(what) + ": minimum exceeds maximum");
    if (points == 1 && lo != hi) throw UsageError(std::string(what) + ": one point needs min == max");
    return spectra::linear_grid(lo, hi, static_cast<std::size_t>(points));
}

// ---------------------------------------------------------------- spectra

struct SpectraFlags {
    double delta_min = -20.0;
    double delta_max = 20.0;
    int points = 801;
    bool blocked = false;
};

Outputs cmd_spectra(const Run& run, const SpectraFlags& f) {
    const auto& p = run.config.system;
    if (f.delta_min > f.delta_max) throw UsageError("--delta-min exceeds --delta-max");
    auto deltas = grid(units::angular_from_mhz(f.delta_min), units::angular_from_mhz(f.delta_max), f.points,
                       "detuning");
    const auto table = spectra::sweep(p, deltas, f.blocked);

    Json summary;
    summary["blocked"] = f.blocked;
    Json peaks = Json::array();
    for (auto i : spectra::transmission_peaks(table)) peaks.push_back(io::number(units::mhz_from_angular(table[i].delta)));
    summary["peak_delta_MHz"] = peaks;

    const auto cond = f.blocked ? spectra::ProbeCondition::blocked(0.0) : spectra::ProbeCondition::co_swept(0.0);
    const auto refl = spectra::reflection(p, cond);
    summary["transmission_at_resonance"] = io::number(spectra::transmission(p, cond));
    summary["reflectivity_at_resonance"] = io::number(refl.reflectivity);
    summary["phase_at_resonance"] = io::number(refl.phase);
    const auto other = spectra::reflection(
        p, f.blocked ? spectra::ProbeCondition::co_swept(0.0) : spectra::ProbeCondition::blocked(0.0));
    summary["phase_shift_unblocked_minus_blocked"] =
        io::number(f.blocked ? other.phase - refl.phase : refl.phase - other.phase);
    if (p.omega_c > 0.0) {
        try {
            const auto lt = spectra::polariton_lifetime(p);
            summary["tau_p_us"] = io::number(lt.tau_p);
            summary["eit_hwhm_MHz"] = io::number(units::mhz_from_angular(lt.hwhm));
            summary["saturation_flux_MHz"] = io::number(lt.saturation_flux);
        } catch (const spectra::NoEitPeak& e) {
            summary["tau_p_us"] = nullptr;
            summary["tau_p_note"] = e.what();
        }
    } else {
        summary["tau_p_us"] = nullptr;
        summary["tau_p_note"] = "no control field";
    }
    return {{"spectrum.csv", io::spectrum_csv(table)}, {"summary.json", io::dump(summary)}};
}

// ---------------------------------------------------------------- rabi

struct RabiFlags {
    double td_min = 0.0;
    double td_max = 3.0;
    int td_points = 31;
    int shots = 200;
    std::size_t bootstrap = 0;
};

Outputs cmd_rabi(const Run& run, const RabiFlags& f) {
    const auto& p = run.config.system;
    if (f.shots < 1) throw UsageError("--shots must be >= 1");
    if (f.td_min < 0.0) throw UsageError("--td-min must be >= 0");
    const auto tds = grid(f.td_min, f.td_max, f.td_points, "drive duration");
    auto proto = counting_protocol(run.config);
    proto.eta_r.reset();  // preparation follows the drive duration
    const int n_t = integer_threshold(run.config.run.at("count_threshold"), "count_threshold");

    std::vector<fitting::TracePoint> trace;
    io::CsvWriter csv({"t_d_us", "population", "std_error", "model"});
    for (std::size_t k = 0; k < tds.size(); ++k) {
        proto.drive_duration = tds[k];
        const auto shots = dynamics::batch(proto, true, static_cast<std::size_t>(f.shots), p, derive_seed(run.common.seed, k));
        std::size_t as_r = 0;
        for (const auto& s : shots) as_r += dynamics::integrated_value(s, proto) < n_t;
        const double n = static_cast<double>(f.shots);
        const double pop = static_cast<double>(as_r) / n;
        const double smoothed = (static_cast<double>(as_r) + 1.0) / (n + 2.0);
        const double se = std::sqrt(smoothed * (1.0 - smoothed) / n);
        trace.push_back({tds[k], pop, se});
    }

    Json out;
    const double omega_expected = ensemble::collective_rabi(p);
    out["expected_omega_MHz"] = io::number(units::mhz_from_angular(omega_expected));
    out["expected_tau_d_us"] = io::number(proto.dephasing_time);
    fitting::FitOptions opt;
    opt.bootstrap_resamples = f.bootstrap;
    opt.bootstrap_seed = derive_seed(run.common.seed, 1u << 20);
    fitting::FitResult fit;
    try {
        fit = fitting::fit_rabi(trace, opt);
    } catch (const fitting::DegenerateData& e) {
        throw NumericalFailure(e.what());
    }
    for (const auto& pt : trace) {
        std::vector<double> x;
        for (const auto& par : fit.parameters) x.push_back(par.value);
        const double model =
            x[3] + x[2] * 0.5 * (1.0 - std::cos(x[0] * pt.t) * std::exp(-(pt.t * pt.t) / (x[1] * x[1])));
        csv.row(std::vector<double>{pt.t, pt.value, pt.sigma, model});
    }
    out["fitted_omega_MHz"] = io::number(units::mhz_from_angular(fit.value("omega")));
    out["fitted_tau_d_us"] = io::number(fit.value("tau_d"));
    out["fit"] = io::to_json(fit);
    if (!fit.converged) throw NumericalFailure("Rabi fit did not converge");
    return {{"rabi_trace.csv", csv.str()}, {"rabi_fit.json", io::dump(out)}};
}

// ---------------------------------------------------------------- detect

struct DetectFlags {
    std::string mode = "counting";
    int shots = 400;
    bool records = true;
};

std::vector<io::HistogramRow> count_histogram_rows(const std::vector<double>& values,
                                                   const std::function<double(int)>& model, int n_max) {
    std::vector<io::HistogramRow> rows;
    for (int n = 0; n <= n_max; ++n) {
        std::size_t hits = 0;
        for (double v : values) hits += static_cast<int>(v) == n;
        rows.push_back({static_cast<double>(n), model(n), static_cast<double>(hits) / static_cast<double>(values.size())});
    }
    return rows;
}

std::vector<io::HistogramRow> quadrature_histogram_rows(const std::vector<double>& values,
                                                        const std::function<double(double)>& cdf) {
    const auto edges = fitting::freedman_diaconis_edges(values);
    std::vector<io::HistogramRow> rows;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        std::size_t hits = 0;
        for (double v : values)
            hits += (v >= edges[k] && v < edges[k + 1]) || (k + 2 == edges.size() && v == edges[k + 1]);
        rows.push_back({0.5 * (edges[k] + edges[k + 1]), cdf(edges[k + 1]) - cdf(edges[k]),
                        static_cast<double>(hits) / static_cast<double>(values.size())});
    }
    return rows;
}

Outputs cmd_detect(const Run& run, const DetectFlags& f) {
    const auto& p = run.config.system;
    if (f.shots < 1) throw UsageError("--shots must be >= 1");
    const bool counting = f.mode == "counting";
    const auto proto = counting ? counting_protocol(run.config) : homodyne_protocol(run.config);
    const auto n = static_cast<std::size_t>(f.shots);
    const auto ground = dynamics::batch(proto, false, n, p, derive_seed(run.common.seed, 0));
    const auto excited = dynamics::batch(proto, true, n, p, derive_seed(run.common.seed, 1));

    std::vector<double> x_ground, x_excited;
    for (const auto& s : ground) x_ground.push_back(dynamics::integrated_value(s, proto));
    for (const auto& s : excited) x_excited.push_back(dynamics::integrated_value(s, proto));

    Outputs files;
    Json out;
    out["mode"] = f.mode;
    out["shots"] = f.shots;
    fitting::FitResult fit;
    bool fitted = false;

    if (counting) {
        const auto model = count_model(proto, p);
        const int n_t = integer_threshold(run.config.run.at("count_threshold"), "count_threshold");
        double max_seen = 0.0;
        for (double v : x_ground) max_seen = std::max(max_seen, v);
        for (double v : x_excited) max_seen = std::max(max_seen, v);
        const double mu = model.t_i * model.phi_g;
        const int n_max = static_cast<int>(std::max(max_seen, std::ceil(mu + 6.0 * std::sqrt(mu) + 5.0)));
        files["histogram_ground.csv"] = io::histogram_csv(
            count_histogram_rows(x_ground, [&](int k) { return detection::count_pmf_ground(model, k); }, n_max));
        files["histogram_pi.csv"] = io::histogram_csv(
            count_histogram_rows(x_excited, [&](int k) { return detection::count_pmf_rydberg(model, k); }, n_max));

        std::size_t false_pos = 0, false_neg = 0;
        for (double v : x_ground) false_pos += v < n_t;
        for (double v : x_excited) false_neg += v >= n_t;
        out["model"] = io::to_json(model);
        out["threshold"] = n_t;
        out["model_error_rates"] = io::to_json(detection::error_rates_counting(model, n_t));
        out["empirical_error_rates"] = io::to_json(
            detection::make_error_rates(static_cast<double>(false_pos) / n, static_cast<double>(false_neg) / n));
        if (n >= 100) {
            fitting::CountHistogram hist;
            for (double v : x_excited) ++hist[static_cast<int>(v)];
            fit = fitting::fit_count_histogram(hist, model.t_i, model.phi_g, model.tau_r);
            fitted = true;
        }
    } else {
        const auto model = quadrature_model(proto, p);
        const double x_t = run.config.run.at("hd_threshold");
        files["histogram_ground.csv"] = io::histogram_csv(
            quadrature_histogram_rows(x_ground, [&](double x) { return detection::quad_cdf_ground(model, x); }));
        files["histogram_pi.csv"] = io::histogram_csv(
            quadrature_histogram_rows(x_excited, [&](double x) { return detection::quad_cdf_rydberg(model, x); }));

        std::size_t false_pos = 0, false_neg = 0;
        for (double v : x_ground) false_pos += v > x_t;
        for (double v : x_excited) false_neg += v <= x_t;
        out["model"] = io::to_json(model);
        out["threshold"] = io::number(x_t);
        out["model_error_rates"] = io::to_json(detection::error_rates_homodyne(model, x_t));
        out["empirical_error_rates"] = io::to_json(
            detection::make_error_rates(static_cast<double>(false_pos) / n, static_cast<double>(false_neg) / n));
        if (n >= 100) {
            fit = fitting::fit_quadrature_histogram(x_excited, model.t_i, model.phi, model.refl_g, model.tau_r);
            fitted = true;
        }
    }
    if (fitted) {
        out["fit"] = io::to_json(fit);
    } else {
        out["fit"] = nullptr;
        out["fit_note"] = "histogram fit needs at least 100 shots";
    }
    if (f.records) {
        files["records_ground.csv"] = io::batch_csv(ground);
        files["records_pi.csv"] = io::batch_csv(excited);
    }
    files["detect.json"] = io::dump(out);
    if (fitted && !fit.converged) throw NumericalFailure("histogram fit did not converge");
    return files;
}

// ---------------------------------------------------------------- optimize

struct OptimizeFlags {
    std::string mode = "counting";
    double t_min = 4.0;
    double t_max = 24.0;
    int t_points = 21;
    std::optional<double> threshold_min;
    std::optional<double> threshold_max;
    std::optional<int> threshold_points;
    std::vector<double> fluxes;
    std::string lifetime = "fixed";
};

Outputs cmd_optimize(const Run& run, const OptimizeFlags& f) {
    const auto& p = run.config.system;
    const auto t_grid = grid(f.t_min, f.t_max, f.t_points, "t_i");
    const auto scaling =
        f.lifetime == "inverse-flux" ? detection::LifetimeScaling::inverse_flux : detection::LifetimeScaling::fixed;
    for (double v : f.fluxes)
        if (!(v > 0.0)) throw UsageError("--flux values must be > 0");

    detection::Optimum opt;
    Json out;
    out["mode"] = f.mode;
    if (f.mode == "counting") {
        const auto proto = counting_protocol(run.config);
        detection::CountingSearch s;
        s.base = count_model(proto, p);
        s.t_grid = t_grid;
        const double lo = f.threshold_min.value_or(1.0);
        const double hi = f.threshold_max.value_or(12.0);
        if (lo < 0.0 || lo != std::floor(lo) || hi != std::floor(hi))
            throw UsageError("counting thresholds must be non-negative integers");
        if (lo > hi) throw UsageError("--threshold-min exceeds --threshold-max");
        for (int k = static_cast<int>(lo); k <= static_cast<int>(hi); ++k) s.threshold_grid.push_back(k);
        s.flux_grid = f.fluxes;
        s.lifetime = scaling;
        out["base_model"] = io::to_json(s.base);
        opt = detection::optimize_detection(s);
    } else {
        const auto proto = homodyne_protocol(run.config);
        detection::HomodyneSearch s;
        s.base = quadrature_model(proto, p);
        s.t_grid = t_grid;
        s.threshold_grid = grid(f.threshold_min.value_or(-1.0), f.threshold_max.value_or(2.0),
                                f.threshold_points.value_or(31), "threshold");
        s.flux_grid = f.fluxes;
        s.lifetime = scaling;
        out["base_model"] = io::to_json(s.base);
        opt = detection::optimize_detection(s);
    }

    io::CsvWriter csv({"t_i_us", "threshold", "flux_per_us", "eps_g", "eps_r", "fidelity"});
    for (const auto& pt : opt.surface)
        csv.row(std::vector<double>{pt.t_i, pt.threshold, pt.flux, pt.rates.eps_g, pt.rates.eps_r, pt.rates.fidelity});
    out["lifetime_scaling"] = f.lifetime;
    out["optimum"] = {{"t_i_us", io::number(opt.best.t_i)},
                      {"threshold", io::number(opt.best.threshold)},
                      {"flux_per_us", io::number(opt.best.flux)},
                      {"error_rates", io::to_json(opt.best.rates)}};
    out["t_i_at_grid_edge"] = opt.best.t_i == t_grid.front() || opt.best.t_i == t_grid.back();
    return {{"surface.csv", csv.str()}, {"optimum.json", io::dump(out)}};
}

// ---------------------------------------------------------------- ensemble

struct EnsembleFlags {
    double r_neighbors = 2.8;
    std::optional<double> r_shift;
    std::optional<double> shift_threshold;
    int clouds = 1;
};

Outputs cmd_ensemble(const Run& run, const EnsembleFlags& f) {
    const auto& p = run.config.system;
    if (f.clouds < 1) throw UsageError("--clouds must be >= 1");
    if (!(f.r_neighbors > 0.0)) throw UsageError("--r-neighbors must be > 0");
    const double r_shift = f.r_shift.value_or(4.0 * p.sigma_a);
    if (!(r_shift > 0.0)) throw UsageError("--r-shift must be > 0");
    const double threshold = f.shift_threshold.value_or(p.c_rr / std::pow(4.0 * p.sigma_a, 6));

    double fraction_sum = 0.0;
    double neighbors_sum = 0.0;
    ensemble::BlockadeStats first;
    ensemble::CloudSample first_cloud;
    bool has_fraction = true;
    for (int c = 0; c < f.clouds; ++c) {
        const auto cloud = ensemble::sample_cloud(p, derive_seed(run.common.seed, static_cast<std::uint64_t>(c)));
        const auto by_shift = ensemble::blockade_stats(cloud, p.c_rr, r_shift, threshold);
        const auto by_contact = ensemble::blockade_stats(cloud, p.c_rr, f.r_neighbors, threshold);
        if (c == 0) {
            first = by_shift;
            first_cloud = cloud;
        }
        has_fraction = has_fraction && by_shift.fraction_blockaded.has_value();
        fraction_sum += by_shift.fraction_blockaded.value_or(0.0);
        neighbors_sum += by_contact.mean_neighbors_within;
    }
    ensemble::BlockadeStats pooled = first;
    if (has_fraction) pooled.fraction_blockaded = fraction_sum / f.clouds;
    else pooled.fraction_blockaded.reset();
    pooled.mean_neighbors_within = neighbors_sum / f.clouds;

    Json out = io::to_json(pooled);
    out["clouds"] = f.clouds;
    out["shift_threshold_MHz"] = io::number(threshold);
    out["r_shift_um"] = io::number(r_shift);
    out["r_neighbors_um"] = io::number(f.r_neighbors);
    out["collective_rabi_MHz"] = io::number(units::mhz_from_angular(ensemble::collective_rabi(p)));
    if (p.temperature > 0.0) out["motional_dephasing_us"] = io::number(ensemble::motional_dephasing_time(p));
    return {{"blockade.json", io::dump(out)}, {"cloud.csv", io::cloud_csv(first_cloud)}};
}

// ---------------------------------------------------------------- driver

std::vector<std::string> strip_location_flags(const std::vector<std::string>& args) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--out" || a == "--config" || a == "-o" || a == "-c") {
            ++i;
            continue;
        }
        if (a.rfind("--out=", 0) == 0 || a.rfind("--config=", 0) == 0) continue;
        kept.push_back(a);
    }
    return kept;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open `" + path.string() + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_outputs(const Run& run, const Outputs& files, double seconds) {
    const fs::path dir(run.common.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory `" + dir.string() + "`: " + ec.message());
    for (const auto& [name, contents] : files) io::write_file_atomic(dir / name, contents);

    Json m;
    m["tool"] = "superatom-lab";
    m["version"] = tool_version;
    m["subcommand"] = run.subcommand;
    m["arguments"] = run.replay_args;
    m["seed"] = run.common.seed;
    m["config_text"] = run.config_text;
    m["resolved_parameters"] = io::to_json(run.config.system);
    Json run_keys = Json::object();
    for (const auto& [k, v] : run.config.run) run_keys[k] = io::number(v);
    m["run_parameters"] = run_keys;
    Json names = Json::array();
    for (const auto& [name, contents] : files) names.push_back(name);
    m["outputs"] = names;
    m["wall_clock_seconds"] = io::number(seconds);
    io::write_file_atomic(dir / "manifest.json", io::dump(m));
}

struct Invocation {
    std::vector<std::string> args;
    std::optional<std::string> config_text;  // replaces --config when replaying
};

int execute(const Invocation& inv);

int replay(const std::string& manifest_path, const std::string& out) {
    const auto m = Json::parse(read_text(manifest_path));
    Invocation inv;
    inv.args = {"superatom-lab", m.at("subcommand").get<std::string>()};
    for (const auto& a : m.at("arguments")) inv.args.push_back(a.get<std::string>());
    inv.args.push_back("--out");
    inv.args.push_back(out);
    inv.config_text = m.at("config_text").get<std::string>();
    return execute(inv);
}

int execute(const Invocation& inv) {
    CLI::App app{"Cavity Rydberg superatom simulator: spectra, detection statistics and fits"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    Common common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("-c,--config", common.config_path, "key = value config file (built-in defaults when omitted)");
        sub->add_option("--seed", common.seed, "master seed")->capture_default_str();
        sub->add_option("-o,--out", common.out, "output directory")->required();
    };

    SpectraFlags spectra_f;
    auto* spectra = app.add_subcommand("spectra", "co-swept transmission/reflection spectrum and EIT summary");
    add_common(spectra);
    spectra->add_option("--delta-min", spectra_f.delta_min, "lowest probe detuning, MHz")->capture_default_str();
    spectra->add_option("--delta-max", spectra_f.delta_max, "highest probe detuning, MHz")->capture_default_str();
    spectra->add_option("--points", spectra_f.points, "grid points")->capture_default_str();
    spectra->add_flag("--blocked", spectra_f.blocked, "superatom in |R>: control field blockaded");

    RabiFlags rabi_f;
    auto* rabi = app.add_subcommand("rabi", "simulated Rabi oscillation trace and fit");
    add_common(rabi);
    rabi->add_option("--td-min", rabi_f.td_min, "shortest drive, us")->capture_default_str();
    rabi->add_option("--td-max", rabi_f.td_max, "longest drive, us")->capture_default_str();
    rabi->add_option("--td-points", rabi_f.td_points, "drive durations")->capture_default_str();
    rabi->add_option("--shots", rabi_f.shots, "shots per drive duration")->capture_default_str();
    rabi->add_option("--bootstrap", rabi_f.bootstrap, "bootstrap resamples for the fit (0: off)")->capture_default_str();

    DetectFlags detect_f;
    auto* detect = app.add_subcommand("detect", "single-shot detection histograms, error rates and fit");
    add_common(detect);
    detect->add_option("--mode", detect_f.mode, "counting or homodyne")
        ->check(CLI::IsMember({"counting", "homodyne"}))
        ->capture_default_str();
    detect->add_option("--shots", detect_f.shots, "shots per branch")->capture_default_str();
    detect->add_flag("!--no-records", detect_f.records, "skip the per-bin record export");

    OptimizeFlags opt_f;
    auto* optimize = app.add_subcommand("optimize", "fidelity surface over integration time and threshold");
    add_common(optimize);
    optimize->add_option("--mode", opt_f.mode, "counting or homodyne")
        ->check(CLI::IsMember({"counting", "homodyne"}))
        ->capture_default_str();
    optimize->add_option("--t-min", opt_f.t_min, "shortest integration time, us")->capture_default_str();
    optimize->add_option("--t-max", opt_f.t_max, "longest integration time, us")->capture_default_str();
    optimize->add_option("--t-points", opt_f.t_points, "integration times")->capture_default_str();
    optimize->add_option("--threshold-min", opt_f.threshold_min, "lowest threshold (counting 1, homodyne -1)");
    optimize->add_option("--threshold-max", opt_f.threshold_max, "highest threshold (counting 12, homodyne 2)");
    optimize->add_option("--threshold-points", opt_f.threshold_points, "homodyne thresholds (31)");
    optimize->add_option("--flux", opt_f.fluxes, "probe fluxes to scan, photons/us (default: configured flux)");
    optimize->add_option("--lifetime", opt_f.lifetime, "fixed or inverse-flux")
        ->check(CLI::IsMember({"fixed", "inverse-flux"}))
        ->capture_default_str();

    EnsembleFlags ens_f;
    auto* ens = app.add_subcommand("ensemble", "blockade statistics of sampled clouds");
    add_common(ens);
    ens->add_option("--r-neighbors", ens_f.r_neighbors, "neighbour-count radius, um")->capture_default_str();
    ens->add_option("--r-shift", ens_f.r_shift, "radius for the reported pair shift, um (4 sigma_a)");
    ens->add_option("--shift-threshold", ens_f.shift_threshold, "blockade shift threshold, MHz (C_RR/(4 sigma_a)^6)");
    ens->add_option("--clouds", ens_f.clouds, "clouds pooled")->capture_default_str();

    std::string manifest_path, replay_out;
    auto* rep = app.add_subcommand("replay", "rerun the command recorded in a manifest");
    rep->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
    rep->add_option("-o,--out", replay_out, "output directory")->required();

    std::vector<const char*> argv;
    for (const auto& a : inv.args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage_error;
    }

    if (rep->parsed()) return replay(manifest_path, replay_out);

    Run run;
    run.common = common;
    run.subcommand = app.get_subcommands().front()->get_name();
    run.replay_args = strip_location_flags(std::vector<std::string>(inv.args.begin() + 2, inv.args.end()));
    if (inv.config_text) run.config_text = *inv.config_text;
    else if (common.config_path) run.config_text = read_text(*common.config_path);
    else run.config_text = default_config_text;
    run.config = config_from_entries(parse_config_text(run.config_text));

    const auto started = std::chrono::steady_clock::now();
    Outputs files;
    std::optional<NumericalFailure> failure;
    try {
        if (spectra->parsed()) files = cmd_spectra(run, spectra_f);
        else if (rabi->parsed()) files = cmd_rabi(run, rabi_f);
        else if (detect->parsed()) files = cmd_detect(run, detect_f);
        else if (optimize->parsed()) files = cmd_optimize(run, opt_f);
        else if (ens->parsed()) files = cmd_ensemble(run, ens_f);
    } catch (const quadrature::NonConvergence& e) {
        throw NumericalFailure(e.what());
    } catch (const spectra::NoEitPeak& e) {
        throw NumericalFailure(e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_outputs(run, files, seconds);
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    try {
        return execute({args, std::nullopt});
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return usage_error;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return usage_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return usage_error;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    } catch (const quadrature::NonConvergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    } catch (const Json::exception& e) {
        std::cerr << "manifest error: " << e.what() << "\n";
        return usage_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return io_failure;
    }
}

}  // namespace superatom::cli
