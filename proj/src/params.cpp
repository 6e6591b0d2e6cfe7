#include "superatom/params.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "superatom/units.hpp"

namespace superatom {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool contains(const std::vector<std::string_view>& keys, std::string_view key) {
    for (auto k : keys)
        if (k == key) return true;
    return false;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SystemParams reference_defaults() {
    using namespace units;
    SystemParams p;
    p.g = angular_from_mhz(10.0);
    p.kappa = angular_from_mhz(2.9);
    p.kappa0 = 0.9 * p.kappa;
    p.gamma = angular_from_mhz(3.0);
    p.gamma_r = angular_from_mhz(0.12);
    p.omega_c = angular_from_mhz(13.0);
    p.omega_d2 = angular_from_mhz(6.0);
    p.omega_109s = angular_from_mhz(10.0);
    p.delta_int = angular_from_mhz(-545.0);
    p.n_atoms = 800;
    p.sigma_a = 5.0;
    p.c_rr = mhz_um6_from_thz_um6(154.0);
    p.c_rrp = mhz_um6_from_thz_um6(18.0);
    p.c_rprp = mhz_um6_from_thz_um6(3.0);
    p.tau_r = 42.0;
    p.temperature = 3.0;
    p.atom_mass = rubidium87_mass;
    p.k_d2 = wavevector_from_nm(780.0);
    p.k_109s = wavevector_from_nm(480.0);
    p.drive_angle = rad_from_deg(90.0);
    return p;
}

std::vector<Violation> validate(const SystemParams& p) {
    std::vector<Violation> out;
    auto require = [&out](bool ok, const char* field, double value, const char* msg) {
        if (!ok) out.push_back({field, value, msg});
    };
    auto non_negative = [&require](const char* field, double v) {
        require(std::isfinite(v) && v >= 0.0, field, v, "must be finite and >= 0");
    };
    non_negative("g", p.g);
    non_negative("kappa", p.kappa);
    non_negative("kappa0", p.kappa0);
    non_negative("gamma", p.gamma);
    non_negative("gamma_r", p.gamma_r);
    non_negative("omega_c", p.omega_c);
    non_negative("omega_d2", p.omega_d2);
    non_negative("omega_109s", p.omega_109s);
    require(std::isfinite(p.delta_int), "delta_int", p.delta_int, "must be finite");
    if (std::isfinite(p.kappa0) && std::isfinite(p.kappa) && p.kappa0 >= 0.0 && p.kappa >= 0.0)
        require(p.kappa0 <= p.kappa, "kappa0", p.kappa0, "must not exceed kappa");
    require(p.n_atoms >= 1, "n_atoms", p.n_atoms, "must be >= 1");
    require(std::isfinite(p.sigma_a) && p.sigma_a > 0.0, "sigma_a", p.sigma_a, "must be > 0");
    non_negative("c_rr", p.c_rr);
    non_negative("c_rrp", p.c_rrp);
    non_negative("c_rprp", p.c_rprp);
    require(std::isfinite(p.tau_r) && p.tau_r > 0.0, "tau_r", p.tau_r, "must be > 0");
    non_negative("temperature", p.temperature);
    require(std::isfinite(p.atom_mass) && p.atom_mass > 0.0, "atom_mass", p.atom_mass, "must be > 0");
    non_negative("k_d2", p.k_d2);
    non_negative("k_109s", p.k_109s);
    require(std::isfinite(p.drive_angle), "drive_angle", p.drive_angle, "must be finite");
    return out;
}

std::vector<double> uniform_single_atom_couplings(const SystemParams& p) {
    const auto n = static_cast<std::size_t>(std::max(p.n_atoms, 1));
    return std::vector<double>(n, p.g / std::sqrt(static_cast<double>(n)));
}

const std::vector<std::string_view>& system_config_keys() {
    static const std::vector<std::string_view> keys = {
        "g_MHz",        "kappa_MHz",      "kappa0_MHz",     "gamma_MHz",    "gamma_r_MHz",
        "omega_c_MHz",  "omega_d2_MHz",   "omega_109s_MHz", "delta_int_MHz", "n_atoms",
        "sigma_a_um",   "c_rr_THzum6",    "c_rrp_THzum6",   "c_rprp_THzum6", "tau_r_us",
        "temperature_uK", "angle_drive_deg", "lambda_d2_nm", "lambda_109s_nm",
    };
    return keys;
}

const std::vector<std::string_view>& run_config_keys() {
    static const std::vector<std::string_view> keys = {
        "omega_rel_rms",      "drive_duration_us",  "count_t_i_us", "count_phi_g_per_us",
        "count_phi_r_per_us", "count_threshold",    "count_bin_us", "count_eta_r",
        "count_tau_r_us",     "hd_t_i_us",          "hd_phi_per_us", "hd_refl_g",
        "hd_refl_r",          "hd_tau_r_us",        "hd_threshold", "hd_bin_us",
        "hd_eta_r",
    };
    return keys;
}

ConfigEntries parse_config_text(std::string_view text) {
    ConfigEntries entries;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected `key = value`");
        const auto key = trim(line.substr(0, eq));
        const auto raw = trim(line.substr(eq + 1));
        const std::string key_str(key);

        if (!contains(system_config_keys(), key) && !contains(run_config_keys(), key))
            throw ConfigError(key_str, "unknown key `" + key_str + "` on line " + std::to_string(line_no));
        if (entries.contains(key))
            throw ConfigError(key_str, "duplicate key `" + key_str + "` on line " + std::to_string(line_no));

        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (raw.empty() || ec != std::errc{} || ptr != raw.data() + raw.size() || !std::isfinite(value))
            throw ConfigError(key_str, "key `" + key_str + "`: non-numeric value `" + std::string(raw) + "`");
        entries.emplace(key_str, value);
    }
    return entries;
}

Config config_from_entries(const ConfigEntries& entries) {
    using namespace units;
    Config cfg;
    SystemParams& p = cfg.system;
    p = reference_defaults();

    auto get = [&entries](std::string_view key, double& dst, auto convert) {
        if (auto it = entries.find(key); it != entries.end()) dst = convert(it->second);
    };
    auto mhz = [](double v) { return angular_from_mhz(v); };
    auto same = [](double v) { return v; };
    auto thz = [](double v) { return mhz_um6_from_thz_um6(v); };

    get("g_MHz", p.g, mhz);
    get("kappa_MHz", p.kappa, mhz);
    // kappa0 follows kappa unless stated explicitly.
    if (entries.contains("kappa_MHz") && !entries.contains("kappa0_MHz")) p.kappa0 = 0.9 * p.kappa;
    get("kappa0_MHz", p.kappa0, mhz);
    get("gamma_MHz", p.gamma, mhz);
    get("gamma_r_MHz", p.gamma_r, mhz);
    get("omega_c_MHz", p.omega_c, mhz);
    get("omega_d2_MHz", p.omega_d2, mhz);
    get("omega_109s_MHz", p.omega_109s, mhz);
    get("delta_int_MHz", p.delta_int, mhz);
    if (auto it = entries.find("n_atoms"); it != entries.end()) {
        const double n = it->second;
        if (n != std::floor(n) || n > 1e9)
            throw ConfigError("n_atoms", "key `n_atoms`: expected an integer, got " + format_value(n));
        p.n_atoms = static_cast<int>(n);
    }
    get("sigma_a_um", p.sigma_a, same);
    get("c_rr_THzum6", p.c_rr, thz);
    get("c_rrp_THzum6", p.c_rrp, thz);
    get("c_rprp_THzum6", p.c_rprp, thz);
    get("tau_r_us", p.tau_r, same);
    get("temperature_uK", p.temperature, same);
    get("angle_drive_deg", p.drive_angle, [](double v) { return rad_from_deg(v); });
    for (auto key : {std::string_view("lambda_d2_nm"), std::string_view("lambda_109s_nm")}) {
        if (auto it = entries.find(key); it != entries.end() && !(it->second > 0.0))
            throw ConfigError(std::string(key), "key `" + std::string(key) + "`: wavelength must be > 0, got " +
                                                    format_value(it->second));
    }
    get("lambda_d2_nm", p.k_d2, [](double v) { return wavevector_from_nm(v); });
    get("lambda_109s_nm", p.k_109s, [](double v) { return wavevector_from_nm(v); });

    if (const auto violations = validate(p); !violations.empty()) {
        std::string msg = "invalid parameters:";
        for (const auto& v : violations) msg += " " + v.field + "=" + format_value(v.value) + " (" + v.message + ");";
        throw ConfigError(violations.front().field, msg);
    }

    for (const auto& [key, value] : entries)
        if (contains(run_config_keys(), key)) cfg.run.emplace(key, value);
    return cfg;
}

Config load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file `" + path.string() + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_entries(parse_config_text(ss.str()));
}

SystemParams load_config(const std::filesystem::path& path) { return load_run_config(path).system; }

std::string to_config_text(const SystemParams& p) {
    using namespace units;
    std::string out;
    auto line = [&out](std::string_view key, double v) {
        out += std::string(key) + " = " + format_value(v) + "\n";
    };
    line("g_MHz", mhz_from_angular(p.g));
    line("kappa_MHz", mhz_from_angular(p.kappa));
    line("kappa0_MHz", mhz_from_angular(p.kappa0));
    line("gamma_MHz", mhz_from_angular(p.gamma));
    line("gamma_r_MHz", mhz_from_angular(p.gamma_r));
    line("omega_c_MHz", mhz_from_angular(p.omega_c));
    line("omega_d2_MHz", mhz_from_angular(p.omega_d2));
    line("omega_109s_MHz", mhz_from_angular(p.omega_109s));
    line("delta_int_MHz", mhz_from_angular(p.delta_int));
    line("n_atoms", p.n_atoms);
    line("sigma_a_um", p.sigma_a);
    line("c_rr_THzum6", thz_um6_from_mhz_um6(p.c_rr));
    line("c_rrp_THzum6", thz_um6_from_mhz_um6(p.c_rrp));
    line("c_rprp_THzum6", thz_um6_from_mhz_um6(p.c_rprp));
    line("tau_r_us", p.tau_r);
    line("temperature_uK", p.temperature);
    line("angle_drive_deg", deg_from_rad(p.drive_angle));
    line("lambda_d2_nm", nm_from_wavevector(p.k_d2));
    line("lambda_109s_nm", nm_from_wavevector(p.k_109s));
    return out;
}

}  // namespace superatom
