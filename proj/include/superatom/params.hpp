#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace superatom {

/// Physical constants and rates of the cavity-superatom system, in canonical
/// units (rad/us, us, um, uK). See units.hpp.
struct SystemParams {
    double g = 0.0;           // collective atom-cavity coupling
    double kappa = 0.0;       // total cavity field decay rate
    double kappa0 = 0.0;      // output-coupler field decay rate
    double gamma = 0.0;       // ground-excited coherence decay rate
    double gamma_r = 0.0;     // ground-Rydberg coherence decay rate
    double omega_c = 0.0;     // EIT control Rabi frequency
    double omega_d2 = 0.0;    // D2 drive Rabi frequency
    double omega_109s = 0.0;  // 109S drive Rabi frequency
    double delta_int = 0.0;   // intermediate-state detuning of the two-photon drive

    int n_atoms = 1;
    double sigma_a = 1.0;  // cloud rms radius, um

    // van der Waals coefficients in MHz um^6
    double c_rr = 0.0;
    double c_rrp = 0.0;
    double c_rprp = 0.0;

    double tau_r = 1.0;        // Rydberg lifetime, us
    double temperature = 0.0;  // uK
    double atom_mass = 0.0;    // kg

    // Drive-beam wavevector magnitudes (rad/um) and the angle between them (rad).
    double k_d2 = 0.0;
    double k_109s = 0.0;
    double drive_angle = 0.0;
};

/// Parameter set quoted for the experiment (collective g = 2pi x 10 MHz,
/// N = 800, sigma_a = 5 um, ...). kappa0 defaults to 0.9 kappa.
SystemParams reference_defaults();

struct Violation {
    std::string field;
    double value = 0.0;
    std::string message;
};

/// Every violated invariant, listed once with its field name.
std::vector<Violation> validate(const SystemParams& p);

/// Single-atom couplings g_n = g / sqrt(N), the uniform breakdown of the
/// collective coupling.
std::vector<double> uniform_single_atom_couplings(const SystemParams& p);

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

using ConfigEntries = std::map<std::string, double, std::less<>>;

/// Keys converted into SystemParams.
const std::vector<std::string_view>& system_config_keys();

/// Keys describing runs (detection protocols, drive noise); they are carried
/// through untouched in Config::run.
const std::vector<std::string_view>& run_config_keys();

struct Config {
    SystemParams system;
    ConfigEntries run;
};

/// Parses `key = value` lines (`#` starts a comment). Rejects unknown keys,
/// duplicates and non-numeric values.
ConfigEntries parse_config_text(std::string_view text);

/// Applies entries on top of reference_defaults(), converts units and validates.
Config config_from_entries(const ConfigEntries& entries);

Config load_run_config(const std::filesystem::path& path);

SystemParams load_config(const std::filesystem::path& path);

/// Emits every system key in config units, such that
/// parse_config_text(to_config_text(p)) reproduces p.
std::string to_config_text(const SystemParams& p);

}  // namespace superatom
