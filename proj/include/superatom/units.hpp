#pragma once

#include <numbers>

// Canonical units: angular frequency in rad/us, time in us, length in um,
// temperature in uK. Ordinary frequencies (MHz) are converted exactly once,
// when a configuration is ingested.
namespace superatom::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double angular_from_mhz(double mhz) { return two_pi * mhz; }
constexpr double mhz_from_angular(double rad_per_us) { return rad_per_us / two_pi; }

// 1 THz um^6 = 1e6 MHz um^6
constexpr double mhz_um6_from_thz_um6(double thz) { return thz * 1.0e6; }
constexpr double thz_um6_from_mhz_um6(double mhz) { return mhz * 1.0e-6; }

// Vacuum wavelength in nm to wavevector magnitude in rad/um.
constexpr double wavevector_from_nm(double lambda_nm) { return two_pi / (lambda_nm * 1.0e-3); }
constexpr double nm_from_wavevector(double k) { return two_pi / k * 1.0e3; }

constexpr double rad_from_deg(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double deg_from_rad(double rad) { return rad * 180.0 / std::numbers::pi; }

inline constexpr double boltzmann = 1.380649e-23;        // J/K
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double rubidium87_mass = 86.909180527 * atomic_mass_unit;

}  // namespace superatom::units
