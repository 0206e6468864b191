#pragma once

// Physical constants in CGS units. All engine-facing energies are in erg,
// all control fields in GHz, temperatures in mK, times in microseconds.

namespace erasim::constants {

// Planck constant, erg * s (exact, 2019 SI redefinition)
inline constexpr double planck_erg_s = 6.62607015e-27;

// Boltzmann constant, erg / K (exact)
inline constexpr double boltzmann_erg_per_k = 1.380649e-16;

// Hz per GHz
inline constexpr double ghz_to_hz = 1e9;

// h * 1 GHz in erg; energy of one frequency quantum at 1 GHz
inline constexpr double erg_per_ghz = planck_erg_s * ghz_to_hz;

}  // namespace erasim::constants

namespace erasim {

// Thermal energy kT in erg for a bath temperature given in mK.
inline constexpr double kt_erg_from_mk(double temperature_mk) {
    return constants::boltzmann_erg_per_k * temperature_mk * 1e-3;
}

}  // namespace erasim
