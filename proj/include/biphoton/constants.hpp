#pragma once

namespace biphoton {

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

/// Planck constant [J*s].
inline constexpr double kPlanck = 6.62607015e-34;

inline constexpr double kPi = 3.14159265358979323846;

/// Degenerate angular frequency for a pump at `pump_wavelength_nm`:
/// half the pump frequency, omega0 = pi*c/lambda_p.
inline constexpr double degenerate_frequency(double pump_wavelength_nm) {
    return kPi * kSpeedOfLight / (pump_wavelength_nm * 1e-9);
}

/// Vacuum wavelength [nm] of angular frequency omega [rad/s].
inline constexpr double wavelength_nm(double omega) {
    return 2.0 * kPi * kSpeedOfLight / omega * 1e9;
}

/// Photon energy [J] at vacuum wavelength lambda [nm].
inline constexpr double photon_energy(double wavelength_nm) {
    return kPlanck * kSpeedOfLight / (wavelength_nm * 1e-9);
}

} // namespace biphoton
