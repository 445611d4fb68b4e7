#pragma once

#include <array>
#include <string>

#include "biphoton/errors.hpp"

namespace biphoton {

/// Down-conversion process class, by pair polarization.
/// Channel labels: Type0 -> (V,V), TypeI -> (H,H), TypeII -> (H,V).
enum class ProcessKind { Type0, TypeI, TypeII };

inline const char* to_string(ProcessKind p) {
    switch (p) {
        case ProcessKind::Type0: return "type0";
        case ProcessKind::TypeI: return "typeI";
        case ProcessKind::TypeII: return "typeII";
    }
    return "?";
}

inline ProcessKind process_from_string(const std::string& s) {
    if (s == "type0") return ProcessKind::Type0;
    if (s == "typeI") return ProcessKind::TypeI;
    if (s == "typeII") return ProcessKind::TypeII;
    throw ConfigError("process", "unknown process '" + s + "' (expected type0|typeI|typeII)");
}

/// Pair polarizations (signal first) for a channel. Signal denotes the
/// photon at omega0 + Omega, idler the one at omega0 - Omega.
struct ChannelPolarizations {
    bool signal_is_H;
    bool idler_is_H;
};

inline ChannelPolarizations channel_polarizations(ProcessKind p) {
    switch (p) {
        case ProcessKind::Type0: return {false, false};
        case ProcessKind::TypeI: return {true, true};
        case ProcessKind::TypeII: return {true, false};
    }
    throw ConfigError("process", "unknown process kind");
}

/// Local dispersion data at the degenerate frequency, per down-converted
/// polarization (H = TE, V = TM), plus per-process pump-detuning slopes.
struct DispersionParams {
    double beta1_H = 0.0; ///< group slowness, H photons [s/m]
    double beta1_V = 0.0; ///< group slowness, V photons [s/m]
    double beta2_H = 0.0; ///< group-velocity dispersion, H photons [s^2/m]
    double beta2_V = 0.0; ///< group-velocity dispersion, V photons [s^2/m]
    /// d(Delta k0)/d(lambda_pump) per process [rad/m per nm], order {Type0, TypeI, TypeII}.
    std::array<double, 3> pump_slope{0.0, 0.0, 0.0};

    double beta1(bool is_H) const { return is_H ? beta1_H : beta1_V; }
    double beta2(bool is_H) const { return is_H ? beta2_H : beta2_V; }
    double slope(ProcessKind p) const { return pump_slope[static_cast<std::size_t>(p)]; }
};

/// Per-process phase-matching point and generation efficiency.
struct ProcessSpec {
    double pm_wavelength_nm = 0.0; ///< degenerate PM pump wavelength [nm]
    double efficiency = 0.0;       ///< pairs per pump photon at exact PM, losses included
};

/// Static description of one waveguide device.
struct WaveguideSpec {
    double length_m = 0.0;
    double loss_TE = 0.0; ///< propagation loss [1/m]
    double loss_TM = 0.0; ///< propagation loss [1/m]
    DispersionParams dispersion;
    std::array<ProcessSpec, 3> processes{}; ///< order {Type0, TypeI, TypeII}

    const ProcessSpec& process(ProcessKind p) const {
        return processes[static_cast<std::size_t>(p)];
    }
    ProcessSpec& process(ProcessKind p) { return processes[static_cast<std::size_t>(p)]; }

    void validate() const {
        if (!(length_m > 0.0)) throw ConfigError("waveguide.length_mm", "must be positive");
        for (const auto& ps : processes) {
            if (!(ps.pm_wavelength_nm > 0.0))
                throw ConfigError("waveguide.processes.pm_wavelength_nm", "must be positive");
            if (ps.efficiency < 0.0)
                throw ConfigError("waveguide.processes.efficiency", "must be non-negative");
        }
    }
};

/// Calibrated defaults: a 1.05 mm device whose co-polarized spectra are
/// ~110 nm wide, whose cross-polarized spectra are mutually shifted by a
/// small group-slowness walk-off, and whose pump-detuning response places
/// the entanglement optimum fractions of a nanometre below the weaker
/// process's phase-matching point.
inline WaveguideSpec calibrated_waveguide() {
    WaveguideSpec w;
    w.length_m = 1.05e-3;
    w.loss_TE = 430.0; // 4.3 1/cm
    w.loss_TM = 250.0; // 2.5 1/cm
    w.dispersion.beta1_H = 1.2120e-8;
    w.dispersion.beta1_V = 1.2080e-8;
    w.dispersion.beta2_H = -1.584e-24;
    w.dispersion.beta2_V = -1.760e-24;
    w.dispersion.pump_slope = {3.9e3, 3.9e3, 3.9e3};
    w.process(ProcessKind::Type0) = {816.70, 0.6e-10};
    w.process(ProcessKind::TypeI) = {816.70, 1.2e-10};
    w.process(ProcessKind::TypeII) = {812.92, 0.5e-10};
    return w;
}

} // namespace biphoton
