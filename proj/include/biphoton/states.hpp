#pragma once

#include <cmath>
#include <complex>

#include "biphoton/density_matrix.hpp"
#include "biphoton/jsa.hpp"

namespace biphoton {

/// Pair-generation rates of the two concurrent co-polarized channels.
/// The strong rate belongs to the HH channel, the weak one to VV (the
/// design-study orientation); the state formulas are symmetric in any case.
struct SourceRates {
    double eta_strong = 0.0; ///< pairs per pump photon, HH channel
    double eta_weak = 0.0;   ///< pairs per pump photon, VV channel

    double ratio() const { return eta_strong / eta_weak; }

    void validate() const {
        if (eta_strong < 0.0 || eta_weak < 0.0)
            throw ConfigError("rates", "generation rates must be non-negative");
        if (eta_strong == 0.0 && eta_weak == 0.0)
            throw ConfigError("rates", "both generation rates are zero (degenerate source)");
    }
};

/// Post-selected state of the two concurrent co-polarized processes:
/// diagonal weights eta/(eta_HH + eta_VV) on HH and VV, coherence
/// sqrt(eta_HH eta_VV) * overlap / (eta_HH + eta_VV). The 50:50 splitter
/// post-selection leaves these weights unchanged.
inline TwoQubitDensityMatrix state_concurrent(const SourceRates& rates, const JointAmplitude& phi_hh,
                                              const JointAmplitude& phi_vv) {
    rates.validate();
    if (phi_hh.channel == phi_vv.channel)
        throw std::invalid_argument("state_concurrent: expected two distinct co-polarized channels");
    const double total = rates.eta_strong + rates.eta_weak;
    const Complex coh = std::sqrt(rates.eta_strong * rates.eta_weak) / total *
                        overlap(phi_hh, phi_vv);
    TwoQubitDensityMatrix rho;
    rho.m(0, 0) = rates.eta_strong / total;
    rho.m(3, 3) = rates.eta_weak / total;
    rho.m(0, 3) = coh;
    rho.m(3, 0) = std::conj(coh);
    return rho;
}

/// Post-selected cross-polarized state: equal HV/VH weights 1/2 with
/// coherence overlap/2.
inline TwoQubitDensityMatrix state_typeII(const JointAmplitude& phi_hv,
                                          const JointAmplitude& phi_vh) {
    const Complex coh = 0.5 * overlap(phi_hv, phi_vh);
    TwoQubitDensityMatrix rho;
    rho.m(1, 1) = 0.5;
    rho.m(2, 2) = 0.5;
    rho.m(1, 2) = coh;
    rho.m(2, 1) = std::conj(coh);
    return rho;
}

/// Pure state (|HH> + r e^{i phi} |VV>)/sqrt(1 + r^2); concurrence 2r/(1+r^2).
inline TwoQubitDensityMatrix nonmax_state(double r, double phase_deg) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument("nonmax_state: r must be finite and >= 0");
    const double norm2 = 1.0 + r * r;
    const Complex amp_vv = std::polar(r, phase_deg * kPi / 180.0);
    TwoQubitDensityMatrix rho;
    rho.m(0, 0) = 1.0 / norm2;
    rho.m(3, 3) = r * r / norm2;
    rho.m(0, 3) = std::conj(amp_vv) / norm2;
    rho.m(3, 0) = amp_vv / norm2;
    return rho;
}

} // namespace biphoton
