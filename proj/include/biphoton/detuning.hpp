#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "biphoton/parallel.hpp"
#include "biphoton/states.hpp"

namespace biphoton {

/// One scan sample of the phase-matching detuning study.
struct DetuningPoint {
    double delta_lambda_nm = 0.0; ///< PM offset of the strong process vs the weak one's PM
    double concurrence = 0.0;
    double fidelity = 0.0;
    double phase_deg = 0.0;
    double eta_strong_eff = 0.0; ///< sinc^2/filter-weighted effective rate, HH
    double eta_weak_eff = 0.0;   ///< same for VV (constant across the scan)
};

struct DetuningResult {
    double delta_best_nm = 0.0;
    std::size_t best_index = 0;
    std::vector<DetuningPoint> curve;
};

struct DetuningScanOptions {
    double min_nm = -2.0;
    double max_nm = 0.5;
    double step_nm = 0.01;
    std::size_t grid_points = 4096;
    double grid_half_span = 2.0e14; ///< rad/s
    unsigned threads = 1;
};

/// Scans the PM wavelength of the stronger co-polarized process (HH) over
/// offsets delta relative to the weaker process's PM wavelength, with the
/// pump parked at the weaker process's PM wavelength. Detuning suppresses
/// the strong channel's total rate by its sinc^2 weight, rebalancing the
/// state toward r_eff = 1 while the spectra stay overlapped; the returned
/// argmax is the concurrence optimum of the sampled curve.
inline DetuningResult optimize_detuning(const WaveguideSpec& spec, double ratio,
                                        const std::optional<FilterSpec>& filter,
                                        const DetuningScanOptions& opts = {}) {
    spec.validate();
    if (!(ratio >= 1.0))
        throw ConfigError("ratio", "must be >= 1 (the strong process is the HH channel)");
    if (!(opts.step_nm > 0.0) || !(opts.max_nm >= opts.min_nm))
        throw ConfigError("detuning", "empty scan range");
    if (!(spec.process(ProcessKind::Type0).pm_wavelength_nm > 0.0) ||
        !(spec.process(ProcessKind::TypeI).pm_wavelength_nm > 0.0))
        throw ConfigError("waveguide.processes", "both co-polarized processes must be declared");

    const double pump_nm = spec.process(ProcessKind::Type0).pm_wavelength_nm;
    const SpectralGrid grid = make_grid(pump_nm, opts.grid_half_span, opts.grid_points);

    // Reference weights at exact phase matching, unfiltered.
    WaveguideSpec matched = spec;
    matched.process(ProcessKind::TypeI).pm_wavelength_nm = pump_nm;
    matched.process(ProcessKind::Type0).pm_wavelength_nm = pump_nm;
    const double w_strong_pm =
        joint_amplitude(ProcessKind::TypeI, grid, pump_nm, matched).raw_weight;

    JointAmplitude phi_vv = joint_amplitude(ProcessKind::Type0, grid, pump_nm, matched);
    double eta_weak_eff = 1.0;
    if (filter) {
        auto [filtered, passed] = apply_filter(phi_vv, *filter);
        phi_vv = std::move(filtered);
        eta_weak_eff = passed;
    }

    const std::size_t n_points =
        static_cast<std::size_t>((opts.max_nm - opts.min_nm) / opts.step_nm + 1.5);
    DetuningResult result;
    result.curve.resize(n_points);

    parallel_for(n_points, opts.threads, [&](std::size_t i) {
        const double delta = opts.min_nm + opts.step_nm * static_cast<double>(i);
        WaveguideSpec local = matched;
        local.process(ProcessKind::TypeI).pm_wavelength_nm = pump_nm + delta;
        JointAmplitude phi_hh = joint_amplitude(ProcessKind::TypeI, grid, pump_nm, local);
        double eta_strong_eff = ratio * phi_hh.raw_weight / w_strong_pm;
        if (filter) {
            auto [filtered, passed] = apply_filter(phi_hh, *filter);
            phi_hh = std::move(filtered);
            eta_strong_eff *= passed;
        }
        const SourceRates rates{eta_strong_eff, eta_weak_eff};
        const TwoQubitDensityMatrix rho = state_concurrent(rates, phi_hh, phi_vv);
        const BellFidelityResult bf = bell_fidelity(rho, BellFamily::PhiType);
        result.curve[i] = {delta,       concurrence(rho), bf.fidelity,
                           bf.phase_deg, eta_strong_eff,   eta_weak_eff};
    });

    result.best_index = 0;
    for (std::size_t i = 1; i < n_points; ++i)
        if (result.curve[i].concurrence > result.curve[result.best_index].concurrence)
            result.best_index = i;
    result.delta_best_nm = result.curve[result.best_index].delta_lambda_nm;
    return result;
}

} // namespace biphoton
