#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "biphoton/grid.hpp"
#include "biphoton/waveguide.hpp"

namespace biphoton {

using Complex = std::complex<double>;

/// sin(x)/x with the removable singularity filled by its Taylor series.
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

/// Pump-side phase mismatch Delta k(Omega) [rad/m] for one process.
///
/// Delta k = dk0 - (b1s - b1i)*Omega - (b2s + b2i)/2 * Omega^2 with
/// dk0 = s_p * (lambda_pump - lambda_pm). Signal carries the first channel
/// polarization at omega0 + Omega, idler the second at omega0 - Omega; for
/// co-polarized processes the linear term cancels identically.
inline double phase_mismatch(ProcessKind process, double omega_offset, double pump_wavelength_nm,
                             const WaveguideSpec& spec) {
    const auto pol = channel_polarizations(process);
    const auto& d = spec.dispersion;
    const double dk0 = d.slope(process) * (pump_wavelength_nm - spec.process(process).pm_wavelength_nm);
    const double b1_diff = d.beta1(pol.signal_is_H) - d.beta1(pol.idler_is_H);
    const double b2_sum = d.beta2(pol.signal_is_H) + d.beta2(pol.idler_is_H);
    return dk0 - b1_diff * omega_offset - 0.5 * b2_sum * omega_offset * omega_offset;
}

/// One channel's joint spectral amplitude on a grid.
///
/// `raw_weight` is the quadrature of |amplitude|^2 *before* normalization —
/// the sinc^2 weight that scales the channel's total pair rate when the
/// process is detuned or filtered. `truncated` marks grids whose edge
/// intensity exceeds 1e-3 of the peak.
struct JointAmplitude {
    std::string channel; ///< HH | VV | HV | VH
    SpectralGrid grid;
    std::vector<Complex> values;
    double raw_weight = 0.0;
    bool normalized = false;
    bool truncated = false;
};

namespace detail {

inline void normalize_in_place(JointAmplitude& amp) {
    const double total = trapezoid(amp.grid, [&](std::size_t k) { return std::norm(amp.values[k]); });
    if (!(total > 0.0)) throw ValidityError("amplitude has zero weight, cannot normalize");
    const double scale = 1.0 / std::sqrt(total);
    for (auto& v : amp.values) v *= scale;
    amp.normalized = true;
}

inline void flag_truncation(JointAmplitude& amp) {
    double peak = 0.0;
    for (const auto& v : amp.values) peak = std::max(peak, std::norm(v));
    const double edge = std::max(std::norm(amp.values.front()), std::norm(amp.values.back()));
    amp.truncated = peak > 0.0 && edge > 1e-3 * peak;
}

} // namespace detail

inline std::string channel_label(ProcessKind p) {
    switch (p) {
        case ProcessKind::Type0: return "VV";
        case ProcessKind::TypeI: return "HH";
        case ProcessKind::TypeII: return "HV";
    }
    return "?";
}

/// Phase-matched amplitude Phi(Omega) = exp(i dk L/2) sinc(dk L/2), grid-normalized.
///
/// The exp(i dk L/2) factor comes from the z-integral of the mismatch phase
/// over [0, L]; it carries the inter-channel temporal offsets and must not be
/// dropped. For TypeII this is the HV channel; build VH with `reflected`.
inline JointAmplitude joint_amplitude(ProcessKind process, const SpectralGrid& grid,
                                      double pump_wavelength_nm, const WaveguideSpec& spec) {
    JointAmplitude amp;
    amp.channel = channel_label(process);
    amp.grid = grid;
    amp.values.resize(grid.n);
    const double half_L = 0.5 * spec.length_m;
    for (std::size_t k = 0; k < grid.n; ++k) {
        const double x = phase_mismatch(process, grid.omega(k), pump_wavelength_nm, spec) * half_L;
        amp.values[k] = std::polar(1.0, x) * sinc(x);
    }
    amp.raw_weight = trapezoid(grid, [&](std::size_t k) { return std::norm(amp.values[k]); });
    detail::flag_truncation(amp);
    detail::normalize_in_place(amp);
    return amp;
}

/// Mirror channel: Phi_out(Omega_k) = Phi_in(-Omega_k), exact by index reversal.
inline JointAmplitude reflected(const JointAmplitude& amp, std::string channel) {
    JointAmplitude out = amp;
    out.channel = std::move(channel);
    std::reverse(out.values.begin(), out.values.end());
    return out;
}

/// One channel's intensity curve on the signal-wavelength axis, peak 1.
struct SpectralCurve {
    std::string channel;
    std::vector<double> wavelength_nm; ///< ascending
    std::vector<double> intensity;     ///< peak-normalized
};

/// |Phi|^2 of each amplitude mapped to wavelength via lambda = 2 pi c/(omega0 + Omega).
inline std::vector<SpectralCurve> spectral_intensity(const std::vector<JointAmplitude>& amps) {
    std::vector<SpectralCurve> curves;
    curves.reserve(amps.size());
    for (const auto& amp : amps) {
        if (!amps.empty() && !(amp.grid == amps.front().grid))
            throw std::invalid_argument("spectral_intensity: amplitudes must share one grid");
        SpectralCurve c;
        c.channel = amp.channel;
        c.wavelength_nm.resize(amp.grid.n);
        c.intensity.resize(amp.grid.n);
        double peak = 0.0;
        for (std::size_t k = 0; k < amp.grid.n; ++k) peak = std::max(peak, std::norm(amp.values[k]));
        // omega ascending means wavelength descending; emit ascending wavelength.
        for (std::size_t k = 0; k < amp.grid.n; ++k) {
            const std::size_t r = amp.grid.n - 1 - k;
            c.wavelength_nm[k] = amp.grid.signal_wavelength_nm(r);
            c.intensity[k] = peak > 0.0 ? std::norm(amp.values[r]) / peak : 0.0;
        }
        curves.push_back(std::move(c));
    }
    return curves;
}

/// Degenerate-operation tuning curve: sinc^2(dk0(lambda) L/2), peak 1 at the
/// process's phase-matching wavelength.
inline std::vector<std::pair<double, double>> shg_tuning_curve(ProcessKind process,
                                                               double lambda_min_nm,
                                                               double lambda_max_nm,
                                                               std::size_t n_points,
                                                               const WaveguideSpec& spec) {
    if (n_points == 0 || !(lambda_max_nm >= lambda_min_nm))
        throw std::invalid_argument("shg_tuning_curve: empty wavelength range");
    std::vector<std::pair<double, double>> curve(n_points);
    const double step = n_points > 1 ? (lambda_max_nm - lambda_min_nm) / double(n_points - 1) : 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double lambda = lambda_min_nm + step * double(i);
        const double x = phase_mismatch(process, 0.0, lambda, spec) * 0.5 * spec.length_m;
        const double s = sinc(x);
        curve[i] = {lambda, s * s};
    }
    return curve;
}

/// Ideal rectangular bandpass in wavelength, applied to both photons.
struct FilterSpec {
    double center_nm = 0.0;
    double width_nm = 0.0;

    bool passes(double lambda_nm) const {
        return lambda_nm >= center_nm - 0.5 * width_nm && lambda_nm <= center_nm + 0.5 * width_nm;
    }
};

/// Zeroes samples where either photon falls outside the band, returns the
/// renormalized amplitude and the surviving |Phi|^2 fraction.
inline std::pair<JointAmplitude, double> apply_filter(const JointAmplitude& amp,
                                                      const FilterSpec& filter) {
    if (!(filter.width_nm > 0.0)) throw ConfigError("filter.width_nm", "must be positive");
    JointAmplitude out = amp;
    for (std::size_t k = 0; k < out.grid.n; ++k) {
        const double ls = wavelength_nm(out.grid.omega0 + out.grid.omega(k));
        const double li = wavelength_nm(out.grid.omega0 - out.grid.omega(k));
        if (!filter.passes(ls) || !filter.passes(li)) out.values[k] = Complex{0.0, 0.0};
    }
    const double passed =
        trapezoid(out.grid, [&](std::size_t k) { return std::norm(out.values[k]); });
    if (!(passed > 1e-300))
        throw ValidityError("filter leaves no spectral weight inside the grid");
    detail::normalize_in_place(out);
    out.raw_weight = amp.raw_weight * passed;
    detail::flag_truncation(out);
    return {std::move(out), passed};
}

/// Trapezoid inner product O = sum Phi_a conj(Phi_b) dOmega; |O| <= 1 for
/// normalized inputs (Cauchy-Schwarz).
inline Complex overlap(const JointAmplitude& a, const JointAmplitude& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("overlap: amplitudes on different grids");
    if (!a.normalized || !b.normalized)
        throw std::invalid_argument("overlap: amplitudes must be normalized");
    Complex acc = 0.5 * (a.values.front() * std::conj(b.values.front()) +
                         a.values.back() * std::conj(b.values.back()));
    for (std::size_t k = 1; k + 1 < a.grid.n; ++k) acc += a.values[k] * std::conj(b.values[k]);
    return acc * a.grid.spacing();
}

} // namespace biphoton
