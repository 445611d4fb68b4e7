#pragma once

#include <cstddef>
#include <vector>

#include "biphoton/constants.hpp"
#include "biphoton/errors.hpp"

namespace biphoton {

/// Uniform frequency-offset grid, symmetric about the degenerate point.
///
/// Samples are Omega_k = spacing * (k - (n-1)/2), so Omega_{n-1-k} == -Omega_k
/// exactly in IEEE arithmetic (negation of the same product). Signal sits at
/// omega0 + Omega, idler at omega0 - Omega.
struct SpectralGrid {
    double omega0 = 0.0;    ///< degenerate angular frequency [rad/s]
    double half_span = 0.0; ///< |Omega| covered on each side [rad/s]
    std::size_t n = 0;      ///< sample count (>= 3)

    double spacing() const { return 2.0 * half_span / static_cast<double>(n - 1); }

    double omega(std::size_t k) const {
        return spacing() * (static_cast<double>(k) - 0.5 * static_cast<double>(n - 1));
    }

    /// Index of the sample at -Omega_k.
    std::size_t mirror(std::size_t k) const { return n - 1 - k; }

    std::vector<double> offsets() const {
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k) v[k] = omega(k);
        return v;
    }

    /// Signal-side vacuum wavelength [nm] at sample k.
    double signal_wavelength_nm(std::size_t k) const { return wavelength_nm(omega0 + omega(k)); }

    bool operator==(const SpectralGrid&) const = default;
};

/// Builds a grid centred on the degenerate frequency of `pump_wavelength_nm`.
inline SpectralGrid make_grid(double pump_wavelength_nm, double half_span, std::size_t n) {
    if (n < 3) throw ConfigError("grid.points", "need at least 3 samples");
    if (!(half_span > 0.0)) throw ConfigError("grid.half_span_rad_s", "must be positive");
    if (!(pump_wavelength_nm > 0.0)) throw ConfigError("pump.wavelength_nm", "must be positive");
    SpectralGrid g;
    g.omega0 = degenerate_frequency(pump_wavelength_nm);
    g.half_span = half_span;
    g.n = n;
    return g;
}

/// Trapezoid quadrature of `f` sampled on `g` (endpoint weights 1/2).
template <typename Accessor>
double trapezoid(const SpectralGrid& g, Accessor&& f) {
    double acc = 0.5 * (f(0) + f(g.n - 1));
    for (std::size_t k = 1; k + 1 < g.n; ++k) acc += f(k);
    return acc * g.spacing();
}

} // namespace biphoton
