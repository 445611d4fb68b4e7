#pragma once

#include <complex>
#include <random>
#include <utility>
#include <vector>

#include "biphoton/jsa.hpp"
#include "biphoton/mle.hpp"
#include "biphoton/states.hpp"
#include "biphoton/tomography.hpp"
#include "biphoton/waveguide.hpp"

namespace testutil {

using biphoton::Complex;
using biphoton::JointAmplitude;
using biphoton::TwoQubitDensityMatrix;

/// Calibrated device but with equal beta2 for both polarizations and equal
/// co-polarized PM wavelengths, so the HH and VV amplitudes are identical.
inline biphoton::WaveguideSpec symmetric_waveguide() {
    biphoton::WaveguideSpec spec = biphoton::calibrated_waveguide();
    const double b2 = 0.5 * (spec.dispersion.beta2_H + spec.dispersion.beta2_V);
    spec.dispersion.beta2_H = b2;
    spec.dispersion.beta2_V = b2;
    spec.process(biphoton::ProcessKind::TypeI).pm_wavelength_nm =
        spec.process(biphoton::ProcessKind::Type0).pm_wavelength_nm;
    return spec;
}

/// HH/VV amplitude pair on a 3-sample grid whose overlap(hh, vv) equals the
/// requested complex number exactly (up to rounding): the vv amplitude is
/// conj(o)*u + sqrt(1-|o|^2)*v for trapezoid-orthonormal u, v.
inline std::pair<JointAmplitude, JointAmplitude> prescribed_overlap_pair(Complex o) {
    const biphoton::SpectralGrid grid = biphoton::make_grid(816.70, 1.0e14, 3);
    const double d = grid.spacing();
    JointAmplitude hh;
    hh.channel = "HH";
    hh.grid = grid;
    hh.values = {Complex(1.0 / std::sqrt(0.5 * d), 0.0), Complex(0, 0), Complex(0, 0)};
    hh.raw_weight = 1.0;
    hh.normalized = true;
    JointAmplitude vv = hh;
    vv.channel = "VV";
    const double rest = std::sqrt(std::max(0.0, 1.0 - std::norm(o)));
    vv.values = {std::conj(o) / std::sqrt(0.5 * d), Complex(rest / std::sqrt(d), 0.0),
                 Complex(0, 0)};
    return {hh, vv};
}

/// Random physical density matrix through the Cholesky-style parametrization.
inline TwoQubitDensityMatrix random_density(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    biphoton::mle_detail::Vec16 t;
    for (int i = 0; i < 16; ++i) t(i) = gauss(rng);
    for (int i = 0; i < 4; ++i) t(i) = std::abs(t(i)) + 0.05; // keep full rank
    return biphoton::mle_detail::rho_of(t);
}

inline TwoQubitDensityMatrix bell_phi_plus() {
    TwoQubitDensityMatrix rho;
    rho.m(0, 0) = rho.m(3, 3) = 0.5;
    rho.m(0, 3) = rho.m(3, 0) = 0.5;
    return rho;
}

inline TwoQubitDensityMatrix werner(double p) {
    TwoQubitDensityMatrix rho = bell_phi_plus();
    rho.m = p * rho.m + (1.0 - p) * 0.25 * Eigen::Matrix4cd::Identity();
    return rho;
}

/// Exact-mean count records (no Poisson draw): counts = flux * time * p(setting).
inline std::vector<biphoton::CountRecord> noiseless_records(const TwoQubitDensityMatrix& rho,
                                                            double flux, double time_s) {
    std::vector<biphoton::CountRecord> records;
    for (const auto& s : biphoton::canonical_settings()) {
        biphoton::CountRecord rec;
        rec.setting_id = s.id;
        rec.counts = flux * time_s * biphoton::setting_probability(rho, s);
        rec.accidentals = 0.0;
        rec.time_s = time_s;
        records.push_back(rec);
    }
    return records;
}

/// Haar-ish random single-qubit unitary from three angles.
inline Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 2.0 * biphoton::kPi);
    const double th = 0.5 * uni(rng), ph = uni(rng), la = uni(rng);
    Eigen::Matrix2cd u;
    u(0, 0) = std::cos(th);
    u(0, 1) = -std::sin(th) * std::exp(Complex(0, la));
    u(1, 0) = std::sin(th) * std::exp(Complex(0, ph));
    u(1, 1) = std::cos(th) * std::exp(Complex(0, ph + la));
    return u;
}

inline Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

} // namespace testutil
