#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "biphoton/constants.hpp"
#include "biphoton/errors.hpp"

namespace biphoton {

/// Two-qubit polarization density matrix, basis order [HH, HV, VH, VV].
struct TwoQubitDensityMatrix {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
};

/// Eigenvalues below this are hard validity errors; in [-kPsdTol, 0) they are
/// clipped to zero (with trace renormalization) before any metric.
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kHermTol = 1e-9;

namespace detail {

/// Spin-flip operator sigma_y (x) sigma_y: antidiagonal (-1, 1, 1, -1).
inline Eigen::Matrix4cd spin_flip() {
    Eigen::Matrix4cd f = Eigen::Matrix4cd::Zero();
    f(0, 3) = -1.0;
    f(1, 2) = 1.0;
    f(2, 1) = 1.0;
    f(3, 0) = -1.0;
    return f;
}

} // namespace detail

/// Checks Hermiticity/trace/PSD invariants and returns the clipped,
/// renormalized matrix used by all metrics.
inline TwoQubitDensityMatrix sanitized(const TwoQubitDensityMatrix& rho) {
    const Eigen::Matrix4cd& r = rho.m;
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
        throw ValidityError("density matrix is not Hermitian within tolerance");
    if (std::abs(r.trace().real() - 1.0) > 1e-6 || std::abs(r.trace().imag()) > 1e-9)
        throw ValidityError("density matrix trace differs from 1 beyond tolerance");
    Eigen::Matrix4cd h = 0.5 * (r + r.adjoint());
    h /= h.trace().real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
    Eigen::Vector4d ev = es.eigenvalues();
    if (ev.minCoeff() < -kPsdTol)
        throw ValidityError("density matrix has a negative eigenvalue beyond tolerance");
    if (ev.minCoeff() < 0.0) {
        for (int i = 0; i < 4; ++i) ev(i) = std::max(ev(i), 0.0);
        ev /= ev.sum();
        h = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    }
    return TwoQubitDensityMatrix{h};
}

/// Wootters concurrence: C = max(0, l1 - l2 - l3 - l4), with l_i the
/// decreasing square roots of the eigenvalues of rho * F * conj(rho) * F.
inline double concurrence(const TwoQubitDensityMatrix& rho_in) {
    const Eigen::Matrix4cd rho = sanitized(rho_in).m;
    const Eigen::Matrix4cd f = detail::spin_flip();
    const Eigen::Matrix4cd m = rho * f * rho.conjugate() * f;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, /*computeEigenvectors=*/false);
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(es.eigenvalues()(i).real(), 0.0));
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

/// trace(rho^2); 0.25 for the maximally mixed state, 1 for pure states.
inline double purity(const TwoQubitDensityMatrix& rho_in) {
    const Eigen::Matrix4cd rho = sanitized(rho_in).m;
    return (rho * rho).trace().real();
}

enum class BellFamily { PhiType, PsiType };

/// Best overlap with one maximally entangled family and the phase realizing it.
struct BellFidelityResult {
    double fidelity = 0.0;
    double phase_deg = 0.0; ///< in (-180, 180]; 0 when the coherence vanishes
    BellFamily family = BellFamily::PhiType;
};

/// Maximum of <B(phi)|rho|B(phi)> over phi for |B(phi)> = (|xy> + e^{i phi}|yx'>)/sqrt2.
/// Closed form: F = (rho_aa + rho_bb)/2 + |rho_ab|, phi = -arg(rho_ab).
inline BellFidelityResult bell_fidelity(const TwoQubitDensityMatrix& rho_in, BellFamily family) {
    const Eigen::Matrix4cd rho = sanitized(rho_in).m;
    const int a = family == BellFamily::PhiType ? 0 : 1;
    const int b = family == BellFamily::PhiType ? 3 : 2;
    const std::complex<double> coh = rho(a, b);
    BellFidelityResult res;
    res.family = family;
    res.fidelity = 0.5 * (rho(a, a).real() + rho(b, b).real()) + std::abs(coh);
    if (std::abs(coh) == 0.0) {
        res.phase_deg = 0.0;
    } else {
        double deg = -std::arg(coh) * 180.0 / kPi;
        if (deg <= -180.0) deg += 360.0;
        if (deg > 180.0) deg -= 360.0;
        res.phase_deg = (deg == 0.0) ? 0.0 : deg; // fold -0.0
    }
    return res;
}

/// Larger of the two family fidelities (the "maximally entangled state"
/// figure of merit without presuming a family).
inline BellFidelityResult bell_fidelity(const TwoQubitDensityMatrix& rho) {
    const BellFidelityResult phi = bell_fidelity(rho, BellFamily::PhiType);
    const BellFidelityResult psi = bell_fidelity(rho, BellFamily::PsiType);
    return phi.fidelity >= psi.fidelity ? phi : psi;
}

/// Uhlmann fidelity (tr sqrt(sqrt(r1) r2 sqrt(r1)))^2 between two states.
inline double state_fidelity(const TwoQubitDensityMatrix& r1_in, const TwoQubitDensityMatrix& r2_in) {
    const Eigen::Matrix4cd r1 = sanitized(r1_in).m;
    const Eigen::Matrix4cd r2 = sanitized(r2_in).m;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es1(r1);
    Eigen::Vector4d ev = es1.eigenvalues().cwiseMax(0.0);
    const Eigen::Matrix4cd sq =
        es1.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es1.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es2(sq * r2 * sq);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += std::sqrt(std::max(es2.eigenvalues()(i), 0.0));
    return acc * acc;
}

/// Trace distance (1/2)||r1 - r2||_1.
inline double trace_distance(const TwoQubitDensityMatrix& r1, const TwoQubitDensityMatrix& r2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(r1.m - r2.m);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace biphoton
