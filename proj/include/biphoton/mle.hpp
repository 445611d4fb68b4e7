#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "biphoton/tomography.hpp"

namespace biphoton {

struct MLEResult {
    TwoQubitDensityMatrix rho;
    double nll = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct MLEOptions {
    int starts = 8;         ///< multi-start count (start 0 is the identity mixture)
    int max_iter = 2000;
    double step_tol = 1e-9; ///< parameter-step convergence threshold
    double nll_tol = 1e-12; ///< relative objective-improvement convergence threshold
    std::uint64_t seed = 0x5eed5eedULL; ///< randomized-start stream seed
};

namespace mle_detail {

using Vec16 = Eigen::Matrix<double, 16, 1>;

/// Lower-triangular T from the 16 real parameters: 4 real diagonals followed
/// by re/im pairs for (1,0), (2,0), (2,1), (3,0), (3,1), (3,2).
inline Eigen::Matrix4cd t_matrix(const Vec16& t) {
    using C = std::complex<double>;
    Eigen::Matrix4cd T = Eigen::Matrix4cd::Zero();
    T(0, 0) = t[0];
    T(1, 1) = t[1];
    T(2, 2) = t[2];
    T(3, 3) = t[3];
    T(1, 0) = C(t[4], t[5]);
    T(2, 0) = C(t[6], t[7]);
    T(2, 1) = C(t[8], t[9]);
    T(3, 0) = C(t[10], t[11]);
    T(3, 1) = C(t[12], t[13]);
    T(3, 2) = C(t[14], t[15]);
    return T;
}

/// rho = T^dagger T / tr(T^dagger T): PSD with unit trace for any parameters.
inline TwoQubitDensityMatrix rho_of(const Vec16& t) {
    const Eigen::Matrix4cd T = t_matrix(t);
    Eigen::Matrix4cd r = T.adjoint() * T;
    const double tr = r.trace().real();
    if (!(tr > 0.0)) throw ValidityError("degenerate parametrization: T = 0");
    r /= tr;
    return TwoQubitDensityMatrix{r};
}

struct Problem {
    std::vector<Eigen::Vector4cd> kets;
    std::vector<double> counts;
    std::vector<double> accidentals;
    bool zero_background = true;

    std::size_t size() const { return counts.size(); }

    /// Scale N minimizing sum (N p + a) - n log(N p + a): closed form when all
    /// accidentals vanish, else Newton on the (convex in N) profile.
    double profile_scale(const std::vector<double>& p) const {
        double sum_p = 0.0, sum_n = 0.0, sum_net = 0.0;
        for (std::size_t v = 0; v < size(); ++v) {
            sum_p += p[v];
            sum_n += counts[v];
            sum_net += std::max(counts[v] - accidentals[v], 0.0);
        }
        if (!(sum_p > 0.0)) return 0.0;
        if (zero_background) return sum_n / sum_p;
        double N = std::max(sum_net / sum_p, 1e-9);
        for (int it = 0; it < 80; ++it) {
            double g = 0.0, h = 0.0;
            for (std::size_t v = 0; v < size(); ++v) {
                const double mean = std::max(N * p[v] + accidentals[v], 1e-300);
                g += p[v] * (1.0 - counts[v] / mean);
                h += counts[v] * p[v] * p[v] / (mean * mean);
            }
            if (!(h > 0.0)) break;
            double next = N - g / h;
            if (next <= 0.0) next = 0.5 * N;
            if (std::abs(next - N) < 1e-12 * std::max(1.0, N)) {
                N = next;
                break;
            }
            N = next;
        }
        return N;
    }

    /// Negative log-likelihood (up to the count-factorial constant) and its
    /// gradient in the 16 parameters, with the scale profiled out. The
    /// gradient is evaluated at the profiled scale (envelope theorem).
    double nll(const Vec16& t, Vec16* grad) const {
        const Eigen::Matrix4cd T = t_matrix(t);
        const double tau = T.squaredNorm();
        if (!(tau > 1e-300)) {
            if (grad) grad->setZero();
            return 1e30;
        }
        const std::size_t m = size();
        std::vector<Eigen::Vector4cd> tpsi(m);
        std::vector<double> p(m);
        for (std::size_t v = 0; v < m; ++v) {
            tpsi[v] = T * kets[v];
            p[v] = tpsi[v].squaredNorm() / tau;
        }
        const double N = profile_scale(p);
        double f = 0.0;
        for (std::size_t v = 0; v < m; ++v) {
            const double mean = N * p[v] + accidentals[v];
            if (mean <= 0.0) {
                if (counts[v] > 0.0) {
                    if (grad) grad->setZero();
                    return 1e30;
                }
                continue;
            }
            f += mean - counts[v] * std::log(mean);
        }
        if (grad) {
            Eigen::Matrix4cd G = Eigen::Matrix4cd::Zero();
            for (std::size_t v = 0; v < m; ++v) {
                const double mean = std::max(N * p[v] + accidentals[v], 1e-300);
                const double gv = N * (1.0 - counts[v] / mean) / tau;
                G.noalias() += gv * (tpsi[v] * kets[v].adjoint());
                G.noalias() -= (gv * p[v]) * T;
            }
            (*grad)[0] = 2.0 * G(0, 0).real();
            (*grad)[1] = 2.0 * G(1, 1).real();
            (*grad)[2] = 2.0 * G(2, 2).real();
            (*grad)[3] = 2.0 * G(3, 3).real();
            const int pairs[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
            for (int q = 0; q < 6; ++q) {
                (*grad)[4 + 2 * q] = 2.0 * G(pairs[q][0], pairs[q][1]).real();
                (*grad)[5 + 2 * q] = 2.0 * G(pairs[q][0], pairs[q][1]).imag();
            }
        }
        return f;
    }
};

/// Limited-memory BFGS with Armijo backtracking. Returns iterations used and
/// sets `converged` when a step/objective tolerance triggered the exit.
inline int lbfgs(const Problem& prob, Vec16& t, const MLEOptions& opts, double& f_out,
                 bool& converged) {
    constexpr int kMemory = 10;
    std::vector<Vec16> s_hist, y_hist;
    std::vector<double> rho_hist;
    Vec16 g, g_new;
    double f = prob.nll(t, &g);
    converged = false;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        if (g.cwiseAbs().maxCoeff() < 1e-10) {
            converged = true;
            break;
        }
        // Two-loop recursion.
        Vec16 q = g;
        const int hsize = static_cast<int>(s_hist.size());
        std::vector<double> alpha(hsize);
        for (int i = hsize - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (hsize > 0) {
            const double yy = y_hist.back().squaredNorm();
            if (yy > 0.0) q *= s_hist.back().dot(y_hist.back()) / yy;
        }
        for (int i = 0; i < hsize; ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Vec16 dir = -q;
        if (dir.dot(g) >= 0.0) dir = -g; // not a descent direction; reset

        double step = 1.0;
        const double slope = dir.dot(g);
        double f_new = f;
        Vec16 t_new = t;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            t_new = t + step * dir;
            f_new = prob.nll(t_new, nullptr);
            if (f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = true; // no descent at machine scale
            break;
        }
        prob.nll(t_new, &g_new);
        const Vec16 s = t_new - t;
        const Vec16 y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kMemory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        const double improvement = f - f_new;
        const double step_inf = s.cwiseAbs().maxCoeff();
        t = t_new;
        g = g_new;
        f = f_new;
        // objective tolerance is relative: absolute improvements bottom out at
        // rounding noise (~|f| * 2^-52) long before any fixed cutoff
        if (step_inf < opts.step_tol ||
            improvement < opts.nll_tol * std::max(1.0, std::abs(f))) {
            converged = true;
            ++iter;
            break;
        }
    }
    f_out = f;
    return iter;
}

inline Problem build_problem(const std::vector<CountRecord>& records) {
    if (records.size() < 16)
        throw std::invalid_argument("reconstruct: need at least the 16 canonical records");
    const auto& settings = canonical_settings();
    Problem prob;
    prob.kets.reserve(records.size());
    prob.counts.reserve(records.size());
    prob.accidentals.reserve(records.size());
    std::set<int> seen;
    double total = 0.0;
    for (const auto& rec : records) {
        if (rec.setting_id < 1 || rec.setting_id > static_cast<int>(settings.size()))
            throw std::invalid_argument("reconstruct: unknown setting id");
        if (rec.counts < 0.0) throw std::invalid_argument("reconstruct: negative count");
        if (rec.accidentals < 0.0)
            throw std::invalid_argument("reconstruct: negative accidental estimate");
        if (!(rec.time_s > 0.0)) throw std::invalid_argument("reconstruct: non-positive time");
        seen.insert(rec.setting_id);
        prob.kets.push_back(settings[static_cast<std::size_t>(rec.setting_id - 1)].ket);
        prob.counts.push_back(rec.counts);
        prob.accidentals.push_back(rec.accidentals);
        if (rec.accidentals > 0.0) prob.zero_background = false;
        total += rec.counts;
    }
    if (seen.size() < settings.size())
        throw std::invalid_argument("reconstruct: records do not cover the 16-setting sequence");
    if (!(total > 0.0)) throw ValidityError("reconstruct: all counts are zero");
    return prob;
}

} // namespace mle_detail

/// Maximum-likelihood reconstruction over the positivity-preserving
/// parametrization rho(t) = T^dagger T / tr, Poisson likelihood with known
/// additive accidentals and a profiled overall scale; deterministic
/// multi-start L-BFGS.
inline MLEResult reconstruct(const std::vector<CountRecord>& records, const MLEOptions& opts = {}) {
    using namespace mle_detail;
    const Problem prob = build_problem(records);
    MLEResult best;
    best.nll = std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, opts.starts); ++s) {
        Vec16 t0 = Vec16::Zero();
        if (s == 0) {
            t0[0] = t0[1] = t0[2] = t0[3] = 0.5;
        } else {
            auto rng = rng_stream(opts.seed, static_cast<std::uint64_t>(s));
            std::uniform_real_distribution<double> uni(-1.0, 1.0);
            for (int i = 0; i < 16; ++i) t0[i] = uni(rng);
        }
        double f = 0.0;
        bool conv = false;
        const int iters = lbfgs(prob, t0, opts, f, conv);
        if (f < best.nll) {
            best.nll = f;
            best.rho = rho_of(t0);
            best.iterations = iters;
            best.converged = conv;
        }
    }
    return best;
}

/// Likelihood value of an arbitrary physical state against the records
/// (optimizer-sanity hook: the fitted NLL must not exceed this).
inline double nll_of_state(const std::vector<CountRecord>& records,
                           const TwoQubitDensityMatrix& rho) {
    using namespace mle_detail;
    const Problem prob = build_problem(records);
    std::vector<double> p(prob.size());
    const auto& settings = canonical_settings();
    std::size_t idx = 0;
    for (const auto& rec : records) {
        p[idx++] = setting_probability(rho, settings[static_cast<std::size_t>(rec.setting_id - 1)]);
    }
    const double N = prob.profile_scale(p);
    double f = 0.0;
    for (std::size_t v = 0; v < prob.size(); ++v) {
        const double mean = N * p[v] + prob.accidentals[v];
        if (mean <= 0.0) {
            if (prob.counts[v] > 0.0) return 1e30;
            continue;
        }
        f += mean - prob.counts[v] * std::log(mean);
    }
    return f;
}

/// Inverse of the parametrization for tests: parameters whose rho(t)
/// reproduces `rho` (reversal-permuted Cholesky factor).
inline mle_detail::Vec16 params_from_state(const TwoQubitDensityMatrix& rho) {
    Eigen::Matrix4cd rev = Eigen::Matrix4cd::Zero();
    rev(0, 3) = rev(1, 2) = rev(2, 1) = rev(3, 0) = 1.0;
    Eigen::Matrix4cd a = rev * rho.m * rev;
    a += 1e-14 * Eigen::Matrix4cd::Identity();
    const Eigen::LLT<Eigen::Matrix4cd> llt(a);
    if (llt.info() != Eigen::Success)
        throw ValidityError("params_from_state: matrix is not positive semidefinite");
    const Eigen::Matrix4cd T = rev * Eigen::Matrix4cd(llt.matrixL()).adjoint() * rev;
    mle_detail::Vec16 t;
    t[0] = T(0, 0).real();
    t[1] = T(1, 1).real();
    t[2] = T(2, 2).real();
    t[3] = T(3, 3).real();
    const int pairs[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
    for (int q = 0; q < 6; ++q) {
        t[4 + 2 * q] = T(pairs[q][0], pairs[q][1]).real();
        t[5 + 2 * q] = T(pairs[q][0], pairs[q][1]).imag();
    }
    return t;
}

} // namespace biphoton
