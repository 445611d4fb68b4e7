#pragma once

#include <Eigen/Dense>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "biphoton/density_matrix.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

/// Single-arm analyzer kets.
inline Eigen::Vector2cd analyzer_ket(char label) {
    using C = std::complex<double>;
    const double s = 1.0 / std::sqrt(2.0);
    switch (label) {
        case 'H': return {C(1, 0), C(0, 0)};
        case 'V': return {C(0, 0), C(1, 0)};
        case 'D': return {C(s, 0), C(s, 0)};
        case 'A': return {C(s, 0), C(-s, 0)};
        case 'R': return {C(s, 0), C(0, -s)};
        case 'L': return {C(s, 0), C(0, s)};
    }
    throw std::invalid_argument(std::string("unknown analyzer label '") + label + "'");
}

/// One two-arm projector of the tomography sequence.
struct ProjectorSetting {
    int id = 0; ///< 1..16
    char arm1 = 'H';
    char arm2 = 'H';
    Eigen::Vector4cd ket;
};

/// The fixed 16-setting tomographically complete sequence.
inline const std::vector<ProjectorSetting>& canonical_settings() {
    static const std::vector<ProjectorSetting> settings = [] {
        const std::array<std::pair<char, char>, 16> arms{{{'H', 'H'},
                                                          {'H', 'V'},
                                                          {'V', 'V'},
                                                          {'V', 'H'},
                                                          {'R', 'H'},
                                                          {'R', 'V'},
                                                          {'D', 'V'},
                                                          {'D', 'H'},
                                                          {'D', 'R'},
                                                          {'D', 'D'},
                                                          {'R', 'D'},
                                                          {'H', 'D'},
                                                          {'V', 'D'},
                                                          {'V', 'L'},
                                                          {'H', 'L'},
                                                          {'R', 'L'}}};
        std::vector<ProjectorSetting> out;
        out.reserve(16);
        for (std::size_t i = 0; i < arms.size(); ++i) {
            ProjectorSetting s;
            s.id = static_cast<int>(i) + 1;
            s.arm1 = arms[i].first;
            s.arm2 = arms[i].second;
            Eigen::Vector2cd k1 = analyzer_ket(s.arm1);
            Eigen::Vector2cd k2 = analyzer_ket(s.arm2);
            s.ket << k1(0) * k2(0), k1(0) * k2(1), k1(1) * k2(0), k1(1) * k2(1);
            out.push_back(std::move(s));
        }
        return out;
    }();
    return settings;
}

inline double setting_probability(const TwoQubitDensityMatrix& rho, const ProjectorSetting& s) {
    const double p = (s.ket.adjoint() * rho.m * s.ket)(0).real();
    return p < 0.0 ? 0.0 : p;
}

/// One measured (or simulated) coincidence record. Counts are integral when
/// produced by `simulate_counts`; reconstruction also accepts real-valued
/// noiseless means.
struct CountRecord {
    int setting_id = 0;
    double counts = 0.0;      ///< >= 0
    double accidentals = 0.0; ///< expected accidental counts over the integration
    double time_s = 0.0;      ///< > 0
};

/// Draws Poisson counts for each setting: mean = flux * time * <psi|rho|psi>
/// + background * time, with the accidental field recording the known
/// background. Deterministic for a fixed seed.
inline std::vector<CountRecord> simulate_counts(const TwoQubitDensityMatrix& rho,
                                                const std::vector<ProjectorSetting>& settings,
                                                double pair_flux_hz, double background_hz,
                                                double time_s, std::uint64_t seed) {
    if (!(pair_flux_hz > 0.0)) throw std::invalid_argument("simulate_counts: flux must be > 0");
    if (!(time_s > 0.0)) throw std::invalid_argument("simulate_counts: time must be > 0");
    if (background_hz < 0.0)
        throw std::invalid_argument("simulate_counts: background must be >= 0");
    const TwoQubitDensityMatrix clean = sanitized(rho);
    std::mt19937_64 rng = rng_stream(seed, 0);
    std::vector<CountRecord> records;
    records.reserve(settings.size());
    for (const auto& s : settings) {
        const double mean =
            pair_flux_hz * time_s * setting_probability(clean, s) + background_hz * time_s;
        CountRecord rec;
        rec.setting_id = s.id;
        rec.counts = mean > 0.0
                         ? static_cast<double>(std::poisson_distribution<long long>(mean)(rng))
                         : 0.0;
        rec.accidentals = background_hz * time_s;
        rec.time_s = time_s;
        records.push_back(rec);
    }
    return records;
}

} // namespace biphoton
