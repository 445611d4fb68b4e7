#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "biphoton/mle.hpp"
#include "biphoton/parallel.hpp"

namespace biphoton {

struct BootstrapErrors {
    double sigma_concurrence = 0.0;
    double sigma_fidelity = 0.0;
    std::vector<double> concurrence_samples;
    std::vector<double> fidelity_samples; ///< best bell-family fidelity per resample
};

/// Monte-Carlo error bars: redraw every count Poisson(observed), re-run the
/// reconstruction, and report sample standard deviations of concurrence and
/// bell fidelity. Resamples use independent per-index RNG streams, so the
/// result is identical for any thread count.
inline BootstrapErrors bootstrap_errors(const std::vector<CountRecord>& records, int resamples,
                                        std::uint64_t seed, const MLEOptions& opts = {},
                                        unsigned threads = 1) {
    if (resamples < 10)
        throw std::invalid_argument("bootstrap_errors: need at least 10 resamples");
    (void)mle_detail::build_problem(records); // validate once up front
    BootstrapErrors out;
    out.concurrence_samples.resize(static_cast<std::size_t>(resamples));
    out.fidelity_samples.resize(static_cast<std::size_t>(resamples));
    parallel_for(static_cast<std::size_t>(resamples), threads, [&](std::size_t m) {
        try {
            auto rng = rng_stream(seed, m);
            std::vector<CountRecord> redrawn = records;
            for (auto& rec : redrawn) {
                rec.counts =
                    rec.counts > 0.0
                        ? static_cast<double>(std::poisson_distribution<long long>(rec.counts)(rng))
                        : 0.0;
            }
            const MLEResult fit = reconstruct(redrawn, opts);
            out.concurrence_samples[m] = concurrence(fit.rho);
            out.fidelity_samples[m] = bell_fidelity(fit.rho).fidelity;
        } catch (const std::exception& e) {
            throw std::runtime_error("bootstrap resample " + std::to_string(m) + ": " + e.what());
        }
    });
    auto stddev = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double acc = 0.0;
        for (double x : xs) acc += (x - mean) * (x - mean);
        return std::sqrt(acc / static_cast<double>(xs.size() - 1));
    };
    out.sigma_concurrence = stddev(out.concurrence_samples);
    out.sigma_fidelity = stddev(out.fidelity_samples);
    return out;
}

} // namespace biphoton
