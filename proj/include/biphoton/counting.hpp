#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "biphoton/constants.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

enum class DetectorMode { FreeRunning, GatedByPartner };

struct DetectorModel {
    double efficiency = 0.0;   ///< at the pair wavelength
    double dark_rate_hz = 0.0; ///< gated detectors: rate while a gate is open
    double dead_time_s = 0.0;  ///< non-paralyzable
    DetectorMode mode = DetectorMode::FreeRunning;
    double gate_width_s = 20e-9;

    void validate(const char* which) const {
        if (!(efficiency >= 0.0 && efficiency <= 1.0))
            throw ConfigError(std::string(which) + ".efficiency", "must lie in [0,1]");
        if (dark_rate_hz < 0.0)
            throw ConfigError(std::string(which) + ".dark_rate_hz", "must be non-negative");
        if (dead_time_s < 0.0)
            throw ConfigError(std::string(which) + ".dead_time_us", "must be non-negative");
        if (mode == DetectorMode::GatedByPartner && !(gate_width_s > 0.0))
            throw ConfigError(std::string(which) + ".gate_width_ns", "must be positive when gated");
    }
};

/// Transmission chain from the waveguide facet to the two detectors. The
/// per-arm splitter transmission already contains the 50:50 routing factor,
/// so a photon reaches arm i with probability arm_probability(i) and the
/// whole pair is collected (one photon per arm, either pairing) with
/// probability pair_collection().
struct OpticalPath {
    double objective = 1.0;
    double longpass = 1.0;
    double beamsplitter_arm = 0.5; ///< includes the 1/2 routing probability
    double analyzer = 1.0;
    double fiber1 = 1.0;
    double fiber2 = 1.0;
    double electronic_delay_s = 0.0; ///< arm-2 cable delay, removed before histogramming

    double arm_probability(int arm) const {
        const double common = objective * longpass * beamsplitter_arm * analyzer;
        return common * (arm == 1 ? fiber1 : fiber2);
    }
    /// Survival probability once the splitter has routed the photon to `arm`.
    double conditional_survival(int arm) const { return 2.0 * arm_probability(arm); }
    double pair_collection() const { return 2.0 * arm_probability(1) * arm_probability(2); }

    void validate() const {
        const double vals[] = {objective, longpass, analyzer, fiber1, fiber2};
        const char* names[] = {"objective", "longpass", "analyzer", "fiber1", "fiber2"};
        for (int i = 0; i < 5; ++i)
            if (!(vals[i] >= 0.0 && vals[i] <= 1.0))
                throw ConfigError(std::string("path.") + names[i], "must lie in [0,1]");
        if (!(beamsplitter_arm >= 0.0 && beamsplitter_arm <= 0.5))
            throw ConfigError("path.beamsplitter_arm",
                              "must lie in [0,0.5] (it includes the 50:50 routing)");
    }
};

/// The published element transmissions; pair collection multiplies out to ~1.5%.
inline OpticalPath published_path() {
    OpticalPath p;
    p.objective = 0.90;
    p.longpass = 0.70;
    p.beamsplitter_arm = 0.43;
    p.analyzer = 0.75;
    p.fiber1 = 0.53;
    p.fiber2 = 0.34;
    return p;
}

struct HistogramConfig {
    double bin_width_s = 0.1e-9;
    double span_s = 10e-9;    ///< histogram covers arrival-time differences [-span, +span)
    double window_s = 0.5e-9; ///< coincidence window centered on zero delay

    std::size_t bin_count() const {
        return static_cast<std::size_t>(std::llround(2.0 * span_s / bin_width_s));
    }
    std::size_t window_bins() const {
        return static_cast<std::size_t>(
            std::max<long long>(1, std::llround(window_s / bin_width_s)));
    }

    void validate() const {
        if (!(bin_width_s > 0.0)) throw ConfigError("histogram.bin_width_ns", "must be positive");
        if (window_s < bin_width_s)
            throw ConfigError("histogram.window_ns", "must be at least one bin wide");
        if (span_s < 2.0 * window_s)
            throw ConfigError("histogram.span_ns", "must be much larger than the window");
    }
};

/// Per-run event accounting; every candidate is either clicked, dropped by
/// dead time, or (detector 2, gated mode) rejected by the gate.
struct HistogramDiagnostics {
    std::uint64_t generated_pairs = 0;
    std::uint64_t det1_photon_candidates = 0;
    std::uint64_t det1_dark_candidates = 0;
    std::uint64_t det1_clicks = 0;
    std::uint64_t det1_dead_dropped = 0;
    std::uint64_t det2_photon_candidates = 0;
    std::uint64_t det2_gate_rejected = 0;
    std::uint64_t det2_dark_candidates = 0;
    std::uint64_t det2_clicks = 0;
    std::uint64_t det2_dead_dropped = 0;
    std::uint64_t coincidences = 0;
    std::uint64_t window_true = 0;
    std::uint64_t window_accidental = 0;
    std::uint64_t window_dark2 = 0; ///< window accidentals involving a det-2 dark
    std::uint64_t floor_counts = 0;
    std::uint64_t floor_dark2 = 0; ///< floor coincidences involving a det-2 dark
};

struct CoincidenceHistogram {
    HistogramConfig cfg;
    double duration_s = 0.0;
    std::vector<std::uint64_t> counts; ///< cfg.bin_count() bins over [-span, +span)
    HistogramDiagnostics diag;

    double bin_start_s(std::size_t i) const {
        return -cfg.span_s + static_cast<double>(i) * cfg.bin_width_s;
    }
};

namespace counting_detail {

struct Event {
    double t;
    std::int64_t pair_id; ///< -1 for dark counts
};

/// Non-paralyzable dead-time filter over a time-sorted candidate stream.
inline void dead_time_filter(const std::vector<Event>& candidates, double dead_time,
                             std::vector<Event>& clicks, std::uint64_t& dropped) {
    clicks.clear();
    clicks.reserve(candidates.size());
    double last = -std::numeric_limits<double>::infinity();
    for (const Event& e : candidates) {
        if (e.t - last >= dead_time) {
            clicks.push_back(e);
            last = e.t;
        } else {
            ++dropped;
        }
    }
}

} // namespace counting_detail

/// Event-driven simulation of the full detection chain: Poisson pair
/// generation, independent 50:50 routing and survival per photon, dark
/// counts, optional gating of detector 2 by detector-1 clicks, per-detector
/// non-paralyzable dead time, and TDC binning of click-time differences
/// t2 - t1 (minus the fixed electronic delay). Deterministic per seed.
inline CoincidenceHistogram simulate_histogram(double pair_rate_hz, const OpticalPath& path,
                                               const DetectorModel& det1, const DetectorModel& det2,
                                               const HistogramConfig& cfg, double duration_s,
                                               std::uint64_t seed) {
    using counting_detail::Event;
    path.validate();
    det1.validate("det1");
    det2.validate("det2");
    cfg.validate();
    if (!(duration_s > 0.0)) throw std::invalid_argument("simulate_histogram: duration must be > 0");
    if (pair_rate_hz < 0.0) throw std::invalid_argument("simulate_histogram: negative pair rate");
    if (det1.mode != DetectorMode::FreeRunning)
        throw ConfigError("det1.mode", "detector 1 must be free-running (it provides the gates)");

    CoincidenceHistogram hist;
    hist.cfg = cfg;
    hist.duration_s = duration_s;
    hist.counts.assign(cfg.bin_count(), 0);
    HistogramDiagnostics& d = hist.diag;

    std::mt19937_64 rng = rng_stream(seed, 0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double delay = path.electronic_delay_s;

    // Detected-photon candidates per arm (thinned at generation time).
    std::vector<Event> ph1, ph2;
    const double p_click1 = path.conditional_survival(1) * det1.efficiency;
    const double p_click2 = path.conditional_survival(2) * det2.efficiency;
    if (pair_rate_hz > 0.0) {
        std::exponential_distribution<double> gap(pair_rate_hz);
        double t = gap(rng);
        std::int64_t pair_id = 0;
        while (t < duration_s) {
            ++d.generated_pairs;
            for (int photon = 0; photon < 2; ++photon) {
                const bool to_arm1 = uni(rng) < 0.5;
                if (to_arm1) {
                    if (uni(rng) < p_click1) ph1.push_back({t, pair_id});
                } else {
                    if (uni(rng) < p_click2) ph2.push_back({t + delay, pair_id});
                }
            }
            t += gap(rng);
            ++pair_id;
        }
    }
    d.det1_photon_candidates = ph1.size();
    d.det2_photon_candidates = ph2.size();

    // Detector 1: merge photon candidates with a lazily generated dark
    // stream, then apply dead time.
    std::vector<Event> cand1;
    cand1.reserve(ph1.size() + static_cast<std::size_t>(det1.dark_rate_hz * duration_s * 1.05) + 16);
    {
        std::mt19937_64 rng_dark = rng_stream(seed, 1);
        std::exponential_distribution<double> dark_gap(
            det1.dark_rate_hz > 0.0 ? det1.dark_rate_hz : 1.0);
        double dark_t = det1.dark_rate_hz > 0.0 ? dark_gap(rng_dark)
                                                : std::numeric_limits<double>::infinity();
        std::size_t i = 0;
        while (i < ph1.size() || dark_t < duration_s) {
            const double next_photon =
                i < ph1.size() ? ph1[i].t : std::numeric_limits<double>::infinity();
            if (dark_t < duration_s && dark_t <= next_photon) {
                cand1.push_back({dark_t, -1});
                ++d.det1_dark_candidates;
                dark_t += dark_gap(rng_dark);
            } else {
                cand1.push_back(ph1[i]);
                ++i;
            }
        }
    }
    std::vector<Event> clicks1;
    counting_detail::dead_time_filter(cand1, det1.dead_time_s, clicks1, d.det1_dead_dropped);
    d.det1_clicks = clicks1.size();
    cand1.clear();
    cand1.shrink_to_fit();

    // Detector 2 candidates: photons plus darks, gated if configured.
    std::vector<Event> cand2;
    std::mt19937_64 rng_dark2 = rng_stream(seed, 2);
    if (det2.mode == DetectorMode::GatedByPartner) {
        const double gw = det2.gate_width_s;
        // Gates are centered on det-1 click times shifted by the arm-2 delay.
        std::vector<double> gate_lo(clicks1.size());
        for (std::size_t j = 0; j < clicks1.size(); ++j)
            gate_lo[j] = clicks1[j].t + delay - 0.5 * gw;
        auto in_gate = [&](double t) {
            auto it = std::upper_bound(gate_lo.begin(), gate_lo.end(), t);
            if (it == gate_lo.begin()) return false;
            return t <= *(it - 1) + gw;
        };
        for (const Event& e : ph2) {
            if (in_gate(e.t))
                cand2.push_back(e);
            else
                ++d.det2_gate_rejected;
        }
        if (det2.dark_rate_hz > 0.0) {
            std::poisson_distribution<int> darks_per_gate(det2.dark_rate_hz * gw);
            for (double lo : gate_lo) {
                const int k = darks_per_gate(rng_dark2);
                for (int q = 0; q < k; ++q) {
                    cand2.push_back({lo + uni(rng_dark2) * gw, -1});
                    ++d.det2_dark_candidates;
                }
            }
        }
        std::sort(cand2.begin(), cand2.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    } else {
        cand2 = ph2;
        if (det2.dark_rate_hz > 0.0) {
            std::exponential_distribution<double> dark_gap(det2.dark_rate_hz);
            for (double dark_t = dark_gap(rng_dark2); dark_t < duration_s;
                 dark_t += dark_gap(rng_dark2)) {
                cand2.push_back({dark_t, -1});
                ++d.det2_dark_candidates;
            }
        }
        std::sort(cand2.begin(), cand2.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    }
    std::vector<Event> clicks2;
    counting_detail::dead_time_filter(cand2, det2.dead_time_s, clicks2, d.det2_dead_dropped);
    d.det2_clicks = clicks2.size();
    cand2.clear();
    cand2.shrink_to_fit();

    // Histogram tau = (t2 - delay) - t1 over [-span, +span).
    std::vector<double> click1_times(clicks1.size());
    for (std::size_t j = 0; j < clicks1.size(); ++j) click1_times[j] = clicks1[j].t;
    const double span = cfg.span_s;
    for (const Event& e2 : clicks2) {
        const double center = e2.t - delay;
        auto lo = std::lower_bound(click1_times.begin(), click1_times.end(), center - span);
        for (auto it = lo; it != click1_times.end() && *it < center + span; ++it) {
            const std::size_t i = static_cast<std::size_t>(it - click1_times.begin());
            const double tau = center - *it;
            if (tau < -span || tau >= span) continue;
            const auto bin = static_cast<std::size_t>((tau + span) / cfg.bin_width_s);
            if (bin >= hist.counts.size()) continue;
            ++hist.counts[bin];
            ++d.coincidences;
            const bool same_pair =
                e2.pair_id >= 0 && clicks1[i].pair_id >= 0 && e2.pair_id == clicks1[i].pair_id;
            if (std::abs(tau) <= 0.5 * cfg.window_s) {
                if (same_pair)
                    ++d.window_true;
                else {
                    ++d.window_accidental;
                    if (e2.pair_id < 0) ++d.window_dark2;
                }
            } else {
                ++d.floor_counts;
                if (e2.pair_id < 0) ++d.floor_dark2;
            }
        }
    }
    return hist;
}

/// Sentinel reported when the accidental floor is exactly empty.
inline constexpr double kCarCap = 1e12;

namespace counting_detail {

struct WindowSplit {
    std::uint64_t window = 0;
    std::uint64_t floor = 0;
    std::size_t window_bins = 0;
    std::size_t floor_bins = 0;
};

/// Splits bins into the whole-bin window centered on the zero-delay bin and
/// the floor (everything else).
inline WindowSplit split_window(const CoincidenceHistogram& hist) {
    const std::size_t nbins = hist.counts.size();
    const std::size_t zero_bin = nbins / 2; // covers [0, bin_width)
    const std::size_t k = std::min(hist.cfg.window_bins(), nbins);
    const std::size_t lo = zero_bin >= k / 2 ? zero_bin - k / 2 : 0;
    const std::size_t hi = std::min(nbins, lo + k);
    WindowSplit ws;
    for (std::size_t i = 0; i < nbins; ++i) {
        if (i >= lo && i < hi) {
            ws.window += hist.counts[i];
            ++ws.window_bins;
        } else {
            ws.floor += hist.counts[i];
            ++ws.floor_bins;
        }
    }
    return ws;
}

} // namespace counting_detail

/// Coincidence-to-accidental ratio: window counts over the mean floor level
/// scaled to the window width. An empty floor reports the capped sentinel.
inline double car(const CoincidenceHistogram& hist) {
    const auto ws = counting_detail::split_window(hist);
    if (ws.floor_bins < 10)
        throw std::invalid_argument("car: need at least 10 floor bins outside the window");
    if (ws.floor == 0) return ws.window > 0 ? kCarCap : 1.0;
    const double floor_scaled = static_cast<double>(ws.floor) /
                                static_cast<double>(ws.floor_bins) *
                                static_cast<double>(ws.window_bins);
    return static_cast<double>(ws.window) / floor_scaled;
}

/// Accidental-subtracted coincidence rate: (window - expected accidentals)/T.
inline double net_rate(const CoincidenceHistogram& hist, double duration_s) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("net_rate: duration must be > 0");
    const auto ws = counting_detail::split_window(hist);
    if (ws.floor_bins < 10)
        throw std::invalid_argument("net_rate: need at least 10 floor bins outside the window");
    const double expected_acc = static_cast<double>(ws.floor) /
                                static_cast<double>(ws.floor_bins) *
                                static_cast<double>(ws.window_bins);
    const double net = (static_cast<double>(ws.window) - expected_acc) / duration_s;
    return net > 0.0 ? net : 0.0;
}

struct PairRateEstimate {
    double pairs_per_s = 0.0;
    double pairs_per_s_per_mw = 0.0;
    double pairs_per_pump_photon = 0.0;
};

/// Converts a facet pair rate to brightness figures for a given internal
/// pump power and wavelength.
inline PairRateEstimate brightness_from_rate(double pairs_per_s, double pump_power_uw,
                                             double pump_wavelength_nm) {
    if (!(pump_power_uw > 0.0)) throw ConfigError("pump.internal_power_uw", "must be positive");
    if (!(pump_wavelength_nm > 0.0)) throw ConfigError("pump.wavelength_nm", "must be positive");
    PairRateEstimate est;
    est.pairs_per_s = pairs_per_s;
    est.pairs_per_s_per_mw = pairs_per_s / (pump_power_uw * 1e-3);
    const double pump_photons_per_s =
        pump_power_uw * 1e-6 / photon_energy(pump_wavelength_nm);
    est.pairs_per_pump_photon = pairs_per_s / pump_photons_per_s;
    return est;
}

/// Inverts the detection chain: net rate divided by pair collection, both
/// detector efficiencies, and the detector-1 live fraction. For a
/// non-paralyzable detector the measured singles rate m relates to the
/// candidate rate c by m = c/(1 + c*tau), so the live fraction in measured
/// units is exactly 1 - m*tau. Converts to brightness units at the end.
inline PairRateEstimate infer_pair_rate(double net_rate_hz, double singles_rate_det1_hz,
                                        const OpticalPath& path, const DetectorModel& det1,
                                        const DetectorModel& det2, double pump_power_uw,
                                        double pump_wavelength_nm) {
    if (net_rate_hz < 0.0 || singles_rate_det1_hz < 0.0)
        throw std::invalid_argument("infer_pair_rate: rates must be non-negative");
    path.validate();
    if (!(det1.efficiency > 0.0))
        throw ValidityError("infer_pair_rate: detector-1 efficiency is zero");
    if (!(det2.efficiency > 0.0))
        throw ValidityError("infer_pair_rate: detector-2 efficiency is zero");
    const double collection = path.pair_collection();
    if (!(collection > 0.0))
        throw ValidityError("infer_pair_rate: optical path blocks all pairs");
    const double duty = 1.0 - singles_rate_det1_hz * det1.dead_time_s;
    if (!(duty > 0.0))
        throw ValidityError("infer_pair_rate: detector 1 is dead-time saturated");
    const double pairs =
        net_rate_hz / (collection * det1.efficiency * det2.efficiency * duty);
    PairRateEstimate est = brightness_from_rate(pairs, pump_power_uw, pump_wavelength_nm);
    return est;
}

} // namespace biphoton
