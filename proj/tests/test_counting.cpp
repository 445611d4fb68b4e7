#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biphoton/counting.hpp"
#include "biphoton/errors.hpp"

using namespace biphoton;

namespace {

DetectorModel device_det1() {
    DetectorModel d;
    d.efficiency = 0.04;
    d.dark_rate_hz = 2.33e4;
    d.dead_time_s = 20e-6;
    d.mode = DetectorMode::FreeRunning;
    return d;
}

DetectorModel device_det2() {
    DetectorModel d;
    d.efficiency = 0.05;
    d.dark_rate_hz = 1.15e3;
    d.dead_time_s = 20e-6;
    d.mode = DetectorMode::GatedByPartner;
    d.gate_width_s = 20e-9;
    return d;
}

constexpr double kDevicePairRate = 3.4e4;

} // namespace

TEST_CASE("the transmission chain multiplies out as documented") {
    const OpticalPath p = published_path();
    const double arm1 = 0.90 * 0.70 * 0.43 * 0.75 * 0.53;
    const double arm2 = 0.90 * 0.70 * 0.43 * 0.75 * 0.34;
    CHECK(p.arm_probability(1) == Catch::Approx(arm1).epsilon(1e-12));
    CHECK(p.arm_probability(2) == Catch::Approx(arm2).epsilon(1e-12));
    CHECK(p.conditional_survival(1) == Catch::Approx(2.0 * arm1).epsilon(1e-12));
    CHECK(p.pair_collection() == Catch::Approx(2.0 * arm1 * arm2).epsilon(1e-12));
    CHECK(p.pair_collection() == Catch::Approx(0.014877).epsilon(1e-3));
    CHECK_NOTHROW(p.validate());
    OpticalPath bad = p;
    bad.beamsplitter_arm = 0.6; // includes routing, so > 0.5 is impossible
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    OpticalPath bad2 = p;
    bad2.fiber1 = 1.2;
    CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

TEST_CASE("detector-1 singles sit where dark rate and dead time put them") {
    const auto hist = simulate_histogram(kDevicePairRate, published_path(), device_det1(),
                                         device_det2(), HistogramConfig{}, 20.0, 1);
    const double T = 20.0;
    const double measured = static_cast<double>(hist.diag.det1_clicks) / T;
    CHECK(measured > 15.5e3);
    CHECK(measured < 16.5e3);

    // non-paralyzable inversion: candidate rate = measured / (1 - measured*tau)
    const double duty = 1.0 - measured * device_det1().dead_time_s;
    const double cand_rate = static_cast<double>(hist.diag.det1_photon_candidates +
                                                 hist.diag.det1_dark_candidates) /
                             T;
    CHECK(measured / duty == Catch::Approx(cand_rate).epsilon(0.02));
}

TEST_CASE("removing dead time only adds clicks") {
    DetectorModel lazy = device_det1();
    DetectorModel eager = device_det1();
    eager.dead_time_s = 0.0;
    const auto slow = simulate_histogram(kDevicePairRate, published_path(), lazy, device_det2(),
                                         HistogramConfig{}, 5.0, 77);
    const auto fast = simulate_histogram(kDevicePairRate, published_path(), eager, device_det2(),
                                         HistogramConfig{}, 5.0, 77);
    CHECK(slow.diag.det1_clicks < fast.diag.det1_clicks);
    CHECK(slow.diag.det1_dead_dropped > 0);
    CHECK(fast.diag.det1_dead_dropped == 0);
    // identical seed, identical candidate streams
    CHECK(slow.diag.det1_photon_candidates == fast.diag.det1_photon_candidates);
    CHECK(slow.diag.det1_dark_candidates == fast.diag.det1_dark_candidates);
}

TEST_CASE("the accidental-subtracted pair rate lands in the sub-hertz band") {
    const auto hist = simulate_histogram(kDevicePairRate, published_path(), device_det1(),
                                         device_det2(), HistogramConfig{}, 120.0, 2);
    const double net = net_rate(hist, 120.0);
    CHECK(net > 0.35);
    CHECK(net < 1.4);
}

TEST_CASE("device-scale histogram statistics match the rate arithmetic") {
    const HistogramConfig cfg{};
    REQUIRE(cfg.bin_count() == 200);
    REQUIRE(cfg.window_bins() == 5);
    const double T = 600.0;
    const auto hist = simulate_histogram(kDevicePairRate, published_path(), device_det1(),
                                         device_det2(), cfg, T, 3);
    const HistogramDiagnostics& d = hist.diag;

    // exact event accounting
    CHECK(d.det1_photon_candidates + d.det1_dark_candidates ==
          d.det1_clicks + d.det1_dead_dropped);
    CHECK(d.det2_photon_candidates - d.det2_gate_rejected + d.det2_dark_candidates ==
          d.det2_clicks + d.det2_dead_dropped);
    const std::uint64_t total =
        std::accumulate(hist.counts.begin(), hist.counts.end(), std::uint64_t{0});
    CHECK(total == d.coincidences);
    CHECK(d.window_true + d.window_accidental + d.floor_counts == d.coincidences);

    // analytic expectations for the same chain
    const OpticalPath path = published_path();
    const DetectorModel det1 = device_det1();
    const DetectorModel det2 = device_det2();
    const double photon_cand1 = kDevicePairRate * path.conditional_survival(1) * det1.efficiency;
    const double cand1 = photon_cand1 + det1.dark_rate_hz;
    const double duty = 1.0 / (1.0 + cand1 * det1.dead_time_s);
    const double n1 = cand1 * duty;
    const double photon_cand2 = kDevicePairRate * path.conditional_survival(2) * det2.efficiency;
    const double true_rate =
        kDevicePairRate * path.pair_collection() * det1.efficiency * det2.efficiency * duty;
    const double gate_duty = n1 * det2.gate_width_s;
    const double floor_rate =
        n1 * det2.gate_width_s * det2.dark_rate_hz + (photon_cand2 - true_rate) * gate_duty;
    const double window_fraction = cfg.window_s / det2.gate_width_s;
    const double car_pred = 1.0 + true_rate / (floor_rate * window_fraction);

    const double car_measured = car(hist);
    CHECK(car_measured > 0.5 * car_pred);
    CHECK(car_measured < 2.0 * car_pred);
    CHECK(car_measured > 20.0);

    // most of the accidental floor is detector-2 dark counts
    REQUIRE(d.floor_counts > 100);
    const double dark_share =
        static_cast<double>(d.floor_dark2) / static_cast<double>(d.floor_counts);
    CHECK(dark_share > 0.75);
    CHECK(dark_share < 0.90);

    // the floor is flat: no bin strays far from the mean level
    const std::size_t nbins = hist.counts.size();
    const std::size_t zero_bin = nbins / 2;
    double floor_sum = 0.0;
    std::size_t floor_bins = 0;
    for (std::size_t i = 0; i < nbins; ++i) {
        if (i + 2 >= zero_bin && i <= zero_bin + 2) continue;
        floor_sum += static_cast<double>(hist.counts[i]);
        ++floor_bins;
    }
    const double floor_mean = floor_sum / static_cast<double>(floor_bins);
    const double ceiling = floor_mean + 6.0 * std::sqrt(floor_mean + 1.0) + 1.0;
    for (std::size_t i = 0; i < nbins; ++i) {
        if (i + 2 >= zero_bin && i <= zero_bin + 2) continue;
        CHECK(static_cast<double>(hist.counts[i]) <= ceiling);
    }

    // the true-pair peak sits in the zero-delay bin
    const auto peak = std::max_element(hist.counts.begin(), hist.counts.end());
    CHECK(static_cast<std::size_t>(peak - hist.counts.begin()) == zero_bin);
    CHECK(hist.bin_start_s(0) == Catch::Approx(-cfg.span_s).epsilon(1e-12));
    CHECK(hist.bin_start_s(zero_bin) == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("a cable delay on arm 2 is removed before histogramming") {
    OpticalPath path = published_path();
    path.electronic_delay_s = 2e-9;
    const auto hist = simulate_histogram(kDevicePairRate, path, device_det1(), device_det2(),
                                         HistogramConfig{}, 60.0, 4);
    const auto peak = std::max_element(hist.counts.begin(), hist.counts.end());
    CHECK(static_cast<std::size_t>(peak - hist.counts.begin()) == hist.counts.size() / 2);
}

TEST_CASE("an ideal lossless bench inverts back to the generated pair rate") {
    OpticalPath path; // everything at unity, splitter at the routing-only 0.5
    DetectorModel det1, det2;
    det1.efficiency = 0.5;
    det2.efficiency = 0.5;
    const double rate = 200.0, T = 5000.0;
    const auto hist = simulate_histogram(rate, path, det1, det2, HistogramConfig{}, T, 5);
    const double net = net_rate(hist, T);
    CHECK(net == Catch::Approx(rate * path.pair_collection() * 0.25).epsilon(0.02));
    const double singles1 = static_cast<double>(hist.diag.det1_clicks) / T;
    const auto est = infer_pair_rate(net, singles1, path, det1, det2, 1000.0, 800.0);
    CHECK(est.pairs_per_s == Catch::Approx(rate).epsilon(0.02));
}

TEST_CASE("runs are deterministic in the seed") {
    const auto a = simulate_histogram(kDevicePairRate, published_path(), device_det1(),
                                      device_det2(), HistogramConfig{}, 5.0, 42);
    const auto b = simulate_histogram(kDevicePairRate, published_path(), device_det1(),
                                      device_det2(), HistogramConfig{}, 5.0, 42);
    const auto c = simulate_histogram(kDevicePairRate, published_path(), device_det1(),
                                      device_det2(), HistogramConfig{}, 5.0, 43);
    CHECK(a.counts == b.counts);
    CHECK(a.diag.det1_clicks == b.diag.det1_clicks);
    CHECK(a.diag.coincidences == b.diag.coincidences);
    CHECK(a.counts != c.counts);
}

TEST_CASE("darks alone produce no net pair rate") {
    const auto hist = simulate_histogram(0.0, published_path(), device_det1(), device_det2(),
                                         HistogramConfig{}, 60.0, 6);
    CHECK(hist.diag.generated_pairs == 0);
    CHECK(hist.diag.det1_photon_candidates == 0);
    CHECK(hist.diag.det2_photon_candidates == 0);
    CHECK(hist.diag.window_true == 0);
    CHECK(net_rate(hist, 60.0) < 0.05);
}

TEST_CASE("no detector-1 clicks means no gates and no coincidences") {
    DetectorModel det1 = device_det1();
    det1.efficiency = 0.0;
    det1.dark_rate_hz = 0.0;
    const auto hist = simulate_histogram(kDevicePairRate, published_path(), det1, device_det2(),
                                         HistogramConfig{}, 10.0, 7);
    CHECK(hist.diag.det1_clicks == 0);
    CHECK(hist.diag.det2_clicks == 0);
    CHECK(hist.diag.coincidences == 0);
}

TEST_CASE("brightness figures reproduce the headline numbers") {
    const auto est = brightness_from_rate(3.4e4, 47.3, 816.70);
    CHECK(est.pairs_per_s == 3.4e4);
    CHECK(est.pairs_per_s_per_mw == Catch::Approx(7.3e5).epsilon(0.10));
    CHECK(est.pairs_per_pump_photon == Catch::Approx(1.8e-10).epsilon(0.10));
    CHECK_THROWS_AS(brightness_from_rate(3.4e4, 0.0, 816.70), ConfigError);
    CHECK_THROWS_AS(brightness_from_rate(3.4e4, 47.3, -1.0), ConfigError);
}

TEST_CASE("ratio metrics demand a usable accidental floor") {
    HistogramConfig cfg;
    cfg.bin_width_s = 0.2e-9;
    cfg.span_s = 1e-9;
    cfg.window_s = 0.5e-9; // 10 bins, 3 in the window: floor too narrow
    CHECK_NOTHROW(cfg.validate());
    CoincidenceHistogram h;
    h.cfg = cfg;
    h.duration_s = 1.0;
    h.counts.assign(cfg.bin_count(), 1);
    CHECK_THROWS_AS(car(h), std::invalid_argument);
    CHECK_THROWS_AS(net_rate(h, 1.0), std::invalid_argument);
}

TEST_CASE("an empty floor caps the ratio instead of dividing by zero") {
    CoincidenceHistogram h;
    h.cfg = HistogramConfig{};
    h.duration_s = 1.0;
    h.counts.assign(h.cfg.bin_count(), 0);
    h.counts[h.cfg.bin_count() / 2] = 50;
    CHECK(car(h) == kCarCap);
    h.counts[h.cfg.bin_count() / 2] = 0;
    CHECK(car(h) == 1.0);
}

TEST_CASE("configuration mistakes are rejected up front") {
    DetectorModel gated1 = device_det1();
    gated1.mode = DetectorMode::GatedByPartner;
    CHECK_THROWS_AS(simulate_histogram(kDevicePairRate, published_path(), gated1, device_det2(),
                                       HistogramConfig{}, 1.0, 0),
                    ConfigError);

    HistogramConfig bad;
    bad.bin_width_s = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = HistogramConfig{};
    bad.window_s = 0.05e-9; // narrower than one bin
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = HistogramConfig{};
    bad.span_s = 0.6e-9; // not enough floor around the window
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    DetectorModel hot = device_det1();
    hot.efficiency = 1.2;
    CHECK_THROWS_AS(hot.validate("det1"), ConfigError);

    CHECK_THROWS_AS(simulate_histogram(-1.0, published_path(), device_det1(), device_det2(),
                                       HistogramConfig{}, 1.0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_histogram(kDevicePairRate, published_path(), device_det1(),
                                       device_det2(), HistogramConfig{}, 0.0, 0),
                    std::invalid_argument);
}

TEST_CASE("the chain inversion refuses a saturated detector") {
    CHECK_THROWS_AS(infer_pair_rate(1.0, 6e4, published_path(), device_det1(), device_det2(),
                                    47.3, 816.70),
                    ValidityError);
    DetectorModel blind = device_det1();
    blind.efficiency = 0.0;
    CHECK_THROWS_AS(
        infer_pair_rate(1.0, 1e4, published_path(), blind, device_det2(), 47.3, 816.70),
        ValidityError);
    CHECK_THROWS_AS(infer_pair_rate(-0.1, 1e4, published_path(), device_det1(), device_det2(),
                                    47.3, 816.70),
                    std::invalid_argument);
}
