// biphoton: joint-spectrum, entanglement, tomography, and counting pipeline
// driven by a JSON scenario file. Every artifact embeds the config hash and
// the seed that produced it.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "biphoton/bootstrap.hpp"
#include "biphoton/config.hpp"
#include "biphoton/counting.hpp"
#include "biphoton/detuning.hpp"
#include "biphoton/io.hpp"
#include "biphoton/mle.hpp"
#include "biphoton/states.hpp"

namespace {

using namespace biphoton;

struct Session {
    ScenarioConfig cfg;
    std::string hash;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_flag;
    int threads = 1;
    bool subtract_accidentals = false;

    std::uint64_t seed(std::uint64_t recorded_default) const {
        return seed_flag ? *seed_flag : recorded_default;
    }
    std::string path(const std::string& name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }
};

struct BuiltState {
    TwoQubitDensityMatrix rho;
    std::string source;
    double overlap_abs = 0.0;
};

/// Assembles the configured source state: co-polarized pair of processes or
/// the cross-polarized one, with the optional filter applied to both photons.
BuiltState build_state(const ScenarioConfig& cfg, const std::string& source) {
    const SpectralGrid grid = cfg.spectral_grid();
    BuiltState out;
    out.source = source;
    if (source == "typeII") {
        JointAmplitude hv =
            joint_amplitude(ProcessKind::TypeII, grid, cfg.pump.wavelength_nm, cfg.waveguide);
        if (cfg.filter) hv = apply_filter(hv, *cfg.filter).first;
        const JointAmplitude vh = reflected(hv, "VH");
        out.rho = state_typeII(hv, vh);
        out.overlap_abs = std::abs(overlap(hv, vh));
    } else {
        JointAmplitude hh =
            joint_amplitude(ProcessKind::TypeI, grid, cfg.pump.wavelength_nm, cfg.waveguide);
        JointAmplitude vv =
            joint_amplitude(ProcessKind::Type0, grid, cfg.pump.wavelength_nm, cfg.waveguide);
        if (cfg.filter) {
            hh = apply_filter(hh, *cfg.filter).first;
            vv = apply_filter(vv, *cfg.filter).first;
        }
        out.rho = state_concurrent(cfg.rates(), hh, vv);
        out.overlap_abs = std::abs(overlap(hh, vv));
    }
    return out;
}

void write_spectrum_csv(const Session& s, const std::string& name, const SpectralCurve& curve,
                        std::uint64_t seed) {
    CsvWriter csv(s.path(name), s.hash, seed);
    csv.header({"wavelength_nm", "intensity"});
    for (std::size_t i = 0; i < curve.wavelength_nm.size(); ++i)
        csv.row_numeric({curve.wavelength_nm[i], curve.intensity[i]});
}

int cmd_spectra(const Session& s) {
    const SpectralGrid grid = s.cfg.spectral_grid();
    const std::uint64_t seed = s.seed(s.cfg.tomography.seed);
    std::vector<JointAmplitude> amps;
    for (ProcessKind p : {ProcessKind::Type0, ProcessKind::TypeI, ProcessKind::TypeII}) {
        JointAmplitude amp = joint_amplitude(p, grid, s.cfg.pump.wavelength_nm, s.cfg.waveguide);
        if (s.cfg.filter) amp = apply_filter(amp, *s.cfg.filter).first;
        amps.push_back(std::move(amp));
    }
    const std::vector<SpectralCurve> curves = spectral_intensity(amps);
    const char* names[3] = {"spectrum_vv.csv", "spectrum_hh.csv", "spectrum_hv.csv"};
    for (std::size_t i = 0; i < curves.size(); ++i)
        write_spectrum_csv(s, names[i], curves[i], seed);
    std::cout << "wrote spectrum_{vv,hh,hv}.csv to " << s.out_dir << "\n";
    return 0;
}

int cmd_tuning_curve(const Session& s) {
    const std::uint64_t seed = s.seed(s.cfg.tomography.seed);
    double lo = 1e300, hi = -1e300;
    for (ProcessKind p : {ProcessKind::Type0, ProcessKind::TypeI, ProcessKind::TypeII}) {
        lo = std::min(lo, s.cfg.waveguide.process(p).pm_wavelength_nm);
        hi = std::max(hi, s.cfg.waveguide.process(p).pm_wavelength_nm);
    }
    lo -= 2.0;
    hi += 2.0;
    const std::size_t n = 801;
    const char* names[3] = {"tuning_type0.csv", "tuning_typeI.csv", "tuning_typeII.csv"};
    for (ProcessKind p : {ProcessKind::Type0, ProcessKind::TypeI, ProcessKind::TypeII}) {
        const auto curve = shg_tuning_curve(p, lo, hi, n, s.cfg.waveguide);
        CsvWriter csv(s.path(names[static_cast<int>(p)]), s.hash, seed);
        csv.header({"pump_wavelength_nm", "shg_response"});
        for (const auto& [wl, val] : curve) csv.row_numeric({wl, val});
    }
    std::cout << "wrote tuning_{type0,typeI,typeII}.csv to " << s.out_dir << "\n";
    return 0;
}

nlohmann::json metrics_json(const TwoQubitDensityMatrix& rho) {
    const BellFidelityResult bell = bell_fidelity(rho);
    return {{"concurrence", concurrence(rho)},
            {"bell_fidelity", bell.fidelity},
            {"bell_phase_deg", bell.phase_deg},
            {"bell_family", bell.family == BellFamily::PhiType ? "phi" : "psi"},
            {"purity", purity(rho)}};
}

int cmd_state(const Session& s, const std::string& source) {
    const std::uint64_t seed = s.seed(s.cfg.tomography.seed);
    const BuiltState built = build_state(s.cfg, source);
    nlohmann::json out = {{"command", "state"},
                          {"config_hash", s.hash},
                          {"seed", seed},
                          {"source", built.source},
                          {"overlap_abs", built.overlap_abs},
                          {"state", density_matrix_to_json(built.rho)},
                          {"metrics", metrics_json(built.rho)}};
    write_json_file(s.path("state.json"), out);
    std::cout << "wrote state.json (concurrence="
              << fmt_double(out["metrics"]["concurrence"].get<double>()) << ")\n";
    return 0;
}

int cmd_optimize(const Session& s, std::optional<double> ratio_flag,
                 std::optional<double> filter_flag) {
    const std::uint64_t seed = s.seed(s.cfg.tomography.seed);
    const double ratio = ratio_flag ? *ratio_flag : s.cfg.rates().ratio();
    std::optional<FilterSpec> filter = s.cfg.filter;
    if (filter_flag) {
        if (*filter_flag > 0.0)
            filter = FilterSpec{2.0 * s.cfg.pump.wavelength_nm, *filter_flag};
        else
            filter.reset();
    }
    DetuningScanOptions opts = s.cfg.detuning;
    opts.threads = s.threads;
    const DetuningResult res = optimize_detuning(s.cfg.waveguide, ratio, filter, opts);

    CsvWriter csv(s.path("detuning_scan.csv"), s.hash, seed);
    csv.header({"delta_lambda_nm", "concurrence", "fidelity", "phase_deg", "eta_strong_eff",
                "eta_weak_eff"});
    for (const auto& pt : res.curve)
        csv.row_numeric({pt.delta_lambda_nm, pt.concurrence, pt.fidelity, pt.phase_deg,
                         pt.eta_strong_eff, pt.eta_weak_eff});

    const DetuningPoint& best = res.curve.at(res.best_index);
    nlohmann::json summary = {{"command", "optimize"},
                              {"config_hash", s.hash},
                              {"seed", seed},
                              {"ratio", ratio},
                              {"delta_best_nm", res.delta_best_nm},
                              {"best_concurrence", best.concurrence},
                              {"best_fidelity", best.fidelity},
                              {"points", res.curve.size()}};
    if (filter)
        summary["filter"] = {{"center_nm", filter->center_nm}, {"width_nm", filter->width_nm}};
    write_json_file(s.path("detuning_summary.json"), summary);
    std::cout << "wrote detuning_scan.csv and detuning_summary.json (delta_best_nm="
              << fmt_double(res.delta_best_nm) << ")\n";
    return 0;
}

int cmd_tomo_sim(const Session& s, const std::string& state_path, const std::string& source) {
    const std::uint64_t seed = s.seed(s.cfg.tomography.seed);
    TwoQubitDensityMatrix rho;
    if (!state_path.empty())
        rho = read_density_matrix(state_path);
    else
        rho = build_state(s.cfg, source).rho;
    const auto records =
        simulate_counts(rho, canonical_settings(), s.cfg.tomography.pair_flux_hz,
                        s.cfg.tomography.background_hz, s.cfg.tomography.integration_s, seed);
    write_counts_csv(s.path("counts.csv"), s.hash, seed, records);
    std::cout << "wrote counts.csv (16 settings, " << fmt_double(s.cfg.tomography.integration_s)
              << " s each)\n";
    return 0;
}

int cmd_tomo_fit(const Session& s, const std::string& counts_path) {
    const std::uint64_t seed = s.seed(s.cfg.tomography.seed);
    std::vector<CountRecord> records =
        read_counts_csv(counts_path.empty() ? s.path("counts.csv") : counts_path);
    if (s.subtract_accidentals) {
        for (auto& rec : records) {
            rec.counts = std::max(0.0, rec.counts - rec.accidentals);
            rec.accidentals = 0.0;
        }
    }
    const MLEResult fit = reconstruct(records);
    const BootstrapErrors err = bootstrap_errors(
        records, s.cfg.tomography.bootstrap_resamples, seed, MLEOptions{}, s.threads);

    nlohmann::json report = {{"command", "tomo-fit"},
                             {"config_hash", s.hash},
                             {"seed", seed},
                             {"subtract_accidentals", s.subtract_accidentals},
                             {"state", density_matrix_to_json(fit.rho)},
                             {"metrics", metrics_json(fit.rho)},
                             {"sigma_concurrence", err.sigma_concurrence},
                             {"sigma_fidelity", err.sigma_fidelity},
                             {"bootstrap_resamples", s.cfg.tomography.bootstrap_resamples},
                             {"nll", fit.nll},
                             {"iterations", fit.iterations},
                             {"converged", fit.converged}};
    write_json_file(s.path("reconstruction.json"), report);
    std::cout << "wrote reconstruction.json (concurrence="
              << fmt_double(concurrence(fit.rho)) << " +- " << fmt_double(err.sigma_concurrence)
              << ")\n";
    return 0;
}

int cmd_counts(const Session& s) {
    const std::uint64_t seed = s.seed(s.cfg.counting.seed);
    const auto& c = s.cfg.counting;
    const CoincidenceHistogram hist =
        simulate_histogram(c.pair_rate_hz, c.path, c.det1, c.det2, c.histogram, c.duration_s, seed);

    CsvWriter csv(s.path("histogram.csv"), s.hash, seed);
    csv.header({"bin_start_ns", "counts"});
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        csv.row({fmt_double(hist.bin_start_s(i) * 1e9), std::to_string(hist.counts[i])});

    const double car_value = car(hist);
    const double net = net_rate(hist, c.duration_s);
    const double singles1 = static_cast<double>(hist.diag.det1_clicks) / c.duration_s;
    const PairRateEstimate inferred =
        infer_pair_rate(net, singles1, c.path, c.det1, c.det2, s.cfg.pump.internal_power_uw,
                        s.cfg.pump.wavelength_nm);

    const auto& d = hist.diag;
    nlohmann::json report = {
        {"command", "counts"},
        {"config_hash", s.hash},
        {"seed", seed},
        {"car", car_value},
        {"net_rate_hz", net},
        {"singles_det1_hz", singles1},
        {"inferred",
         {{"pairs_per_s", inferred.pairs_per_s},
          {"pairs_per_s_per_mw", inferred.pairs_per_s_per_mw},
          {"pairs_per_pump_photon", inferred.pairs_per_pump_photon}}},
        {"diagnostics",
         {{"generated_pairs", d.generated_pairs},
          {"det1_photon_candidates", d.det1_photon_candidates},
          {"det1_dark_candidates", d.det1_dark_candidates},
          {"det1_clicks", d.det1_clicks},
          {"det1_dead_dropped", d.det1_dead_dropped},
          {"det2_photon_candidates", d.det2_photon_candidates},
          {"det2_gate_rejected", d.det2_gate_rejected},
          {"det2_dark_candidates", d.det2_dark_candidates},
          {"det2_clicks", d.det2_clicks},
          {"det2_dead_dropped", d.det2_dead_dropped},
          {"coincidences", d.coincidences},
          {"window_true", d.window_true},
          {"window_accidental", d.window_accidental},
          {"window_dark2", d.window_dark2},
          {"floor_counts", d.floor_counts},
          {"floor_dark2", d.floor_dark2}}}};
    write_json_file(s.path("counting_report.json"), report);
    std::cout << "wrote histogram.csv and counting_report.json (net="
              << fmt_double(net) << " Hz, CAR=" << fmt_double(car_value) << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"waveguide photon-pair source simulation and analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed_value = 0;
    int threads = 1;
    bool subtract = false;
    app.add_option("--config", config_path, "scenario JSON file (calibrated defaults if omitted)");
    auto* seed_opt = app.add_option("--seed", seed_value, "seed overriding the config default");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--threads", threads, "worker threads for scans and bootstraps")
        ->check(CLI::PositiveNumber);
    app.add_flag("--subtract-accidentals", subtract,
                 "clamp accidental-subtracted counts at zero before fitting");

    auto* sc_spectra = app.add_subcommand("spectra", "per-channel spectral intensities");
    auto* sc_tuning = app.add_subcommand("tuning-curve", "SHG-style phase-matching curves");
    auto* sc_state = app.add_subcommand("state", "density matrix and entanglement metrics");
    std::string source;
    sc_state->add_option("--source", source, "concurrent or typeII");
    auto* sc_opt = app.add_subcommand("optimize", "phase-matching detuning scan");
    double ratio_value = 0.0, filter_value = 0.0;
    auto* ratio_opt = sc_opt->add_option("--ratio", ratio_value, "strong/weak rate ratio (>= 1)");
    auto* filter_opt =
        sc_opt->add_option("--filter", filter_value, "bandpass width in nm (0 disables)");
    auto* sc_sim = app.add_subcommand("tomo-sim", "simulate projective count files");
    std::string state_path;
    sc_sim->add_option("--state", state_path, "density-matrix JSON overriding the modeled state");
    sc_sim->add_option("--source", source, "concurrent or typeII");
    auto* sc_fit = app.add_subcommand("tomo-fit", "maximum-likelihood reconstruction");
    std::string counts_path;
    sc_fit->add_option("--counts", counts_path, "counts CSV (default <out>/counts.csv)");
    auto* sc_counts = app.add_subcommand("counts", "coincidence histogram, CAR, inferred rates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Session s;
        if (!config_path.empty()) s.cfg = biphoton::load_config(config_path);
        s.hash = biphoton::config_hash(s.cfg);
        s.out_dir = out_dir;
        if (seed_opt->count() > 0) s.seed_flag = seed_value;
        s.threads = threads;
        s.subtract_accidentals = subtract;
        std::filesystem::create_directories(out_dir);

        if (source.empty()) source = s.cfg.source_kind;
        if (source != "concurrent" && source != "typeII")
            throw biphoton::ConfigError("source", "expected concurrent or typeII");

        if (sc_spectra->parsed()) return cmd_spectra(s);
        if (sc_tuning->parsed()) return cmd_tuning_curve(s);
        if (sc_state->parsed()) return cmd_state(s, source);
        if (sc_opt->parsed())
            return cmd_optimize(s,
                                ratio_opt->count() ? std::optional<double>(ratio_value)
                                                   : std::nullopt,
                                filter_opt->count() ? std::optional<double>(filter_value)
                                                    : std::nullopt);
        if (sc_sim->parsed()) return cmd_tomo_sim(s, state_path, source);
        if (sc_fit->parsed()) return cmd_tomo_fit(s, counts_path);
        if (sc_counts->parsed()) return cmd_counts(s);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const biphoton::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
