#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "biphoton/counting.hpp"
#include "biphoton/detuning.hpp"
#include "biphoton/jsa.hpp"
#include "biphoton/waveguide.hpp"

namespace biphoton {

using nlohmann::json;

struct PumpConfig {
    double wavelength_nm = 816.70;
    std::string polarization = "TM";
    double internal_power_uw = 47.3;
};

struct GridConfig {
    std::size_t points = 4096;
    double half_span_rad_s = 2.0e14;
};

struct TomographyConfig {
    double pair_flux_hz = 2.6;
    double background_hz = 0.22;
    double integration_s = 180.0;
    std::uint64_t seed = 424242;
    int bootstrap_resamples = 100;
};

struct CountingConfig {
    double pair_rate_hz = 3.4e4;
    double duration_s = 180.0;
    std::uint64_t seed = 99;
    OpticalPath path = published_path();
    DetectorModel det1{0.04, 2.33e4, 20e-6, DetectorMode::FreeRunning, 20e-9};
    DetectorModel det2{0.05, 1.15e3, 20e-6, DetectorMode::GatedByPartner, 20e-9};
    HistogramConfig histogram{};
};

/// Everything a scenario file can say. Optional blocks keep their calibrated
/// defaults when absent; unknown keys anywhere are rejected.
struct ScenarioConfig {
    WaveguideSpec waveguide = calibrated_waveguide();
    PumpConfig pump;
    GridConfig grid;
    std::optional<FilterSpec> filter;
    std::string source_kind = "concurrent"; ///< concurrent | typeII
    DetuningScanOptions detuning;
    TomographyConfig tomography;
    CountingConfig counting;

    SpectralGrid spectral_grid() const {
        return make_grid(pump.wavelength_nm, grid.half_span_rad_s, grid.points);
    }
    SourceRates rates() const {
        return {waveguide.process(ProcessKind::TypeI).efficiency,
                waveguide.process(ProcessKind::Type0).efficiency};
    }
};

namespace config_detail {

inline void reject_unknown(const json& obj, const std::string& path,
                           const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
}

inline const json& member(const json& obj, const std::string& path, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError(path.empty() ? key : path + "." + key, "missing required key");
    return *it;
}

inline double num(const json& obj, const std::string& path, const std::string& key) {
    const json& v = member(obj, path, key);
    if (!v.is_number())
        throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

inline double num_or(const json& obj, const std::string& path, const std::string& key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    return num(obj, path, key);
}

inline std::uint64_t uint_or(const json& obj, const std::string& path, const std::string& key,
                             std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned())
        throw ConfigError(path + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::string str_or(const json& obj, const std::string& path, const std::string& key,
                          const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline DetectorModel parse_detector(const json& j, const std::string& path, DetectorModel base) {
    reject_unknown(j, path,
                   {"efficiency", "dark_rate_hz", "dead_time_us", "mode", "gate_width_ns"});
    base.efficiency = num_or(j, path, "efficiency", base.efficiency);
    base.dark_rate_hz = num_or(j, path, "dark_rate_hz", base.dark_rate_hz);
    base.dead_time_s = num_or(j, path, "dead_time_us", base.dead_time_s / 1e-6) * 1e-6;
    const std::string mode = str_or(
        j, path, "mode", base.mode == DetectorMode::FreeRunning ? "free-running" : "gated-by-partner");
    if (mode == "free-running")
        base.mode = DetectorMode::FreeRunning;
    else if (mode == "gated-by-partner")
        base.mode = DetectorMode::GatedByPartner;
    else
        throw ConfigError(path + ".mode", "expected free-running or gated-by-partner");
    base.gate_width_s = num_or(j, path, "gate_width_ns", base.gate_width_s / 1e-9) * 1e-9;
    return base;
}

} // namespace config_detail

/// Parses and validates a scenario; throws ConfigError naming the field on
/// any violation.
inline ScenarioConfig parse_config(const json& root) {
    using namespace config_detail;
    ScenarioConfig cfg;
    reject_unknown(root, "",
                   {"waveguide", "pump", "grid", "filter", "source", "detuning", "tomography",
                    "counting"});

    if (root.contains("waveguide")) {
        const json& w = root.at("waveguide");
        const std::string wp = "waveguide";
        reject_unknown(w, wp, {"length_mm", "loss_te_per_cm", "loss_tm_per_cm", "dispersion",
                               "processes"});
        cfg.waveguide.length_m = num_or(w, wp, "length_mm", cfg.waveguide.length_m / 1e-3) * 1e-3;
        cfg.waveguide.loss_TE = num_or(w, wp, "loss_te_per_cm", cfg.waveguide.loss_TE / 100.0) * 100.0;
        cfg.waveguide.loss_TM = num_or(w, wp, "loss_tm_per_cm", cfg.waveguide.loss_TM / 100.0) * 100.0;
        if (w.contains("dispersion")) {
            const json& d = w.at("dispersion");
            const std::string dp = wp + ".dispersion";
            reject_unknown(d, dp,
                           {"beta1_h_s_per_m", "beta1_v_s_per_m", "beta2_h_s2_per_m",
                            "beta2_v_s2_per_m", "pump_slope_rad_per_m_nm"});
            auto& disp = cfg.waveguide.dispersion;
            disp.beta1_H = num_or(d, dp, "beta1_h_s_per_m", disp.beta1_H);
            disp.beta1_V = num_or(d, dp, "beta1_v_s_per_m", disp.beta1_V);
            disp.beta2_H = num_or(d, dp, "beta2_h_s2_per_m", disp.beta2_H);
            disp.beta2_V = num_or(d, dp, "beta2_v_s2_per_m", disp.beta2_V);
            if (d.contains("pump_slope_rad_per_m_nm")) {
                const json& s = d.at("pump_slope_rad_per_m_nm");
                const std::string sp = dp + ".pump_slope_rad_per_m_nm";
                reject_unknown(s, sp, {"type0", "typeI", "typeII"});
                disp.pump_slope[0] = num_or(s, sp, "type0", disp.pump_slope[0]);
                disp.pump_slope[1] = num_or(s, sp, "typeI", disp.pump_slope[1]);
                disp.pump_slope[2] = num_or(s, sp, "typeII", disp.pump_slope[2]);
            }
        }
        if (w.contains("processes")) {
            const json& ps = w.at("processes");
            const std::string pp = wp + ".processes";
            reject_unknown(ps, pp, {"type0", "typeI", "typeII"});
            for (const auto& name : {"type0", "typeI", "typeII"}) {
                if (!ps.contains(name)) continue;
                const json& p = ps.at(name);
                const std::string ppp = pp + "." + name;
                reject_unknown(p, ppp, {"pm_wavelength_nm", "efficiency_pairs_per_photon"});
                auto& slot = cfg.waveguide.process(process_from_string(name));
                slot.pm_wavelength_nm = num_or(p, ppp, "pm_wavelength_nm", slot.pm_wavelength_nm);
                slot.efficiency = num_or(p, ppp, "efficiency_pairs_per_photon", slot.efficiency);
            }
        }
    }

    if (root.contains("pump")) {
        const json& p = root.at("pump");
        reject_unknown(p, "pump", {"wavelength_nm", "polarization", "internal_power_uw"});
        cfg.pump.wavelength_nm = num_or(p, "pump", "wavelength_nm", cfg.pump.wavelength_nm);
        cfg.pump.polarization = str_or(p, "pump", "polarization", cfg.pump.polarization);
        if (cfg.pump.polarization != "TE" && cfg.pump.polarization != "TM")
            throw ConfigError("pump.polarization", "expected TE or TM");
        cfg.pump.internal_power_uw =
            num_or(p, "pump", "internal_power_uw", cfg.pump.internal_power_uw);
        if (!(cfg.pump.internal_power_uw > 0.0))
            throw ConfigError("pump.internal_power_uw", "must be positive");
    }

    if (root.contains("grid")) {
        const json& g = root.at("grid");
        reject_unknown(g, "grid", {"points", "half_span_rad_s"});
        const double pts = num_or(g, "grid", "points", static_cast<double>(cfg.grid.points));
        if (!(pts >= 3.0) || pts != std::floor(pts))
            throw ConfigError("grid.points", "must be an integer >= 3");
        cfg.grid.points = static_cast<std::size_t>(pts);
        cfg.grid.half_span_rad_s = num_or(g, "grid", "half_span_rad_s", cfg.grid.half_span_rad_s);
        if (!(cfg.grid.half_span_rad_s > 0.0))
            throw ConfigError("grid.half_span_rad_s", "must be positive");
    }

    if (root.contains("filter") && !root.at("filter").is_null()) {
        const json& f = root.at("filter");
        reject_unknown(f, "filter", {"center_nm", "width_nm"});
        FilterSpec spec;
        spec.width_nm = num(f, "filter", "width_nm");
        if (!(spec.width_nm > 0.0)) throw ConfigError("filter.width_nm", "must be positive");
        spec.center_nm = num_or(f, "filter", "center_nm", 2.0 * cfg.pump.wavelength_nm);
        if (!(spec.center_nm > 0.0)) throw ConfigError("filter.center_nm", "must be positive");
        cfg.filter = spec;
    }

    if (root.contains("source")) {
        const json& s = root.at("source");
        reject_unknown(s, "source", {"kind"});
        cfg.source_kind = str_or(s, "source", "kind", cfg.source_kind);
        if (cfg.source_kind != "concurrent" && cfg.source_kind != "typeII")
            throw ConfigError("source.kind", "expected concurrent or typeII");
    }

    if (root.contains("detuning")) {
        const json& d = root.at("detuning");
        reject_unknown(d, "detuning", {"min_nm", "max_nm", "step_nm"});
        cfg.detuning.min_nm = num_or(d, "detuning", "min_nm", cfg.detuning.min_nm);
        cfg.detuning.max_nm = num_or(d, "detuning", "max_nm", cfg.detuning.max_nm);
        cfg.detuning.step_nm = num_or(d, "detuning", "step_nm", cfg.detuning.step_nm);
        if (!(cfg.detuning.step_nm > 0.0)) throw ConfigError("detuning.step_nm", "must be positive");
        if (!(cfg.detuning.max_nm >= cfg.detuning.min_nm))
            throw ConfigError("detuning.max_nm", "scan range is empty");
    }
    cfg.detuning.grid_points = cfg.grid.points;
    cfg.detuning.grid_half_span = cfg.grid.half_span_rad_s;

    if (root.contains("tomography")) {
        const json& t = root.at("tomography");
        const std::string tp = "tomography";
        reject_unknown(t, tp,
                       {"pair_flux_hz", "background_hz", "integration_s", "seed",
                        "bootstrap_resamples"});
        cfg.tomography.pair_flux_hz = num_or(t, tp, "pair_flux_hz", cfg.tomography.pair_flux_hz);
        cfg.tomography.background_hz = num_or(t, tp, "background_hz", cfg.tomography.background_hz);
        cfg.tomography.integration_s = num_or(t, tp, "integration_s", cfg.tomography.integration_s);
        cfg.tomography.seed = uint_or(t, tp, "seed", cfg.tomography.seed);
        const double m = num_or(t, tp, "bootstrap_resamples",
                                static_cast<double>(cfg.tomography.bootstrap_resamples));
        if (!(m >= 10.0) || m != std::floor(m))
            throw ConfigError("tomography.bootstrap_resamples", "must be an integer >= 10");
        cfg.tomography.bootstrap_resamples = static_cast<int>(m);
        if (!(cfg.tomography.pair_flux_hz > 0.0))
            throw ConfigError("tomography.pair_flux_hz", "must be positive");
        if (cfg.tomography.background_hz < 0.0)
            throw ConfigError("tomography.background_hz", "must be non-negative");
        if (!(cfg.tomography.integration_s > 0.0))
            throw ConfigError("tomography.integration_s", "must be positive");
    }

    if (root.contains("counting")) {
        const json& c = root.at("counting");
        const std::string cp = "counting";
        reject_unknown(c, cp,
                       {"pair_rate_hz", "duration_s", "seed", "path", "det1", "det2", "histogram"});
        cfg.counting.pair_rate_hz = num_or(c, cp, "pair_rate_hz", cfg.counting.pair_rate_hz);
        cfg.counting.duration_s = num_or(c, cp, "duration_s", cfg.counting.duration_s);
        cfg.counting.seed = uint_or(c, cp, "seed", cfg.counting.seed);
        if (cfg.counting.pair_rate_hz < 0.0)
            throw ConfigError("counting.pair_rate_hz", "must be non-negative");
        if (!(cfg.counting.duration_s > 0.0))
            throw ConfigError("counting.duration_s", "must be positive");
        if (c.contains("path")) {
            const json& p = c.at("path");
            const std::string pp = cp + ".path";
            reject_unknown(p, pp,
                           {"objective", "longpass", "beamsplitter_arm", "analyzer", "fiber1",
                            "fiber2", "electronic_delay_ns"});
            auto& path = cfg.counting.path;
            path.objective = num_or(p, pp, "objective", path.objective);
            path.longpass = num_or(p, pp, "longpass", path.longpass);
            path.beamsplitter_arm = num_or(p, pp, "beamsplitter_arm", path.beamsplitter_arm);
            path.analyzer = num_or(p, pp, "analyzer", path.analyzer);
            path.fiber1 = num_or(p, pp, "fiber1", path.fiber1);
            path.fiber2 = num_or(p, pp, "fiber2", path.fiber2);
            path.electronic_delay_s =
                num_or(p, pp, "electronic_delay_ns", path.electronic_delay_s / 1e-9) * 1e-9;
            path.validate();
        }
        if (c.contains("det1"))
            cfg.counting.det1 = config_detail::parse_detector(c.at("det1"), cp + ".det1",
                                                              cfg.counting.det1);
        if (c.contains("det2"))
            cfg.counting.det2 = config_detail::parse_detector(c.at("det2"), cp + ".det2",
                                                              cfg.counting.det2);
        cfg.counting.det1.validate("counting.det1");
        cfg.counting.det2.validate("counting.det2");
        if (c.contains("histogram")) {
            const json& h = c.at("histogram");
            const std::string hp = cp + ".histogram";
            reject_unknown(h, hp, {"bin_width_ns", "span_ns", "window_ns"});
            auto& hist = cfg.counting.histogram;
            hist.bin_width_s = num_or(h, hp, "bin_width_ns", hist.bin_width_s / 1e-9) * 1e-9;
            hist.span_s = num_or(h, hp, "span_ns", hist.span_s / 1e-9) * 1e-9;
            hist.window_s = num_or(h, hp, "window_ns", hist.window_s / 1e-9) * 1e-9;
            hist.validate();
        }
    }

    cfg.waveguide.validate();
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config", "top level must be an object");
    return parse_config(root);
}

/// Canonical serialization (same schema the parser accepts).
inline json to_json(const ScenarioConfig& cfg) {
    json root;
    const auto& w = cfg.waveguide;
    root["waveguide"] = {
        {"length_mm", w.length_m / 1e-3},
        {"loss_te_per_cm", w.loss_TE / 100.0},
        {"loss_tm_per_cm", w.loss_TM / 100.0},
        {"dispersion",
         {{"beta1_h_s_per_m", w.dispersion.beta1_H},
          {"beta1_v_s_per_m", w.dispersion.beta1_V},
          {"beta2_h_s2_per_m", w.dispersion.beta2_H},
          {"beta2_v_s2_per_m", w.dispersion.beta2_V},
          {"pump_slope_rad_per_m_nm",
           {{"type0", w.dispersion.pump_slope[0]},
            {"typeI", w.dispersion.pump_slope[1]},
            {"typeII", w.dispersion.pump_slope[2]}}}}},
        {"processes",
         {{"type0",
           {{"pm_wavelength_nm", w.process(ProcessKind::Type0).pm_wavelength_nm},
            {"efficiency_pairs_per_photon", w.process(ProcessKind::Type0).efficiency}}},
          {"typeI",
           {{"pm_wavelength_nm", w.process(ProcessKind::TypeI).pm_wavelength_nm},
            {"efficiency_pairs_per_photon", w.process(ProcessKind::TypeI).efficiency}}},
          {"typeII",
           {{"pm_wavelength_nm", w.process(ProcessKind::TypeII).pm_wavelength_nm},
            {"efficiency_pairs_per_photon", w.process(ProcessKind::TypeII).efficiency}}}}}};
    root["pump"] = {{"wavelength_nm", cfg.pump.wavelength_nm},
                    {"polarization", cfg.pump.polarization},
                    {"internal_power_uw", cfg.pump.internal_power_uw}};
    root["grid"] = {{"points", cfg.grid.points}, {"half_span_rad_s", cfg.grid.half_span_rad_s}};
    if (cfg.filter)
        root["filter"] = {{"center_nm", cfg.filter->center_nm}, {"width_nm", cfg.filter->width_nm}};
    root["source"] = {{"kind", cfg.source_kind}};
    root["detuning"] = {{"min_nm", cfg.detuning.min_nm},
                        {"max_nm", cfg.detuning.max_nm},
                        {"step_nm", cfg.detuning.step_nm}};
    root["tomography"] = {{"pair_flux_hz", cfg.tomography.pair_flux_hz},
                          {"background_hz", cfg.tomography.background_hz},
                          {"integration_s", cfg.tomography.integration_s},
                          {"seed", cfg.tomography.seed},
                          {"bootstrap_resamples", cfg.tomography.bootstrap_resamples}};
    const auto& c = cfg.counting;
    root["counting"] = {
        {"pair_rate_hz", c.pair_rate_hz},
        {"duration_s", c.duration_s},
        {"seed", c.seed},
        {"path",
         {{"objective", c.path.objective},
          {"longpass", c.path.longpass},
          {"beamsplitter_arm", c.path.beamsplitter_arm},
          {"analyzer", c.path.analyzer},
          {"fiber1", c.path.fiber1},
          {"fiber2", c.path.fiber2},
          {"electronic_delay_ns", c.path.electronic_delay_s / 1e-9}}},
        {"det1",
         {{"efficiency", c.det1.efficiency},
          {"dark_rate_hz", c.det1.dark_rate_hz},
          {"dead_time_us", c.det1.dead_time_s / 1e-6},
          {"mode", c.det1.mode == DetectorMode::FreeRunning ? "free-running" : "gated-by-partner"},
          {"gate_width_ns", c.det1.gate_width_s / 1e-9}}},
        {"det2",
         {{"efficiency", c.det2.efficiency},
          {"dark_rate_hz", c.det2.dark_rate_hz},
          {"dead_time_us", c.det2.dead_time_s / 1e-6},
          {"mode", c.det2.mode == DetectorMode::FreeRunning ? "free-running" : "gated-by-partner"},
          {"gate_width_ns", c.det2.gate_width_s / 1e-9}}},
        {"histogram",
         {{"bin_width_ns", c.histogram.bin_width_s / 1e-9},
          {"span_ns", c.histogram.span_s / 1e-9},
          {"window_ns", c.histogram.window_s / 1e-9}}}};
    return root;
}

/// FNV-1a 64-bit over the canonical serialization; embedded in every output.
inline std::string config_hash(const ScenarioConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace biphoton
