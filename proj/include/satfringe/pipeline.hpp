#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "kinematics.hpp"
#include "photon_sim.hpp"
#include "presets.hpp"
#include "ranging.hpp"
#include "visibility.hpp"
#include "wavepacket.hpp"

namespace satfringe {

// End-to-end run orchestration: one RunConfig drives predict -> simulate ->
// analyze.  Everything here is deterministic for a fixed config and seed --
// file outputs are byte-identical across runs and thread counts, which is a
// contract the CLI tests enforce, not an accident.

/// Qubit transmission duty cycle: one slot of `slot_length_s` per
/// `slot_period_s` ranging cycle, covering `span_s` centered on the middle of
/// the phase track.  span_s <= 0 means transmit over the whole track.
struct AcquisitionPlan {
    double slot_period_s = 0.1;
    double slot_length_s = 3.0e-4;
    double span_s = 0.0;
};

struct AnalysisOptions {
    double bin_width_s = default_fit_bin_s;
    std::uint64_t min_events = 30;
    bool select = false; // restrict to events with predicted phase in [lo, hi)
    double select_lo_rad = 0.0;
    double select_hi_rad = 0.0;
};

struct RunConfig {
    OpticalConfig optical;
    LinkModel link;
    DetectorModel detector;
    double vis_degradation = 1.0;

    // Pass source: an on-disk range track, or a synthetic overhead pass.
    std::string range_file;
    bool use_geometry = false;
    PassGeometry geometry;
    double cadence_s = 0.1;
    double range_noise_m = 0.0;

    AcquisitionPlan acquisition;
    AnalysisOptions analysis;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string preset_name; // informational echo when built from a preset
};

inline RunConfig preset_run_config(std::string_view name) {
    const SatellitePreset& p = find_preset(name);
    RunConfig cfg;
    cfg.optical = preset_optical();
    cfg.link = preset_link(p);
    cfg.detector = preset_detector();
    cfg.vis_degradation = p.visibility_target;
    cfg.use_geometry = true;
    cfg.geometry = preset_geometry(p);
    cfg.acquisition.span_s = p.acq_span_s;
    cfg.acquisition.slot_length_s = p.slot_length_s;
    cfg.preset_name = p.name;
    return cfg;
}

// ---------------------------------------------------------------------------
// Config (de)serialization.  Keys mirror the struct fields one to one, in the
// structs' SI units; unknown keys are rejected so typos fail loudly instead
// of silently running defaults.

/// "none" or "lo:hi" in radians; [lo, hi) may wrap (e.g. "-0.6283:0.6283").
inline void parse_phase_select(std::string_view text, AnalysisOptions& opt) {
    if (text == "none") {
        opt.select = false;
        return;
    }
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos)
        throw validation_error("phase-select: expected 'lo_rad:hi_rad' or 'none', got '" +
                               std::string(text) + "'");
    const std::string lo_s(text.substr(0, colon)), hi_s(text.substr(colon + 1));
    std::size_t pos = 0;
    double lo = 0.0, hi = 0.0;
    try {
        lo = std::stod(lo_s, &pos);
        if (pos != lo_s.size()) throw std::invalid_argument(lo_s);
        hi = std::stod(hi_s, &pos);
        if (pos != hi_s.size()) throw std::invalid_argument(hi_s);
    } catch (const std::exception&) {
        throw validation_error("phase-select: bad number in '" + std::string(text) + "'");
    }
    if (!(hi > lo) || !(hi - lo <= two_pi))
        throw validation_error("phase-select: need lo < hi and hi - lo <= 2*pi");
    opt.select = true;
    opt.select_lo_rad = lo;
    opt.select_hi_rad = hi;
}

inline std::string phase_select_string(const AnalysisOptions& opt) {
    if (!opt.select) return "none";
    return detail::fmt_fixed(opt.select_lo_rad, 9) + ":" + detail::fmt_fixed(opt.select_hi_rad, 9);
}

namespace detail {

inline void check_known_keys(const ordered_json& j, std::initializer_list<const char*> keys,
                             const char* where) {
    if (!j.is_object())
        throw validation_error(std::string(where) + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw validation_error(std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
inline T jget(const ordered_json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("config key '") + key + "': " + e.what());
    }
}

} // namespace detail

inline ordered_json run_config_json(const RunConfig& cfg) {
    ordered_json j;
    if (!cfg.preset_name.empty()) j["preset"] = cfg.preset_name;
    j["optical"] = {{"wavelength_vacuum_m", cfg.optical.wavelength_vacuum_m},
                    {"coherence_time_s", cfg.optical.coherence_time_s},
                    {"mzi_delay_s", cfg.optical.mzi_delay_s},
                    {"rep_period_s", cfg.optical.rep_period_s}};
    j["link"] = {{"mu_received", cfg.link.mu_received},
                 {"eta_optics", cfg.link.eta_optics},
                 {"detector_efficiency", cfg.link.detector_efficiency}};
    j["detector"] = {{"jitter_sigma_s", cfg.detector.jitter_sigma_s},
                     {"tdc_resolution_s", cfg.detector.tdc_resolution_s},
                     {"background_rate_hz", cfg.detector.background_rate_hz}};
    j["vis_degradation"] = cfg.vis_degradation;
    ordered_json pass;
    pass["range_file"] = cfg.range_file;
    pass["use_geometry"] = cfg.use_geometry;
    if (cfg.use_geometry)
        pass["geometry"] = {{"altitude_m", cfg.geometry.altitude_m},
                            {"min_range_m", cfg.geometry.min_range_m},
                            {"max_range_m", cfg.geometry.max_range_m},
                            {"duration_s", cfg.geometry.duration_s},
                            {"max_radial_speed_mps", cfg.geometry.max_radial_speed_mps}};
    pass["cadence_s"] = cfg.cadence_s;
    pass["range_noise_m"] = cfg.range_noise_m;
    j["pass"] = std::move(pass);
    j["acquisition"] = {{"slot_period_s", cfg.acquisition.slot_period_s},
                        {"slot_length_s", cfg.acquisition.slot_length_s},
                        {"span_s", cfg.acquisition.span_s}};
    j["analysis"] = {{"bin_width_s", cfg.analysis.bin_width_s},
                     {"min_events", cfg.analysis.min_events},
                     {"phase_select", phase_select_string(cfg.analysis)}};
    j["seed"] = cfg.seed;
    // threads intentionally not echoed: outputs are identical for any degree
    // of parallelism, and manifests must be byte-identical too.
    return j;
}

/// Overlay a (possibly partial) config document onto `base`.  Typical use:
/// base comes from a preset, the document tweaks one or two knobs.
inline RunConfig run_config_from_json(const ordered_json& j, RunConfig base = {}) {
    detail::check_known_keys(j,
                             {"preset", "optical", "link", "detector", "vis_degradation", "pass",
                              "acquisition", "analysis", "seed", "threads"},
                             "config");
    if (j.contains("preset")) {
        const std::string name = j.at("preset").get<std::string>();
        base = preset_run_config(name);
    }
    RunConfig cfg = base;
    if (j.contains("optical")) {
        const auto& o = j.at("optical");
        detail::check_known_keys(
            o, {"wavelength_vacuum_m", "coherence_time_s", "mzi_delay_s", "rep_period_s"},
            "config.optical");
        cfg.optical.wavelength_vacuum_m =
            detail::jget(o, "wavelength_vacuum_m", cfg.optical.wavelength_vacuum_m);
        cfg.optical.coherence_time_s = detail::jget(o, "coherence_time_s", cfg.optical.coherence_time_s);
        cfg.optical.mzi_delay_s = detail::jget(o, "mzi_delay_s", cfg.optical.mzi_delay_s);
        cfg.optical.rep_period_s = detail::jget(o, "rep_period_s", cfg.optical.rep_period_s);
    }
    if (j.contains("link")) {
        const auto& o = j.at("link");
        detail::check_known_keys(o, {"mu_received", "eta_optics", "detector_efficiency"},
                                 "config.link");
        cfg.link.mu_received = detail::jget(o, "mu_received", cfg.link.mu_received);
        cfg.link.eta_optics = detail::jget(o, "eta_optics", cfg.link.eta_optics);
        cfg.link.detector_efficiency =
            detail::jget(o, "detector_efficiency", cfg.link.detector_efficiency);
    }
    if (j.contains("detector")) {
        const auto& o = j.at("detector");
        detail::check_known_keys(o, {"jitter_sigma_s", "tdc_resolution_s", "background_rate_hz"},
                                 "config.detector");
        cfg.detector.jitter_sigma_s = detail::jget(o, "jitter_sigma_s", cfg.detector.jitter_sigma_s);
        cfg.detector.tdc_resolution_s =
            detail::jget(o, "tdc_resolution_s", cfg.detector.tdc_resolution_s);
        cfg.detector.background_rate_hz =
            detail::jget(o, "background_rate_hz", cfg.detector.background_rate_hz);
    }
    cfg.vis_degradation = detail::jget(j, "vis_degradation", cfg.vis_degradation);
    if (j.contains("pass")) {
        const auto& o = j.at("pass");
        detail::check_known_keys(
            o, {"range_file", "use_geometry", "geometry", "cadence_s", "range_noise_m"},
            "config.pass");
        cfg.range_file = detail::jget<std::string>(o, "range_file", cfg.range_file);
        cfg.use_geometry = detail::jget(o, "use_geometry", cfg.use_geometry);
        if (o.contains("geometry")) {
            const auto& g = o.at("geometry");
            detail::check_known_keys(
                g, {"altitude_m", "min_range_m", "max_range_m", "duration_s", "max_radial_speed_mps"},
                "config.pass.geometry");
            cfg.geometry.altitude_m = detail::jget(g, "altitude_m", cfg.geometry.altitude_m);
            cfg.geometry.min_range_m = detail::jget(g, "min_range_m", cfg.geometry.min_range_m);
            cfg.geometry.max_range_m = detail::jget(g, "max_range_m", cfg.geometry.max_range_m);
            cfg.geometry.duration_s = detail::jget(g, "duration_s", cfg.geometry.duration_s);
            cfg.geometry.max_radial_speed_mps =
                detail::jget(g, "max_radial_speed_mps", cfg.geometry.max_radial_speed_mps);
            cfg.use_geometry = detail::jget(o, "use_geometry", true);
        }
        cfg.cadence_s = detail::jget(o, "cadence_s", cfg.cadence_s);
        cfg.range_noise_m = detail::jget(o, "range_noise_m", cfg.range_noise_m);
    }
    if (j.contains("acquisition")) {
        const auto& o = j.at("acquisition");
        detail::check_known_keys(o, {"slot_period_s", "slot_length_s", "span_s"},
                                 "config.acquisition");
        cfg.acquisition.slot_period_s =
            detail::jget(o, "slot_period_s", cfg.acquisition.slot_period_s);
        cfg.acquisition.slot_length_s =
            detail::jget(o, "slot_length_s", cfg.acquisition.slot_length_s);
        cfg.acquisition.span_s = detail::jget(o, "span_s", cfg.acquisition.span_s);
    }
    if (j.contains("analysis")) {
        const auto& o = j.at("analysis");
        detail::check_known_keys(o, {"bin_width_s", "min_events", "phase_select"},
                                 "config.analysis");
        cfg.analysis.bin_width_s = detail::jget(o, "bin_width_s", cfg.analysis.bin_width_s);
        cfg.analysis.min_events = detail::jget(o, "min_events", cfg.analysis.min_events);
        if (o.contains("phase_select"))
            parse_phase_select(o.at("phase_select").get<std::string>(), cfg.analysis);
    }
    cfg.seed = detail::jget(j, "seed", cfg.seed);
    cfg.threads = detail::jget(j, "threads", cfg.threads);
    if (cfg.threads < 1) throw validation_error("config: threads must be >= 1");
    return cfg;
}

// ---------------------------------------------------------------------------
// Pass loading and the acquisition duty cycle.

struct PassData {
    RangeTrack track;
    PhaseTrack ptrack;
};

inline PassData load_pass(const RunConfig& cfg) {
    PassData out;
    if (!cfg.range_file.empty()) {
        out.track = read_range_csv(cfg.range_file);
    } else if (cfg.use_geometry) {
        out.track = synthesize_pass(cfg.geometry, cfg.cadence_s, cfg.seed, cfg.range_noise_m);
    } else {
        throw validation_error("run config: need a range file or a synthetic pass geometry");
    }
    out.ptrack = build_phase_track(out.track, cfg.optical);
    return out;
}

inline std::vector<EpochWindow> acquisition_windows(const AcquisitionPlan& plan,
                                                    const PhaseTrack& ptrack) {
    const double t0 = ptrack.t_first(), t1 = ptrack.t_last();
    if (plan.span_s <= 0.0) return {{t0, t1}};
    if (!(plan.slot_period_s > 0.0) || !(plan.slot_length_s > 0.0))
        throw validation_error("acquisition: slot period and length must be positive");
    if (plan.slot_length_s > 0.5 * plan.slot_period_s)
        throw validation_error("acquisition: slot length must not exceed half the period");

    const double mid = 0.5 * (t0 + t1);
    const double start = mid - 0.5 * plan.span_s;
    const std::size_t n_slots =
        static_cast<std::size_t>(std::floor(plan.span_s / plan.slot_period_s + 1e-9));
    std::vector<EpochWindow> out;
    out.reserve(n_slots);
    for (std::size_t k = 0; k < n_slots; ++k) {
        const double s = start + static_cast<double>(k) * plan.slot_period_s;
        const double lo = std::max(s, t0);
        const double hi = std::min(s + plan.slot_length_s, t1);
        if (lo < hi) out.push_back({lo, hi});
    }
    if (out.empty())
        throw validation_error("acquisition: no slot overlaps the phase track span");
    return out;
}

/// Concatenated slot-by-slot Monte Carlo.  One seed drives all slots: per
/// 65536-pulse blocks each slot derives independent streams from absolute
/// pulse indices, and slots a full period apart can never share a block
/// (the period guard above keeps them > 0.655 ms apart at 100 MHz).
inline std::vector<DetectionEvent> run_simulate(const RunConfig& cfg, const PassData& pass) {
    const auto windows = acquisition_windows(cfg.acquisition, pass.ptrack);
    std::vector<DetectionEvent> events;
    for (const auto& w : windows) {
        auto part = simulate_pass(pass.ptrack, cfg.optical, cfg.link, cfg.detector,
                                  cfg.vis_degradation, w, cfg.seed, cfg.threads);
        events.insert(events.end(), part.begin(), part.end());
    }
    return events;
}

// ---------------------------------------------------------------------------
// Analysis entry points (file-free; the cmd_* wrappers below do the I/O).

inline std::vector<TaggedEvent> select_phase(const std::vector<TaggedEvent>& tagged,
                                             double lo_rad, double hi_rad) {
    const double center = 0.5 * (lo_rad + hi_rad);
    const double half = 0.5 * (hi_rad - lo_rad);
    std::vector<TaggedEvent> out;
    for (const auto& te : tagged) {
        const double w = std::remainder(te.phase_rad - center, two_pi);
        if (w >= -half && w < half) out.push_back(te);
    }
    return out;
}

struct AnalysisProducts {
    std::size_t n_events_in = 0;
    std::size_t n_events_used = 0; // after phase selection, if any
    DeltaHistogram hist;
    TriGaussFit fit;
    bool have_p_c = false;
    PcExperimental p_c{0.0, 0.0};
    bool have_visibility = false;
    VisibilityResult vis;
    bool have_two_param = false;
    TwoParamVisibility two_param;
};

/// Shared analyze/report core.  Phase tags come exclusively from the
/// range-derived track; DetectionEvent::truth is never looked at.
inline AnalysisProducts run_analysis(const std::vector<DetectionEvent>& events,
                                     const PhaseTrack& ptrack, const RunConfig& cfg) {
    AnalysisProducts out;
    out.n_events_in = events.size();

    const auto tagged = event_phase_tag(events, ptrack);
    std::vector<DetectionEvent> used;
    if (cfg.analysis.select) {
        for (const auto& te :
             select_phase(tagged, cfg.analysis.select_lo_rad, cfg.analysis.select_hi_rad))
            used.push_back(te.event);
    } else {
        used = events;
    }
    out.n_events_used = used.size();

    out.hist = build_histogram(used, cfg.analysis.bin_width_s, cfg.optical.rep_period_s);
    out.fit = fit_tri_gaussian(out.hist, cfg.optical.mzi_delay_s);
    if (out.fit.converged && out.fit.n_lateral.value > 0.0) {
        out.p_c = p_c_experimental(out.fit);
        out.have_p_c = true;
    }

    if (!cfg.analysis.select) {
        VisibilityOptions vopt;
        vopt.bin_width_s = cfg.analysis.bin_width_s;
        vopt.min_events = cfg.analysis.min_events;
        out.vis = phase_binned_analysis(tagged, cfg.optical, vopt);
        out.have_visibility = true;
        try {
            out.two_param = visibility_fit_two_param(out.vis);
            out.have_two_param = true;
        } catch (const fit_refused&) {
            out.have_two_param = false; // diagnostic only; headline result stands
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Command implementations.  Each writes its products under out_dir and
// returns the paths; the CLI is a thin flag-parsing shell around these.

namespace detail {

inline std::string join_path(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

inline void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw validation_error("cannot create output directory '" + dir + "': " + ec.message());
}

inline ordered_json file_entry(const std::string& path) {
    return ordered_json{{"file", std::filesystem::path(path).filename().string()},
                        {"fnv1a64", file_content_hash(path)}};
}

} // namespace detail

struct PredictOutputs {
    std::string phase_track_csv;
    PassData pass;
};

inline PredictOutputs cmd_predict(const RunConfig& cfg, const std::string& out_dir) {
    detail::ensure_out_dir(out_dir);
    PredictOutputs out;
    out.pass = load_pass(cfg);
    out.phase_track_csv = detail::join_path(out_dir, "phase_track.csv");
    write_phase_track_csv(out.phase_track_csv, out.pass.ptrack);
    return out;
}

struct SimulateOutputs {
    std::string range_csv;
    std::string phase_track_csv;
    std::string events_csv;
    std::string manifest_json;
    std::size_t n_events = 0;
    PassData pass;
};

inline SimulateOutputs cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    detail::ensure_out_dir(out_dir);
    SimulateOutputs out;
    out.pass = load_pass(cfg);
    const auto events = run_simulate(cfg, out.pass);
    out.n_events = events.size();

    out.range_csv = detail::join_path(out_dir, "range.csv");
    out.phase_track_csv = detail::join_path(out_dir, "phase_track.csv");
    out.events_csv = detail::join_path(out_dir, "events.csv");
    out.manifest_json = detail::join_path(out_dir, "manifest.json");
    write_range_csv(out.range_csv, out.pass.track);
    write_phase_track_csv(out.phase_track_csv, out.pass.ptrack);
    write_events_csv(out.events_csv, events);

    ordered_json manifest;
    manifest["format"] = "satfringe-run-manifest/1";
    manifest["command"] = "simulate";
    manifest["seed"] = cfg.seed;
    manifest["config"] = run_config_json(cfg);
    ordered_json inputs = ordered_json::object();
    if (!cfg.range_file.empty()) {
        inputs["range_file"] = ordered_json{
            {"file", cfg.range_file}, {"fnv1a64", file_content_hash(cfg.range_file)}};
    } else {
        inputs["range_file"] = nullptr; // synthetic pass; geometry echoed in config
    }
    manifest["inputs"] = std::move(inputs);
    ordered_json outputs;
    outputs["range_csv"] = detail::file_entry(out.range_csv);
    outputs["phase_track_csv"] = detail::file_entry(out.phase_track_csv);
    outputs["events_csv"] = detail::file_entry(out.events_csv);
    manifest["outputs"] = std::move(outputs);
    manifest["counts"] = ordered_json{{"n_events", out.n_events},
                                      {"n_range_samples", out.pass.track.size()},
                                      {"n_knots", out.pass.ptrack.size()}};
    write_json_file(out.manifest_json, manifest);
    return out;
}

struct AnalyzeOutputs {
    std::string histogram_csv;
    std::string fit_json;
    std::string visibility_json; // empty when a phase selection is active
    std::string visibility_csv;
    AnalysisProducts products;
};

inline ordered_json analysis_fit_json(const AnalysisProducts& prod, const RunConfig& cfg) {
    ordered_json j;
    j["n_events_in"] = prod.n_events_in;
    j["n_events_used"] = prod.n_events_used;
    j["phase_select"] = phase_select_string(cfg.analysis);
    j["fit"] = fit_report_json(prod.fit);
    if (prod.have_p_c)
        j["p_c_exp"] = ordered_json{{"value", prod.p_c.value}, {"err", prod.p_c.err}};
    else
        j["p_c_exp"] = nullptr;
    return j;
}

inline AnalyzeOutputs cmd_analyze(const std::string& events_csv, const std::string& range_csv,
                                  RunConfig cfg, const std::string& out_dir) {
    detail::ensure_out_dir(out_dir);
    cfg.range_file = range_csv;
    cfg.use_geometry = false;
    PassData pass = load_pass(cfg);
    const auto events = read_events_csv(events_csv);

    AnalyzeOutputs out;
    out.products = run_analysis(events, pass.ptrack, cfg);

    out.histogram_csv = detail::join_path(out_dir, "histogram.csv");
    write_histogram_csv(out.histogram_csv, out.products.hist);
    out.fit_json = detail::join_path(out_dir, "fit.json");
    write_json_file(out.fit_json, analysis_fit_json(out.products, cfg));

    if (out.products.have_visibility) {
        ordered_json vj = visibility_report_json(out.products.vis);
        if (out.products.have_two_param) {
            vj["two_param"] = ordered_json{
                {"v", out.products.two_param.v},
                {"v_err", out.products.two_param.v_err},
                {"phase_offset_rad", out.products.two_param.phase_offset_rad},
                {"phase_offset_err_rad", out.products.two_param.phase_offset_err_rad},
                {"converged", out.products.two_param.converged}};
        } else {
            vj["two_param"] = nullptr;
        }
        out.visibility_json = detail::join_path(out_dir, "visibility.json");
        write_json_file(out.visibility_json, vj);
        out.visibility_csv = detail::join_path(out_dir, "visibility.csv");
        write_visibility_csv(out.visibility_csv, out.products.vis);
    }
    return out;
}

struct OracleRow {
    double beta;
    double p_closed;
    double p_quadrature;
    double abs_diff;
};

struct OracleOutputs {
    std::string table_csv;
    std::vector<OracleRow> rows;
    double max_diff = 0.0;
    bool ok = true;
};

inline OracleOutputs cmd_oracle(const OpticalConfig& optical, const std::vector<double>& betas,
                                double tolerance, const std::string& out_dir) {
    if (betas.empty()) throw validation_error("oracle: need at least one beta");
    detail::ensure_out_dir(out_dir);
    OracleOutputs out;
    std::string text = "beta,p_c_closed,p_c_quadrature,abs_diff\n";
    for (double beta : betas) {
        OracleRow row;
        row.beta = beta;
        row.p_closed = p_central_closed_form(beta, optical);
        row.p_quadrature = p_central_quadrature(beta, optical);
        row.abs_diff = std::abs(row.p_closed - row.p_quadrature);
        out.max_diff = std::max(out.max_diff, row.abs_diff);
        text += detail::fmt_sci(row.beta, 12);
        text += ',';
        text += detail::fmt_fixed(row.p_closed, 15);
        text += ',';
        text += detail::fmt_fixed(row.p_quadrature, 15);
        text += ',';
        text += detail::fmt_sci(row.abs_diff, 6);
        text += '\n';
        out.rows.push_back(row);
    }
    out.table_csv = detail::join_path(out_dir, "oracle.csv");
    detail::write_text_file(out.table_csv, text);
    out.ok = out.max_diff <= tolerance;
    return out;
}

/// report = analyze + a human-readable summary table.
struct ReportOutputs {
    AnalyzeOutputs analyze;
    std::string summary_txt;
    std::string summary_text;
};

inline std::string render_summary(const AnalysisProducts& prod, const RunConfig& cfg) {
    using detail::fmt_fixed;
    std::string s;
    auto line = [&](const std::string& k, const std::string& v) {
        s += k;
        if (k.size() < 22) s.append(22 - k.size(), ' ');
        s += v;
        s += '\n';
    };
    line("events in", std::to_string(prod.n_events_in));
    line("events used", std::to_string(prod.n_events_used) +
                            (cfg.analysis.select ? "  (phase " + phase_select_string(cfg.analysis) + ")"
                                                 : ""));
    line("histogram", std::to_string(prod.hist.counts.size()) + " bins x " +
                          fmt_fixed(prod.hist.bin_width_s * 1e9, 3) + " ns");
    const TriGaussFit& f = prod.fit;
    line("fit converged", std::string(f.converged ? "yes" : "NO") + "  (chi2 " +
                              fmt_fixed(f.chi2, 1) + ", " + std::to_string(f.iterations) +
                              " iterations)");
    line("peak centers / ns", fmt_fixed(f.centers_s[0] * 1e9, 3) + "  " +
                                  fmt_fixed(f.centers_s[1] * 1e9, 3) + "  " +
                                  fmt_fixed(f.centers_s[2] * 1e9, 3));
    line("peak sigma / ns", fmt_fixed(f.sigma_s * 1e9, 3));
    line("N central", fmt_fixed(f.n_central.value, 1) + " +- " + fmt_fixed(f.n_central.err, 1));
    line("N lateral", fmt_fixed(f.n_lateral.value, 1) + " +- " + fmt_fixed(f.n_lateral.err, 1));
    if (prod.have_p_c)
        line("P_c experimental", fmt_fixed(prod.p_c.value, 4) + " +- " + fmt_fixed(prod.p_c.err, 4));
    if (prod.have_visibility) {
        const VisibilityResult& v = prod.vis;
        line("visibility", fmt_fixed(v.v_exp, 4) + " +- " + fmt_fixed(v.v_exp_err, 4) + "  (raw " +
                               fmt_fixed(v.v_exp_raw, 4) + ", " + std::to_string(v.bins_used) +
                               "/10 bins, residual " + fmt_fixed(v.fit_residual, 2) + ")");
        if (prod.have_two_param)
            line("phase offset / rad",
                 fmt_fixed(prod.two_param.phase_offset_rad, 4) + " +- " +
                     fmt_fixed(prod.two_param.phase_offset_err_rad, 4) + "  (two-parameter check)");
    }
    return s;
}

inline ReportOutputs cmd_report(const std::string& events_csv, const std::string& range_csv,
                                const RunConfig& cfg, const std::string& out_dir) {
    ReportOutputs out;
    out.analyze = cmd_analyze(events_csv, range_csv, cfg, out_dir);
    out.summary_text = render_summary(out.analyze.products, cfg);
    out.summary_txt = detail::join_path(out_dir, "summary.txt");
    detail::write_text_file(out.summary_txt, out.summary_text);
    return out;
}

} // namespace satfringe
