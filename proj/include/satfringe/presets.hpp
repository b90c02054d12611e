#pragma once

#include <array>
#include <string>
#include <string_view>

#include <json.hpp>

#include "optical.hpp"
#include "photon_sim.hpp"
#include "ranging.hpp"

namespace satfringe {

// Built-in satellite presets.  The instrument side (532 nm source, 3.4 ns
// interferometer delay, 100 MHz repetition, 0.27 receiver transmission,
// 0.5 ns detector jitter, 81 ps TDC) is common to all three; what changes per
// satellite is the link budget (mean received photon number mu), the net
// fringe visibility of its corner-cube return, and the pass envelope.
//
// The acquisition plan transmits a short qubit slot once per 0.1 s ranging
// cycle.  Slot counts are tuned to the statistics the analysis chain is
// specified against: beacon-c's 395 x 0.3 ms slots put the expected
// lateral-peak count of a constructive-phase selection at ~112 events, and
// the other two presets give the visibility estimator a standard error
// comfortably inside its acceptance tolerance (about 0.06 for stella, 0.025 for
// ajisai).

struct SatellitePreset {
    const char* name;
    double altitude_m;
    double min_range_m;      // range at closest approach
    double max_range_m;      // acquisition cutoff range
    double pass_duration_s;  // generated track length cap
    double mu_received;      // mean photon number per pulse at the telescope
    double visibility_target;
    double acq_span_s;       // qubit slots cover this span around closest approach
    double slot_length_s;    // active transmission per ranging cycle
    const char* note;
};

inline const std::array<SatellitePreset, 3>& builtin_presets() {
    static const std::array<SatellitePreset, 3> table{{
        {"beacon-c", 1.00e6, 1.20e6, 1.50e6, 120.0, 7e-4, 0.67, 39.5, 3.0e-4,
         "weakest link; slots sized so a constructive-phase selection "
         "collects ~112 lateral-peak events"},
        {"stella", 0.81e6, 1.10e6, 1.50e6, 120.0, 9e-4, 0.53, 50.0, 3.0e-4,
         "intermediate link budget, lowest orbit of the three"},
        {"ajisai", 1.49e6, 1.60e6, 2.50e6, 200.0, 2e-3, 0.38, 150.0, 3.0e-4,
         "brightest return and longest pass; tightest visibility error"},
    }};
    return table;
}

inline const SatellitePreset& find_preset(std::string_view name) {
    for (const auto& p : builtin_presets())
        if (name == p.name) return p;
    std::string known;
    for (const auto& p : builtin_presets()) {
        if (!known.empty()) known += ", ";
        known += p.name;
    }
    throw validation_error("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

inline OpticalConfig preset_optical() { return OpticalConfig{}; }

inline LinkModel preset_link(const SatellitePreset& p) {
    LinkModel link;
    link.mu_received = p.mu_received;
    link.eta_optics = 0.27;
    link.detector_efficiency = 1.0;
    return link;
}

inline DetectorModel preset_detector() { return DetectorModel{}; }

inline PassGeometry preset_geometry(const SatellitePreset& p) {
    PassGeometry g;
    g.altitude_m = p.altitude_m;
    g.min_range_m = p.min_range_m;
    g.max_range_m = p.max_range_m;
    g.duration_s = p.pass_duration_s;
    g.max_radial_speed_mps = 6000.0;
    return g;
}

/// Machine-readable dump of every preset value plus the shared instrument
/// parameters, so scripts never have to hard-code the table above.
inline nlohmann::ordered_json presets_json() {
    nlohmann::ordered_json shared;
    const OpticalConfig opt = preset_optical();
    const DetectorModel det = preset_detector();
    shared["wavelength_vacuum_m"] = opt.wavelength_vacuum_m;
    shared["coherence_time_s"] = opt.coherence_time_s;
    shared["mzi_delay_s"] = opt.mzi_delay_s;
    shared["rep_period_s"] = opt.rep_period_s;
    shared["eta_optics"] = 0.27;
    shared["detector_efficiency"] = 1.0;
    shared["jitter_sigma_s"] = det.jitter_sigma_s;
    shared["tdc_resolution_s"] = det.tdc_resolution_s;
    shared["ranging_cadence_s"] = 0.1;
    shared["slot_period_s"] = 0.1;
    shared["max_radial_speed_mps"] = 6000.0;

    nlohmann::ordered_json sats = nlohmann::ordered_json::array();
    for (const auto& p : builtin_presets()) {
        nlohmann::ordered_json e;
        e["name"] = p.name;
        e["altitude_m"] = p.altitude_m;
        e["min_range_m"] = p.min_range_m;
        e["max_range_m"] = p.max_range_m;
        e["pass_duration_s"] = p.pass_duration_s;
        e["mu_received"] = p.mu_received;
        e["visibility_target"] = p.visibility_target;
        e["acq_span_s"] = p.acq_span_s;
        e["slot_length_s"] = p.slot_length_s;
        e["note"] = p.note;
        sats.push_back(std::move(e));
    }

    nlohmann::ordered_json j;
    j["shared"] = std::move(shared);
    j["presets"] = std::move(sats);
    return j;
}

} // namespace satfringe
