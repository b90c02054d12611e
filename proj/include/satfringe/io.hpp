#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "histogram.hpp"
#include "peak_fit.hpp"
#include "photon_sim.hpp"
#include "ranging.hpp"
#include "visibility.hpp"

namespace satfringe {

// CSV and JSON serialization for every file the pipeline reads or writes.
//
// Event-scale time columns are nanoseconds with exactly 3 fractional digits:
// picosecond grain, 81x finer than the TDC quantum, so write -> read -> write
// is a fixed point and no rounded timestamp can cross a histogram bin edge
// (the fold origin is not a TDC multiple, so deltas never sit on one).
// Slow columns (range-track epochs, phase-track knots) keep their `t_s`
// seconds unit.  All formatting goes through std::to_chars and all parsing
// through std::from_chars: locale-independent, byte-stable across platforms
// and thread counts.

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt_fixed(double v, int precision) {
    std::array<char, 64> buf;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, precision);
    if (ec != std::errc())
        throw numerical_error("fmt_fixed: value not representable");
    return std::string(buf.data(), p);
}

inline std::string fmt_sci(double v, int precision) {
    std::array<char, 64> buf;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::scientific, precision);
    if (ec != std::errc())
        throw numerical_error("fmt_sci: value not representable");
    return std::string(buf.data(), p);
}

inline std::string fmt_ns(double t_s) { return fmt_fixed(t_s * 1e9, 3); }

/// Split one CSV line on commas.  The formats here are purely numeric plus a
/// bareword tag column, so no quoting or escaping is recognized.
inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] inline void row_error(const std::string& path, std::size_t lineno,
                                   const std::string& what) {
    std::ostringstream os;
    os << path << ":" << lineno << ": " << what;
    throw validation_error(os.str());
}

inline double parse_num(std::string_view field, const std::string& path,
                        std::size_t lineno, const char* column) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last)
        row_error(path, lineno,
                  "column '" + std::string(column) + "' is not a number: '" +
                      std::string(field) + "'");
    return v;
}

/// Reads lines, strips a trailing '\r', tracks 1-based line numbers.
struct CsvReader {
    std::ifstream in;
    std::string path;
    std::size_t lineno = 0;

    explicit CsvReader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw validation_error("cannot open file: " + p);
    }

    bool next(std::string& line) {
        if (!std::getline(in, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    void expect_header(std::string_view want) {
        std::string line;
        if (!next(line)) row_error(path, 1, "empty file, expected header '" + std::string(want) + "'");
        // Extra columns after the pinned ones are tolerated on ingest.
        if (line.substr(0, want.size()) != want ||
            (line.size() > want.size() && line[want.size()] != ','))
            row_error(path, lineno, "expected header '" + std::string(want) + "', got '" + line + "'");
    }
};

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot open file for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw validation_error("write failed: " + path);
}

} // namespace detail

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ---------------------------------------------------------------------------
// Content hashing (FNV-1a 64) for run manifests.

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

inline std::string file_content_hash(const std::string& path) {
    return hex64(fnv1a64(read_text_file(path)));
}

// ---------------------------------------------------------------------------
// Event files: `t_ref_ns,t_meas_ns,truth`.

inline void write_events_csv(const std::string& path,
                             const std::vector<DetectionEvent>& events) {
    std::string text = "t_ref_ns,t_meas_ns,truth\n";
    for (const auto& ev : events) {
        text += detail::fmt_ns(ev.t_ref_s);
        text += ',';
        text += detail::fmt_ns(ev.t_meas_s);
        text += ',';
        text += truth_tag_name(ev.truth);
        text += '\n';
    }
    detail::write_text_file(path, text);
}

/// The truth column is optional and its values are not trusted: anything but
/// the known tag names reads back as `background`.  Analysis never consumes
/// the tag either way, so a corrupted column cannot change any result.
inline std::vector<DetectionEvent> read_events_csv(const std::string& path) {
    detail::CsvReader r(path);
    r.expect_header("t_ref_ns,t_meas_ns");
    std::vector<DetectionEvent> out;
    std::string line;
    while (r.next(line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() < 2)
            detail::row_error(path, r.lineno, "expected at least 2 columns, got " +
                                                  std::to_string(fields.size()));
        const double t_ref_ns = detail::parse_num(fields[0], path, r.lineno, "t_ref_ns");
        const double t_meas_ns = detail::parse_num(fields[1], path, r.lineno, "t_meas_ns");
        TruthTag tag = TruthTag::background;
        if (fields.size() >= 3) {
            const std::string_view t = fields[2];
            if (t == "early") tag = TruthTag::early;
            else if (t == "central") tag = TruthTag::central;
            else if (t == "late") tag = TruthTag::late;
        }
        DetectionEvent ev;
        ev.t_ref_s = t_ref_ns * 1e-9;
        ev.t_meas_s = t_meas_ns * 1e-9;
        ev.delta_s = (t_meas_ns - t_ref_ns) * 1e-9; // subtract at ns scale: exact at ps grain
        ev.truth = tag;
        out.push_back(ev);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Range-track files: `t_s,roundtrip_m`, uniform cadence.

inline void write_range_csv(const std::string& path, const RangeTrack& track) {
    std::string text = "t_s,roundtrip_m\n";
    for (std::size_t k = 0; k < track.size(); ++k) {
        text += detail::fmt_fixed(track.time_at(k), 6);
        text += ',';
        text += detail::fmt_fixed(track.samples_m[k], 6);
        text += '\n';
    }
    detail::write_text_file(path, text);
}

/// Cadence is inferred as the median of consecutive time differences; every
/// difference must agree with it within 1% (RangeTrack stores a single
/// cadence, so a genuinely non-uniform file is not representable).
inline RangeTrack read_range_csv(const std::string& path) {
    detail::CsvReader r(path);
    r.expect_header("t_s,roundtrip_m");
    std::vector<double> ts, ranges;
    std::string line;
    while (r.next(line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 2)
            detail::row_error(path, r.lineno, "expected 2 columns, got " +
                                                  std::to_string(fields.size()));
        ts.push_back(detail::parse_num(fields[0], path, r.lineno, "t_s"));
        ranges.push_back(detail::parse_num(fields[1], path, r.lineno, "roundtrip_m"));
        if (ts.size() >= 2 && !(ts[ts.size() - 2] < ts.back()))
            detail::row_error(path, r.lineno, "t_s must be strictly increasing");
    }
    if (ts.size() < 2)
        throw validation_error(path + ": need at least 2 range samples");

    std::vector<double> dts(ts.size() - 1);
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) dts[k] = ts[k + 1] - ts[k];
    std::vector<double> sorted = dts;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                     sorted.end());
    const double cadence = sorted[sorted.size() / 2];
    for (std::size_t k = 0; k < dts.size(); ++k) {
        if (std::abs(dts[k] - cadence) > 0.01 * cadence)
            detail::row_error(path, k + 3, // header + first row of the offending pair
                              "cadence deviates more than 1% from median " +
                                  detail::fmt_fixed(cadence, 6) + " s");
    }

    RangeTrack track;
    track.epoch_s = ts.front();
    track.cadence_s = cadence;
    track.samples_m = std::move(ranges);
    track.validate();
    return track;
}

// ---------------------------------------------------------------------------
// Analysis products.

inline void write_histogram_csv(const std::string& path, const DeltaHistogram& hist) {
    std::string text = "bin_left_ns,count\n";
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
        text += detail::fmt_ns(hist.bin_left(k));
        text += ',';
        text += std::to_string(hist.counts[k]);
        text += '\n';
    }
    detail::write_text_file(path, text);
}

/// Phase-track prediction, one row per kinematic knot.
inline void write_phase_track_csv(const std::string& path, const PhaseTrack& pt) {
    std::string text = "t_s,beta,phi_rad_unwrapped,visibility,p_c\n";
    for (std::size_t k = 0; k < pt.size(); ++k) {
        const KinematicSample& s = pt.kinematics[k];
        text += detail::fmt_fixed(s.t_s, 6);
        text += ',';
        text += detail::fmt_sci(s.beta, 12);
        text += ',';
        text += detail::fmt_fixed(s.phase_rad, 9);
        text += ',';
        text += detail::fmt_fixed(s.visibility, 9);
        text += ',';
        text += detail::fmt_fixed(s.p_central, 9);
        text += '\n';
    }
    detail::write_text_file(path, text);
}

/// Plot-ready interference fringe: P_c vs phase for every usable bin, plus a
/// wrap row repeating bin 0 at phase + 2pi so the fringe closes visually.
inline void write_visibility_csv(const std::string& path, const VisibilityResult& vis) {
    std::string text = "phi_rad,p_c,p_c_err\n";
    auto row = [&](double phi, const PhaseBinResult& bin) {
        text += detail::fmt_fixed(phi, 6);
        text += ',';
        text += detail::fmt_fixed(bin.p_c, 6);
        text += ',';
        text += detail::fmt_fixed(bin.p_c_err, 6);
        text += '\n';
    };
    for (const auto& bin : vis.bins)
        if (bin.usable) row(bin.mean_phase_rad, bin);
    if (vis.bins[0].usable) row(vis.bins[0].mean_phase_rad + two_pi, vis.bins[0]);
    detail::write_text_file(path, text);
}

inline ordered_json count_estimate_json(const CountEstimate& c) {
    return ordered_json{{"value", c.value},
                        {"err", c.err},
                        {"err_poisson", c.err_poisson},
                        {"err_cov", c.err_cov},
                        {"err_combined", c.err_combined}};
}

inline ordered_json fit_report_json(const TriGaussFit& fit) {
    ordered_json j;
    j["converged"] = fit.converged;
    j["degenerate"] = fit.degenerate;
    j["iterations"] = fit.iterations;
    j["chi2"] = fit.chi2;
    j["residual_norm"] = fit.residual_norm;
    j["n_bins"] = fit.n_bins;
    j["bin_width_ns"] = fit.bin_width_s * 1e9;
    j["centers_ns"] = {fit.centers_s[0] * 1e9, fit.centers_s[1] * 1e9, fit.centers_s[2] * 1e9};
    j["sigma_ns"] = fit.sigma_s * 1e9;
    j["amplitudes"] = {fit.amplitudes[0], fit.amplitudes[1], fit.amplitudes[2]};
    j["baseline"] = fit.baseline;
    j["n_central"] = count_estimate_json(fit.n_central);
    j["n_lateral"] = count_estimate_json(fit.n_lateral);
    ordered_json cov = ordered_json::array();
    for (const auto& row : fit.covariance) {
        ordered_json r = ordered_json::array();
        for (double v : row) r.push_back(v);
        cov.push_back(std::move(r));
    }
    j["covariance"] = std::move(cov);
    return j;
}

inline ordered_json visibility_report_json(const VisibilityResult& vis) {
    ordered_json j;
    j["v_exp"] = vis.v_exp;
    j["v_exp_err"] = vis.v_exp_err;
    j["v_exp_raw"] = vis.v_exp_raw;
    j["overshoot"] = vis.overshoot;
    j["fit_residual"] = vis.fit_residual;
    j["bins_used"] = vis.bins_used;
    ordered_json bins = ordered_json::array();
    for (std::size_t k = 0; k < vis.bins.size(); ++k) {
        const PhaseBinResult& b = vis.bins[k];
        ordered_json e;
        e["j"] = k;
        e["center_rad"] = b.center_rad;
        e["mean_phase_rad"] = b.mean_phase_rad;
        e["mean_cos"] = b.mean_cos;
        e["mean_sin"] = b.mean_sin;
        e["n_events"] = b.n_events;
        e["usable"] = b.usable;
        if (b.usable) { // NaN placeholders for skipped bins would dump as null anyway
            e["p_c"] = b.p_c;
            e["p_c_err"] = b.p_c_err;
        }
        bins.push_back(std::move(e));
    }
    j["bins"] = std::move(bins);
    return j;
}

inline void write_json_file(const std::string& path, const ordered_json& j) {
    detail::write_text_file(path, j.dump(2) + "\n");
}

} // namespace satfringe
