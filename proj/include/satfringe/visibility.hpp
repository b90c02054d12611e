#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "histogram.hpp"
#include "levmar.hpp"
#include "optical.hpp"
#include "peak_fit.hpp"
#include "photon_sim.hpp"

namespace satfringe {

// Phase-binned visibility recovery: ten half-overlapping phase intervals
// I_j = [(j-1)pi/5, (j+1)pi/5) with centers j*pi/5, j = 0..9 (each phase
// belongs to exactly two intervals); a three-peak fit per interval gives
// P_c(phi_j), and a one-parameter weighted least squares against
// P = (1 - V cos phi)/2 yields the visibility.  The phase offset is not a
// parameter: the kinematic prediction pins it.

struct PhaseBinResult {
    double center_rad = 0.0;     // j*pi/5
    double mean_phase_rad = 0.0; // circular mean of member event phases
    double mean_cos = 0.0;       // mean cos(phi) over members: the fit abscissa
    double mean_sin = 0.0;
    double p_c = std::numeric_limits<double>::quiet_NaN();
    double p_c_err = 0.0;
    std::uint64_t n_events = 0;
    bool usable = false; // enough events and a converged peak fit
};

struct VisibilityOptions {
    double bin_width_s = default_fit_bin_s;
    std::uint64_t min_events = 30; // below this a bin is reported, not fitted
};

struct VisibilityResult {
    std::array<PhaseBinResult, 10> bins{};
    double v_exp = 0.0;        // clamped into [0, 1.05]
    double v_exp_err = 0.0;
    double v_exp_raw = 0.0;    // unclamped least-squares value
    bool overshoot = false;    // raw value above 1
    double fit_residual = 0.0; // sqrt(weighted chi^2) of the cosine fit
    int bins_used = 0;
};

namespace detail {
inline double wrap_pm_pi(double x) { return std::remainder(x, two_pi); }
} // namespace detail

/// Event indices selected by each phase interval.  Intervals half-overlap, so
/// every event lands in exactly two of the ten bins (membership is half-open
/// at the upper edge: wrap(phi - c_j) in [-pi/5, pi/5)).
inline std::array<std::vector<std::size_t>, 10>
phase_bin_membership(const std::vector<TaggedEvent>& tagged) {
    std::array<std::vector<std::size_t>, 10> out;
    const double half = pi / 5.0;
    for (int j = 0; j < 10; ++j) {
        const double c = static_cast<double>(j) * half;
        auto& idx = out[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < tagged.size(); ++i) {
            const double w = detail::wrap_pm_pi(tagged[i].phase_rad - c);
            if (w >= -half && w < half) idx.push_back(i);
        }
    }
    return out;
}

inline VisibilityResult phase_binned_analysis(const std::vector<TaggedEvent>& tagged,
                                              const OpticalConfig& cfg,
                                              const VisibilityOptions& opt = {}) {
    cfg.validate();
    if (!(opt.bin_width_s > 0.0))
        throw validation_error("phase_binned_analysis: bin width must be positive");

    VisibilityResult out;
    const double half = pi / 5.0; // interval half-width = center spacing
    const auto membership = phase_bin_membership(tagged);

    for (int j = 0; j < 10; ++j) {
        auto& bin = out.bins[static_cast<std::size_t>(j)];
        const double c = static_cast<double>(j) * half;
        bin.center_rad = c;

        std::vector<DetectionEvent> member;
        double wrap_sum = 0.0, cos_sum = 0.0, sin_sum = 0.0;
        for (const auto i : membership[static_cast<std::size_t>(j)]) {
            member.push_back(tagged[i].event);
            wrap_sum += detail::wrap_pm_pi(tagged[i].phase_rad - c);
            cos_sum += std::cos(tagged[i].phase_rad);
            sin_sum += std::sin(tagged[i].phase_rad);
        }
        bin.n_events = member.size();
        const double n = static_cast<double>(member.size());
        bin.mean_phase_rad = member.empty() ? c : c + wrap_sum / n;
        bin.mean_cos = member.empty() ? std::cos(c) : cos_sum / n;
        bin.mean_sin = member.empty() ? std::sin(c) : sin_sum / n;
        if (member.size() < opt.min_events) continue;

        TriGaussFit fit;
        try {
            fit = fit_tri_gaussian(build_histogram(member, opt.bin_width_s, cfg.rep_period_s),
                                   cfg.mzi_delay_s);
        } catch (const fit_refused&) {
            continue;
        }
        if (!fit.converged || !(fit.n_lateral.value > 0.0)) continue;
        const auto p = p_c_experimental(fit);
        if (!(p.err > 0.0)) continue; // singular covariance, no usable weight
        bin.p_c = p.value;
        bin.p_c_err = p.err;
        bin.usable = true;
    }

    // Closed-form weighted LS for the slope of (1/2 - P) = (V/2) <cos phi>.
    // The abscissa is the member-mean cosine, not the cosine of the mean
    // phase: E[P | interval] = (1 - V E[cos phi | interval])/2 exactly, so
    // this stays unbiased under the finite pi/5 interval half-width (cosine
    // of the mean would attenuate V by sinc(pi/5) ~ 6.5%).
    double sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (const auto& bin : out.bins) {
        if (!bin.usable) continue;
        const double x = bin.mean_cos;
        const double w = 1.0 / (bin.p_c_err * bin.p_c_err);
        sxx += w * x * x;
        sxy += w * x * (0.5 - bin.p_c);
        ++used;
    }
    out.bins_used = used;
    if (used < 3) {
        std::ostringstream os;
        os << "phase_binned_analysis: only " << used
           << " usable phase bin(s), need at least 3 to fit visibility";
        throw fit_refused(os.str());
    }
    if (!(sxx > 0.0))
        throw fit_refused("phase_binned_analysis: no cosine leverage (sum w cos^2 = 0)");

    out.v_exp_raw = 2.0 * sxy / sxx;
    out.v_exp_err = 2.0 / std::sqrt(sxx);
    out.overshoot = out.v_exp_raw > 1.0;
    out.v_exp = std::clamp(out.v_exp_raw, 0.0, 1.05);

    double chi2 = 0.0;
    for (const auto& bin : out.bins) {
        if (!bin.usable) continue;
        const double model = 0.5 * (1.0 - out.v_exp_raw * bin.mean_cos);
        const double r = bin.p_c - model;
        chi2 += r * r / (bin.p_c_err * bin.p_c_err);
    }
    out.fit_residual = std::sqrt(chi2);
    return out;
}

/// Pipeline form: tag raw events on the phase track first.
inline VisibilityResult phase_binned_analysis(const std::vector<DetectionEvent>& events,
                                              const PhaseTrack& ptrack,
                                              const OpticalConfig& cfg,
                                              const VisibilityOptions& opt = {}) {
    return phase_binned_analysis(event_phase_tag(events, ptrack), cfg, opt);
}

struct TwoParamVisibility {
    double v = 0.0;
    double v_err = 0.0;
    double phase_offset_rad = 0.0;
    double phase_offset_err_rad = 0.0;
    bool converged = false;
};

/// Diagnostic two-parameter variant P = (1 - V cos(phi - phi0))/2.  Not part
/// of the replication pipeline (the one-parameter fit above is the
/// measurement); useful for spotting a systematic phase-prediction offset.
/// cos(phi - phi0) averages over an interval to <cos phi> cos(phi0) +
/// <sin phi> sin(phi0), so the fit runs on the per-bin mean cosine/sine pair
/// and stays free of interval-width attenuation like the main fit.
inline TwoParamVisibility visibility_fit_two_param(const VisibilityResult& vis) {
    std::vector<double> idx, ys, ws, xc, xsn;
    for (const auto& bin : vis.bins) {
        if (!bin.usable) continue;
        idx.push_back(static_cast<double>(xc.size()));
        xc.push_back(bin.mean_cos);
        xsn.push_back(bin.mean_sin);
        ys.push_back(bin.p_c);
        ws.push_back(1.0 / (bin.p_c_err * bin.p_c_err));
    }
    if (idx.size() < 3)
        throw fit_refused("visibility_fit_two_param: fewer than 3 usable bins");

    auto model = [&](double x, const std::array<double, 2>& p, std::array<double, 2>& g) {
        const std::size_t k = static_cast<std::size_t>(x);
        const double c = xc[k] * std::cos(p[1]) + xsn[k] * std::sin(p[1]);
        g[0] = -0.5 * c;
        g[1] = -0.5 * p[0] * (-xc[k] * std::sin(p[1]) + xsn[k] * std::cos(p[1]));
        return 0.5 * (1.0 - p[0] * c);
    };
    auto clamp = [](std::array<double, 2>& p) {
        p[0] = std::clamp(p[0], 0.0, 1.05);
        p[1] = detail::wrap_pm_pi(p[1]);
    };
    const std::array<double, 2> p0{std::clamp(vis.v_exp_raw, 0.0, 1.05), 0.0};
    const auto res = levmar_fit<2>(model, clamp, idx, ys, ws, p0);

    TwoParamVisibility out;
    out.v = res.params[0];
    out.phase_offset_rad = res.params[1];
    out.converged = res.converged;
    if (res.covariance_ok) {
        out.v_err = std::sqrt(std::max(res.covariance[0][0], 0.0));
        out.phase_offset_err_rad = std::sqrt(std::max(res.covariance[1][1], 0.0));
    }
    return out;
}

} // namespace satfringe
