#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "kinematics.hpp"
#include "optical.hpp"
#include "ranging.hpp"
#include "rng.hpp"

namespace satfringe {

struct LinkModel {
    double mu_received = 7e-4;       // mean photon number per pulse at the telescope
    double eta_optics = 0.27;        // receiver optical transmission
    double detector_efficiency = 1.0;

    double throughput() const { return mu_received * eta_optics * detector_efficiency; }
    /// Multi-photon contamination mu^2 eta / 2 stops being negligible here.
    bool multi_photon_regime() const { return mu_received * eta_optics > 0.1; }

    void validate() const {
        if (!(mu_received >= 0.0))
            throw validation_error("LinkModel: mu_received must be non-negative");
        if (!(eta_optics > 0.0) || eta_optics > 1.0)
            throw validation_error("LinkModel: eta_optics must be in (0, 1]");
        if (!(detector_efficiency > 0.0) || detector_efficiency > 1.0)
            throw validation_error("LinkModel: detector_efficiency must be in (0, 1]");
    }
};

struct DetectorModel {
    double jitter_sigma_s = 0.5e-9;
    double tdc_resolution_s = 81e-12;
    double background_rate_hz = 0.0;

    void validate() const {
        if (!(jitter_sigma_s >= 0.0))
            throw validation_error("DetectorModel: jitter_sigma must be non-negative");
        if (!(tdc_resolution_s > 0.0))
            throw validation_error("DetectorModel: tdc_resolution must be positive");
        if (!(background_rate_hz >= 0.0))
            throw validation_error("DetectorModel: background_rate must be non-negative");
    }
};

enum class TruthTag : std::uint8_t { early, central, late, background };

inline const char* truth_tag_name(TruthTag t) {
    switch (t) {
        case TruthTag::early: return "early";
        case TruthTag::central: return "central";
        case TruthTag::late: return "late";
        default: return "background";
    }
}

struct DetectionEvent {
    double t_ref_s;  // nearest transmitted-pulse epoch after windowing
    double t_meas_s; // TDC-quantized detection epoch
    double delta_s;  // t_meas - t_ref, in [-rep/2, rep/2]
    TruthTag truth;  // simulator-only ground truth; analysis never reads it
};

struct EpochWindow {
    double t_start_s;
    double t_end_s;
};

namespace detail {

inline double quantize_tdc(double t, double resolution) {
    return static_cast<double>(std::llround(t / resolution)) * resolution;
}

inline DetectionEvent anchor_event(double t_meas, double rep_period, TruthTag tag) {
    const double t_ref = static_cast<double>(std::llround(t_meas / rep_period)) * rep_period;
    return {t_ref, t_meas, t_meas - t_ref, tag};
}

} // namespace detail

/// Monte Carlo transmit/detect loop over the pulse grid inside `window`.
///
/// Per pulse k (epoch k*rep): detection fires with probability
/// throughput * (1/8 + 1/4(1 - V_eff cos phi) + 1/8), the peak is drawn
/// proportionally to those weights, and the timestamp gets the
/// Doppler-stretched peak offset, Gaussian jitter and TDC quantization.
/// Implemented by thinning: geometric skips at the cap rate 3/4*throughput,
/// then per-candidate acceptance, so runtime scales with detections, not
/// pulses.  Work is split into fixed 65536-pulse blocks, each with its own
/// derived RNG stream; the result is byte-identical for any thread count.
inline std::vector<DetectionEvent> simulate_pass(const PhaseTrack& ptrack,
                                                 const OpticalConfig& cfg,
                                                 const LinkModel& link,
                                                 const DetectorModel& det,
                                                 double vis_degradation,
                                                 EpochWindow window,
                                                 std::uint64_t seed,
                                                 int n_threads = 1) {
    cfg.validate();
    link.validate();
    det.validate();
    if (!(vis_degradation >= 0.0) || vis_degradation > 1.0)
        throw validation_error("simulate_pass: vis_degradation must be in [0, 1]");
    if (ptrack.size() == 0) throw validation_error("simulate_pass: empty phase track");
    if (!(window.t_start_s <= window.t_end_s) || window.t_start_s < ptrack.t_first() ||
        window.t_end_s > ptrack.t_last())
        throw validation_error("simulate_pass: window must lie within the phase-track span");

    const double rep = cfg.rep_period_s;
    std::int64_t k_lo = static_cast<std::int64_t>(std::ceil(window.t_start_s / rep));
    std::int64_t k_hi = static_cast<std::int64_t>(std::floor(window.t_end_s / rep));
    while (static_cast<double>(k_lo) * rep < window.t_start_s) ++k_lo;
    while (static_cast<double>(k_hi) * rep > window.t_end_s) --k_hi;
    if (k_hi < k_lo) throw validation_error("simulate_pass: window contains no pulses");

    const double p_cap = 0.75 * link.throughput(); // w_early + w_central + w_late <= 3/4
    constexpr std::int64_t block_pulses = 65536;
    const std::int64_t b_lo = k_lo / block_pulses;
    const std::int64_t b_hi = k_hi / block_pulses;
    const std::size_t n_blocks = static_cast<std::size_t>(b_hi - b_lo + 1);

    std::vector<std::vector<DetectionEvent>> per_block(n_blocks);
    auto run_block = [&](std::int64_t b, std::vector<DetectionEvent>& out) {
        const std::int64_t first = std::max(k_lo, b * block_pulses);
        const std::int64_t last = std::min(k_hi, (b + 1) * block_pulses - 1);

        std::vector<DetectionEvent> signal;
        if (p_cap > 0.0) {
            RandomStream rng(seed, static_cast<std::uint64_t>(b), /*salt=*/0);
            std::int64_t k = first;
            while (true) {
                const std::uint64_t skip = rng.geometric_skip(p_cap);
                if (skip > static_cast<std::uint64_t>(last - k)) break;
                k += static_cast<std::int64_t>(skip);
                const double t_pulse = static_cast<double>(k) * rep;
                const KinematicSample kin = phase_at(ptrack, t_pulse);
                const double v_eff = kin.visibility * vis_degradation;
                const double w_central = 0.25 * (1.0 - v_eff * std::cos(kin.phase_rad));
                const double w_sum = 0.25 + w_central;
                const double u_accept = rng.uniform();
                const double u_peak = rng.uniform();
                const double jitter = det.jitter_sigma_s * rng.normal();
                if (u_accept * 0.75 < w_sum) {
                    TruthTag tag;
                    double offsets;
                    const double dt_prime = doppler_stretch(cfg.mzi_delay_s, kin.beta);
                    const double pick = u_peak * w_sum;
                    if (pick < 0.125) {
                        tag = TruthTag::early;
                        offsets = 0.0;
                    } else if (pick < 0.125 + w_central) {
                        tag = TruthTag::central;
                        offsets = dt_prime;
                    } else {
                        tag = TruthTag::late;
                        offsets = 2.0 * dt_prime;
                    }
                    const double t_meas =
                        detail::quantize_tdc(t_pulse + offsets + jitter, det.tdc_resolution_s);
                    signal.push_back(detail::anchor_event(t_meas, rep, tag));
                }
                if (k == last) break;
                ++k;
            }
        }

        std::vector<DetectionEvent> dark;
        if (det.background_rate_hz > 0.0) {
            // Independent per-block Poisson process; the exponential restart
            // at each block edge is exact by memorylessness.
            RandomStream rng(seed, static_cast<std::uint64_t>(b), /*salt=*/1);
            const double t0 = static_cast<double>(first) * rep;
            const double t1 = (static_cast<double>(last) + 1.0) * rep;
            double t = t0 + rng.exponential(det.background_rate_hz);
            while (t < t1) {
                const double t_meas = detail::quantize_tdc(t, det.tdc_resolution_s);
                dark.push_back(detail::anchor_event(t_meas, rep, TruthTag::background));
                t += rng.exponential(det.background_rate_hz);
            }
        }

        out.clear();
        out.reserve(signal.size() + dark.size());
        std::merge(signal.begin(), signal.end(), dark.begin(), dark.end(),
                   std::back_inserter(out), [](const DetectionEvent& a, const DetectionEvent& b2) {
                       if (a.t_meas_s != b2.t_meas_s) return a.t_meas_s < b2.t_meas_s;
                       return a.truth < b2.truth; // signal sorts before background on ties
                   });
    };

    const int threads = std::clamp(n_threads, 1, 256);
    if (threads == 1 || n_blocks == 1) {
        for (std::size_t i = 0; i < n_blocks; ++i) run_block(b_lo + static_cast<std::int64_t>(i), per_block[i]);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (n_blocks + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
        for (int w = 0; w < threads; ++w) {
            const std::size_t lo = static_cast<std::size_t>(w) * chunk;
            if (lo >= n_blocks) break;
            const std::size_t hi = std::min(n_blocks, lo + chunk);
            pool.emplace_back([&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i)
                    run_block(b_lo + static_cast<std::int64_t>(i), per_block[i]);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<DetectionEvent> events;
    std::size_t total = 0;
    for (const auto& blk : per_block) total += blk.size();
    events.reserve(total);
    for (const auto& blk : per_block) events.insert(events.end(), blk.begin(), blk.end());
    return events;
}

struct TaggedEvent {
    DetectionEvent event;
    double phase_rad; // phi(t_ref) mod 2*pi, in [0, 2*pi)
};

/// Attach the wrapped kinematic phase at each event's reference epoch.
inline std::vector<TaggedEvent> event_phase_tag(const std::vector<DetectionEvent>& events,
                                                const PhaseTrack& ptrack) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const double t = events[i].t_ref_s;
        if (!(t >= ptrack.t_first()) || !(t <= ptrack.t_last())) bad.push_back(i);
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os << "event_phase_tag: " << bad.size() << " event(s) outside track span, indices:";
        for (std::size_t i = 0; i < bad.size() && i < 10; ++i) os << ' ' << bad[i];
        if (bad.size() > 10) os << " ...";
        throw std::out_of_range(os.str());
    }
    std::vector<TaggedEvent> out;
    out.reserve(events.size());
    for (const auto& ev : events) {
        const KinematicSample kin = phase_at(ptrack, ev.t_ref_s);
        double w = std::fmod(kin.phase_rad, two_pi);
        if (w < 0.0) w += two_pi;
        if (w >= two_pi) w = 0.0;
        out.push_back({ev, w});
    }
    return out;
}

} // namespace satfringe
